#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>

#include "dnode/adf.hpp"
#include "dnode/eda.hpp"
#include "dnode/errors.hpp"
#include "dnode/experiment.hpp"
#include "dnode/fft.hpp"
#include "dnode/rng.hpp"
#include "oracles.hpp"

using namespace dnode;

TEST_CASE("dft matches the direct DFT (pow2 and Bluestein paths)") {
    Rng rng(3);
    for (std::size_t n : {8u, 16u, 12u, 37u, 100u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = rng.normal();
        const auto fast = dft(x);
        const auto slow = oracles::dft_direct(x);
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(fast[k].real() == doctest::Approx(slow[k].real()).epsilon(1e-9));
            CHECK(fast[k].imag() == doctest::Approx(slow[k].imag()).epsilon(1e-9));
        }
    }
}

TEST_CASE("forecastability: pure sinusoid at one bin is 1") {
    for (std::size_t n : {512u, 480u}) { // power of two and Bluestein
        std::vector<double> x(n);
        for (std::size_t t = 0; t < n; ++t) {
            x[t] = std::sin(2.0 * M_PI * 5.0 * static_cast<double>(t) / static_cast<double>(n));
        }
        CHECK(forecastability(x) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("forecastability: constant series returns 0") {
    std::vector<double> c(64, 3.0);
    CHECK(forecastability(c) == 0.0);
}

TEST_CASE("forecastability: white noise matches the oracle and sits near 0") {
    Rng rng(101);
    std::vector<double> x(4096);
    for (auto& v : x) v = rng.normal();
    const double impl = forecastability(x);
    const double oracle = oracles::forecastability_direct(x);
    CHECK(impl == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(impl < 0.15);
}

TEST_CASE("forecastability: scale invariance") {
    Rng rng(6);
    std::vector<double> x(200);
    for (std::size_t t = 0; t < x.size(); ++t) {
        x[t] = std::sin(0.3 * static_cast<double>(t)) + 0.2 * rng.normal();
    }
    std::vector<double> scaled = x;
    for (auto& v : scaled) v *= 37.5;
    CHECK(forecastability(scaled) == doctest::Approx(forecastability(x)).epsilon(1e-12));
}

TEST_CASE("trend_slope") {
    CHECK(trend_slope(std::vector<double>{0, 1, 2, 3}) == doctest::Approx(1.0 / 1.5));
    CHECK(trend_slope(std::vector<double>{5, 5, 5, 5}) == doctest::Approx(0.0));
    // zero mean-absolute-value: raw slope comes back
    CHECK(trend_slope(std::vector<double>{0, 0, 0}) == doctest::Approx(0.0));
    // exact OLS on a noiseless line, scale adjusted
    std::vector<double> line(50);
    for (std::size_t i = 0; i < 50; ++i) line[i] = 2.0 * static_cast<double>(i) + 10.0;
    double mean_abs = 0.0;
    for (double v : line) mean_abs += v;
    mean_abs /= 50.0;
    CHECK(trend_slope(line) == doctest::Approx(2.0 / mean_abs));
}

TEST_CASE("acf_seasonal_ratio: exact sine gives 1, reversed at half period") {
    SynthSpec s;
    s.length = 1344; // 4 windows of length 336
    s.features = 2;
    s.period = 24;
    s.noise = 0.0;
    s.amplitude = 1.0;
    const Panel p = synth_generate(s);
    CHECK(acf_seasonal_ratio(p, 336, 25, 24) == doctest::Approx(1.0));
    CHECK(acf_seasonal_ratio(p, 336, 25, 12) == doctest::Approx(0.0));
}

TEST_CASE("acf_seasonal_ratio: iid noise stays under 10%, direct-ACF oracle agrees") {
    // 1000 window x feature slices of pure noise
    Panel p;
    Rng rng(2024);
    const std::size_t wl = 96;
    p.values = Matrix(wl * 250, 4);
    for (std::size_t i = 0; i < p.values.size(); ++i) p.values.data()[i] = rng.normal();
    p.timestamps.resize(p.values.rows());
    for (std::size_t i = 0; i < p.timestamps.size(); ++i) {
        p.timestamps[i] = static_cast<std::int64_t>(i);
    }
    p.feature_names = {"a", "b", "c", "d"};

    const double ratio = acf_seasonal_ratio(p, static_cast<int>(wl), 25, 12);
    CHECK(ratio <= 0.10);

    // independent oracle: direct ACF of the detrended slices
    const double bound = 1.96 / std::sqrt(static_cast<double>(wl));
    std::size_t seasonal = 0, total = 0;
    for (std::size_t f = 0; f < 4; ++f) {
        for (std::size_t w = 0; w < 250; ++w) {
            Matrix x(wl, 1);
            for (std::size_t i = 0; i < wl; ++i) x(i, 0) = p.values(w * wl + i, f);
            const Matrix trend = moving_average_trend(x, 25);
            std::vector<double> d(wl);
            for (std::size_t i = 0; i < wl; ++i) d[i] = x(i, 0) - trend(i, 0);
            double mean = 0.0;
            for (double v : d) mean += v;
            mean /= static_cast<double>(wl);
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < wl; ++i) den += (d[i] - mean) * (d[i] - mean);
            for (std::size_t i = 0; i + 12 < wl; ++i) num += (d[i] - mean) * (d[i + 12] - mean);
            if (num / den > bound) ++seasonal;
            ++total;
        }
    }
    CHECK(ratio == doctest::Approx(static_cast<double>(seasonal) / static_cast<double>(total)));
}

TEST_CASE("adf_stationary_ratio: iid noise high, random walk low") {
    Rng rng(31);
    const std::size_t wl = 200;
    const std::size_t n_windows = 30;

    Panel noise;
    noise.values = Matrix(wl * n_windows, 1);
    for (std::size_t i = 0; i < noise.values.size(); ++i) noise.values.data()[i] = rng.normal();
    noise.timestamps.resize(noise.values.rows());
    noise.feature_names = {"x"};
    const auto r_noise = adf_stationary_ratio(noise, static_cast<int>(wl), 25, 12);
    CHECK(r_noise.ratio >= 0.9);
    CHECK(r_noise.p_values.size() == n_windows);

    // Pure random-walk windows, ADF applied to the windows themselves:
    // the unit root is almost never rejected.
    std::size_t rejected = 0;
    for (std::size_t w = 0; w < n_windows; ++w) {
        std::vector<double> window(wl);
        double acc = 0.0;
        for (auto& v : window) {
            acc += rng.normal();
            v = acc;
        }
        const AdfResult res = adf_test(window);
        if (res.stat < res.crit_5) ++rejected;
    }
    CHECK(static_cast<double>(rejected) / n_windows <= 0.2);

    // Routed through the decomposition the same walk is stationarized: the
    // moving-average detrend removes the wandering level, so the residual
    // ratio comes out high, not low.
    Panel walk;
    walk.values = Matrix(wl * n_windows, 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < walk.values.size(); ++i) {
        acc += rng.normal();
        walk.values.data()[i] = acc;
    }
    walk.timestamps.resize(walk.values.rows());
    walk.feature_names = {"x"};
    const auto r_walk = adf_stationary_ratio(walk, static_cast<int>(wl), 25, 12);
    CHECK(r_walk.ratio >= 0.8);
}

TEST_CASE("adf_stationary_ratio: invariant to adding a constant") {
    Rng rng(32);
    Panel p;
    p.values = Matrix(600, 1);
    for (std::size_t i = 0; i < p.values.size(); ++i) p.values.data()[i] = rng.normal();
    p.feature_names = {"x"};
    p.timestamps.resize(600);
    const auto base = adf_stationary_ratio(p, 200, 25, 12);
    for (std::size_t i = 0; i < p.values.size(); ++i) p.values.data()[i] += 500.0;
    const auto shifted = adf_stationary_ratio(p, 200, 25, 12);
    CHECK(base.ratio == doctest::Approx(shifted.ratio));
}

TEST_CASE("select_parameters: sine plus trend picks the true period") {
    SynthSpec s;
    s.length = 1200;
    s.features = 3;
    s.period = 24;
    s.amplitude = 1.0;
    s.noise = 0.1;
    s.trend_slope = 0.001;
    s.seed = 7;
    const Panel p = synth_generate(s);
    CandidateGrid grid;
    grid.kernel_sizes = {10, 25};
    grid.periods = {12, 24, 48};
    grid.window_length = 240;
    const EdaReport eda = select_parameters(p, grid);
    CHECK(eda.period == 24);
    CHECK(eda.use_seasonality);
    CHECK(eda.seasonality_ratio == doctest::Approx(1.0));
    // the winner is always a member of the grid
    CHECK((eda.kernel_size == 10 || eda.kernel_size == 25));

    CandidateGrid empty;
    empty.kernel_sizes.clear();
    CHECK_THROWS_AS(select_parameters(p, empty), EdaError);
}

TEST_CASE("detect_distribution_shift") {
    Rng rng(41);
    Panel train;
    train.values = Matrix(400, 2);
    for (std::size_t i = 0; i < train.values.size(); ++i) train.values.data()[i] = rng.normal();
    train.feature_names = {"a", "b"};
    train.timestamps.resize(400);

    Panel same = train;
    CHECK_FALSE(detect_distribution_shift(train, same, 25));

    Panel shifted = train;
    for (std::size_t i = 0; i < shifted.values.size(); ++i) shifted.values.data()[i] += 10.0;
    CHECK(detect_distribution_shift(train, shifted, 25));
}

TEST_CASE("eda ratios live in [0,1]") {
    SynthSpec s;
    s.length = 900;
    s.features = 2;
    s.noise = 0.4;
    s.seed = 9;
    const Panel p = synth_generate(s);
    CandidateGrid grid;
    grid.kernel_sizes = {10, 25};
    grid.periods = {12, 24};
    grid.window_length = 300;
    const EdaReport eda = select_parameters(p, grid);
    CHECK(eda.seasonality_ratio >= 0.0);
    CHECK(eda.seasonality_ratio <= 1.0);
    CHECK(eda.stationarity_ratio >= 0.0);
    CHECK(eda.stationarity_ratio <= 1.0);
    CHECK(eda.forecastability >= 0.0);
    CHECK(eda.forecastability <= 1.0);
}

// Only runs when the public ETT CSV is available (DNODE_DATA_ROOT or ./data);
// asserts the dataset-statistics row end to end.
TEST_CASE("ETTh1 statistics row (requires dataset)") {
    std::string path;
    std::vector<std::string> roots;
    if (const char* env = std::getenv("DNODE_DATA_ROOT")) roots.push_back(env);
    roots.push_back("data");
    roots.push_back("../data");
    for (const auto& root : roots) {
        const std::string candidate = root + "/ETTh1.csv";
        if (std::ifstream(candidate).good()) {
            path = candidate;
            break;
        }
    }
    if (path.empty()) {
        MESSAGE("ETTh1.csv not found, skipping");
        return;
    }
    const Panel panel = load_csv(path);
    REQUIRE(panel.n_features() == 7);
    REQUIRE(panel.n_steps() == 17420);

    const double f = panel_forecastability(panel);
    CHECK(f == doctest::Approx(0.148).epsilon(0.25)); // +-0.03 absolute
    CHECK(std::fabs(f - 0.148) < 0.03);

    const double slope = panel_trend_slope(panel);
    CHECK(slope < 0.0);
    CHECK(std::fabs(slope) > 1e-6);
    CHECK(std::fabs(slope) < 1e-4);

    CandidateGrid grid;
    grid.kernel_sizes = {10, 25, 50};
    grid.periods = {24, 48};
    grid.window_length = 336;
    grid.adf_window_length = 720;
    const EdaReport eda = select_parameters(panel, grid);
    CHECK(eda.kernel_size == 10);
    CHECK(eda.period == 48);
    CHECK(std::fabs(eda.seasonality_ratio - 0.9702) < 0.05);
    CHECK(eda.stationarity_ratio > 0.95);
    CHECK(eda.use_seasonality);

    const auto parts = split(panel, default_split(path));
    CHECK(detect_distribution_shift(parts[0], parts[2], eda.kernel_size));
}
