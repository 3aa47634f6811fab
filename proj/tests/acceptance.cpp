// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. The ETT reproduction criterion is skipped with a notice
// when the public CSVs are not present under DNODE_DATA_ROOT (or ./data).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "dnode/adf.hpp"
#include "dnode/experiment.hpp"
#include "dnode/fft.hpp"
#include "dnode/solver.hpp"
#include "oracles.hpp"

using namespace dnode;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    bool skipped = false;
    std::string detail;
};

double max_abs(const Vec& a, const Vec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

// ---------------------------------------------------------------- criterion 1
Outcome gradient_oracle() {
    Outcome out;
    Rng rng(90001);
    int instances = 0;
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t lookback = 4 + rep % 5;          // 4..8
        const std::size_t horizon = 2 + rep % 3;           // 2..4
        const std::size_t features = 1 + (rep + 1) % 3;    // 1..3
        const SolverMethod method = rep % 2 == 0 ? SolverMethod::Euler : SolverMethod::Rk4;
        const double lambda = rep % 4 < 2 ? 0.0 : 0.3;

        PipelineSpec spec;
        spec.use_decomposition = true;
        spec.decomp = {3, 2, true};
        spec.solver = {method, 2, 1.0};
        spec.channels.push_back({ChannelSource::Trend, true, true});
        spec.channels.push_back({ChannelSource::Seasonality, false, true});
        spec.channels.push_back({ChannelSource::Residual, true, true});

        Rng init(1000 + rep);
        PipelineModel model = init_pipeline_model(spec, lookback, horizon, init);
        const double scale = 0.5 / std::sqrt(static_cast<double>(lookback));
        for (auto& p : model.params) {
            for (std::size_t i = 0; i < p.w.size(); ++i) p.w.data()[i] = scale * init.normal();
            for (auto& b : p.dec_b) b = 0.1 * init.normal();
        }
        Matrix x(lookback, features), y(horizon, features);
        for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
        for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
        const EpsDraws eps = draw_eps(rng, model.params.size(), lookback);

        const BackwardResult bw = backward_window(model, x, y, lambda, lambda, eps);
        auto eval = [&] {
            const WindowForward fwd = forward_window(model, x, &eps);
            return loss(fwd.pred, y, fwd.stats, lambda, lambda);
        };
        auto check_tensor = [&](double* data, const double* grad, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) {
                const double fd = oracles::central_diff(eval, data[i]);
                const double denom = std::max({std::fabs(fd), std::fabs(grad[i]), 1e-3});
                worst = std::max(worst, std::fabs(fd - grad[i]) / denom);
            }
        };
        for (std::size_t c = 0; c < model.params.size(); ++c) {
            check_tensor(model.params[c].w.data(), bw.grads.channels[c].w.data(),
                         model.params[c].w.size());
            check_tensor(model.params[c].dec_w.data(), bw.grads.channels[c].dec_w.data(),
                         model.params[c].dec_w.size());
            check_tensor(model.params[c].dec_b.data(), bw.grads.channels[c].dec_b.data(),
                         model.params[c].dec_b.size());
        }
        ++instances;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d instances, worst relative error %.3g (tol 1e-4)",
                  instances, worst);
    out.detail = buf;
    out.pass = instances >= 20 && worst < 1e-4;
    return out;
}

// ---------------------------------------------------------------- criterion 2
Outcome solver_order() {
    Outcome out;
    Rng rng(90002);
    double euler_lo = 1e9, euler_hi = 0.0, rk4_lo = 1e9, rk4_hi = 0.0;
    for (int seed = 0; seed < 6; ++seed) {
        const std::size_t n = 6;
        const Matrix w = oracles::random_contraction(n, 0.9, rng);
        const Matrix target = oracles::expm(w);
        Vec z0(n);
        for (auto& v : z0) v = rng.normal();
        const Vec exact = oracles::apply(target, z0);
        ComponentParams p;
        p.w = w;
        p.dec_w = Matrix(n, n, 0.0);
        p.dec_b.assign(n, 0.0);
        auto euler_err = [&](int steps) {
            return max_abs(euler_integrate(p, z0, steps).z, exact);
        };
        auto rk4_err = [&](int steps) { return max_abs(rk4_integrate(p, z0, steps).z, exact); };
        for (int steps : {2, 4}) {
            const double fe = euler_err(steps) / euler_err(2 * steps);
            const double fr = rk4_err(steps) / rk4_err(2 * steps);
            euler_lo = std::min(euler_lo, fe);
            euler_hi = std::max(euler_hi, fe);
            rk4_lo = std::min(rk4_lo, fr);
            rk4_hi = std::max(rk4_hi, fr);
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "halving factors: euler [%.2f, %.2f] in [1.5,3], rk4 [%.1f, %.1f] in [8,32]",
                  euler_lo, euler_hi, rk4_lo, rk4_hi);
    out.detail = buf;
    out.pass = euler_lo >= 1.5 && euler_hi <= 3.0 && rk4_lo >= 8.0 && rk4_hi <= 32.0;
    return out;
}

// ---------------------------------------------------------------- criterion 3
Outcome generator_exponential() {
    Outcome out;
    Rng rng(90003);
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        const std::size_t n = 8;
        const Matrix gen = oracles::random_contraction(n, 1.0, rng);
        const Matrix w_target = oracles::expm(gen);
        Vec z0(n);
        for (auto& v : z0) v = rng.normal();
        ComponentParams p;
        p.w = gen;
        p.dec_w = Matrix(n, n, 0.0);
        p.dec_b.assign(n, 0.0);
        const SolveResult r = rk4_integrate(p, z0, 16);
        worst = std::max(worst, max_abs(r.z, oracles::apply(w_target, z0)));
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max abs error vs expm oracle %.3g (tol 1e-5)", worst);
    out.detail = buf;
    out.pass = worst < 1e-5;
    return out;
}

// ---------------------------------------------------------------- criterion 4
Outcome decomposition_exactness() {
    Outcome out;
    Rng rng(90004);
    double worst = 0.0;
    bool periodic_ok = true;
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t rows = 8 + rng.uniform_index(40);
        const std::size_t cols = 1 + rng.uniform_index(4);
        Matrix x(rows, cols);
        for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = 5.0 * rng.normal();
        for (int kernel : {2, 3, 10, 25}) {
            for (bool seasonal : {false, true}) {
                const int period = 2 + static_cast<int>(rng.uniform_index(rows - 2));
                const DecomposedWindow d = decompose(x, {kernel, period, seasonal});
                worst = std::max(worst, max_abs_diff(d.trend + d.seasonality + d.residual, x));
                if (seasonal) {
                    const auto p = static_cast<std::size_t>(period);
                    for (std::size_t i = 0; i + p < rows && periodic_ok; ++i) {
                        for (std::size_t j = 0; j < cols; ++j) {
                            if (d.seasonality(i, j) != d.seasonality(i + p, j)) {
                                periodic_ok = false;
                                break;
                            }
                        }
                    }
                }
            }
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max |T+S+R-X| = %.3g (tol 1e-9), tiling periodic: %s",
                  worst, periodic_ok ? "yes" : "no");
    out.detail = buf;
    out.pass = worst < 1e-9 && periodic_ok;
    return out;
}

// ---------------------------------------------------------------- criterion 5
Outcome norm_roundtrip() {
    Outcome out;
    Rng rng(90005);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t rows = 1 + rng.uniform_index(30);
        const std::size_t cols = 2 + rng.uniform_index(6);
        Matrix c(rows, cols);
        for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] = 3.0 * rng.normal() + 0.5;
        auto [normed, state] = normalize(c);
        worst = std::max(worst, max_abs_diff(denormalize(normed, state), c));
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max roundtrip error %.3g over 1000 matrices (tol 1e-9)",
                  worst);
    out.detail = buf;
    out.pass = worst < 1e-9;
    return out;
}

// ---------------------------------------------------------------- criterion 6
Outcome eda_sanity() {
    Outcome out;
    // pure sinusoid: forecastability exactly 1
    std::vector<double> sine(512);
    for (std::size_t t = 0; t < sine.size(); ++t) {
        sine[t] = std::sin(2.0 * M_PI * 8.0 * static_cast<double>(t) / 512.0);
    }
    const double f = forecastability(sine);

    // exactly periodic panel: seasonality ratio 1
    SynthSpec s;
    s.length = 1344;
    s.features = 2;
    s.period = 24;
    s.noise = 0.0;
    const Panel periodic = synth_generate(s);
    const double ratio = acf_seasonal_ratio(periodic, 336, 25, 24);

    // iid noise residuals reject the unit root; random walks do not
    Rng rng(90006);
    Panel noise;
    const std::size_t wl = 200, n_win = 30;
    noise.values = Matrix(wl * n_win, 1);
    for (std::size_t i = 0; i < noise.values.size(); ++i) noise.values.data()[i] = rng.normal();
    noise.feature_names = {"x"};
    noise.timestamps.resize(noise.values.rows());
    const double r_noise = adf_stationary_ratio(noise, static_cast<int>(wl), 25, 12).ratio;

    // random-walk windows, the ADF core applied to the windows themselves
    // (the reference-oracle protocol; a moving-average detrend would
    // stationarize a walk by construction)
    std::size_t rejected = 0;
    for (std::size_t w = 0; w < n_win; ++w) {
        std::vector<double> window(wl);
        double acc = 0.0;
        for (auto& v : window) {
            acc += rng.normal();
            v = acc;
        }
        const AdfResult res = adf_test(window);
        if (res.stat < res.crit_5) ++rejected;
    }
    const double r_walk = static_cast<double>(rejected) / n_win;

    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "sine forecastability %.9f (=1), sine ACF ratio %.2f (=1), "
                  "iid ADF ratio %.2f (>=0.9), walk ADF ratio %.2f (<=0.2)",
                  f, ratio, r_noise, r_walk);
    out.detail = buf;
    out.pass = std::fabs(f - 1.0) < 1e-6 && ratio == 1.0 && r_noise >= 0.9 && r_walk <= 0.2;
    return out;
}

// ---------------------------------------------------------------- criterion 7
ExperimentConfig synth_run_config(Variant variant, std::size_t horizon, std::uint64_t seed) {
    ExperimentConfig c;
    c.dataset = "synthetic";
    c.variant = variant;
    c.lookback = 96;
    c.horizon = horizon;
    if (variant == Variant::LtsfDnode) {
        c.kernel = 25;
        c.period = 24;
        c.use_seasonality = true;
        c.use_instance_norm = true;
    }
    c.train.learning_rate = 0.005;
    c.train.batch_size = 32;
    c.train.max_epochs = 25;
    c.train.patience = 8;
    c.train.solver = {SolverMethod::Euler, 2, 1.0};
    c.train.seed = seed;
    return c;
}

Outcome synthetic_end_to_end() {
    Outcome out;
    out.pass = true;
    std::string detail;
    for (std::size_t horizon : {24u, 96u}) {
        double dnode_sum = 0.0, linear_sum = 0.0, naive_sum = 0.0;
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            SynthSpec s;
            s.length = 2400;
            s.features = 3;
            s.period = 24;
            s.amplitude = 1.0;
            s.noise = 0.15;
            s.trend_slope = 0.0005;
            s.level_shift = 2.5;
            s.shift_frac = 0.2;
            s.seed = 100 + seed;
            const Panel panel = synth_generate(s);

            const RunReport dnode =
                run_experiment_on(panel, synth_run_config(Variant::LtsfDnode, horizon, seed));
            const RunReport linear =
                run_experiment_on(panel, synth_run_config(Variant::Linear, horizon, seed));

            // naive baseline on the identically prepared test split
            auto parts = split(panel, default_split("synthetic"), 96 + horizon);
            const FeatureStats st = zscore_fit(parts[0]);
            for (auto& part : parts) zscore_apply(part, st);
            EvalAccumulator acc;
            for (const auto& w : windows(parts[2], 96, horizon)) {
                acc.add(naive_last_value_baseline(w), w.y());
            }
            dnode_sum += dnode.eval.mse;
            linear_sum += linear.eval.mse;
            naive_sum += acc.result().mse;
        }
        char buf[160];
        std::snprintf(buf, sizeof(buf), "[H=%zu] mean mse dnode %.4f vs linear %.4f, naive %.4f; ",
                      horizon, dnode_sum / 3.0, linear_sum / 3.0, naive_sum / 3.0);
        detail += buf;
        if (!(dnode_sum < linear_sum && dnode_sum < naive_sum)) out.pass = false;
    }
    out.detail = detail;
    return out;
}

// ---------------------------------------------------------------- criterion 8
std::string find_dataset(const std::string& name) {
    std::vector<std::string> roots;
    if (const char* env = std::getenv("DNODE_DATA_ROOT")) roots.push_back(env);
    roots.push_back("data");
    roots.push_back("../data");
    for (const auto& root : roots) {
        const fs::path p = fs::path(root) / name;
        if (fs::exists(p)) return p.string();
    }
    return {};
}

Outcome ett_reproduction() {
    Outcome out;
    const std::string etth1 = find_dataset("ETTh1.csv");
    const std::string etth2 = find_dataset("ETTh2.csv");
    if (etth1.empty() || etth2.empty()) {
        out.skipped = true;
        out.detail =
            "ETTh1.csv / ETTh2.csv not found under DNODE_DATA_ROOT or ./data - "
            "download the public ETT CSVs to run the reproduction";
        return out;
    }
    out.pass = true;
    std::string detail;
    {
        const Panel shape_check = load_csv(etth1);
        if (shape_check.n_features() != 7 || shape_check.n_steps() != 17420) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "ETTh1 shape %zux%zu, expected 17420x7; ",
                          shape_check.n_steps(), shape_check.n_features());
            detail += buf;
            out.pass = false;
        }
    }
    const double linear_targets[4] = {0.375, 0.418, 0.479, 0.624};
    const double dnode_targets[4] = {0.369, 0.403, 0.423, 0.425};
    const std::size_t horizons[4] = {96, 192, 336, 720};
    for (int i = 0; i < 4; ++i) {
        ExperimentConfig linear;
        linear.dataset = etth1;
        linear.variant = Variant::Linear;
        linear.lookback = 336;
        linear.horizon = horizons[i];
        linear.train.learning_rate = 0.005;
        linear.train.batch_size = 32;
        linear.train.seed = 1;
        const RunReport lr = run_experiment(linear);
        char buf[120];
        std::snprintf(buf, sizeof(buf), "linear H=%zu mse %.3f (target %.3f +-0.02); ",
                      horizons[i], lr.eval.mse, linear_targets[i]);
        detail += buf;
        if (std::fabs(lr.eval.mse - linear_targets[i]) > 0.02) out.pass = false;

        ExperimentConfig dnode;
        dnode.dataset = etth1;
        dnode.variant = Variant::LtsfDnode;
        dnode.lookback = 336;
        dnode.horizon = horizons[i];
        dnode.kernel = 10;
        dnode.period = 48;
        dnode.train.learning_rate = 0.0005;
        dnode.train.batch_size = 32;
        dnode.train.lambda_k = 0.1;
        dnode.train.lambda_j = 0.1;
        dnode.train.solver = {SolverMethod::Euler, 2, 1.0};
        dnode.train.seed = 1;
        const RunReport dr = run_experiment(dnode);
        std::snprintf(buf, sizeof(buf), "dnode H=%zu mse %.3f (target %.3f +-0.03); ",
                      horizons[i], dr.eval.mse, dnode_targets[i]);
        detail += buf;
        if (std::fabs(dr.eval.mse - dnode_targets[i]) > 0.03) out.pass = false;
    }
    ExperimentConfig h2;
    h2.dataset = etth2;
    h2.variant = Variant::LtsfDnode;
    h2.lookback = 336;
    h2.horizon = 336;
    h2.kernel = 25;
    h2.period = 24;
    h2.train.learning_rate = 0.0005;
    h2.train.batch_size = 32;
    h2.train.lambda_k = 0.1;
    h2.train.lambda_j = 0.1;
    h2.train.seed = 1;
    const RunReport r2 = run_experiment(h2);
    char buf[120];
    std::snprintf(buf, sizeof(buf), "etth2 dnode H=336 mse %.3f (target 0.341 +-0.03)",
                  r2.eval.mse);
    detail += buf;
    if (std::fabs(r2.eval.mse - 0.341) > 0.03) out.pass = false;
    out.detail = detail;
    return out;
}

// ---------------------------------------------------------------- criterion 9
Outcome solver_ablation_direction() {
    Outcome out;
    int rk4_wins = 0;
    std::string detail;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        SynthSpec s;
        s.length = 966; // ILI-scale series
        s.features = 3;
        s.period = 52;
        s.amplitude = 1.0;
        s.noise = 0.3;
        s.trend_slope = 0.002;
        s.level_shift = 1.5;
        s.shift_frac = 0.25;
        s.seed = 500 + seed;
        const Panel panel = synth_generate(s);

        auto config = [&](SolverMethod m) {
            ExperimentConfig c;
            c.dataset = "ili_like";
            c.variant = Variant::LtsfDnode;
            c.lookback = 104;
            c.horizon = 60;
            c.kernel = 25;
            c.period = 52;
            c.use_seasonality = true;
            c.use_instance_norm = true;
            c.split = SplitSpec{0.6, 0.2, 0.2};
            c.train.learning_rate = 0.005;
            c.train.batch_size = 16;
            c.train.max_epochs = 30;
            c.train.patience = 10;
            c.train.lambda_k = 0.1;
            c.train.lambda_j = 0.1;
            c.train.solver = {m, 2, 1.0};
            c.train.seed = seed;
            return c;
        };
        const RunReport euler = run_experiment_on(panel, config(SolverMethod::Euler));
        const RunReport rk4 = run_experiment_on(panel, config(SolverMethod::Rk4));
        const double val_euler = euler.train_report.best_val();
        const double val_rk4 = rk4.train_report.best_val();
        if (val_rk4 <= val_euler) ++rk4_wins;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "[seed %llu] val mse rk4 %.4f vs euler %.4f; ",
                      static_cast<unsigned long long>(seed), val_rk4, val_euler);
        detail += buf;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "rk4 wins %d/3 (need >=2)", rk4_wins);
    detail += buf;
    out.detail = detail;
    out.pass = rk4_wins >= 2;
    return out;
}

// --------------------------------------------------------------- criterion 10
Outcome determinism() {
    Outcome out;
    SynthSpec s;
    s.length = 1000;
    s.features = 2;
    s.period = 24;
    s.noise = 0.2;
    s.seed = 77;
    const Panel panel = synth_generate(s);
    ExperimentConfig config;
    config.dataset = "synthetic";
    config.variant = Variant::LtsfDnode;
    config.lookback = 48;
    config.horizon = 24;
    config.kernel = 25;
    config.period = 24;
    config.use_seasonality = true;
    config.use_instance_norm = true;
    config.train.max_epochs = 4;
    config.train.seed = 9;
    config.train.lambda_k = 0.1;
    config.train.lambda_j = 0.1;
    config.output_dir = "/tmp/dnode_acceptance_run_a";
    run_experiment_on(panel, config);
    config.output_dir = "/tmp/dnode_acceptance_run_b";
    run_experiment_on(panel, config);

    auto slurp = [](const std::string& p) {
        std::ifstream f(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(f)),
                           std::istreambuf_iterator<char>());
    };
    std::string a = slurp("/tmp/dnode_acceptance_run_a/report.json");
    std::string b = slurp("/tmp/dnode_acceptance_run_b/report.json");
    // the config echo embeds output_dir; normalize it before comparing bytes
    auto scrub = [](std::string s, const std::string& from) {
        std::size_t pos;
        while ((pos = s.find(from)) != std::string::npos) s.replace(pos, from.size(), "OUT");
        return s;
    };
    a = scrub(std::move(a), "/tmp/dnode_acceptance_run_a");
    b = scrub(std::move(b), "/tmp/dnode_acceptance_run_b");
    out.pass = !a.empty() && a == b;
    out.detail = out.pass ? "report.json byte-identical across reruns"
                          : "report.json differs between reruns";
    fs::remove_all("/tmp/dnode_acceptance_run_a");
    fs::remove_all("/tmp/dnode_acceptance_run_b");
    return out;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> fn;
    };
    const std::vector<Criterion> criteria{
        {1, "gradient oracle vs central finite differences", gradient_oracle},
        {2, "solver convergence order (euler ~s, rk4 ~s^4)", solver_order},
        {3, "rk4 on a generator reproduces its matrix exponential", generator_exponential},
        {4, "decomposition additive exactness + periodic tiling", decomposition_exactness},
        {5, "instance norm roundtrip identity", norm_roundtrip},
        {6, "eda sanity (forecastability, ACF, ADF)", eda_sanity},
        {7, "synthetic end-to-end beats linear and naive", synthetic_end_to_end},
        {8, "ETT benchmark reproduction", ett_reproduction},
        {9, "solver ablation direction (rk4 <= euler on ILI-like)", solver_ablation_direction},
        {10, "byte-identical reports for identical config+seed", determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.fn();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const char* tag = out.skipped ? "SKIP" : (out.pass ? "PASS" : "FAIL");
        std::printf("[%s] criterion %2d: %s (%.1fs)\n       %s\n", tag, c.id, c.name, secs,
                    out.detail.c_str());
        if (!out.pass && !out.skipped) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
