#include <doctest.h>

#include <cmath>

#include "dnode/decompose.hpp"
#include "dnode/errors.hpp"
#include "dnode/rng.hpp"

using namespace dnode;

namespace {

Matrix column(std::initializer_list<double> vals) {
    Matrix m(vals.size(), 1);
    std::size_t i = 0;
    for (double v : vals) m(i++, 0) = v;
    return m;
}

Matrix random_window(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal() * 3.0;
    return m;
}

} // namespace

TEST_CASE("pad_replicate") {
    const Matrix p3 = pad_replicate(column({1, 2, 3}), 3);
    REQUIRE(p3.rows() == 5);
    CHECK(p3(0, 0) == 1);
    CHECK(p3(1, 0) == 1);
    CHECK(p3(2, 0) == 2);
    CHECK(p3(3, 0) == 3);
    CHECK(p3(4, 0) == 3);

    const Matrix p1 = pad_replicate(column({1, 2, 3}), 1);
    CHECK(p1.rows() == 3);
    CHECK(p1(0, 0) == 1);
    CHECK(p1(2, 0) == 3);

    // single row, even kernel: front gets the extra copy
    const Matrix p4 = pad_replicate(column({5}), 4);
    REQUIRE(p4.rows() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(p4(i, 0) == 5);
}

TEST_CASE("moving_average_trend") {
    // constant input stays put
    Matrix c(6, 2, 3.25);
    const Matrix tc = moving_average_trend(c, 5);
    for (std::size_t i = 0; i < tc.size(); ++i) CHECK(tc.data()[i] == doctest::Approx(3.25));

    // hand-computed: [1,2,3,4], kernel 3, padded [1,1,2,3,4,4]
    const Matrix t = moving_average_trend(column({1, 2, 3, 4}), 3);
    CHECK(t(0, 0) == doctest::Approx(4.0 / 3.0));
    CHECK(t(1, 0) == doctest::Approx(2.0));
    CHECK(t(2, 0) == doctest::Approx(3.0));
    CHECK(t(3, 0) == doctest::Approx(11.0 / 3.0));

    // moving average of a ramp equals the ramp away from the edges for odd
    // kernels; the front-heavy even-kernel window sits half a step behind
    const std::size_t n = 20;
    Matrix ramp(n, 1);
    for (std::size_t i = 0; i < n; ++i) ramp(i, 0) = static_cast<double>(i);
    for (int kernel : {3, 4, 5, 8}) {
        const Matrix tr = moving_average_trend(ramp, kernel);
        const std::size_t front = static_cast<std::size_t>(kernel) / 2;
        const std::size_t back = static_cast<std::size_t>(kernel - 1) / 2;
        const double offset = kernel % 2 == 0 ? -0.5 : 0.0;
        for (std::size_t i = front; i + back < n; ++i) {
            CHECK(tr(i, 0) == doctest::Approx(ramp(i, 0) + offset).epsilon(1e-12));
        }
    }
}

TEST_CASE("seasonal_fragments") {
    // L=6, P=3: pairwise means
    const Matrix f6 = seasonal_fragments(column({1, 2, 3, 4, 5, 6}), 3);
    REQUIRE(f6.rows() == 3);
    CHECK(f6(0, 0) == doctest::Approx(2.5));
    CHECK(f6(1, 0) == doctest::Approx(3.5));
    CHECK(f6(2, 0) == doctest::Approx(4.5));

    // L=5, P=3: m differs per fragment index
    const Matrix f5 = seasonal_fragments(column({1, 2, 3, 4, 5}), 3);
    CHECK(f5(0, 0) == doctest::Approx(2.5));
    CHECK(f5(1, 0) == doctest::Approx(3.5));
    CHECK(f5(2, 0) == doctest::Approx(3.0));

    // exactly periodic input: fragments equal one period
    Matrix periodic(8, 1);
    const double vals[4] = {0.5, -1.0, 2.0, 0.0};
    for (std::size_t i = 0; i < 8; ++i) periodic(i, 0) = vals[i % 4];
    const Matrix fp = seasonal_fragments(periodic, 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(fp(i, 0) == doctest::Approx(vals[i]));
}

TEST_CASE("tile_seasonality") {
    Matrix frag(2, 1);
    frag(0, 0) = 7.0;
    frag(1, 0) = -2.0;
    const Matrix tiled = tile_seasonality(frag, 5);
    REQUIRE(tiled.rows() == 5);
    CHECK(tiled(0, 0) == 7.0);
    CHECK(tiled(1, 0) == -2.0);
    CHECK(tiled(2, 0) == 7.0);
    CHECK(tiled(4, 0) == 7.0);

    const Matrix same = tile_seasonality(frag, 2);
    CHECK(same(0, 0) == 7.0);
    CHECK(same(1, 0) == -2.0);
}

TEST_CASE("decompose: structure and errors") {
    Matrix c(12, 2, -1.5);
    DecompConfig cfg{5, 4, true};
    const DecomposedWindow d = decompose(c, cfg);
    CHECK(max_abs_diff(d.trend, c) < 1e-12);
    for (std::size_t i = 0; i < d.seasonality.size(); ++i) {
        CHECK(d.seasonality.data()[i] == doctest::Approx(0.0));
        CHECK(d.residual.data()[i] == doctest::Approx(0.0));
    }

    Rng rng(11);
    const Matrix x = random_window(16, 2, rng);
    const DecomposedWindow no_s = decompose(x, {5, 4, false});
    for (std::size_t i = 0; i < no_s.seasonality.size(); ++i) {
        CHECK(no_s.seasonality.data()[i] == 0.0);
    }
    CHECK(max_abs_diff(no_s.residual, x - no_s.trend) < 1e-12);

    CHECK_THROWS_AS(decompose(x, {5, 17, true}), DecompError);
}

TEST_CASE("decompose: exact additive reconstruction, random windows") {
    Rng rng(123);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t rows = 8 + rng.uniform_index(40);
        const std::size_t cols = 1 + rng.uniform_index(4);
        const Matrix x = random_window(rows, cols, rng);
        for (int kernel : {2, 5, 10}) {
            for (bool seasonal : {false, true}) {
                const int period = 2 + static_cast<int>(rng.uniform_index(rows - 2));
                const DecomposedWindow d = decompose(x, {kernel, period, seasonal});
                const Matrix sum = d.trend + d.seasonality + d.residual;
                CHECK(max_abs_diff(sum, x) < 1e-9);
            }
        }
    }
}

TEST_CASE("decompose: tiled seasonality is P-periodic") {
    Rng rng(5);
    const Matrix x = random_window(30, 3, rng);
    const DecomposedWindow d = decompose(x, {7, 6, true});
    for (std::size_t i = 0; i + 6 < 30; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(d.seasonality(i, j) == doctest::Approx(d.seasonality(i + 6, j)));
        }
    }
}

TEST_CASE("decompose: adding a constant shifts only the trend") {
    Rng rng(9);
    const Matrix x = random_window(24, 2, rng);
    Matrix shifted = x;
    for (std::size_t i = 0; i < shifted.size(); ++i) shifted.data()[i] += 5.0;
    const DecompConfig cfg{5, 6, true};
    const DecomposedWindow d0 = decompose(x, cfg);
    const DecomposedWindow d1 = decompose(shifted, cfg);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(d1.trend.data()[i] == doctest::Approx(d0.trend.data()[i] + 5.0));
        CHECK(d1.seasonality.data()[i] == doctest::Approx(d0.seasonality.data()[i]));
        CHECK(d1.residual.data()[i] == doctest::Approx(d0.residual.data()[i]));
    }
}

TEST_CASE("decompose: sine plus ramp leaves a small residual") {
    const std::size_t n = 96;
    const int period = 8;
    Matrix x(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = 0.05 * static_cast<double>(i) +
                  std::sin(2.0 * M_PI * static_cast<double>(i) / period);
    }
    const DecomposedWindow d = decompose(x, {33, period, true});
    double max_res = 0.0;
    // away from the padded edges the trend is clean and the residual small
    for (std::size_t i = 20; i < n - 20; ++i) max_res = std::max(max_res, std::fabs(d.residual(i, 0)));
    CHECK(max_res < 0.15);
}
