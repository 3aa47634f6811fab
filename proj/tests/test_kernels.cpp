#include <doctest.h>

#include <cmath>

#include "dnode/kernels.hpp"
#include "dnode/matrix.hpp"
#include "dnode/rng.hpp"

using namespace dnode;

namespace {

Vec random_vec(std::size_t n, Rng& rng) {
    Vec v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

} // namespace

TEST_CASE("scalar kernels: basic identities") {
    const auto& k = kernels::scalar();
    Vec a{1.0, 2.0, 3.0}, b{4.0, -5.0, 6.0};
    CHECK(k.dot(a.data(), b.data(), 3) == doctest::Approx(1 * 4 - 2 * 5 + 3 * 6));
    CHECK(k.sum(a.data(), 3) == doctest::Approx(6.0));
    CHECK(k.sumsq(a.data(), 3) == doctest::Approx(14.0));
    CHECK(k.diff_sumsq(a.data(), b.data(), 3) == doctest::Approx(9.0 + 49.0 + 9.0));

    Vec y{1.0, 1.0, 1.0};
    k.axpy(y.data(), 2.0, a.data(), 3);
    CHECK(y[0] == doctest::Approx(3.0));
    CHECK(y[2] == doctest::Approx(7.0));

    // 2x3 matrix
    Vec m{1, 2, 3, 4, 5, 6};
    Vec x{1, 0, -1};
    Vec out(2);
    k.matvec(out.data(), m.data(), x.data(), 2, 3);
    CHECK(out[0] == doctest::Approx(-2.0));
    CHECK(out[1] == doctest::Approx(-2.0));
    Vec xt{1, -1};
    Vec out_t(3);
    k.matvec_t(out_t.data(), m.data(), xt.data(), 2, 3);
    CHECK(out_t[0] == doctest::Approx(-3.0));
    CHECK(out_t[1] == doctest::Approx(-3.0));
    CHECK(out_t[2] == doctest::Approx(-3.0));
}

#if defined(DNODE_HAVE_AVX2_TU)
TEST_CASE("avx2 kernels match the scalar reference") {
    if (!kernels::cpu_has_avx2()) {
        MESSAGE("CPU lacks AVX2, skipping equivalence check");
        return;
    }
    const auto& s = kernels::scalar();
    const auto& v = kernels::avx2();
    Rng rng(7);
    // odd sizes on purpose so remainder lanes are exercised
    for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 129u, 1000u}) {
        const Vec a = random_vec(n, rng);
        const Vec b = random_vec(n, rng);
        const double tol = 1e-12 * static_cast<double>(n);
        CHECK(v.dot(a.data(), b.data(), n) ==
              doctest::Approx(s.dot(a.data(), b.data(), n)).epsilon(tol));
        CHECK(v.sum(a.data(), n) == doctest::Approx(s.sum(a.data(), n)).epsilon(tol));
        CHECK(v.sumsq(a.data(), n) == doctest::Approx(s.sumsq(a.data(), n)).epsilon(tol));
        CHECK(v.diff_sumsq(a.data(), b.data(), n) ==
              doctest::Approx(s.diff_sumsq(a.data(), b.data(), n)).epsilon(tol));

        Vec y1 = b, y2 = b;
        s.axpy(y1.data(), 0.7, a.data(), n);
        v.axpy(y2.data(), 0.7, a.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]));
    }

    const std::vector<std::pair<std::size_t, std::size_t>> shapes{
        {5, 7}, {8, 8}, {33, 17}, {96, 96}};
    for (auto [rows, cols] : shapes) {
        const Vec m = random_vec(rows * cols, rng);
        const Vec x = random_vec(cols, rng);
        const Vec xt = random_vec(rows, rng);
        Vec y1(rows), y2(rows), z1(cols), z2(cols);
        s.matvec(y1.data(), m.data(), x.data(), rows, cols);
        v.matvec(y2.data(), m.data(), x.data(), rows, cols);
        s.matvec_t(z1.data(), m.data(), xt.data(), rows, cols);
        v.matvec_t(z2.data(), m.data(), xt.data(), rows, cols);
        for (std::size_t i = 0; i < rows; ++i) {
            CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-12));
        }
        for (std::size_t i = 0; i < cols; ++i) {
            CHECK(z1[i] == doctest::Approx(z2[i]).epsilon(1e-12));
        }

        Vec a1 = m, a2 = m;
        s.ger(a1.data(), 0.3, xt.data(), x.data(), rows, cols);
        v.ger(a2.data(), 0.3, xt.data(), x.data(), rows, cols);
        for (std::size_t i = 0; i < m.size(); ++i) {
            CHECK(a1[i] == doctest::Approx(a2[i]).epsilon(1e-12));
        }
    }

    // adam update equivalence
    const std::size_t n = 103;
    Vec p1 = random_vec(n, rng), p2 = p1;
    Vec m1(n, 0.0), m2(n, 0.0), v1(n, 0.0), v2(n, 0.0);
    for (int t = 1; t <= 3; ++t) {
        const Vec g = random_vec(n, rng);
        const double bc1 = 1.0 / (1.0 - std::pow(0.9, t));
        const double bc2 = 1.0 / (1.0 - std::pow(0.999, t));
        s.adam(p1.data(), m1.data(), v1.data(), g.data(), n, 0.01, 0.9, 0.999, 1e-8, bc1, bc2);
        v.adam(p2.data(), m2.data(), v2.data(), g.data(), n, 0.01, 0.9, 0.999, 1e-8, bc1, bc2);
    }
    for (std::size_t i = 0; i < n; ++i) CHECK(p1[i] == doctest::Approx(p2[i]).epsilon(1e-12));
}
#endif

TEST_CASE("backend selection") {
    CHECK_NOTHROW(kernels::select("scalar"));
    CHECK(std::string(kernels::active().name) == "scalar");
    CHECK_THROWS(kernels::select("neon"));
#if defined(DNODE_HAVE_AVX2_TU)
    if (kernels::cpu_has_avx2()) {
        kernels::select("avx2");
        CHECK(std::string(kernels::active().name) == "avx2");
    }
#endif
}
