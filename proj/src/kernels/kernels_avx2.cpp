// AVX2+FMA kernel variants. This translation unit is the only one compiled
// with -mavx2 -mfma; it must not be entered unless cpu_has_avx2() is true.

#include "dnode/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstring>

namespace dnode::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_avx2(double* y, double alpha, const double* x, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal_avx2(double* x, double alpha, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) x[i] *= alpha;
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double sumsq_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

double diff_sumsq_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void matvec_avx2(double* y, const double* a, const double* x,
                 std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        y[i] = dot_avx2(a + i * cols, x, cols);
    }
}

void matvec_t_avx2(double* y, const double* a, const double* x,
                   std::size_t rows, std::size_t cols) {
    if (cols == 0) return;
    std::memset(y, 0, cols * sizeof(double));
    for (std::size_t i = 0; i < rows; ++i) {
        axpy_avx2(y, x[i], a + i * cols, cols);
    }
}

void ger_avx2(double* a, double alpha, const double* x, const double* y,
              std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        axpy_avx2(a + i * cols, alpha * x[i], y, cols);
    }
}

void adam_avx2(double* p, double* m, double* v, const double* g,
               std::size_t n, double lr, double beta1, double beta2,
               double eps, double bc1, double bc2) {
    const __m256d b1 = _mm256_set1_pd(beta1);
    const __m256d b1c = _mm256_set1_pd(1.0 - beta1);
    const __m256d b2 = _mm256_set1_pd(beta2);
    const __m256d b2c = _mm256_set1_pd(1.0 - beta2);
    const __m256d lrv = _mm256_set1_pd(lr);
    const __m256d epsv = _mm256_set1_pd(eps);
    const __m256d bc1v = _mm256_set1_pd(bc1);
    const __m256d bc2v = _mm256_set1_pd(bc2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gv = _mm256_loadu_pd(g + i);
        __m256d mv = _mm256_loadu_pd(m + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        mv = _mm256_fmadd_pd(b1c, gv, _mm256_mul_pd(b1, mv));
        vv = _mm256_fmadd_pd(b2c, _mm256_mul_pd(gv, gv), _mm256_mul_pd(b2, vv));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        const __m256d denom =
            _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, bc2v)), epsv);
        const __m256d step =
            _mm256_div_pd(_mm256_mul_pd(lrv, _mm256_mul_pd(mv, bc1v)), denom);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] * bc1) / (std::sqrt(v[i] * bc2) + eps);
    }
}

} // namespace

const Ops& avx2() {
    static const Ops ops{
        "avx2",       dot_avx2,      axpy_avx2, scal_avx2,
        sum_avx2,     sumsq_avx2,    diff_sumsq_avx2,
        matvec_avx2,  matvec_t_avx2, ger_avx2,  adam_avx2,
    };
    return ops;
}

} // namespace dnode::kernels
