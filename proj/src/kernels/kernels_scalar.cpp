#include "dnode/kernels.hpp"

#include <cmath>
#include <cstring>

namespace dnode::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double* y, double alpha, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal_scalar(double* x, double alpha, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sumsq_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

double diff_sumsq_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void matvec_scalar(double* y, const double* a, const double* x,
                   std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        y[i] = dot_scalar(a + i * cols, x, cols);
    }
}

void matvec_t_scalar(double* y, const double* a, const double* x,
                     std::size_t rows, std::size_t cols) {
    if (cols == 0) return;
    std::memset(y, 0, cols * sizeof(double));
    for (std::size_t i = 0; i < rows; ++i) {
        axpy_scalar(y, x[i], a + i * cols, cols);
    }
}

void ger_scalar(double* a, double alpha, const double* x, const double* y,
                std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        axpy_scalar(a + i * cols, alpha * x[i], y, cols);
    }
}

void adam_scalar(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double bc1, double bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] * bc1) / (std::sqrt(v[i] * bc2) + eps);
    }
}

} // namespace

const Ops& scalar() {
    static const Ops ops{
        "scalar",       dot_scalar,      axpy_scalar, scal_scalar,
        sum_scalar,     sumsq_scalar,    diff_sumsq_scalar,
        matvec_scalar,  matvec_t_scalar, ger_scalar,  adam_scalar,
    };
    return ops;
}

} // namespace dnode::kernels
