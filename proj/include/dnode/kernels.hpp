#pragma once

#include <cstddef>
#include <string>

namespace dnode::kernels {

// Flat double-precision primitives behind the numeric hot paths (solver
// steps, backprop, Adam, metric reductions). Two implementations ship:
// a scalar reference and an AVX2+FMA variant; the active one is picked at
// runtime from CPUID so the same binary runs on any x86-64 (and the scalar
// path is the portable fallback elsewhere).
//
// Matrix arguments are row-major. matvec:   y = A x      (A: rows x cols)
//                                 matvec_t: y = A^T x    (x: rows, y: cols)
//                                 ger:      A += alpha * x y^T
struct Ops {
    const char* name;

    double (*dot)(const double* a, const double* b, std::size_t n);
    void (*axpy)(double* y, double alpha, const double* x, std::size_t n);
    void (*scal)(double* x, double alpha, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    double (*sumsq)(const double* x, std::size_t n);
    double (*diff_sumsq)(const double* a, const double* b, std::size_t n);
    void (*matvec)(double* y, const double* a, const double* x,
                   std::size_t rows, std::size_t cols);
    void (*matvec_t)(double* y, const double* a, const double* x,
                     std::size_t rows, std::size_t cols);
    void (*ger)(double* a, double alpha, const double* x, const double* y,
                std::size_t rows, std::size_t cols);
    // In-place Adam update over a flat parameter block. bc1/bc2 are the
    // precomputed bias corrections 1/(1-beta1^t), 1/(1-beta2^t).
    void (*adam)(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double bc1, double bc2);
};

const Ops& scalar();

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2();
bool cpu_has_avx2();
#endif

// Active backend: AVX2 when the CPU supports it and the build includes the
// AVX2 translation unit, scalar otherwise. Overridable with the
// DNODE_KERNELS env var (values: "scalar", "avx2") or select().
const Ops& active();
void select(const std::string& name);

} // namespace dnode::kernels
