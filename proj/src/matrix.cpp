#include "dnode/matrix.hpp"

#include <cassert>
#include <cmath>

#include "dnode/kernels.hpp"

namespace dnode {

Vec matvec(const Matrix& a, const Vec& x) {
    assert(x.size() == a.cols());
    Vec y(a.rows());
    kernels::active().matvec(y.data(), a.data(), x.data(), a.rows(), a.cols());
    return y;
}

Vec matvec_t(const Matrix& a, const Vec& x) {
    assert(x.size() == a.rows());
    Vec y(a.cols());
    kernels::active().matvec_t(y.data(), a.data(), x.data(), a.rows(), a.cols());
    return y;
}

void ger(Matrix& a, double alpha, const Vec& x, const Vec& y) {
    assert(x.size() == a.rows() && y.size() == a.cols());
    kernels::active().ger(a.data(), alpha, x.data(), y.data(), a.rows(), a.cols());
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    Matrix out = a;
    kernels::active().axpy(out.data(), 1.0, b.data(), b.size());
    return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    Matrix out = a;
    kernels::active().axpy(out.data(), -1.0, b.data(), b.size());
    return out;
}

Matrix& operator+=(Matrix& a, const Matrix& b) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    kernels::active().axpy(a.data(), 1.0, b.data(), b.size());
    return a;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    }
    return m;
}

} // namespace dnode
