#pragma once

#include <cstddef>
#include <vector>

namespace dnode {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. Deliberately minimal: the pipeline
// needs storage plus the handful of BLAS-1/2 style products routed through
// the kernel dispatch (see kernels.hpp).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    Vec column(std::size_t j) const {
        Vec out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = data_[i * cols_ + j];
        return out;
    }
    void set_column(std::size_t j, const Vec& v) {
        for (std::size_t i = 0; i < rows_; ++i) data_[i * cols_ + j] = v[i];
    }

    void fill(double v) { data_.assign(data_.size(), v); }

    bool operator==(const Matrix& o) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vec data_;
};

// y = A x
Vec matvec(const Matrix& a, const Vec& x);
// y = A^T x
Vec matvec_t(const Matrix& a, const Vec& x);
// a += alpha * x y^T
void ger(Matrix& a, double alpha, const Vec& x, const Vec& y);

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix& operator+=(Matrix& a, const Matrix& b);

double max_abs_diff(const Matrix& a, const Matrix& b);

} // namespace dnode
