#pragma once

#include "dnode/data.hpp"
#include "dnode/matrix.hpp"

namespace dnode {

struct EvalResult {
    double mse = 0.0;
    double mae = 0.0;        // standard (1/n) sum |y - yhat|
    double relative_mae = 0.0; // (1/n) sum |(y - yhat)/y|, |y| < 1e-8 skipped
    std::size_t n_windows = 0;
};

double mse(const Matrix& pred, const Matrix& target);

struct MaePair {
    double mae = 0.0;
    double relative_mae = 0.0;
};
MaePair mae(const Matrix& pred, const Matrix& target);

// Every forecast row repeats the last look-back row.
Matrix naive_last_value_baseline(const Matrix& x, std::size_t horizon);
Matrix naive_last_value_baseline(const WindowPair& window);

// Pools element errors across windows in a fixed order.
class EvalAccumulator {
public:
    void add(const Matrix& pred, const Matrix& target);
    EvalResult result() const; // MetricError when nothing was added

private:
    double se_sum_ = 0.0;
    double ae_sum_ = 0.0;
    double ape_sum_ = 0.0;
    std::size_t n_elems_ = 0;
    std::size_t n_ape_ = 0;
    std::size_t n_windows_ = 0;
};

} // namespace dnode
