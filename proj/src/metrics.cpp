#include "dnode/metrics.hpp"

#include <cmath>

#include "dnode/errors.hpp"
#include "dnode/kernels.hpp"

namespace dnode {

double mse(const Matrix& pred, const Matrix& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw MetricError("mse: shape mismatch");
    }
    if (pred.size() == 0) throw MetricError("mse: empty input");
    return kernels::active().diff_sumsq(pred.data(), target.data(), pred.size()) /
           static_cast<double>(pred.size());
}

MaePair mae(const Matrix& pred, const Matrix& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw MetricError("mae: shape mismatch");
    }
    if (pred.size() == 0) throw MetricError("mae: empty input");
    MaePair out;
    std::size_t n_ape = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double err = std::fabs(target.data()[i] - pred.data()[i]);
        out.mae += err;
        if (std::fabs(target.data()[i]) >= 1e-8) {
            out.relative_mae += err / std::fabs(target.data()[i]);
            ++n_ape;
        }
    }
    out.mae /= static_cast<double>(pred.size());
    out.relative_mae = n_ape > 0 ? out.relative_mae / static_cast<double>(n_ape) : 0.0;
    return out;
}

Matrix naive_last_value_baseline(const Matrix& x, std::size_t horizon) {
    if (x.rows() == 0) throw MetricError("naive baseline: empty window");
    Matrix out(horizon, x.cols());
    for (std::size_t i = 0; i < horizon; ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = x(x.rows() - 1, j);
    }
    return out;
}

Matrix naive_last_value_baseline(const WindowPair& window) {
    return naive_last_value_baseline(window.x(), window.horizon);
}

void EvalAccumulator::add(const Matrix& pred, const Matrix& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols() || pred.size() == 0) {
        throw MetricError("eval: shape mismatch or empty");
    }
    se_sum_ += kernels::active().diff_sumsq(pred.data(), target.data(), pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double err = std::fabs(target.data()[i] - pred.data()[i]);
        ae_sum_ += err;
        if (std::fabs(target.data()[i]) >= 1e-8) {
            ape_sum_ += err / std::fabs(target.data()[i]);
            ++n_ape_;
        }
    }
    n_elems_ += pred.size();
    ++n_windows_;
}

EvalResult EvalAccumulator::result() const {
    if (n_windows_ == 0) throw MetricError("eval: no windows accumulated");
    EvalResult out;
    out.mse = se_sum_ / static_cast<double>(n_elems_);
    out.mae = ae_sum_ / static_cast<double>(n_elems_);
    out.relative_mae = n_ape_ > 0 ? ape_sum_ / static_cast<double>(n_ape_) : 0.0;
    out.n_windows = n_windows_;
    return out;
}

} // namespace dnode
