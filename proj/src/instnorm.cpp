#include "dnode/instnorm.hpp"

#include <cmath>

#include "dnode/errors.hpp"

namespace dnode {

std::pair<Matrix, NormState> normalize(const Matrix& c, double eps_floor, NormAxis axis) {
    const std::size_t n = c.rows(), f = c.cols();
    NormState state;
    state.axis = axis;
    Matrix out(n, f);
    if (axis == NormAxis::Feature) {
        state.mu.resize(n);
        state.sigma.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double mu = 0.0;
            for (std::size_t j = 0; j < f; ++j) mu += c(i, j);
            mu /= static_cast<double>(f);
            double var = 0.0;
            for (std::size_t j = 0; j < f; ++j) {
                const double d = c(i, j) - mu;
                var += d * d;
            }
            var /= static_cast<double>(f);
            const double sigma = std::max(std::sqrt(var), eps_floor);
            state.mu[i] = mu;
            state.sigma[i] = sigma;
            for (std::size_t j = 0; j < f; ++j) out(i, j) = (c(i, j) - mu) / sigma;
        }
    } else {
        state.mu.assign(f, 0.0);
        state.sigma.assign(f, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < f; ++j) state.mu[j] += c(i, j);
        }
        for (std::size_t j = 0; j < f; ++j) state.mu[j] /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < f; ++j) {
                const double d = c(i, j) - state.mu[j];
                state.sigma[j] += d * d;
            }
        }
        for (std::size_t j = 0; j < f; ++j) {
            state.sigma[j] = std::max(std::sqrt(state.sigma[j] / static_cast<double>(n)), eps_floor);
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < f; ++j) {
                out(i, j) = (c(i, j) - state.mu[j]) / state.sigma[j];
            }
        }
    }
    return {std::move(out), std::move(state)};
}

Matrix denormalize(const Matrix& c_tilde, const NormState& state) {
    const std::size_t n = c_tilde.rows(), f = c_tilde.cols();
    const std::size_t expect = state.axis == NormAxis::Feature ? n : f;
    if (state.mu.size() != expect || state.sigma.size() != expect) {
        throw NormError("denormalize: state does not match matrix shape");
    }
    Matrix out(n, f);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < f; ++j) {
            const std::size_t k = state.axis == NormAxis::Feature ? i : j;
            out(i, j) = state.sigma[k] * c_tilde(i, j) + state.mu[k];
        }
    }
    return out;
}

DenormAffine forecast_affine(const NormState& state, std::size_t n_features) {
    if (state.mu.empty()) throw NormError("forecast_affine: empty state");
    DenormAffine affine;
    affine.scale.resize(n_features);
    affine.offset.resize(n_features);
    if (state.axis == NormAxis::Feature) {
        for (std::size_t j = 0; j < n_features; ++j) {
            affine.scale[j] = state.sigma.back();
            affine.offset[j] = state.mu.back();
        }
    } else {
        if (state.mu.size() != n_features) {
            throw NormError("forecast_affine: state feature count mismatch");
        }
        affine.scale = state.sigma;
        affine.offset = state.mu;
    }
    return affine;
}

Matrix denormalize_forecast(const Matrix& pred, const NormState& state) {
    const DenormAffine affine = forecast_affine(state, pred.cols());
    Matrix out(pred.rows(), pred.cols());
    for (std::size_t i = 0; i < pred.rows(); ++i) {
        for (std::size_t j = 0; j < pred.cols(); ++j) {
            out(i, j) = affine.scale[j] * pred(i, j) + affine.offset[j];
        }
    }
    return out;
}

} // namespace dnode
