#include "dnode/decompose.hpp"

#include "dnode/errors.hpp"

namespace dnode {

Matrix pad_replicate(const Matrix& x, int kernel) {
    if (kernel < 1 || x.rows() == 0) throw DecompError("pad_replicate: kernel must be >= 1");
    const std::size_t front = static_cast<std::size_t>(kernel) / 2; // ceil((k-1)/2)
    const std::size_t back = static_cast<std::size_t>(kernel - 1) / 2;
    const std::size_t n = x.rows(), f = x.cols();
    Matrix out(n + front + back, f);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        const std::size_t src = i < front ? 0 : (i - front < n ? i - front : n - 1);
        for (std::size_t j = 0; j < f; ++j) out(i, j) = x(src, j);
    }
    return out;
}

Matrix moving_average_trend(const Matrix& x, int kernel) {
    if (kernel < 1) throw DecompError("kernel must be >= 1");
    const std::size_t k = static_cast<std::size_t>(kernel);
    const Matrix padded = pad_replicate(x, kernel);
    const std::size_t n = x.rows(), f = x.cols();
    Matrix out(n, f);
    // Sliding sum over the time axis, vectorized across features.
    Vec run(f, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < f; ++j) run[j] += padded(i, j);
    }
    const double inv = 1.0 / static_cast<double>(k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < f; ++j) out(i, j) = run[j] * inv;
        if (i + 1 < n) {
            for (std::size_t j = 0; j < f; ++j) {
                run[j] += padded(i + k, j) - padded(i, j);
            }
        }
    }
    return out;
}

Matrix seasonal_fragments(const Matrix& detrended, int period) {
    const std::size_t n = detrended.rows(), f = detrended.cols();
    const auto p = static_cast<std::size_t>(period);
    if (period < 1 || p > n) throw DecompError("period must lie in [1, window length]");
    Matrix frag(p, f);
    for (std::size_t i = 0; i < p; ++i) {
        std::size_t m = 0;
        for (std::size_t r = i; r < n; r += p, ++m) {
            for (std::size_t j = 0; j < f; ++j) frag(i, j) += detrended(r, j);
        }
        for (std::size_t j = 0; j < f; ++j) frag(i, j) /= static_cast<double>(m);
    }
    return frag;
}

Matrix tile_seasonality(const Matrix& fragments, std::size_t length) {
    if (fragments.rows() == 0) throw DecompError("tile_seasonality: empty fragments");
    Matrix out(length, fragments.cols());
    for (std::size_t i = 0; i < length; ++i) {
        for (std::size_t j = 0; j < fragments.cols(); ++j) {
            out(i, j) = fragments(i % fragments.rows(), j);
        }
    }
    return out;
}

DecomposedWindow decompose(const Matrix& x, const DecompConfig& config) {
    if (config.kernel_size < 1) throw DecompError("kernel must be >= 1");
    if (config.extract_seasonality &&
        (config.period < 2 || static_cast<std::size_t>(config.period) > x.rows())) {
        throw DecompError("seasonality period must lie in [2, window length]");
    }
    DecomposedWindow out;
    out.config = config;
    out.trend = moving_average_trend(x, config.kernel_size);
    const Matrix detrended = x - out.trend;
    if (config.extract_seasonality) {
        out.seasonality = tile_seasonality(seasonal_fragments(detrended, config.period), x.rows());
        out.residual = detrended - out.seasonality;
    } else {
        out.seasonality = Matrix(x.rows(), x.cols(), 0.0);
        out.residual = detrended;
    }
    return out;
}

} // namespace dnode
