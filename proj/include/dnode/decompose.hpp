#pragma once

#include "dnode/matrix.hpp"

namespace dnode {

struct DecompConfig {
    int kernel_size = 25;
    int period = 24;
    bool extract_seasonality = true;
};

// Additive split of one window: trend + seasonality + residual == input
// (seasonality is all zeros when not extracted, so the three-term sum is
// uniform across datasets).
struct DecomposedWindow {
    Matrix trend;
    Matrix seasonality;
    Matrix residual;
    DecompConfig config;
};

// Replicate row 0 ceil((k-1)/2) times in front and the last row
// floor((k-1)/2) times at the back, so a kernel-k average realigns to the
// input length. Front-heavy on even kernels: the final (most recent)
// timestep then averages more observed data.
Matrix pad_replicate(const Matrix& x, int kernel);

// Stride-1 mean over each kernel-length slice of the padded input,
// independently per feature. Output has the input's length.
Matrix moving_average_trend(const Matrix& x, int kernel);

// Fragment i = mean of detrended rows {i, i+P, i+2P, ...} below L,
// i.e. m = ceil((L-i)/P) terms. Fragment index 0 is anchored at the
// window start.
Matrix seasonal_fragments(const Matrix& detrended, int period);

// S[i] = fragments[i mod P]
Matrix tile_seasonality(const Matrix& fragments, std::size_t length);

DecomposedWindow decompose(const Matrix& x, const DecompConfig& config);

} // namespace dnode
