#pragma once

#include <utility>

#include "dnode/matrix.hpp"

namespace dnode {

// Default: statistics over the feature axis, one (mu, sigma) pair per
// timestep. Time is the transposed convention (per-feature statistics over
// the window), exposed for ablation.
enum class NormAxis { Feature, Time };

inline constexpr double kSigmaFloor = 1e-5;

// Statistics captured by normalize(); travels with its window so the
// inverse is exact.
struct NormState {
    Vec mu;    // length L (Feature axis) or F (Time axis)
    Vec sigma; // same length, floored at eps
    NormAxis axis = NormAxis::Feature;
};

std::pair<Matrix, NormState> normalize(const Matrix& c, double eps_floor = kSigmaFloor,
                                       NormAxis axis = NormAxis::Feature);

// Exact inverse on a matrix of the same shape normalize() saw.
Matrix denormalize(const Matrix& c_tilde, const NormState& state);

// Affine restoring a forecast (H x F, H unrelated to L) to the component's
// scale. Feature-axis states broadcast the final timestep's statistics (the
// most recent level estimate); time-axis states broadcast per feature.
struct DenormAffine {
    Vec scale;  // size F
    Vec offset; // size F
};
DenormAffine forecast_affine(const NormState& state, std::size_t n_features);
Matrix denormalize_forecast(const Matrix& pred, const NormState& state);

} // namespace dnode
