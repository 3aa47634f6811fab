#pragma once

#include <span>

#include "dnode/model.hpp"

namespace dnode {

// f(z) = W z. Time-autonomous: the vector field takes no explicit t.
Vec ode_fn(const ComponentParams& params, const Vec& z);

struct SolveResult {
    Vec z; // state at terminal time 1
    TrajectoryStats stats;
};

// Fixed-step explicit integrators over [0, 1] with step 1/n_steps. Stats
// accumulate at every f evaluation (all four stage points for RK4) and are
// averaged over those evaluation points. `eps` is the optional Hutchinson
// probe for the Jacobian statistic; leave empty outside training.
// Throws NumericsError when a state stops being finite.
SolveResult euler_integrate(const ComponentParams& params, const Vec& z0, int n_steps,
                            std::span<const double> eps = {});
SolveResult rk4_integrate(const ComponentParams& params, const Vec& z0, int n_steps,
                          std::span<const double> eps = {});

// dec_w z + dec_b
Vec decode(const ComponentParams& params, const Vec& z);

struct ComponentForward {
    Matrix pred;           // H x F
    TrajectoryStats stats; // summed over feature columns
};

// Integrate every feature column through the shared W, then decode. When
// the component has no flow (empty W) this is the plain decoding layer.
ComponentForward forward_component(const ComponentParams& params, const Matrix& component,
                                   const SolverConfig& solver,
                                   std::span<const double> eps = {});

} // namespace dnode
