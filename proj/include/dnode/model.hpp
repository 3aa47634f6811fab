#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "dnode/matrix.hpp"

namespace dnode {

// Parameters of one forecasting channel: the ODE weight W (L x L, empty for
// channels that decode directly) plus the L -> H decoding layer.
struct ComponentParams {
    Matrix w;     // L x L, f(z) = W z; empty => identity flow
    Matrix dec_w; // H x L
    Vec dec_b;    // H

    bool has_flow() const { return !w.empty(); }
    std::size_t parameter_count() const {
        return w.size() + dec_w.size() + dec_b.size();
    }
};

enum class SolverMethod { Euler, Rk4 };

std::string to_string(SolverMethod m);
SolverMethod solver_from_string(const std::string& s);

struct SolverConfig {
    SolverMethod method = SolverMethod::Euler;
    int n_steps = 2;
    double terminal_time = 1.0; // fixed at 1 throughout

    double step_size() const { return terminal_time / n_steps; }
    int evals_per_step() const { return method == SolverMethod::Rk4 ? 4 : 1; }
};

// Regularizer instrumentation gathered while integrating: the kinetic term
// ||f(z)||^2 and the Hutchinson probe ||eps^T grad f||, both averaged over
// the solver's evaluation points so their magnitude is step-count
// invariant.
struct TrajectoryStats {
    double kinetic = 0.0;
    double jacobian = 0.0;
    std::uint64_t eps_seed = 0;

    TrajectoryStats& operator+=(const TrajectoryStats& o) {
        kinetic += o.kinetic;
        jacobian += o.jacobian;
        return *this;
    }
};

// The three-component model of the decomposing forecaster.
struct ModelParams {
    ComponentParams trend;
    std::optional<ComponentParams> seasonality;
    ComponentParams residual;
};

std::size_t count_parameters(const ModelParams& model);

// Checkpoint manifest: component name -> shapes -> row-major values, JSON.
// Doubles survive a save/load round trip bit-exactly.
using Checkpoint = std::map<std::string, ComponentParams>;

void save_checkpoint(const std::string& path, const Checkpoint& components);
Checkpoint load_checkpoint(const std::string& path);

} // namespace dnode
