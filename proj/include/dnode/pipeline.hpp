#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dnode/decompose.hpp"
#include "dnode/instnorm.hpp"
#include "dnode/model.hpp"
#include "dnode/rng.hpp"

namespace dnode {

// What a channel reads from the window. RawMinusLast subtracts the final
// row before the linear map and adds it back to the forecast.
enum class ChannelSource { Raw, RawMinusLast, Trend, Seasonality, Residual };

std::string to_string(ChannelSource s);

struct ChannelSpec {
    ChannelSource source = ChannelSource::Raw;
    bool normalize = false; // NORM before the flow, DENORM after decoding
    bool use_flow = true;   // integrate dz/dt = Wz; false decodes directly
};

// Assembled per-window computation: optional decomposition, per-channel
// normalization/flow/decoder, additive recomposition of the forecast.
struct PipelineSpec {
    bool use_decomposition = false;
    DecompConfig decomp;
    NormAxis norm_axis = NormAxis::Feature;
    SolverConfig solver;
    std::vector<ChannelSpec> channels;

    // Ordered block list, one string per applied block.
    std::vector<std::string> describe() const;
};

struct PipelineModel {
    PipelineSpec spec;
    std::vector<ComponentParams> params; // parallel to spec.channels

    std::size_t parameter_count() const;
};

// W = 0 (the flow starts as the identity), decoder uniform in +-1/sqrt(L),
// bias 0.
PipelineModel init_pipeline_model(const PipelineSpec& spec, std::size_t lookback,
                                  std::size_t horizon, Rng& rng);

// Hutchinson probes, one per channel per forward pass.
struct EpsDraws {
    std::vector<Vec> per_channel;
    std::uint64_t seed = 0;
};
EpsDraws draw_eps(Rng& rng, std::size_t n_channels, std::size_t lookback);

struct WindowForward {
    Matrix pred;                        // H x F
    std::vector<TrajectoryStats> stats; // per channel
};

WindowForward forward_window(const PipelineModel& model, const Matrix& x,
                             const EpsDraws* eps = nullptr);

struct ChannelGrads {
    Matrix w;
    Matrix dec_w;
    Vec dec_b;
};

struct GradientBundle {
    std::vector<ChannelGrads> channels;

    static GradientBundle like(const PipelineModel& model);
    void zero();
    void scale(double a);
    void add(const GradientBundle& o);
    bool finite() const;
};

struct BackwardResult {
    double loss = 0.0;
    GradientBundle grads;
};

// Exact reverse-mode gradient of the unrolled forward computation
// (solver steps included; decomposition and input normalization are
// constants, the DENORM affine on predictions is differentiated).
BackwardResult backward_window(const PipelineModel& model, const Matrix& x, const Matrix& y,
                               double lambda_k, double lambda_j, const EpsDraws& eps);

} // namespace dnode
