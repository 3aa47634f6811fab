#include "dnode/pipeline.hpp"

#include <cassert>
#include <cmath>

#include "dnode/errors.hpp"
#include "dnode/kernels.hpp"
#include "dnode/solver.hpp"

namespace dnode {
namespace {

struct ChannelInput {
    Matrix values;      // what enters the flow (normalized when requested)
    NormState norm;     // valid iff spec.normalize
    DenormAffine affine;// valid iff spec.normalize
};

// Forward state captured per feature column so the backward sweep can
// replay the solver in reverse. Euler stores z_0..z_{n-1} and f per step;
// RK4 stores [z, u2, u3, u4] and [f1..f4] per step.
struct ColumnTrace {
    std::vector<Vec> states;
    std::vector<Vec> fs;
    Vec z_terminal;
};

Matrix source_matrix(ChannelSource source, const Matrix& x, const DecomposedWindow* d) {
    if (!d && source != ChannelSource::Raw && source != ChannelSource::RawMinusLast) {
        throw ConfigError("channel reads a component but the pipeline does not decompose");
    }
    switch (source) {
        case ChannelSource::Raw:
            return x;
        case ChannelSource::RawMinusLast: {
            Matrix out = x;
            const std::size_t last = x.rows() - 1;
            for (std::size_t i = 0; i < x.rows(); ++i) {
                for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) -= x(last, j);
            }
            return out;
        }
        case ChannelSource::Trend:
            return d->trend;
        case ChannelSource::Seasonality:
            return d->seasonality;
        case ChannelSource::Residual:
            return d->residual;
    }
    throw ConfigError("unknown channel source");
}

ChannelInput make_channel_input(const ChannelSpec& spec, const PipelineSpec& pipeline,
                                const Matrix& x, const DecomposedWindow* d) {
    ChannelInput input;
    Matrix raw = source_matrix(spec.source, x, d);
    if (spec.normalize) {
        auto [normed, state] = normalize(raw, kSigmaFloor, pipeline.norm_axis);
        input.values = std::move(normed);
        input.affine = forecast_affine(state, x.cols());
        input.norm = std::move(state);
    } else {
        input.values = std::move(raw);
    }
    return input;
}

ColumnTrace trace_forward(const ComponentParams& params, const SolverConfig& solver,
                          const Vec& z0, double& kinetic_acc) {
    const auto& k = kernels::active();
    const std::size_t n = z0.size();
    const double s = solver.step_size();
    ColumnTrace trace;
    Vec z = z0;
    if (solver.method == SolverMethod::Euler) {
        Vec f(n);
        for (int step = 0; step < solver.n_steps; ++step) {
            k.matvec(f.data(), params.w.data(), z.data(), n, n);
            kinetic_acc += k.sumsq(f.data(), n);
            trace.states.push_back(z);
            trace.fs.push_back(f);
            k.axpy(z.data(), s, f.data(), n);
        }
    } else {
        Vec f1(n), f2(n), f3(n), f4(n);
        for (int step = 0; step < solver.n_steps; ++step) {
            k.matvec(f1.data(), params.w.data(), z.data(), n, n);
            Vec u2 = z;
            k.axpy(u2.data(), s / 2.0, f1.data(), n);
            k.matvec(f2.data(), params.w.data(), u2.data(), n, n);
            Vec u3 = z;
            k.axpy(u3.data(), s / 2.0, f2.data(), n);
            k.matvec(f3.data(), params.w.data(), u3.data(), n, n);
            Vec u4 = z;
            k.axpy(u4.data(), s, f3.data(), n);
            k.matvec(f4.data(), params.w.data(), u4.data(), n, n);
            kinetic_acc += k.sumsq(f1.data(), n) + k.sumsq(f2.data(), n) +
                           k.sumsq(f3.data(), n) + k.sumsq(f4.data(), n);
            trace.states.push_back(z);
            trace.states.push_back(std::move(u2));
            trace.states.push_back(std::move(u3));
            trace.states.push_back(std::move(u4));
            trace.fs.push_back(f1);
            trace.fs.push_back(f2);
            trace.fs.push_back(f3);
            trace.fs.push_back(f4);
            k.axpy(z.data(), s / 6.0, f1.data(), n);
            k.axpy(z.data(), s / 3.0, f2.data(), n);
            k.axpy(z.data(), s / 3.0, f3.data(), n);
            k.axpy(z.data(), s / 6.0, f4.data(), n);
        }
    }
    if (!std::isfinite(k.sumsq(z.data(), n))) throw NumericsError("pipeline: non-finite state");
    trace.z_terminal = std::move(z);
    return trace;
}

// Reverse sweep over one column's solver trajectory. `adjoint` enters as
// dL/dz_terminal and is consumed; parameter gradients accumulate into w_grad.
void trace_backward(const ComponentParams& params, const SolverConfig& solver,
                    const ColumnTrace& trace, double kcoef, Vec adjoint, Matrix& w_grad) {
    const auto& k = kernels::active();
    const std::size_t n = adjoint.size();
    const double s = solver.step_size();
    Vec gf(n), tmp(n);
    if (solver.method == SolverMethod::Euler) {
        for (int step = solver.n_steps - 1; step >= 0; --step) {
            const Vec& z = trace.states[static_cast<std::size_t>(step)];
            const Vec& f = trace.fs[static_cast<std::size_t>(step)];
            for (std::size_t i = 0; i < n; ++i) gf[i] = s * adjoint[i] + 2.0 * kcoef * f[i];
            k.ger(w_grad.data(), 1.0, gf.data(), z.data(), n, n);
            k.matvec_t(tmp.data(), params.w.data(), gf.data(), n, n);
            k.axpy(adjoint.data(), 1.0, tmp.data(), n);
        }
    } else {
        Vec gf1(n), gf2(n), gf3(n), gf4(n), az(n);
        for (int step = solver.n_steps - 1; step >= 0; --step) {
            const std::size_t base = static_cast<std::size_t>(step) * 4;
            const Vec& z = trace.states[base];
            const Vec& u2 = trace.states[base + 1];
            const Vec& u3 = trace.states[base + 2];
            const Vec& u4 = trace.states[base + 3];
            const Vec& f1 = trace.fs[base];
            const Vec& f2 = trace.fs[base + 1];
            const Vec& f3 = trace.fs[base + 2];
            const Vec& f4 = trace.fs[base + 3];
            for (std::size_t i = 0; i < n; ++i) {
                gf1[i] = (s / 6.0) * adjoint[i] + 2.0 * kcoef * f1[i];
                gf2[i] = (s / 3.0) * adjoint[i] + 2.0 * kcoef * f2[i];
                gf3[i] = (s / 3.0) * adjoint[i] + 2.0 * kcoef * f3[i];
                gf4[i] = (s / 6.0) * adjoint[i] + 2.0 * kcoef * f4[i];
            }
            az = adjoint; // direct z -> z' path
            // f4 = W u4, u4 = z + s f3
            k.ger(w_grad.data(), 1.0, gf4.data(), u4.data(), n, n);
            k.matvec_t(tmp.data(), params.w.data(), gf4.data(), n, n);
            k.axpy(az.data(), 1.0, tmp.data(), n);
            k.axpy(gf3.data(), s, tmp.data(), n);
            // f3 = W u3, u3 = z + (s/2) f2
            k.ger(w_grad.data(), 1.0, gf3.data(), u3.data(), n, n);
            k.matvec_t(tmp.data(), params.w.data(), gf3.data(), n, n);
            k.axpy(az.data(), 1.0, tmp.data(), n);
            k.axpy(gf2.data(), s / 2.0, tmp.data(), n);
            // f2 = W u2, u2 = z + (s/2) f1
            k.ger(w_grad.data(), 1.0, gf2.data(), u2.data(), n, n);
            k.matvec_t(tmp.data(), params.w.data(), gf2.data(), n, n);
            k.axpy(az.data(), 1.0, tmp.data(), n);
            k.axpy(gf1.data(), s / 2.0, tmp.data(), n);
            // f1 = W z
            k.ger(w_grad.data(), 1.0, gf1.data(), z.data(), n, n);
            k.matvec_t(tmp.data(), params.w.data(), gf1.data(), n, n);
            k.axpy(az.data(), 1.0, tmp.data(), n);
            adjoint = az;
        }
    }
}

} // namespace

std::string to_string(ChannelSource s) {
    switch (s) {
        case ChannelSource::Raw: return "raw";
        case ChannelSource::RawMinusLast: return "raw_minus_last";
        case ChannelSource::Trend: return "trend";
        case ChannelSource::Seasonality: return "seasonality";
        case ChannelSource::Residual: return "residual";
    }
    return "?";
}

std::vector<std::string> PipelineSpec::describe() const {
    std::vector<std::string> blocks;
    if (use_decomposition) {
        std::string d = "dcmp(kernel=" + std::to_string(decomp.kernel_size);
        if (decomp.extract_seasonality) d += ",period=" + std::to_string(decomp.period);
        d += decomp.extract_seasonality ? ",seasonality=on)" : ",seasonality=off)";
        blocks.push_back(std::move(d));
    }
    std::string normed;
    for (const auto& c : channels) {
        if (c.normalize) {
            if (!normed.empty()) normed += ",";
            normed += to_string(c.source);
        }
    }
    if (!normed.empty()) {
        blocks.push_back("norm(" + normed + std::string(";axis=") +
                         (norm_axis == NormAxis::Feature ? "feature" : "time") + ")");
    }
    for (const auto& c : channels) {
        std::string b = c.use_flow
                            ? "node(" + to_string(c.source) + "," + to_string(solver.method) +
                                  ",n_steps=" + std::to_string(solver.n_steps) + ")"
                            : "linear(" + to_string(c.source) + ")";
        blocks.push_back(std::move(b));
    }
    if (!normed.empty()) blocks.push_back("denorm(" + normed + ")");
    if (channels.size() > 1) blocks.push_back("recompose(sum)");
    return blocks;
}

std::size_t PipelineModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params) n += p.parameter_count();
    return n;
}

PipelineModel init_pipeline_model(const PipelineSpec& spec, std::size_t lookback,
                                  std::size_t horizon, Rng& rng) {
    PipelineModel model;
    model.spec = spec;
    const double bound = 1.0 / std::sqrt(static_cast<double>(lookback));
    for (const auto& channel : spec.channels) {
        ComponentParams p;
        if (channel.use_flow) p.w = Matrix(lookback, lookback, 0.0);
        p.dec_w = Matrix(horizon, lookback);
        for (std::size_t i = 0; i < p.dec_w.size(); ++i) {
            p.dec_w.data()[i] = rng.uniform(-bound, bound);
        }
        p.dec_b.assign(horizon, 0.0);
        model.params.push_back(std::move(p));
    }
    return model;
}

EpsDraws draw_eps(Rng& rng, std::size_t n_channels, std::size_t lookback) {
    EpsDraws draws;
    draws.seed = rng.next_u64();
    Rng eps_rng(draws.seed);
    for (std::size_t c = 0; c < n_channels; ++c) {
        draws.per_channel.push_back(eps_rng.normal_vec(lookback));
    }
    return draws;
}

WindowForward forward_window(const PipelineModel& model, const Matrix& x, const EpsDraws* eps) {
    const auto& spec = model.spec;
    DecomposedWindow d;
    if (spec.use_decomposition) d = decompose(x, spec.decomp);

    WindowForward out;
    out.stats.resize(spec.channels.size());
    for (std::size_t c = 0; c < spec.channels.size(); ++c) {
        const auto& channel = spec.channels[c];
        const ChannelInput input = make_channel_input(channel, spec, x,
                                                      spec.use_decomposition ? &d : nullptr);
        std::span<const double> probe;
        if (eps && c < eps->per_channel.size() && channel.use_flow) {
            probe = eps->per_channel[c];
            out.stats[c].eps_seed = eps->seed;
        }
        ComponentForward fwd = forward_component(model.params[c], input.values, spec.solver, probe);
        out.stats[c].kinetic = fwd.stats.kinetic;
        out.stats[c].jacobian = fwd.stats.jacobian;
        Matrix pred_c = std::move(fwd.pred);
        if (channel.normalize) {
            for (std::size_t i = 0; i < pred_c.rows(); ++i) {
                for (std::size_t j = 0; j < pred_c.cols(); ++j) {
                    pred_c(i, j) = input.affine.scale[j] * pred_c(i, j) + input.affine.offset[j];
                }
            }
        }
        if (channel.source == ChannelSource::RawMinusLast) {
            const std::size_t last = x.rows() - 1;
            for (std::size_t i = 0; i < pred_c.rows(); ++i) {
                for (std::size_t j = 0; j < pred_c.cols(); ++j) pred_c(i, j) += x(last, j);
            }
        }
        if (out.pred.empty()) {
            out.pred = std::move(pred_c);
        } else {
            out.pred += pred_c;
        }
    }
    return out;
}

GradientBundle GradientBundle::like(const PipelineModel& model) {
    GradientBundle g;
    for (const auto& p : model.params) {
        ChannelGrads c;
        if (p.has_flow()) c.w = Matrix(p.w.rows(), p.w.cols(), 0.0);
        c.dec_w = Matrix(p.dec_w.rows(), p.dec_w.cols(), 0.0);
        c.dec_b.assign(p.dec_b.size(), 0.0);
        g.channels.push_back(std::move(c));
    }
    return g;
}

void GradientBundle::zero() {
    for (auto& c : channels) {
        c.w.fill(0.0);
        c.dec_w.fill(0.0);
        c.dec_b.assign(c.dec_b.size(), 0.0);
    }
}

void GradientBundle::scale(double a) {
    const auto& k = kernels::active();
    for (auto& c : channels) {
        k.scal(c.w.data(), a, c.w.size());
        k.scal(c.dec_w.data(), a, c.dec_w.size());
        k.scal(c.dec_b.data(), a, c.dec_b.size());
    }
}

void GradientBundle::add(const GradientBundle& o) {
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < channels.size(); ++i) {
        k.axpy(channels[i].w.data(), 1.0, o.channels[i].w.data(), channels[i].w.size());
        k.axpy(channels[i].dec_w.data(), 1.0, o.channels[i].dec_w.data(),
               channels[i].dec_w.size());
        k.axpy(channels[i].dec_b.data(), 1.0, o.channels[i].dec_b.data(),
               channels[i].dec_b.size());
    }
}

bool GradientBundle::finite() const {
    auto ok = [](const double* p, std::size_t n) {
        const double probe = kernels::active().sumsq(p, n);
        return std::isfinite(probe);
    };
    for (const auto& c : channels) {
        if (!ok(c.w.data(), c.w.size()) || !ok(c.dec_w.data(), c.dec_w.size()) ||
            !ok(c.dec_b.data(), c.dec_b.size())) {
            return false;
        }
    }
    return true;
}

BackwardResult backward_window(const PipelineModel& model, const Matrix& x, const Matrix& y,
                               double lambda_k, double lambda_j, const EpsDraws& eps) {
    const auto& spec = model.spec;
    const auto& k = kernels::active();
    const std::size_t n_feat = x.cols();
    const std::size_t lookback = x.rows();
    const std::size_t horizon = y.rows();

    DecomposedWindow d;
    if (spec.use_decomposition) d = decompose(x, spec.decomp);

    const int n_evals = spec.solver.n_steps * spec.solver.evals_per_step();

    // Forward with trajectory capture.
    std::vector<ChannelInput> inputs;
    std::vector<std::vector<ColumnTrace>> traces(spec.channels.size());
    std::vector<TrajectoryStats> stats(spec.channels.size());
    Matrix pred;
    for (std::size_t c = 0; c < spec.channels.size(); ++c) {
        const auto& channel = spec.channels[c];
        inputs.push_back(make_channel_input(channel, spec, x,
                                            spec.use_decomposition ? &d : nullptr));
        const ChannelInput& input = inputs.back();
        const ComponentParams& params = model.params[c];
        Matrix pred_c(horizon, n_feat);
        double kinetic_acc = 0.0;
        for (std::size_t j = 0; j < n_feat; ++j) {
            const Vec z0 = input.values.column(j);
            if (channel.use_flow) {
                traces[c].push_back(trace_forward(params, spec.solver, z0, kinetic_acc));
                pred_c.set_column(j, decode(params, traces[c].back().z_terminal));
            } else {
                ColumnTrace t;
                t.z_terminal = z0;
                traces[c].push_back(std::move(t));
                pred_c.set_column(j, decode(params, z0));
            }
        }
        if (channel.use_flow) {
            stats[c].kinetic = kinetic_acc / static_cast<double>(n_evals);
            if (c < eps.per_channel.size() && !eps.per_channel[c].empty()) {
                Vec v(lookback);
                k.matvec_t(v.data(), params.w.data(), eps.per_channel[c].data(), lookback,
                           lookback);
                stats[c].jacobian =
                    static_cast<double>(n_feat) * std::sqrt(k.sumsq(v.data(), v.size()));
                stats[c].eps_seed = eps.seed;
            }
        }
        if (channel.normalize) {
            for (std::size_t i = 0; i < horizon; ++i) {
                for (std::size_t j = 0; j < n_feat; ++j) {
                    pred_c(i, j) = input.affine.scale[j] * pred_c(i, j) + input.affine.offset[j];
                }
            }
        }
        if (channel.source == ChannelSource::RawMinusLast) {
            for (std::size_t i = 0; i < horizon; ++i) {
                for (std::size_t j = 0; j < n_feat; ++j) pred_c(i, j) += x(lookback - 1, j);
            }
        }
        if (pred.empty()) pred = std::move(pred_c);
        else pred += pred_c;
    }

    const double n_elems = static_cast<double>(horizon * n_feat);
    BackwardResult result;
    result.loss = k.diff_sumsq(pred.data(), y.data(), pred.size()) / n_elems;
    for (const auto& s : stats) {
        result.loss += lambda_k * s.kinetic + lambda_j * s.jacobian;
    }

    // dL/dpred
    Matrix g(horizon, n_feat);
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.data()[i] = 2.0 * (pred.data()[i] - y.data()[i]) / n_elems;
    }

    result.grads = GradientBundle::like(model);
    for (std::size_t c = 0; c < spec.channels.size(); ++c) {
        const auto& channel = spec.channels[c];
        const ComponentParams& params = model.params[c];
        ChannelGrads& grads = result.grads.channels[c];
        const double kcoef = channel.use_flow ? lambda_k / static_cast<double>(n_evals) : 0.0;
        Vec gcol(horizon), adjoint(lookback);
        for (std::size_t j = 0; j < n_feat; ++j) {
            const double slope = channel.normalize ? inputs[c].affine.scale[j] : 1.0;
            for (std::size_t i = 0; i < horizon; ++i) gcol[i] = slope * g(i, j);
            // decoder: pred = dec_w z_T + dec_b
            k.axpy(grads.dec_b.data(), 1.0, gcol.data(), horizon);
            k.ger(grads.dec_w.data(), 1.0, gcol.data(), traces[c][j].z_terminal.data(), horizon,
                  lookback);
            k.matvec_t(adjoint.data(), params.dec_w.data(), gcol.data(), horizon, lookback);
            if (channel.use_flow) {
                trace_backward(params, spec.solver, traces[c][j], kcoef, adjoint, grads.w);
            }
        }
        // Jacobian penalty: lambda_j * F * ||W^T eps|| -> eps (v/||v||)^T.
        if (channel.use_flow && lambda_j != 0.0 && c < eps.per_channel.size() &&
            !eps.per_channel[c].empty()) {
            Vec v(lookback);
            k.matvec_t(v.data(), params.w.data(), eps.per_channel[c].data(), lookback, lookback);
            const double norm = std::sqrt(k.sumsq(v.data(), v.size()));
            if (norm > 1e-300) {
                k.ger(grads.w.data(), lambda_j * static_cast<double>(n_feat) / norm,
                      eps.per_channel[c].data(), v.data(), lookback, lookback);
            }
        }
    }
    if (!result.grads.finite() || !std::isfinite(result.loss)) {
        throw NumericsError("backward: non-finite gradient");
    }
    return result;
}

} // namespace dnode
