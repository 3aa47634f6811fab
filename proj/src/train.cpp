#include "dnode/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "dnode/errors.hpp"
#include "dnode/kernels.hpp"

namespace dnode {
namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

} // namespace

double loss(const Matrix& pred, const Matrix& target,
            const std::vector<TrajectoryStats>& stats, double lambda_k, double lambda_j) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw MetricError("loss: shape mismatch");
    }
    double out = kernels::active().diff_sumsq(pred.data(), target.data(), pred.size()) /
                 static_cast<double>(pred.size());
    for (const auto& s : stats) out += lambda_k * s.kinetic + lambda_j * s.jacobian;
    return out;
}

AdamState AdamState::like(const PipelineModel& model) {
    AdamState state;
    const GradientBundle zeros = GradientBundle::like(model);
    state.m = zeros.channels;
    state.v = zeros.channels;
    return state;
}

void adam_step(PipelineModel& model, const GradientBundle& grads, AdamState& state, double lr) {
    const auto& k = kernels::active();
    ++state.t;
    const double bc1 = 1.0 / (1.0 - std::pow(kBeta1, state.t));
    const double bc2 = 1.0 / (1.0 - std::pow(kBeta2, state.t));
    for (std::size_t c = 0; c < model.params.size(); ++c) {
        auto& p = model.params[c];
        auto& m = state.m[c];
        auto& v = state.v[c];
        const auto& g = grads.channels[c];
        k.adam(p.w.data(), m.w.data(), v.w.data(), g.w.data(), p.w.size(), lr, kBeta1, kBeta2,
               kAdamEps, bc1, bc2);
        k.adam(p.dec_w.data(), m.dec_w.data(), v.dec_w.data(), g.dec_w.data(), p.dec_w.size(),
               lr, kBeta1, kBeta2, kAdamEps, bc1, bc2);
        k.adam(p.dec_b.data(), m.dec_b.data(), v.dec_b.data(), g.dec_b.data(), p.dec_b.size(),
               lr, kBeta1, kBeta2, kAdamEps, bc1, bc2);
    }
}

double evaluate_mse(const PipelineModel& model, const std::vector<WindowPair>& wins) {
    if (wins.empty()) throw MetricError("evaluate_mse: no windows");
    double acc = 0.0;
    for (const auto& w : wins) {
        const Matrix pred = forward_window(model, w.x()).pred;
        const Matrix target = w.y();
        acc += kernels::active().diff_sumsq(pred.data(), target.data(), pred.size()) /
               static_cast<double>(pred.size());
    }
    return acc / static_cast<double>(wins.size());
}

TrainReport train(PipelineModel& model, const std::vector<WindowPair>& train_windows,
                  const std::vector<WindowPair>& val_windows, const TrainConfig& config) {
    if (train_windows.empty() || val_windows.empty()) {
        throw ConfigError("train: empty training or validation split");
    }
    const auto t_start = std::chrono::steady_clock::now();
    model.spec.solver = config.solver;

    TrainReport report;
    Rng rng(config.seed);
    AdamState adam = AdamState::like(model);
    std::vector<std::size_t> order(train_windows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<ComponentParams> best_params = model.params;
    double best_val = std::numeric_limits<double>::infinity();
    int since_improvement = 0;
    const std::size_t lookback = train_windows.front().lookback;
    const auto batch = static_cast<std::size_t>(config.batch_size);

    GradientBundle batch_grads = GradientBundle::like(model);
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += batch) {
            const std::size_t end = std::min(begin + batch, order.size());
            batch_grads.zero();
            for (std::size_t i = begin; i < end; ++i) {
                const auto& w = train_windows[order[i]];
                const EpsDraws eps = draw_eps(rng, model.params.size(), lookback);
                BackwardResult bw = backward_window(model, w.x(), w.y(), config.lambda_k,
                                                    config.lambda_j, eps);
                loss_sum += bw.loss;
                batch_grads.add(bw.grads);
            }
            batch_grads.scale(1.0 / static_cast<double>(end - begin));
            adam_step(model, batch_grads, adam, config.learning_rate);
            seen += end - begin;
        }
        report.train_losses.push_back(loss_sum / static_cast<double>(seen));

        const double val = evaluate_mse(model, val_windows);
        report.val_losses.push_back(val);
        report.epochs_run = epoch + 1;
        if (val < best_val) {
            best_val = val;
            report.best_epoch = epoch;
            best_params = model.params;
            since_improvement = 0;
        } else {
            ++since_improvement;
        }
        if (since_improvement >= config.patience) break;
    }

    model.params = std::move(best_params);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

} // namespace dnode
