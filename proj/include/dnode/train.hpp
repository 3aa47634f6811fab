#pragma once

#include <cstdint>
#include <vector>

#include "dnode/data.hpp"
#include "dnode/pipeline.hpp"

namespace dnode {

struct TrainConfig {
    double learning_rate = 0.001;
    int batch_size = 32;
    int max_epochs = 100;
    int patience = 10;          // consecutive epochs without val improvement
    double lambda_k = 0.0;      // kinetic regularizer coefficient
    double lambda_j = 0.0;      // Jacobian regularizer coefficient
    SolverConfig solver;
    std::uint64_t seed = 0;
};

// Regularized training objective: mean squared error plus the per-channel
// kinetic/Jacobian terms.
double loss(const Matrix& pred, const Matrix& target,
            const std::vector<TrajectoryStats>& stats, double lambda_k, double lambda_j);

// Standard Adam (beta1 0.9, beta2 0.999, eps 1e-8) over every parameter
// tensor of the model.
struct AdamState {
    std::vector<ChannelGrads> m, v;
    int t = 0;

    static AdamState like(const PipelineModel& model);
};
void adam_step(PipelineModel& model, const GradientBundle& grads, AdamState& state, double lr);

struct TrainReport {
    std::vector<double> train_losses; // per epoch, regularized
    std::vector<double> val_losses;   // per epoch, plain MSE
    int best_epoch = -1;
    int epochs_run = 0;
    double test_mse = 0.0; // filled in by the harness after evaluation
    double test_mae = 0.0;
    double wall_seconds = 0.0; // never serialized: reports stay byte-reproducible

    double best_val() const { return val_losses[static_cast<std::size_t>(best_epoch)]; }
};

// Minibatch Adam over shuffled training windows with early stopping on the
// validation MSE; the model is left at the best-validation epoch's
// parameters. Deterministic for a fixed config + seed.
TrainReport train(PipelineModel& model, const std::vector<WindowPair>& train_windows,
                  const std::vector<WindowPair>& val_windows, const TrainConfig& config);

// Mean squared error of the model over a set of windows (no regularizers).
double evaluate_mse(const PipelineModel& model, const std::vector<WindowPair>& wins);

} // namespace dnode
