#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnode/eda.hpp"
#include "dnode/metrics.hpp"
#include "dnode/pipeline.hpp"
#include "dnode/train.hpp"

namespace dnode {

// Model variants of the experiment harness. ltsf_dnode is the full
// pipeline; the others are the baselines and ablations.
enum class Variant {
    LtsfDnode, // decomposition + instance norm + ODE flow per component
    Linear,    // one shared L -> H linear map
    LinearTr,  // trend/residual decomposition, linear per component
    LinearTsr, // trend/seasonality/residual, linear per component
    NLinear,   // subtract last value, linear, add back
    NoDcmp,    // ODE flow on the raw window (+ optional norm)
    NoNorm,    // decomposition + ODE flow, never normalized
    NoNode,    // decomposition + norm, direct linear per component
};

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct ExperimentConfig {
    std::string dataset;                 // CSV path, resolved against data_root
    std::string data_root;               // defaults to $DNODE_DATA_ROOT
    std::string datetime_column = "date";
    std::size_t lookback = 336;          // 104 for ILI
    std::size_t horizon = 96;
    Variant variant = Variant::LtsfDnode;

    // EDA overrides; unset fields are filled by analysis / dataset defaults.
    std::optional<int> kernel;
    std::optional<int> period;
    std::optional<bool> use_seasonality;
    std::optional<bool> use_instance_norm;
    NormAxis norm_axis = NormAxis::Feature;

    std::optional<SplitSpec> split; // unset: 0.6/0.2/0.2 for ETT data, else 0.7/0.1/0.2
    CandidateGrid eda_grid;
    TrainConfig train;
    std::string output_dir;
};

struct RunReport {
    ExperimentConfig config;
    EdaReport eda;
    std::vector<std::string> pipeline; // ordered block list
    EvalResult eval;
    std::size_t parameter_count = 0;
    TrainReport train_report;
};

// Split-ratio convention of the Linear-baseline literature: 0.6/0.2/0.2 for
// the ETT family, 0.7/0.1/0.2 otherwise.
SplitSpec default_split(const std::string& dataset_name);

// Paper protocol defaults keyed by dataset file name; nullopt for unknown
// datasets (EDA then decides).
std::optional<bool> dataset_default_seasonality(const std::string& dataset_name);
std::optional<bool> dataset_default_instance_norm(const std::string& dataset_name);

// Assemble the block list for a variant. Throws ConfigError on
// contradictory flags (e.g. decomposition overrides on no_dcmp, norm
// overrides on variants that never normalize).
PipelineSpec build_pipeline(const ExperimentConfig& config, const EdaReport& eda);

// EDA -> split -> z-score -> train -> evaluate on the test windows.
RunReport run_experiment(const ExperimentConfig& config);
// Same, on an already-loaded panel (synthetic and test use).
RunReport run_experiment_on(const Panel& panel, const ExperimentConfig& config);

// Deterministic synthetic panel: linear trend + sinusoid + Gaussian noise,
// optional common level shift over the final fraction of the series.
struct SynthSpec {
    std::size_t length = 2000;
    std::size_t features = 3;
    double amplitude = 1.0;
    double period = 24.0;
    double trend_slope = 0.0;  // per step
    double noise = 0.1;
    double level_shift = 0.0;  // added to every feature
    double shift_frac = 0.2;   // final fraction of the series that is shifted
    std::uint64_t seed = 0;
};
Panel synth_generate(const SynthSpec& spec);

// Runs every config and keeps, per (dataset, horizon), the one with the
// lowest validation MSE. Test metrics are reported only for the selected
// config; selection never reads them.
std::vector<RunReport> grid_search(const std::vector<ExperimentConfig>& configs);

// JSON round-trips (report.json is byte-reproducible for a fixed
// config+seed: wall-clock time is deliberately not serialized).
void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);
void to_json(nlohmann::json& j, const EdaReport& r);
void from_json(const nlohmann::json& j, EdaReport& r);
void to_json(nlohmann::json& j, const RunReport& r);
void from_json(const nlohmann::json& j, RunReport& r);

void write_run_outputs(const RunReport& report, const PipelineModel& model,
                       const std::string& output_dir);

} // namespace dnode
