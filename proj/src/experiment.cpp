#include "dnode/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "dnode/errors.hpp"

namespace dnode {
namespace {

std::string lowercase_name(const std::string& path) {
    std::string name = std::filesystem::path(path).filename().string();
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return name;
}

bool name_contains(const std::string& path, const std::string& needle) {
    return lowercase_name(path).find(needle) != std::string::npos;
}

} // namespace

std::string to_string(Variant v) {
    switch (v) {
        case Variant::LtsfDnode: return "ltsf_dnode";
        case Variant::Linear: return "linear";
        case Variant::LinearTr: return "linear_tr";
        case Variant::LinearTsr: return "linear_tsr";
        case Variant::NLinear: return "nlinear";
        case Variant::NoDcmp: return "no_dcmp";
        case Variant::NoNorm: return "no_norm";
        case Variant::NoNode: return "no_node";
    }
    return "?";
}

Variant variant_from_string(const std::string& s) {
    if (s == "ltsf_dnode") return Variant::LtsfDnode;
    if (s == "linear") return Variant::Linear;
    if (s == "linear_tr") return Variant::LinearTr;
    if (s == "linear_tsr") return Variant::LinearTsr;
    if (s == "nlinear") return Variant::NLinear;
    if (s == "no_dcmp") return Variant::NoDcmp;
    if (s == "no_norm") return Variant::NoNorm;
    if (s == "no_node") return Variant::NoNode;
    throw ConfigError("unknown variant '" + s + "'");
}

SplitSpec default_split(const std::string& dataset_name) {
    if (name_contains(dataset_name, "ett")) return {0.6, 0.2, 0.2};
    return {0.7, 0.1, 0.2};
}

std::optional<bool> dataset_default_seasonality(const std::string& dataset_name) {
    const std::string n = lowercase_name(dataset_name);
    if (n.find("ett") != std::string::npos || n.find("electricity") != std::string::npos) {
        return true;
    }
    if (n.find("exchange") != std::string::npos || n.find("weather") != std::string::npos ||
        n.find("ili") != std::string::npos || n.find("illness") != std::string::npos) {
        return false;
    }
    return std::nullopt;
}

std::optional<bool> dataset_default_instance_norm(const std::string& dataset_name) {
    const std::string n = lowercase_name(dataset_name);
    if (n.find("etth1") != std::string::npos || n.find("etth2") != std::string::npos ||
        n.find("ettm2") != std::string::npos || n.find("ili") != std::string::npos ||
        n.find("illness") != std::string::npos) {
        return true;
    }
    if (n.find("ettm1") != std::string::npos || n.find("electricity") != std::string::npos ||
        n.find("exchange") != std::string::npos || n.find("weather") != std::string::npos) {
        return false;
    }
    return std::nullopt;
}

PipelineSpec build_pipeline(const ExperimentConfig& config, const EdaReport& eda) {
    const Variant v = config.variant;
    const bool plain = v == Variant::Linear || v == Variant::NLinear;
    if (v == Variant::NoDcmp && (config.kernel || config.period || config.use_seasonality)) {
        throw ConfigError("no_dcmp forbids decomposition overrides");
    }
    if (plain && (config.kernel || config.period || config.use_seasonality ||
                  config.use_instance_norm)) {
        throw ConfigError("linear/nlinear take no decomposition or normalization overrides");
    }
    if (v == Variant::NoNorm && config.use_instance_norm && *config.use_instance_norm) {
        throw ConfigError("no_norm contradicts use_instance_norm=true");
    }

    PipelineSpec spec;
    spec.solver = config.train.solver;
    spec.norm_axis = config.norm_axis;
    spec.decomp.kernel_size = eda.kernel_size;
    spec.decomp.period = eda.period;

    const bool norm = eda.use_instance_norm;
    switch (v) {
        case Variant::Linear:
            spec.channels = {{ChannelSource::Raw, false, false}};
            break;
        case Variant::NLinear:
            spec.channels = {{ChannelSource::RawMinusLast, false, false}};
            break;
        case Variant::NoDcmp:
            spec.channels = {{ChannelSource::Raw, norm, true}};
            break;
        case Variant::LinearTr:
            spec.use_decomposition = true;
            spec.decomp.extract_seasonality = false;
            spec.channels = {{ChannelSource::Trend, false, false},
                             {ChannelSource::Residual, false, false}};
            break;
        case Variant::LinearTsr:
            spec.use_decomposition = true;
            spec.decomp.extract_seasonality = true;
            spec.channels = {{ChannelSource::Trend, false, false},
                             {ChannelSource::Seasonality, false, false},
                             {ChannelSource::Residual, false, false}};
            break;
        case Variant::NoNorm:
        case Variant::NoNode:
        case Variant::LtsfDnode: {
            spec.use_decomposition = true;
            spec.decomp.extract_seasonality = eda.use_seasonality;
            const bool flow = v != Variant::NoNode;
            const bool use_norm = v == Variant::NoNorm ? false : norm;
            spec.channels.push_back({ChannelSource::Trend, use_norm, flow});
            if (eda.use_seasonality) {
                // Seasonality repeats values periodically; it is never normalized.
                spec.channels.push_back({ChannelSource::Seasonality, false, flow});
            }
            spec.channels.push_back({ChannelSource::Residual, use_norm, flow});
            break;
        }
    }
    return spec;
}

namespace {

EdaReport resolve_eda(const Panel& panel, const ExperimentConfig& config,
                      const Panel& train_part, const Panel& test_part) {
    EdaReport eda;
    CandidateGrid grid = config.eda_grid;
    grid.window_length = std::min<int>(grid.window_length, static_cast<int>(panel.n_steps()));
    if (grid.adf_window_length > 0) {
        grid.adf_window_length =
            std::min<int>(grid.adf_window_length, static_cast<int>(panel.n_steps()));
    }

    if (config.kernel && config.period) {
        eda.kernel_size = *config.kernel;
        eda.period = *config.period;
        eda.forecastability = panel_forecastability(panel);
        eda.trend_slope = panel_trend_slope(panel);
        try {
            eda.seasonality_ratio =
                acf_seasonal_ratio(panel, grid.window_length, eda.kernel_size, eda.period);
            eda.stationarity_ratio =
                adf_stationary_ratio(panel,
                                     grid.adf_window_length > 0 ? grid.adf_window_length
                                                                : grid.window_length,
                                     eda.kernel_size, eda.period)
                    .ratio;
        } catch (const EdaError&) {
            // Overridden parameters that the analysis windows cannot host:
            // keep ratios at their defaults, the run itself is unaffected.
        }
        eda.use_seasonality = eda.seasonality_ratio >= grid.seasonality_threshold;
    } else {
        eda = select_parameters(panel, grid);
        if (config.kernel) eda.kernel_size = *config.kernel;
        if (config.period) eda.period = *config.period;
    }

    if (config.use_seasonality) {
        eda.use_seasonality = *config.use_seasonality;
    } else if (auto d = dataset_default_seasonality(config.dataset)) {
        eda.use_seasonality = *d;
    }

    if (config.use_instance_norm) {
        eda.use_instance_norm = *config.use_instance_norm;
    } else if (auto d = dataset_default_instance_norm(config.dataset)) {
        eda.use_instance_norm = *d;
    } else {
        eda.use_instance_norm =
            detect_distribution_shift(train_part, test_part, eda.kernel_size);
    }
    return eda;
}

} // namespace

RunReport run_experiment_on(const Panel& panel, const ExperimentConfig& config) {
    const std::size_t lookback = config.lookback;
    const std::size_t horizon = config.horizon;
    const SplitSpec split_spec = config.split.value_or(default_split(config.dataset));

    auto parts = split(panel, split_spec, lookback + horizon);
    EdaReport eda = resolve_eda(panel, config, parts[0], parts[2]);

    const FeatureStats stats = zscore_fit(parts[0]);
    for (auto& part : parts) zscore_apply(part, stats);

    const auto train_windows = windows(parts[0], lookback, horizon);
    const auto val_windows = windows(parts[1], lookback, horizon);
    const auto test_windows = windows(parts[2], lookback, horizon);

    const PipelineSpec spec = build_pipeline(config, eda);
    Rng init_rng(config.train.seed);
    PipelineModel model = init_pipeline_model(spec, lookback, horizon, init_rng);

    RunReport report;
    report.config = config;
    report.config.split = split_spec;
    report.eda = eda;
    report.pipeline = spec.describe();
    report.parameter_count = model.parameter_count();
    report.train_report = train(model, train_windows, val_windows, config.train);

    EvalAccumulator acc;
    for (const auto& w : test_windows) {
        acc.add(forward_window(model, w.x()).pred, w.y());
    }
    report.eval = acc.result();
    report.train_report.test_mse = report.eval.mse;
    report.train_report.test_mae = report.eval.mae;

    if (!config.output_dir.empty()) write_run_outputs(report, model, config.output_dir);
    return report;
}

RunReport run_experiment(const ExperimentConfig& config) {
    std::string root = config.data_root;
    if (root.empty()) {
        if (const char* env = std::getenv("DNODE_DATA_ROOT")) root = env;
    }
    std::filesystem::path path(config.dataset);
    if (!root.empty() && path.is_relative()) path = std::filesystem::path(root) / path;
    const Panel panel = load_csv(path.string(), config.datetime_column);
    return run_experiment_on(panel, config);
}

Panel synth_generate(const SynthSpec& spec) {
    Panel panel;
    Rng rng(spec.seed);
    const std::size_t shift_start =
        static_cast<std::size_t>(std::ceil(static_cast<double>(spec.length) * (1.0 - spec.shift_frac)));
    panel.values = Matrix(spec.length, spec.features);
    panel.timestamps.resize(spec.length);
    const std::int64_t t0 = 1577836800; // 2020-01-01 00:00:00
    for (std::size_t f = 0; f < spec.features; ++f) {
        panel.feature_names.push_back("s" + std::to_string(f));
    }
    for (std::size_t t = 0; t < spec.length; ++t) {
        panel.timestamps[t] = t0 + static_cast<std::int64_t>(t) * 3600;
        for (std::size_t f = 0; f < spec.features; ++f) {
            const double phase =
                std::numbers::pi * static_cast<double>(f) / static_cast<double>(spec.features);
            double v = spec.trend_slope * static_cast<double>(t) +
                       spec.amplitude *
                           std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / spec.period +
                                    phase) +
                       spec.noise * rng.normal();
            if (spec.level_shift != 0.0 && t >= shift_start) v += spec.level_shift;
            panel.values(t, f) = v;
        }
    }
    return panel;
}

std::vector<RunReport> grid_search(const std::vector<ExperimentConfig>& configs) {
    if (configs.empty()) throw ConfigError("grid_search: no configurations");
    std::vector<std::string> key_order;
    std::vector<RunReport> best;
    for (const auto& config : configs) {
        RunReport report = run_experiment(config);
        const std::string key = config.dataset + "|" + std::to_string(config.horizon);
        auto it = std::find(key_order.begin(), key_order.end(), key);
        if (it == key_order.end()) {
            key_order.push_back(key);
            best.push_back(std::move(report));
        } else {
            auto& incumbent = best[static_cast<std::size_t>(it - key_order.begin())];
            // Selection reads validation MSE only.
            if (report.train_report.best_val() < incumbent.train_report.best_val()) {
                incumbent = std::move(report);
            }
        }
    }
    return best;
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = nlohmann::json{
        {"dataset", c.dataset},
        {"data_root", c.data_root},
        {"datetime_column", c.datetime_column},
        {"lookback", c.lookback},
        {"horizon", c.horizon},
        {"variant", to_string(c.variant)},
        {"kernel", c.kernel ? nlohmann::json(*c.kernel) : nlohmann::json()},
        {"period", c.period ? nlohmann::json(*c.period) : nlohmann::json()},
        {"use_seasonality",
         c.use_seasonality ? nlohmann::json(*c.use_seasonality) : nlohmann::json()},
        {"use_instance_norm",
         c.use_instance_norm ? nlohmann::json(*c.use_instance_norm) : nlohmann::json()},
        {"norm_axis", c.norm_axis == NormAxis::Feature ? "feature" : "time"},
        {"split", c.split ? nlohmann::json{{"train", c.split->train_frac},
                                           {"val", c.split->val_frac},
                                           {"test", c.split->test_frac}}
                          : nlohmann::json()},
        {"eda_grid",
         {{"kernel_sizes", c.eda_grid.kernel_sizes},
          {"periods", c.eda_grid.periods},
          {"window_length", c.eda_grid.window_length},
          {"adf_window_length", c.eda_grid.adf_window_length},
          {"seasonality_threshold", c.eda_grid.seasonality_threshold}}},
        {"train",
         {{"learning_rate", c.train.learning_rate},
          {"batch_size", c.train.batch_size},
          {"max_epochs", c.train.max_epochs},
          {"patience", c.train.patience},
          {"lambda_k", c.train.lambda_k},
          {"lambda_j", c.train.lambda_j},
          {"solver", to_string(c.train.solver.method)},
          {"n_steps", c.train.solver.n_steps},
          {"seed", c.train.seed}}},
        {"output_dir", c.output_dir},
    };
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    c.dataset = j.at("dataset").get<std::string>();
    c.data_root = j.at("data_root").get<std::string>();
    c.datetime_column = j.at("datetime_column").get<std::string>();
    c.lookback = j.at("lookback").get<std::size_t>();
    c.horizon = j.at("horizon").get<std::size_t>();
    c.variant = variant_from_string(j.at("variant").get<std::string>());
    c.kernel = j.at("kernel").is_null() ? std::nullopt
                                        : std::optional<int>(j.at("kernel").get<int>());
    c.period = j.at("period").is_null() ? std::nullopt
                                        : std::optional<int>(j.at("period").get<int>());
    c.use_seasonality = j.at("use_seasonality").is_null()
                            ? std::nullopt
                            : std::optional<bool>(j.at("use_seasonality").get<bool>());
    c.use_instance_norm = j.at("use_instance_norm").is_null()
                              ? std::nullopt
                              : std::optional<bool>(j.at("use_instance_norm").get<bool>());
    c.norm_axis =
        j.at("norm_axis").get<std::string>() == "time" ? NormAxis::Time : NormAxis::Feature;
    if (j.at("split").is_null()) {
        c.split = std::nullopt;
    } else {
        SplitSpec s;
        s.train_frac = j.at("split").at("train").get<double>();
        s.val_frac = j.at("split").at("val").get<double>();
        s.test_frac = j.at("split").at("test").get<double>();
        c.split = s;
    }
    const auto& g = j.at("eda_grid");
    c.eda_grid.kernel_sizes = g.at("kernel_sizes").get<std::vector<int>>();
    c.eda_grid.periods = g.at("periods").get<std::vector<int>>();
    c.eda_grid.window_length = g.at("window_length").get<int>();
    c.eda_grid.adf_window_length = g.at("adf_window_length").get<int>();
    c.eda_grid.seasonality_threshold = g.at("seasonality_threshold").get<double>();
    const auto& t = j.at("train");
    c.train.learning_rate = t.at("learning_rate").get<double>();
    c.train.batch_size = t.at("batch_size").get<int>();
    c.train.max_epochs = t.at("max_epochs").get<int>();
    c.train.patience = t.at("patience").get<int>();
    c.train.lambda_k = t.at("lambda_k").get<double>();
    c.train.lambda_j = t.at("lambda_j").get<double>();
    c.train.solver.method = solver_from_string(t.at("solver").get<std::string>());
    c.train.solver.n_steps = t.at("n_steps").get<int>();
    c.train.seed = t.at("seed").get<std::uint64_t>();
    c.output_dir = j.at("output_dir").get<std::string>();
}

void to_json(nlohmann::json& j, const EdaReport& r) {
    j = nlohmann::json{
        {"forecastability", r.forecastability},
        {"trend_slope", r.trend_slope},
        {"seasonality_ratio", r.seasonality_ratio},
        {"stationarity_ratio", r.stationarity_ratio},
        {"kernel_size", r.kernel_size},
        {"period", r.period},
        {"use_seasonality", r.use_seasonality},
        {"use_instance_norm", r.use_instance_norm},
    };
}

void from_json(const nlohmann::json& j, EdaReport& r) {
    r.forecastability = j.at("forecastability").get<double>();
    r.trend_slope = j.at("trend_slope").get<double>();
    r.seasonality_ratio = j.at("seasonality_ratio").get<double>();
    r.stationarity_ratio = j.at("stationarity_ratio").get<double>();
    r.kernel_size = j.at("kernel_size").get<int>();
    r.period = j.at("period").get<int>();
    r.use_seasonality = j.at("use_seasonality").get<bool>();
    r.use_instance_norm = j.at("use_instance_norm").get<bool>();
}

void to_json(nlohmann::json& j, const RunReport& r) {
    j = nlohmann::json{
        {"config", r.config},
        {"eda", r.eda},
        {"pipeline", r.pipeline},
        {"eval",
         {{"mse", r.eval.mse},
          {"mae", r.eval.mae},
          {"relative_mae", r.eval.relative_mae},
          {"n_windows", r.eval.n_windows}}},
        {"parameter_count", r.parameter_count},
        {"train",
         {{"train_losses", r.train_report.train_losses},
          {"val_losses", r.train_report.val_losses},
          {"best_epoch", r.train_report.best_epoch},
          {"epochs_run", r.train_report.epochs_run},
          {"test_mse", r.train_report.test_mse},
          {"test_mae", r.train_report.test_mae}}},
    };
}

void from_json(const nlohmann::json& j, RunReport& r) {
    r.config = j.at("config").get<ExperimentConfig>();
    r.eda = j.at("eda").get<EdaReport>();
    r.pipeline = j.at("pipeline").get<std::vector<std::string>>();
    r.eval.mse = j.at("eval").at("mse").get<double>();
    r.eval.mae = j.at("eval").at("mae").get<double>();
    r.eval.relative_mae = j.at("eval").at("relative_mae").get<double>();
    r.eval.n_windows = j.at("eval").at("n_windows").get<std::size_t>();
    r.parameter_count = j.at("parameter_count").get<std::size_t>();
    const auto& t = j.at("train");
    r.train_report.train_losses = t.at("train_losses").get<std::vector<double>>();
    r.train_report.val_losses = t.at("val_losses").get<std::vector<double>>();
    r.train_report.best_epoch = t.at("best_epoch").get<int>();
    r.train_report.epochs_run = t.at("epochs_run").get<int>();
    r.train_report.test_mse = t.at("test_mse").get<double>();
    r.train_report.test_mae = t.at("test_mae").get<double>();
}

void write_run_outputs(const RunReport& report, const PipelineModel& model,
                       const std::string& output_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(output_dir);

    {
        std::ofstream out(fs::path(output_dir) / "report.json");
        if (!out) throw ConfigError("cannot write report.json in '" + output_dir + "'");
        out << nlohmann::json(report).dump(2) << '\n';
    }
    {
        std::ofstream out(fs::path(output_dir) / "metrics.csv");
        out << "dataset,variant,lookback,horizon,mse,mae,relative_mae,n_windows,parameters\n";
        char buf[512];
        std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%zu,%.17g,%.17g,%.17g,%zu,%zu\n",
                      report.config.dataset.c_str(), to_string(report.config.variant).c_str(),
                      report.config.lookback, report.config.horizon, report.eval.mse,
                      report.eval.mae, report.eval.relative_mae, report.eval.n_windows,
                      report.parameter_count);
        out << buf;
    }
    {
        std::ofstream out(fs::path(output_dir) / "losses.csv");
        out << "epoch,train_loss,val_loss\n";
        for (std::size_t e = 0; e < report.train_report.train_losses.size(); ++e) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", e,
                          report.train_report.train_losses[e], report.train_report.val_losses[e]);
            out << buf;
        }
    }
    Checkpoint checkpoint;
    for (std::size_t c = 0; c < model.spec.channels.size(); ++c) {
        checkpoint.emplace(to_string(model.spec.channels[c].source), model.params[c]);
    }
    save_checkpoint((fs::path(output_dir) / "checkpoint.json").string(), checkpoint);
}

} // namespace dnode
