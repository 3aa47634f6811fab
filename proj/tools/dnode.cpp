// Command-line harness: eda / decompose / train / evaluate / grid / synth.

#include <cctype>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "dnode/errors.hpp"
#include "dnode/experiment.hpp"
#include "dnode/kernels.hpp"

namespace fs = std::filesystem;
using namespace dnode;

namespace {

std::string resolve_dataset(const std::string& dataset, const std::string& root) {
    fs::path p(dataset);
    if (!root.empty() && p.is_relative()) p = fs::path(root) / p;
    return p.string();
}

std::optional<bool> tri_state(const std::string& v, const std::string& flag) {
    if (v == "auto") return std::nullopt;
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw ConfigError(flag + " must be auto|on|off");
}

std::string format_timestamp(std::int64_t epoch) {
    std::time_t t = static_cast<std::time_t>(epoch);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%d %H:%M:%S", &tm);
    return buf;
}

void write_panel_csv(const Panel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << "date";
    for (const auto& name : panel.feature_names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < panel.n_steps(); ++i) {
        out << format_timestamp(panel.timestamps[i]);
        for (std::size_t j = 0; j < panel.n_features(); ++j) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), ",%.17g", panel.values(i, j));
            out << buf;
        }
        out << '\n';
    }
}

void print_eda_row(const std::string& name, const Panel& panel, const EdaReport& eda) {
    std::printf("dataset            %s\n", name.c_str());
    std::printf("features           %zu\n", panel.n_features());
    std::printf("timesteps          %zu\n", panel.n_steps());
    std::printf("forecastability    %.3f\n", eda.forecastability);
    std::printf("trend              %.2e\n", eda.trend_slope);
    std::printf("kernel size        %d\n", eda.kernel_size);
    std::printf("period             %d\n", eda.period);
    std::printf("seasonality        %.2f%%\n", 100.0 * eda.seasonality_ratio);
    std::printf("stationarity       %.2f%%\n", 100.0 * eda.stationarity_ratio);
    std::printf("use seasonality    %s\n", eda.use_seasonality ? "yes" : "no");
    std::printf("instance norm      %s\n", eda.use_instance_norm ? "yes" : "no");
}

void add_train_options(CLI::App* cmd, ExperimentConfig& config, std::string& seasonality,
                       std::string& instnorm, std::string& axis, std::string& solver) {
    cmd->add_option("--lookback,-L", config.lookback, "look-back window length");
    cmd->add_option("--horizon,-H", config.horizon, "forecasting horizon");
    cmd->add_option("--kernel", [&config](const std::vector<std::string>& v) {
        config.kernel = std::stoi(v.back());
        return true;
    }, "decomposition kernel size override");
    cmd->add_option("--period", [&config](const std::vector<std::string>& v) {
        config.period = std::stoi(v.back());
        return true;
    }, "seasonality period override");
    cmd->add_option("--use-seasonality", seasonality, "auto|on|off")->default_str("auto");
    cmd->add_option("--use-instance-norm", instnorm, "auto|on|off")->default_str("auto");
    cmd->add_option("--norm-axis", axis, "feature|time")->default_str("feature");
    cmd->add_option("--solver", solver, "euler|rk4")->default_str("euler");
    cmd->add_option("--n-steps", config.train.solver.n_steps, "solver steps over [0,1]");
    cmd->add_option("--lr", config.train.learning_rate, "learning rate");
    cmd->add_option("--batch-size", config.train.batch_size, "minibatch size");
    cmd->add_option("--epochs", config.train.max_epochs, "max training epochs");
    cmd->add_option("--patience", config.train.patience, "early-stopping patience");
    cmd->add_option("--lambda-k", config.train.lambda_k, "kinetic regularizer coefficient");
    cmd->add_option("--lambda-j", config.train.lambda_j, "Jacobian regularizer coefficient");
    cmd->add_option("--seed", config.train.seed, "run seed");
    cmd->add_option("--train-frac", [&config](const std::vector<std::string>& v) {
        if (!config.split) config.split = SplitSpec{};
        config.split->train_frac = std::stod(v.back());
        return true;
    }, "train fraction (with --val-frac/--test-frac)");
    cmd->add_option("--val-frac", [&config](const std::vector<std::string>& v) {
        if (!config.split) config.split = SplitSpec{};
        config.split->val_frac = std::stod(v.back());
        return true;
    }, "validation fraction");
    cmd->add_option("--test-frac", [&config](const std::vector<std::string>& v) {
        if (!config.split) config.split = SplitSpec{};
        config.split->test_frac = std::stod(v.back());
        return true;
    }, "test fraction");
}

// Look-back default is 336, except the short weekly ILI data where it is 104.
void apply_ili_lookback_default(const CLI::App& cmd, ExperimentConfig& config) {
    if (cmd.count("--lookback") > 0) return;
    const std::string lower = [&] {
        std::string n = fs::path(config.dataset).filename().string();
        for (auto& c : n) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return n;
    }();
    if (lower.find("ili") != std::string::npos || lower.find("illness") != std::string::npos) {
        config.lookback = 104;
    }
}

void finish_config(ExperimentConfig& config, const std::string& seasonality,
                   const std::string& instnorm, const std::string& axis,
                   const std::string& solver) {
    config.use_seasonality = tri_state(seasonality, "--use-seasonality");
    config.use_instance_norm = tri_state(instnorm, "--use-instance-norm");
    if (axis == "time") config.norm_axis = NormAxis::Time;
    else if (axis == "feature") config.norm_axis = NormAxis::Feature;
    else throw ConfigError("--norm-axis must be feature|time");
    config.train.solver.method = solver_from_string(solver);
}

int run_eda(const std::string& dataset, const std::string& root,
            const std::string& datetime_column, CandidateGrid grid, const std::string& out) {
    const Panel panel = load_csv(resolve_dataset(dataset, root), datetime_column);
    EdaReport eda = select_parameters(panel, grid);
    const SplitSpec split_spec = default_split(dataset);
    auto parts = split(panel, split_spec);
    if (auto d = dataset_default_instance_norm(dataset)) {
        eda.use_instance_norm = *d;
    } else {
        eda.use_instance_norm = detect_distribution_shift(parts[0], parts[2], eda.kernel_size);
    }
    if (auto d = dataset_default_seasonality(dataset)) eda.use_seasonality = *d;
    print_eda_row(dataset, panel, eda);
    if (!out.empty()) {
        std::ofstream f(out);
        f << nlohmann::json(eda).dump(2) << '\n';
        std::printf("wrote %s\n", out.c_str());
    }
    return 0;
}

int run_decompose(const std::string& dataset, const std::string& root,
                  const std::string& datetime_column, int kernel, int period,
                  bool no_seasonality, std::size_t start, std::size_t length,
                  const std::string& out_dir) {
    const Panel panel = load_csv(resolve_dataset(dataset, root), datetime_column);
    if (length == 0) length = panel.n_steps() - start;
    if (start + length > panel.n_steps()) throw ConfigError("window exceeds panel");
    Matrix x(length, panel.n_features());
    for (std::size_t i = 0; i < length; ++i) {
        for (std::size_t j = 0; j < panel.n_features(); ++j) {
            x(i, j) = panel.values(start + i, j);
        }
    }
    DecompConfig config{kernel, period, !no_seasonality};
    const DecomposedWindow d = decompose(x, config);
    fs::create_directories(out_dir);
    auto dump = [&](const Matrix& m, const std::string& name) {
        std::ofstream f(fs::path(out_dir) / (name + ".csv"));
        f << "date";
        for (const auto& fname : panel.feature_names) f << ',' << fname;
        f << '\n';
        for (std::size_t i = 0; i < m.rows(); ++i) {
            f << format_timestamp(panel.timestamps[start + i]);
            for (std::size_t j = 0; j < m.cols(); ++j) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), ",%.17g", m(i, j));
                f << buf;
            }
            f << '\n';
        }
    };
    dump(d.trend, "trend");
    dump(d.seasonality, "seasonality");
    dump(d.residual, "residual");
    std::printf("wrote %s/{trend,seasonality,residual}.csv (%zu rows)\n", out_dir.c_str(), length);
    return 0;
}

int run_train(ExperimentConfig config) {
    if (config.output_dir.empty()) config.output_dir = "runs/latest";
    const RunReport report = run_experiment(config);
    std::printf("%s %s H=%zu  test mse %.6f  mae %.6f  (best epoch %d, %d epochs, params %zu)\n",
                config.dataset.c_str(), to_string(config.variant).c_str(), config.horizon,
                report.eval.mse, report.eval.mae, report.train_report.best_epoch,
                report.train_report.epochs_run, report.parameter_count);
    std::printf("wall %.1fs  outputs in %s\n", report.train_report.wall_seconds,
                config.output_dir.c_str());
    return 0;
}

int run_evaluate(const std::string& run_dir, const std::string& dataset_override,
                 const std::string& root) {
    nlohmann::json j;
    {
        std::ifstream f(fs::path(run_dir) / "report.json");
        if (!f) throw ConfigError("no report.json in '" + run_dir + "'");
        f >> j;
    }
    RunReport report = j.get<RunReport>();
    ExperimentConfig config = report.config;
    if (!dataset_override.empty()) config.dataset = dataset_override;
    if (!root.empty()) config.data_root = root;

    const Panel panel = load_csv(resolve_dataset(config.dataset, config.data_root),
                                 config.datetime_column);
    auto parts = split(panel, config.split.value_or(default_split(config.dataset)),
                       config.lookback + config.horizon);
    const FeatureStats stats = zscore_fit(parts[0]);
    for (auto& part : parts) zscore_apply(part, stats);

    PipelineModel model;
    model.spec = build_pipeline(config, report.eda);
    const Checkpoint checkpoint =
        load_checkpoint((fs::path(run_dir) / "checkpoint.json").string());
    for (const auto& channel : model.spec.channels) {
        auto it = checkpoint.find(to_string(channel.source));
        if (it == checkpoint.end()) throw ConfigError("checkpoint missing component");
        model.params.push_back(it->second);
    }

    EvalAccumulator acc;
    for (const auto& w : windows(parts[2], config.lookback, config.horizon)) {
        acc.add(forward_window(model, w.x()).pred, w.y());
    }
    const EvalResult eval = acc.result();
    std::printf("test mse %.6f  mae %.6f  mape %.6f  over %zu windows\n", eval.mse, eval.mae,
                eval.relative_mae, eval.n_windows);
    return 0;
}

int run_grid(ExperimentConfig base, const std::vector<std::size_t>& horizons,
             const std::vector<double>& lrs, const std::vector<int>& batches,
             const std::vector<double>& lks, const std::vector<double>& ljs,
             const std::string& out_dir) {
    std::vector<ExperimentConfig> configs;
    for (std::size_t h : horizons) {
        for (double lr : lrs) {
            for (int b : batches) {
                for (double lk : lks) {
                    for (double lj : ljs) {
                        ExperimentConfig c = base;
                        c.horizon = h;
                        c.train.learning_rate = lr;
                        c.train.batch_size = b;
                        c.train.lambda_k = lk;
                        c.train.lambda_j = lj;
                        c.output_dir.clear();
                        configs.push_back(std::move(c));
                    }
                }
            }
        }
    }
    fs::create_directories(out_dir);
    std::ofstream grid_csv(fs::path(out_dir) / "grid.csv");
    grid_csv << "dataset,variant,horizon,lr,batch_size,lambda_k,lambda_j,val_mse,test_mse,"
                "test_mae\n";
    std::vector<RunReport> all;
    for (const auto& c : configs) {
        RunReport r = run_experiment(c);
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%g,%d,%g,%g,%.17g,%.17g,%.17g\n",
                      c.dataset.c_str(), to_string(c.variant).c_str(), c.horizon,
                      c.train.learning_rate, c.train.batch_size, c.train.lambda_k,
                      c.train.lambda_j, r.train_report.best_val(), r.eval.mse, r.eval.mae);
        grid_csv << buf;
        grid_csv.flush();
        std::printf("%s", buf);
        all.push_back(std::move(r));
    }
    // Best per horizon by validation MSE.
    for (std::size_t h : horizons) {
        const RunReport* best = nullptr;
        for (const auto& r : all) {
            if (r.config.horizon != h) continue;
            if (!best || r.train_report.best_val() < best->train_report.best_val()) best = &r;
        }
        if (best) {
            std::ofstream f(fs::path(out_dir) / ("best_H" + std::to_string(h) + ".json"));
            f << nlohmann::json(*best).dump(2) << '\n';
            std::printf("H=%zu selected lr=%g batch=%d lambda_k=%g lambda_j=%g  test mse %.6f\n",
                        h, best->config.train.learning_rate, best->config.train.batch_size,
                        best->config.train.lambda_k, best->config.train.lambda_j, best->eval.mse);
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"linear neural-ODE long-term time series forecasting toolkit"};
    app.set_config("--config", "", "read options from an INI file");
    app.require_subcommand(1);
    app.fallthrough();

    std::string data_root;
    if (const char* env = std::getenv("DNODE_DATA_ROOT")) data_root = env;
    app.add_option("--data-root", data_root, "dataset root directory (env DNODE_DATA_ROOT)")
        ->envname("DNODE_DATA_ROOT");
    std::string kernels_backend;
    app.add_option("--kernels", kernels_backend, "force kernel backend: scalar|avx2");

    // eda
    auto* eda_cmd = app.add_subcommand("eda", "dataset statistics and parameter selection");
    std::string eda_data, eda_out, eda_datetime = "date";
    CandidateGrid grid;
    grid.adf_window_length = 720;
    eda_cmd->add_option("--data", eda_data, "dataset CSV")->required();
    eda_cmd->add_option("--datetime-column", eda_datetime, "datetime column name");
    eda_cmd->add_option("--window", grid.window_length, "ACF window length");
    eda_cmd->add_option("--adf-window", grid.adf_window_length, "ADF window length");
    eda_cmd->add_option("--kernels-grid", grid.kernel_sizes, "candidate kernel sizes");
    eda_cmd->add_option("--periods", grid.periods, "candidate periods");
    eda_cmd->add_option("--seasonality-threshold", grid.seasonality_threshold,
                        "use_seasonality cutoff");
    eda_cmd->add_option("--out", eda_out, "write EdaReport JSON here");

    // decompose
    auto* dec_cmd = app.add_subcommand("decompose", "dump trend/seasonality/residual CSVs");
    std::string dec_data, dec_out = "decomposed", dec_datetime = "date";
    int dec_kernel = 25, dec_period = 24;
    bool dec_noseason = false;
    std::size_t dec_start = 0, dec_length = 0;
    dec_cmd->add_option("--data", dec_data, "dataset CSV")->required();
    dec_cmd->add_option("--datetime-column", dec_datetime, "datetime column name");
    dec_cmd->add_option("--kernel", dec_kernel, "moving-average kernel");
    dec_cmd->add_option("--period", dec_period, "seasonality period");
    dec_cmd->add_flag("--no-seasonality", dec_noseason, "skip seasonality extraction");
    dec_cmd->add_option("--start", dec_start, "window start row");
    dec_cmd->add_option("--length", dec_length, "window length (0 = to end)");
    dec_cmd->add_option("--out", dec_out, "output directory");

    // train
    auto* train_cmd = app.add_subcommand("train", "train one configuration");
    ExperimentConfig train_config;
    std::string tr_seasonality = "auto", tr_instnorm = "auto", tr_axis = "feature",
                tr_solver = "euler", tr_variant = "ltsf_dnode";
    train_cmd->add_option("--data", train_config.dataset, "dataset CSV")->required();
    train_cmd->add_option("--datetime-column", train_config.datetime_column,
                          "datetime column name");
    train_cmd->add_option("--variant", tr_variant,
                          "ltsf_dnode|linear|linear_tr|linear_tsr|nlinear|no_dcmp|no_norm|no_node");
    add_train_options(train_cmd, train_config, tr_seasonality, tr_instnorm, tr_axis, tr_solver);
    train_cmd->add_option("--out", train_config.output_dir, "output directory");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "re-evaluate a trained run on test data");
    std::string eval_run, eval_data;
    eval_cmd->add_option("--run-dir", eval_run, "directory written by `train`")->required();
    eval_cmd->add_option("--data", eval_data, "dataset CSV override");

    // grid
    auto* grid_cmd = app.add_subcommand("grid", "hyper-parameter grid search");
    ExperimentConfig grid_config;
    std::string gr_seasonality = "auto", gr_instnorm = "auto", gr_axis = "feature",
                gr_solver = "euler", gr_variant = "ltsf_dnode";
    std::vector<std::size_t> gr_horizons{96};
    std::vector<double> gr_lrs{0.001};
    std::vector<int> gr_batches{32};
    std::vector<double> gr_lk{0.0}, gr_lj{0.0};
    std::string gr_out = "grid_out";
    grid_cmd->add_option("--data", grid_config.dataset, "dataset CSV")->required();
    grid_cmd->add_option("--datetime-column", grid_config.datetime_column,
                         "datetime column name");
    grid_cmd->add_option("--variant", gr_variant, "model variant");
    add_train_options(grid_cmd, grid_config, gr_seasonality, gr_instnorm, gr_axis, gr_solver);
    grid_cmd->add_option("--horizons", gr_horizons, "forecasting horizons");
    grid_cmd->add_option("--lrs", gr_lrs, "learning-rate grid");
    grid_cmd->add_option("--batch-sizes", gr_batches, "batch-size grid");
    grid_cmd->add_option("--lambdas-k", gr_lk, "kinetic coefficient grid");
    grid_cmd->add_option("--lambdas-j", gr_lj, "Jacobian coefficient grid");
    grid_cmd->add_option("--out", gr_out, "output directory");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic panel CSV");
    SynthSpec synth;
    std::string synth_out = "synth.csv";
    synth_cmd->add_option("--length", synth.length, "number of timesteps");
    synth_cmd->add_option("--features", synth.features, "number of features");
    synth_cmd->add_option("--amplitude", synth.amplitude, "sinusoid amplitude");
    synth_cmd->add_option("--period", synth.period, "sinusoid period (steps)");
    synth_cmd->add_option("--trend", synth.trend_slope, "linear trend per step");
    synth_cmd->add_option("--noise", synth.noise, "Gaussian noise stddev");
    synth_cmd->add_option("--shift", synth.level_shift, "level shift in the final fraction");
    synth_cmd->add_option("--shift-frac", synth.shift_frac, "shifted fraction of the series");
    synth_cmd->add_option("--seed", synth.seed, "generator seed");
    synth_cmd->add_option("--out", synth_out, "output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!kernels_backend.empty()) kernels::select(kernels_backend);
        if (eda_cmd->parsed()) return run_eda(eda_data, data_root, eda_datetime, grid, eda_out);
        if (dec_cmd->parsed()) {
            return run_decompose(dec_data, data_root, dec_datetime, dec_kernel, dec_period,
                                 dec_noseason, dec_start, dec_length, dec_out);
        }
        if (train_cmd->parsed()) {
            train_config.data_root = data_root;
            train_config.variant = variant_from_string(tr_variant);
            finish_config(train_config, tr_seasonality, tr_instnorm, tr_axis, tr_solver);
            apply_ili_lookback_default(*train_cmd, train_config);
            return run_train(train_config);
        }
        if (eval_cmd->parsed()) return run_evaluate(eval_run, eval_data, data_root);
        if (grid_cmd->parsed()) {
            grid_config.data_root = data_root;
            grid_config.variant = variant_from_string(gr_variant);
            finish_config(grid_config, gr_seasonality, gr_instnorm, gr_axis, gr_solver);
            apply_ili_lookback_default(*grid_cmd, grid_config);
            return run_grid(grid_config, gr_horizons, gr_lrs, gr_batches, gr_lk, gr_lj, gr_out);
        }
        if (synth_cmd->parsed()) {
            write_panel_csv(synth_generate(synth), synth_out);
            std::printf("wrote %s (%zu rows, %zu features)\n", synth_out.c_str(), synth.length,
                        synth.features);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
