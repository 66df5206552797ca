#include "fxcast/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include <fxcast/errors.hpp>
#include <fxcast/serialize.hpp>

namespace fxcast::cli {

namespace fs = std::filesystem;

ExitCode classify_exception(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e) != nullptr || dynamic_cast<const DimensionError*>(&e) != nullptr) {
        return ExitCode::Usage;
    }
    if (dynamic_cast<const TrainingDiverged*>(&e) != nullptr) {
        return ExitCode::Diverged;
    }
    if (dynamic_cast<const IoError*>(&e) != nullptr || dynamic_cast<const fs::filesystem_error*>(&e) != nullptr) {
        return ExitCode::Io;
    }
    if (dynamic_cast<const DataError*>(&e) != nullptr) {
        return ExitCode::Data;
    }
    return ExitCode::Internal;
}

std::string file_slug(const std::string& pair) {
    std::string slug;
    slug.reserve(pair.size());
    for (char c : pair) {
        const bool safe = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
                          c == '.';
        slug.push_back(safe ? c : '_');
    }
    return slug.empty() ? std::string("pair") : slug;
}

namespace {

PriceSeries load_pair(const ExperimentConfig& cfg, const std::string& pair) {
    const auto it = cfg.sources.find(pair);
    if (it == cfg.sources.end()) {
        throw ConfigError(fmt::format("pair '{}' is not among the configured sources", pair));
    }
    try {
        PriceSeries series = load_price_csv(it->second.string(), pair);
        if (cfg.resample_seconds > 0) {
            series = resample_last(series, cfg.resample_seconds);
        }
        return series;
    } catch (const IoError& e) {
        throw IoError(fmt::format("{}: {}", pair, e.what()));
    } catch (const DataError& e) {
        throw DataError(fmt::format("{} ({}): {}", pair, it->second.string(), e.what()));
    }
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
    }
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream f(path, mode | std::ios::trunc);
    if (!f) {
        throw IoError(fmt::format("cannot write '{}'", path.string()));
    }
    return f;
}

void write_text(const fs::path& path, const std::string& text) {
    auto f = open_out(path, std::ios::out | std::ios::binary);
    f << text;
    if (!f) {
        throw IoError(fmt::format("write to '{}' failed", path.string()));
    }
}

nlohmann::ordered_json metrics_json(const MetricsReport& m) {
    return {{"mae", m.mae}, {"rmse", m.rmse}, {"mape", m.mape}, {"n", m.n}};
}

}  // namespace

PreparedData prepare_pair(const ExperimentConfig& cfg, const std::string& pair) {
    PriceSeries series = load_pair(cfg, pair);
    const auto closes = series.closes();
    const std::size_t cut = split_point(closes.size(), cfg.train_fraction);
    const auto train_part = closes.first(cut);
    const auto test_part = closes.subspan(cut);

    const Scaler scaler = cfg.scaler_scope == ScalerScope::TrainOnly ? fit_scaler(train_part) : fit_scaler(closes);
    try {
        const Vector train_scaled = scaler.scale(train_part);
        const Vector test_scaled = scaler.scale(test_part);
        WindowedDataset train = make_windows(train_scaled.values(), cfg.window_len);
        WindowedDataset test = make_windows(test_scaled.values(), cfg.window_len, cut);
        return PreparedData{std::move(series), scaler, std::move(train), std::move(test)};
    } catch (const DataError& e) {
        throw DataError(fmt::format("{}: {} (series has {} points, split at {})", pair, e.what(), closes.size(), cut));
    }
}

void cmd_stats(const ExperimentConfig& cfg, const StatsOptions& opts, std::ostream& out) {
    if (cfg.sources.empty()) {
        throw ConfigError("no data sources configured");
    }
    std::vector<std::pair<std::string, StatsRow>> rows;
    std::vector<PriceSeries> series;
    for (const auto& [pair, path] : cfg.sources) {  // std::map: lexicographic
        series.push_back(load_pair(cfg, pair));
        if (series.back().empty()) {
            throw DataError(fmt::format("{}: no data after resampling", pair));
        }
        rows.emplace_back(pair, summary_stats(series.back()));
    }

    std::ostringstream csv;
    write_stats_csv(csv, rows);
    ensure_dir(cfg.output_dir);
    write_text(cfg.output_dir / "stats.csv", csv.str());
    if (opts.plot_data) {
        for (const auto& s : series) {
            std::ostringstream body;
            write_series_csv(body, s);
            write_text(cfg.output_dir / (file_slug(s.pair_label()) + "_series.csv"), body.str());
        }
    }
    out << csv.str();
}

TrainArtifacts cmd_train(const ExperimentConfig& cfg, Architecture arch, const std::string& pair,
                         std::ostream& out) {
    const PreparedData data = prepare_pair(cfg, pair);
    const ModelSpec spec = cfg.model_spec(arch);
    const TrainConfig tc = cfg.train_config(arch);
    spec.validate();
    tc.validate();

    TrainResult result = train(spec, tc, data.train, &data.test);
    const MetricsReport metrics = evaluate(result.model.params, data.scaler, data.test);

    ensure_dir(cfg.output_dir);
    const std::string stem = fmt::format("{}_{}", file_slug(pair), to_string(arch));
    TrainArtifacts art;
    art.model_path = cfg.output_dir / (stem + ".model");
    art.loss_path = cfg.output_dir / (stem + "_loss.csv");
    art.manifest_path = cfg.output_dir / (stem + "_manifest.json");
    art.test_metrics = metrics;

    {
        std::ostringstream bytes;
        write_model(bytes, result.model, data.scaler);
        write_text(art.model_path, bytes.str());
    }
    {
        std::ostringstream loss;
        result.history.write_csv(loss);
        write_text(art.loss_path, loss.str());
    }

    nlohmann::ordered_json manifest;
    manifest["config_hash"] = config_hash(cfg);
    manifest["seed"] = cfg.seed;
    manifest["pair"] = pair;
    manifest["architecture"] = to_string(arch);
    manifest["parameters"] = parameter_count(result.model.params);
    manifest["epochs"] = result.history.epochs();
    manifest["train_windows"] = data.train.size();
    manifest["test_windows"] = data.test.size();
    manifest["scaler"] = {{"x_min", data.scaler.x_min()}, {"x_max", data.scaler.x_max()}};
    manifest["final_train_mse"] = result.history.train_mse.empty() ? 0.0 : result.history.train_mse.back();
    manifest["test_metrics"] = metrics_json(metrics);
    manifest["files"] = {{"model", art.model_path.filename().string()},
                         {"loss", art.loss_path.filename().string()}};
    write_text(art.manifest_path, manifest.dump(2) + "\n");

    fmt::print(out, "{} {}: MAE {:.6g} RMSE {:.6g} MAPE {:.4g}% over {} test windows -> {}\n", pair,
               display_name(arch), metrics.mae, metrics.rmse, metrics.mape * 100.0, metrics.n,
               art.model_path.string());
    return art;
}

CompareOutcome cmd_compare(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.sources.empty()) {
        throw ConfigError("no data sources configured");
    }
    if (cfg.architectures.empty()) {
        throw ConfigError("no architectures configured");
    }

    struct Cell {
        std::string pair;
        Architecture arch;
        std::optional<MetricsReport> metrics;
        std::string log;
        std::string error;
    };
    std::vector<Cell> cells;
    for (const auto& [pair, path] : cfg.sources) {
        for (auto arch : cfg.architectures) {
            cells.push_back(Cell{pair, arch, std::nullopt, {}, {}});
        }
    }

    std::size_t jobs = cfg.jobs != 0 ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            Cell& cell = cells[i];
            std::ostringstream log;
            try {
                cell.metrics = cmd_train(cfg, cell.arch, cell.pair, log).test_metrics;
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
            cell.log = log.str();
        }
    };
    std::vector<std::jthread> pool;
    for (std::size_t j = 1; j < jobs; ++j) {
        pool.emplace_back(worker);
    }
    worker();
    pool.clear();

    CompareOutcome outcome;
    for (const auto& cell : cells) {
        out << cell.log;
        if (cell.metrics) {
            outcome.results[cell.pair][cell.arch] = *cell.metrics;
        } else {
            outcome.failed.emplace(cell.pair, cell.arch);
            fmt::print(err, "{} {} failed: {}\n", cell.pair, display_name(cell.arch), cell.error);
        }
    }

    outcome.table_text = render_error_table(outcome.results, outcome.failed);
    std::ostringstream csv;
    write_error_table_csv(csv, outcome.results);
    ensure_dir(cfg.output_dir);
    write_text(cfg.output_dir / "error_table.txt", outcome.table_text);
    write_text(cfg.output_dir / "error_table.csv", csv.str());
    out << outcome.table_text;
    return outcome;
}

double cmd_predict(const fs::path& model_path, std::span<const double> window) {
    const ModelFile file = load_model(model_path.string());
    if (window.size() != file.model.spec.window_len) {
        throw DimensionError(fmt::format("window has {} prices; the model expects window length {}", window.size(),
                                         file.model.spec.window_len));
    }
    return predict(file.model, file.scaler, window);
}

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::optional<std::size_t> jobs;
    bool allow_lr = false;
};

void add_config_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out_dir, "Output directory (overrides the config)");
}

void add_training_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--seed", f.seed, "Experiment seed");
    cmd->add_flag("--allow-lr-outside-paper", f.allow_lr, "Accept learning rates of 0.1 and above");
}

ExperimentConfig resolve_config(const CommonFlags& f) {
    ExperimentConfig cfg = load_config(f.config);
    if (f.seed) cfg.set_seed(*f.seed);
    if (!f.out_dir.empty()) cfg.output_dir = f.out_dir;
    if (f.jobs) cfg.jobs = *f.jobs;
    if (f.allow_lr) cfg.train.allow_lr_outside_paper = true;
    return cfg;
}

Architecture arch_from_flag(const std::string& name) {
    const Architecture arch = parse_architecture(name);
    return arch;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"fxcast: exchange-rate forecasting with RNN, LSTM and BP networks", "fxcast"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "fxcast 0.1.0");

    CommonFlags flags;

    auto* stats = app.add_subcommand("stats", "Summary statistics of every configured pair");
    add_config_flags(stats, flags);
    bool plot_data = false;
    stats->add_flag("--plot-data", plot_data, "Also write <pair>_series.csv for plotting");

    auto* train_cmd = app.add_subcommand("train", "Train one architecture on one pair");
    add_config_flags(train_cmd, flags);
    add_training_flags(train_cmd, flags);
    std::string arch_name;
    std::string pair;
    train_cmd->add_option("--arch", arch_name, "lstm, rnn or bp")->required();
    train_cmd->add_option("--pair", pair, "Pair label from the config (optional with one source)");

    auto* compare = app.add_subcommand("compare", "Train every architecture on every pair and tabulate errors");
    add_config_flags(compare, flags);
    add_training_flags(compare, flags);
    std::vector<std::string> compare_archs;
    std::vector<std::string> compare_pairs;
    compare->add_option("--jobs", flags.jobs, "Parallel training jobs (default: all cores)");
    compare->add_option("--arch", compare_archs, "Restrict to these architectures");
    compare->add_option("--pair", compare_pairs, "Restrict to these pairs");

    auto* predict_cmd = app.add_subcommand("predict", "Predict the next rate from a window of raw prices");
    std::string model_path;
    std::vector<double> window;
    predict_cmd->add_option("--model", model_path, "Model file written by train")->required();
    predict_cmd->add_option("prices", window, "Window of raw prices, oldest first")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : static_cast<int>(ExitCode::Usage);
    }

    try {
        if (*stats) {
            auto cfg = resolve_config(flags);
            cfg.validate();
            cmd_stats(cfg, StatsOptions{plot_data}, out);
        } else if (*train_cmd) {
            auto cfg = resolve_config(flags);
            const Architecture arch = arch_from_flag(arch_name);
            if (pair.empty()) {
                if (cfg.sources.size() != 1) {
                    throw ConfigError("--pair is required when the config has more than one source");
                }
                pair = cfg.sources.begin()->first;
            }
            cfg.validate();
            cmd_train(cfg, arch, pair, out);
        } else if (*compare) {
            auto cfg = resolve_config(flags);
            if (!compare_archs.empty()) {
                cfg.architectures.clear();
                for (const auto& name : compare_archs) {
                    cfg.architectures.push_back(arch_from_flag(name));
                }
            }
            if (!compare_pairs.empty()) {
                decltype(cfg.sources) kept;
                for (const auto& p : compare_pairs) {
                    const auto it = cfg.sources.find(p);
                    if (it == cfg.sources.end()) {
                        throw ConfigError(fmt::format("pair '{}' is not among the configured sources", p));
                    }
                    kept.insert(*it);
                }
                cfg.sources = std::move(kept);
            }
            cfg.validate();
            const auto outcome = cmd_compare(cfg, out, err);
            if (!outcome.failed.empty()) {
                return static_cast<int>(ExitCode::PartialFailure);
            }
        } else if (*predict_cmd) {
            fmt::print(out, "{:.17g}\n", cmd_predict(model_path, window));
        }
    } catch (const std::exception& e) {
        const ExitCode code = classify_exception(e);
        fmt::print(err, "fxcast: {}\n", e.what());
        return static_cast<int>(code);
    }
    return static_cast<int>(ExitCode::Ok);
}

}  // namespace fxcast::cli
