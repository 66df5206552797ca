#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include <fxcast/dataio.hpp>
#include <fxcast/evalkit.hpp>
#include <fxcast/models.hpp>
#include <fxcast/pipeline.hpp>
#include <fxcast/train.hpp>

#include "fxcast/cli/config.hpp"

namespace fxcast::cli {

/// Process exit statuses.
enum class ExitCode : int {
    Ok = 0,
    Internal = 1,
    Usage = 2,  // bad arguments or config
    Data = 3,   // unreadable, malformed or insufficient data; corrupt model file
    Diverged = 4,
    Io = 5,
    PartialFailure = 6,  // compare finished but some cells failed
};

/// Maps an in-flight exception to its exit status.
ExitCode classify_exception(const std::exception& e) noexcept;

/// One pair's series after resampling, split and scaling.
struct PreparedData {
    PriceSeries series;
    Scaler scaler;
    WindowedDataset train;
    WindowedDataset test;
};

PreparedData prepare_pair(const ExperimentConfig& cfg, const std::string& pair);

/// "AUD/USD" -> "AUD_USD"; keeps only characters safe in file names.
std::string file_slug(const std::string& pair);

struct StatsOptions {
    bool plot_data = false;
};

/// Writes <out>/stats.csv (and <out>/<pair>_series.csv with plot_data) and echoes the
/// stats CSV to `out`.
void cmd_stats(const ExperimentConfig& cfg, const StatsOptions& opts, std::ostream& out);

struct TrainArtifacts {
    std::filesystem::path model_path;
    std::filesystem::path loss_path;
    std::filesystem::path manifest_path;
    MetricsReport test_metrics;
};

/// Trains one (architecture, pair) cell and writes its model, loss history and manifest.
TrainArtifacts cmd_train(const ExperimentConfig& cfg, Architecture arch, const std::string& pair,
                         std::ostream& out);

struct CompareOutcome {
    ComparisonResults results;
    FailedCells failed;
    std::string table_text;
};

/// Trains every (architecture, pair) cell on up to cfg.jobs threads, then writes
/// <out>/error_table.txt and <out>/error_table.csv.
CompareOutcome cmd_compare(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

/// Loads a model file and predicts the next rate from `window` raw prices.
double cmd_predict(const std::filesystem::path& model_path, std::span<const double> window);

/// Full command-line entry point; returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fxcast::cli
