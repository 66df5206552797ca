#pragma once

// Forecast error metrics and the multi-pair comparison table.

#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fxcast/models.hpp"
#include "fxcast/pipeline.hpp"

namespace fxcast {

/// Root mean squared error. Throws DimensionError on length mismatch or empty input.
double rmse(std::span<const double> pred, std::span<const double> truth);

/// Mean absolute error.
double mae(std::span<const double> pred, std::span<const double> truth);

/// Mean of |pred - truth| / |truth|, as a fraction. Throws DataError on a zero truth value.
double mape(std::span<const double> pred, std::span<const double> truth);

struct MetricsReport {
    double mae = 0.0;
    double rmse = 0.0;
    double mape = 0.0;  // fraction; multiply by 100 for percent
    std::size_t n = 0;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

MetricsReport compute_metrics(std::span<const double> pred, std::span<const double> truth);

/// Predictions and ground truth of a model on a scaled test set, both in rate units.
struct EvaluatedSeries {
    std::vector<double> predictions;
    std::vector<double> truth;
};

EvaluatedSeries denormalized_predictions(const ModelParams& params, const Scaler& scaler,
                                         const WindowedDataset& test);

/// Metrics in rate units: predictions and labels are unscaled before comparison.
MetricsReport evaluate(const ModelParams& params, const Scaler& scaler, const WindowedDataset& test);

using ComparisonResults = std::map<std::string, std::map<Architecture, MetricsReport>>;

/// Complete grid of metrics keyed by currency pair and model.
class ErrorTable {
public:
    /// Throws DataError listing every missing (pair, model) cell.
    explicit ErrorTable(ComparisonResults results);

    const std::vector<std::string>& pairs() const noexcept { return pairs_; }
    const std::vector<Architecture>& models() const noexcept { return models_; }
    const MetricsReport& at(const std::string& pair, Architecture model) const;
    const ComparisonResults& cells() const noexcept { return cells_; }

    friend bool operator==(const ErrorTable&, const ErrorTable&) = default;

private:
    std::vector<std::string> pairs_;
    std::vector<Architecture> models_;  // LSTM, BP, RNN order, restricted to those present
    ComparisonResults cells_;
};

inline ErrorTable error_table(ComparisonResults results) { return ErrorTable(std::move(results)); }

using FailedCells = std::set<std::pair<std::string, Architecture>>;

/// Table-style text: MAE and RMSE in units of 1e-3, MAPE in percent, grouped by metric.
/// Cells listed in `failed` are printed as FAILED; other missing cells as "-".
std::string render_error_table(const ComparisonResults& results, const FailedCells& failed = {});
std::string render_error_table(const ErrorTable& table);

/// Formats a value the way the text table does: three significant digits.
std::string format_table_value(double value);

/// `pair,model,mae,rmse,mape` with raw values at full precision.
void write_error_table_csv(std::ostream& out, const ComparisonResults& results);
inline void write_error_table_csv(std::ostream& out, const ErrorTable& table) {
    write_error_table_csv(out, table.cells());
}

/// Inverse of write_error_table_csv. `n` is not stored and reads back as 0.
ComparisonResults parse_error_table_csv(std::istream& in);

}  // namespace fxcast
