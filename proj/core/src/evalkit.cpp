#include "fxcast/evalkit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "fxcast/errors.hpp"

namespace fxcast {

namespace {

void check_lengths(std::span<const double> pred, std::span<const double> truth, std::string_view metric) {
    if (pred.size() != truth.size()) {
        throw DimensionError(fmt::format("{}: {} predictions but {} true values", metric, pred.size(),
                                         truth.size()));
    }
    if (pred.empty()) {
        throw DimensionError(fmt::format("{}: no samples", metric));
    }
}

constexpr Architecture kModelOrder[] = {Architecture::Lstm, Architecture::Bp, Architecture::Rnn};

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> truth) {
    check_lengths(pred, truth, "rmse");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

double mae(std::span<const double> pred, std::span<const double> truth) {
    check_lengths(pred, truth, "mae");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        acc += std::abs(pred[i] - truth[i]);
    }
    return acc / static_cast<double>(pred.size());
}

double mape(std::span<const double> pred, std::span<const double> truth) {
    check_lengths(pred, truth, "mape");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (truth[i] == 0.0) {
            throw DataError(fmt::format("mape: true value at index {} is zero", i));
        }
        acc += std::abs(pred[i] - truth[i]) / std::abs(truth[i]);
    }
    return acc / static_cast<double>(pred.size());
}

MetricsReport compute_metrics(std::span<const double> pred, std::span<const double> truth) {
    return MetricsReport{mae(pred, truth), rmse(pred, truth), mape(pred, truth), pred.size()};
}

EvaluatedSeries denormalized_predictions(const ModelParams& params, const Scaler& scaler,
                                         const WindowedDataset& test) {
    if (test.empty()) {
        throw DataError("cannot evaluate on an empty test set");
    }
    EvaluatedSeries out;
    out.predictions.reserve(test.size());
    out.truth.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        out.predictions.push_back(scaler.unscale(forward(params, test.features.row(i))));
        out.truth.push_back(scaler.unscale(test.labels[i]));
    }
    return out;
}

MetricsReport evaluate(const ModelParams& params, const Scaler& scaler, const WindowedDataset& test) {
    const auto series = denormalized_predictions(params, scaler, test);
    return compute_metrics(series.predictions, series.truth);
}

// ---------------------------------------------------------------------------

ErrorTable::ErrorTable(ComparisonResults results) : cells_(std::move(results)) {
    std::set<Architecture> present;
    for (const auto& [pair, row] : cells_) {
        pairs_.push_back(pair);
        for (const auto& [model, report] : row) {
            present.insert(model);
        }
    }
    for (auto m : kModelOrder) {
        if (present.contains(m)) {
            models_.push_back(m);
        }
    }
    std::vector<std::string> missing;
    for (const auto& pair : pairs_) {
        for (auto m : models_) {
            if (!cells_.at(pair).contains(m)) {
                missing.push_back(fmt::format("{}/{}", pair, display_name(m)));
            }
        }
    }
    if (!missing.empty()) {
        throw DataError(fmt::format("error table is incomplete; missing cells: {}", fmt::join(missing, ", ")));
    }
    if (pairs_.empty()) {
        throw DataError("error table has no rows");
    }
}

const MetricsReport& ErrorTable::at(const std::string& pair, Architecture model) const {
    return cells_.at(pair).at(model);
}

std::string format_table_value(double value) { return fmt::format("{:.3g}", value); }

std::string render_error_table(const ComparisonResults& results, const FailedCells& failed) {
    std::vector<std::string> pairs;
    std::set<Architecture> present;
    for (const auto& [pair, row] : results) {
        pairs.push_back(pair);
        for (const auto& [m, r] : row) {
            present.insert(m);
        }
    }
    for (const auto& [pair, m] : failed) {
        present.insert(m);
        if (std::find(pairs.begin(), pairs.end(), pair) == pairs.end()) {
            pairs.push_back(pair);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<Architecture> models;
    for (auto m : kModelOrder) {
        if (present.contains(m)) {
            models.push_back(m);
        }
    }

    const std::size_t label_width = std::max<std::size_t>(
        12, pairs.empty() ? 0 : std::max_element(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
                                    return a.size() < b.size();
                                })->size());
    constexpr std::size_t cell = 8;
    const std::size_t group = cell * models.size();

    std::string out;
    out += fmt::format("{:<{}}", "error index", label_width);
    for (const char* title : {"MAE(1e-3)", "RMSE(1e-3)", "MAPE(%)"}) {
        out += fmt::format("|{:^{}}", title, group);
    }
    out += '\n';
    out += fmt::format("{:<{}}", "model", label_width);
    for (int g = 0; g < 3; ++g) {
        out += '|';
        for (auto m : models) {
            out += fmt::format("{:>{}}", display_name(m), cell);
        }
    }
    out += '\n';
    out += std::string(label_width + 3 * (group + 1), '-') + '\n';

    for (const auto& pair : pairs) {
        out += fmt::format("{:<{}}", pair, label_width);
        const auto row_it = results.find(pair);
        for (int g = 0; g < 3; ++g) {
            out += '|';
            for (auto m : models) {
                std::string text = "-";
                if (failed.contains({pair, m})) {
                    text = "FAILED";
                } else if (row_it != results.end()) {
                    if (auto it = row_it->second.find(m); it != row_it->second.end()) {
                        const auto& r = it->second;
                        const double v = g == 0 ? r.mae * 1e3 : g == 1 ? r.rmse * 1e3 : r.mape * 100.0;
                        text = format_table_value(v);
                    }
                }
                out += fmt::format("{:>{}}", text, cell);
            }
        }
        out += '\n';
    }
    return out;
}

std::string render_error_table(const ErrorTable& table) { return render_error_table(table.cells()); }

void write_error_table_csv(std::ostream& out, const ComparisonResults& results) {
    out << "pair,model,mae,rmse,mape\n";
    for (const auto& [pair, row] : results) {
        for (auto m : kModelOrder) {
            if (auto it = row.find(m); it != row.end()) {
                out << fmt::format("{},{},{:.17g},{:.17g},{:.17g}\n", pair, display_name(m), it->second.mae,
                                   it->second.rmse, it->second.mape);
            }
        }
    }
}

ComparisonResults parse_error_table_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    ComparisonResults results;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (!header) {
            if (line != "pair,model,mae,rmse,mape") {
                throw ParseError(line_no, "expected header 'pair,model,mae,rmse,mape'");
            }
            header = true;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() != 5) {
            throw ParseError(line_no, "expected 5 fields");
        }
        MetricsReport r;
        double* targets[] = {&r.mae, &r.rmse, &r.mape};
        for (int k = 0; k < 3; ++k) {
            const auto& f = fields[2 + k];
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), *targets[k]);
            if (ec != std::errc{} || ptr != f.data() + f.size()) {
                throw ParseError(line_no, fmt::format("invalid number '{}'", f));
            }
        }
        Architecture m{};
        try {
            m = parse_architecture(fields[1]);
        } catch (const ConfigError& e) {
            throw ParseError(line_no, e.what());
        }
        results[fields[0]][m] = r;
    }
    return results;
}

}  // namespace fxcast
