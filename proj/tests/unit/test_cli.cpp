#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <unistd.h>

#include <fxcast/errors.hpp>
#include <fxcast/serialize.hpp>

#include "fixtures.hpp"
#include "fxcast/cli/commands.hpp"

using namespace fxcast;
using namespace fxcast::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("fxcast-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_prices(const fs::path& p, const std::vector<double>& closes, std::int64_t step = 60) {
    std::ostringstream out;
    write_series_csv(out, testing::as_series(closes, "X", step));
    write_file(p, out.str());
}

int run_args(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    args.insert(args.begin(), "fxcast");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

/// Config with `pairs` sine-like sources of 5-minute data and tiny desk networks.
fs::path small_experiment(const fs::path& dir, std::vector<std::string> pairs, std::size_t epochs = 2) {
    std::string sources;
    std::uint64_t seed = 1;
    for (const auto& pair : pairs) {
        const std::string file = file_slug(pair) + ".csv";
        write_prices(dir / file, testing::noisy_sine(300, 0.01, seed++), 300);
        sources += (sources.empty() ? "" : ",") + ("\"" + pair + "\":\"" + file + "\"");
    }
    const fs::path cfg = dir / "experiment.json";
    write_file(cfg, "{\"version\":1,\"sources\":{" + sources +
                        "},\"profile\":\"desk\",\"models\":{\"lstm\":{\"hidden_size\":4},\"rnn\":{\"hidden_size\":4},"
                        "\"bp\":{\"hidden_size\":4}},\"train\":{\"epochs\":" +
                        std::to_string(epochs) + "},\"output_dir\":\"out\"}");
    return cfg;
}

}  // namespace

TEST_CASE("config defaults") {
    const auto cfg = parse_config("{}", ".");
    CHECK(cfg.resample_seconds == 300);
    CHECK(cfg.window_len == 10);
    CHECK(cfg.train_fraction == 0.8);
    CHECK(cfg.scaler_scope == ScalerScope::TrainOnly);
    CHECK(cfg.architectures.size() == 3);
    CHECK(cfg.model_spec(Architecture::Lstm) == ModelSpec::paper_profile(Architecture::Lstm));
    CHECK(cfg.train_config(Architecture::Lstm).learning_rate == 0.01);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config parsing") {
    const auto cfg = parse_config(R"({"sources":{"AUD/USD":"data/aud.csv","EUR/USD":"/abs/eur.csv"},
        "profile":"desk","models":{"rnn":{"hidden_size":8,"dropout_rate":0.2}},
        "train":{"epochs":7,"learning_rate":0.02},"seed":9})",
                                  "/cfgdir");
    CHECK(cfg.sources.at("AUD/USD") == fs::path("/cfgdir/data/aud.csv"));
    CHECK(cfg.sources.at("EUR/USD") == fs::path("/abs/eur.csv"));
    const auto rnn = cfg.model_spec(Architecture::Rnn);
    CHECK(rnn.hidden_layers == 2);
    CHECK(rnn.hidden_size == 8);
    CHECK(rnn.seed == 9);
    CHECK(cfg.train_config(Architecture::Rnn).dropout_rate == 0.2);
    CHECK(cfg.train_config(Architecture::Rnn).epochs == 7);
    CHECK(cfg.model_spec(Architecture::Lstm).hidden_size == 16);

    CHECK(parse_config(R"({"profile":"paper"})", ".").scaler_scope == ScalerScope::FullSeries);
    CHECK(parse_config(R"({"profile":"paper","scaler_scope":"train_only"})", ".").scaler_scope ==
          ScalerScope::TrainOnly);

    CHECK_THROWS_AS(parse_config(R"({"sorces":{}})", "."), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"train":{"lr":0.1}})", "."), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"version":2})", "."), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"window_len":"ten"})", "."), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"models":{"lstm":{"window_len":5}}})", "."), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json", "."), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"sources":{"A":"x.csv","B":"x.csv"}})", ".").validate(), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"train":{"learning_rate":0.5}})", ".").validate(), ConfigError);
    CHECK_NOTHROW(parse_config(R"({"train":{"learning_rate":0.5,"allow_lr_outside_paper":true}})", ".").validate());
}

TEST_CASE("config hash tracks meaningful fields only") {
    const auto base = parse_config(R"({"sources":{"A":"a.csv"}})", "/d");
    const auto h = config_hash(base);
    CHECK(h.size() == 16);

    auto same = base;
    same.output_dir = "elsewhere";
    same.jobs = 4;
    CHECK(config_hash(same) == h);

    std::vector<ExperimentConfig> changed(7, base);
    changed[0].set_seed(1);
    changed[1].train.learning_rate = 0.02;
    changed[2].models[Architecture::Lstm].hidden_size = 64;
    changed[3].window_len = 12;
    changed[4].scaler_scope = ScalerScope::FullSeries;
    changed[5].sources["B"] = "b.csv";
    changed[6].resample_seconds = 60;
    for (const auto& c : changed) CHECK(config_hash(c) != h);
}

TEST_CASE("stats command") {
    TempDir tmp;
    ExperimentConfig cfg;
    cfg.output_dir = tmp.path / "out";
    std::ostringstream out;
    CHECK_THROWS_WITH_AS(cmd_stats(cfg, {}, out), "no data sources configured", ConfigError);

    for (const char* pair : {"USD/CHF", "AUD/USD", "USD/CAD", "EUR/USD", "GBP/USD"}) {
        write_prices(tmp.path / (file_slug(pair) + ".csv"), testing::noisy_sine(120, 0.01, pair[0]));
        cfg.sources[pair] = tmp.path / (file_slug(pair) + ".csv");
    }
    cmd_stats(cfg, StatsOptions{true}, out);
    const std::string csv = read_file(cfg.output_dir / "stats.csv");
    CHECK(csv == out.str());
    std::istringstream lines(csv);
    std::string line;
    std::vector<std::string> labels;
    std::getline(lines, line);
    while (std::getline(lines, line)) labels.push_back(line.substr(0, line.find(',')));
    CHECK(labels == std::vector<std::string>{"AUD/USD", "EUR/USD", "GBP/USD", "USD/CAD", "USD/CHF"});
    CHECK(fs::exists(cfg.output_dir / "AUD_USD_series.csv"));

    // 1-minute data resampled to 5 minutes before the statistics are taken.
    const auto raw = load_price_csv(cfg.sources.at("AUD/USD").string());
    const auto expect = summary_stats(resample_last(raw, 300));
    std::ostringstream row;
    std::vector<std::pair<std::string, StatsRow>> one{{"AUD/USD", expect}};
    write_stats_csv(row, one);
    CHECK(csv.find(row.str().substr(row.str().find('\n') + 1)) != std::string::npos);

    cfg.sources["ZZZ/USD"] = tmp.path / "missing.csv";
    CHECK_THROWS_WITH_AS(cmd_stats(cfg, {}, out), doctest::Contains("ZZZ/USD"), IoError);
}

TEST_CASE("train is deterministic and writes its artifacts") {
    TempDir tmp;
    auto cfg = load_config(small_experiment(tmp.path, {"SIN/USD"}));
    std::ostringstream log;
    const auto a = cmd_train(cfg, Architecture::Lstm, "SIN/USD", log);
    const std::string model_bytes = read_file(a.model_path);
    const std::string loss_bytes = read_file(a.loss_path);
    const std::string manifest = read_file(a.manifest_path);
    CHECK(manifest.find(config_hash(cfg)) != std::string::npos);
    CHECK(manifest.find("\"seed\": 0") != std::string::npos);
    CHECK(loss_bytes.rfind("epoch,train_mse,val_mse\n", 0) == 0);

    const auto b = cmd_train(cfg, Architecture::Lstm, "SIN/USD", log);
    CHECK(read_file(b.model_path) == model_bytes);
    CHECK(read_file(b.loss_path) == loss_bytes);
    CHECK(read_file(b.manifest_path) == manifest);

    cfg.set_seed(3);
    cmd_train(cfg, Architecture::Lstm, "SIN/USD", log);
    CHECK(read_file(a.model_path) != model_bytes);
}

TEST_CASE("zero epochs serialises the initial parameters") {
    TempDir tmp;
    auto cfg = load_config(small_experiment(tmp.path, {"SIN/USD"}, 0));
    std::ostringstream log;
    const auto art = cmd_train(cfg, Architecture::Rnn, "SIN/USD", log);
    const auto data = prepare_pair(cfg, "SIN/USD");
    std::ostringstream expect(std::ios::binary);
    write_model(expect, init_params(cfg.model_spec(Architecture::Rnn)), data.scaler);
    CHECK(read_file(art.model_path) == expect.str());
}

TEST_CASE("predict round-trips a trained model") {
    TempDir tmp;
    auto cfg = load_config(small_experiment(tmp.path, {"SIN/USD"}));
    std::ostringstream log;
    const auto art = cmd_train(cfg, Architecture::Bp, "SIN/USD", log);
    const auto data = prepare_pair(cfg, "SIN/USD");
    const auto file = load_model(art.model_path.string());
    const auto closes = data.series.closes().first(10);
    CHECK(cmd_predict(art.model_path, closes) == predict(file.model, file.scaler, closes));

    std::vector<std::string> args{"predict", "--model", art.model_path.string()};
    for (double c : closes) args.push_back(fmt::format("{:.17g}", c));
    std::string out;
    CHECK(run_args(args, &out) == 0);
    CHECK(std::stod(out) == predict(file.model, file.scaler, closes));

    args.pop_back();
    std::string err;
    CHECK(run_args(args, &out, &err) == static_cast<int>(ExitCode::Usage));
    CHECK(err.find("window length 10") != std::string::npos);

    write_file(tmp.path / "bad.model", "FXCMODEL garbage");
    CHECK(run_args({"predict", "--model", (tmp.path / "bad.model").string(), "1", "2"}) ==
          static_cast<int>(ExitCode::Data));
}

TEST_CASE("exit statuses are distinct per failure class") {
    TempDir tmp;
    const auto cfg_path = small_experiment(tmp.path, {"SIN/USD"});
    CHECK(run_args({"train", "--config", cfg_path.string(), "--arch", "lstm"}) == 0);
    CHECK(run_args({"train", "--config", cfg_path.string(), "--arch", "gru"}) == static_cast<int>(ExitCode::Usage));
    CHECK(run_args({"bogus"}) == static_cast<int>(ExitCode::Usage));
    CHECK(run_args({"stats", "--config", (tmp.path / "nope.json").string()}) == static_cast<int>(ExitCode::Usage));

    write_file(tmp.path / "bad.csv", "timestamp,close\n2017-01-04T00:00:00Z,abc\n");
    write_file(tmp.path / "bad.json", R"({"sources":{"BAD/USD":"bad.csv"}})");
    std::string err;
    CHECK(run_args({"stats", "--config", (tmp.path / "bad.json").string()}, nullptr, &err) ==
          static_cast<int>(ExitCode::Data));
    CHECK(err.find("line 2") != std::string::npos);

    write_file(tmp.path / "gone.json", R"({"sources":{"GONE/USD":"gone.csv"}})");
    CHECK(run_args({"stats", "--config", (tmp.path / "gone.json").string()}) == static_cast<int>(ExitCode::Io));

    write_file(tmp.path / "hot.json", R"({"sources":{"SIN/USD":"SIN_USD.csv"},"profile":"desk",
        "architectures":["rnn"],"train":{"learning_rate":1e6,"epochs":3},"output_dir":"hot"})");
    CHECK(run_args({"train", "--config", (tmp.path / "hot.json").string(), "--arch", "rnn"}) ==
          static_cast<int>(ExitCode::Usage));
    CHECK(run_args({"train", "--config", (tmp.path / "hot.json").string(), "--arch", "rnn",
                    "--allow-lr-outside-paper"}) == static_cast<int>(ExitCode::Diverged));
}

TEST_CASE("compare: smoke, determinism, partial failure") {
    TempDir tmp;
    const auto cfg_path = small_experiment(tmp.path, {"SIN/USD"});
    std::string out;
    CHECK(run_args({"compare", "--config", cfg_path.string(), "--jobs", "2"}, &out) == 0);
    const fs::path out_dir = tmp.path / "out";
    const std::string csv = read_file(out_dir / "error_table.csv");
    std::istringstream in(csv);
    const auto parsed = parse_error_table_csv(in);
    REQUIRE(parsed.at("SIN/USD").size() == 3);
    for (const auto& [arch, m] : parsed.at("SIN/USD")) {
        CHECK(std::isfinite(m.mae));
        CHECK(std::isfinite(m.rmse));
        CHECK(std::isfinite(m.mape));
    }
    const std::string table = read_file(out_dir / "error_table.txt");
    CHECK(run_args({"compare", "--config", cfg_path.string(), "--jobs", "1"}) == 0);
    CHECK(read_file(out_dir / "error_table.txt") == table);
    CHECK(read_file(out_dir / "error_table.csv") == csv);

    write_prices(tmp.path / "short.csv", testing::noisy_sine(20, 0.01, 1), 300);
    auto cfg = load_config(cfg_path);
    cfg.sources["TINY/USD"] = tmp.path / "short.csv";
    std::ostringstream o, e;
    const auto outcome = cmd_compare(cfg, o, e);
    CHECK(outcome.failed.size() == 3);
    CHECK(outcome.results.at("SIN/USD").size() == 3);
    CHECK(outcome.table_text.find("FAILED") != std::string::npos);
    CHECK(e.str().find("TINY/USD") != std::string::npos);
}

TEST_CASE("file slugs") {
    CHECK(file_slug("AUD/USD") == "AUD_USD");
    CHECK(file_slug("a b:c") == "a_b_c");
}
