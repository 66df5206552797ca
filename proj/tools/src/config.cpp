#include "fxcast/cli/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <fxcast/errors.hpp>

namespace fxcast::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) {
            ok = ok || key == a;
        }
        if (!ok) {
            throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
        }
    }
}

template <class T>
T get_as(const json& obj, const char* key, std::string_view where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(fmt::format("'{}' in {} has the wrong type", key, where));
    }
}

std::size_t get_count(const json& obj, const char* key, std::string_view where) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ConfigError(fmt::format("'{}' in {} must be a non-negative integer", key, where));
    }
    return v.get<std::size_t>();
}

Activation get_activation(const json& obj, const char* key, std::string_view where) {
    return parse_activation(get_as<std::string>(obj, key, where));
}

void apply_model_overrides(ModelSpec& spec, const json& obj, std::size_t window_len) {
    const std::string where = fmt::format("models.{}", to_string(spec.architecture));
    if (!obj.is_object()) {
        throw ConfigError(fmt::format("{} must be an object", where));
    }
    reject_unknown(obj,
                   {"hidden_layers", "hidden_size", "input_activation", "hidden_activation",
                    "output_activation", "dropout_rate", "window_len"},
                   where);
    if (obj.contains("window_len") && get_count(obj, "window_len", where) != window_len) {
        throw ConfigError(fmt::format("{}.window_len must equal the shared window_len {}", where, window_len));
    }
    if (obj.contains("hidden_layers")) spec.hidden_layers = get_count(obj, "hidden_layers", where);
    if (obj.contains("hidden_size")) spec.hidden_size = get_count(obj, "hidden_size", where);
    if (obj.contains("input_activation")) spec.input_activation = get_activation(obj, "input_activation", where);
    if (obj.contains("hidden_activation")) spec.hidden_activation = get_activation(obj, "hidden_activation", where);
    if (obj.contains("output_activation")) spec.output_activation = get_activation(obj, "output_activation", where);
    if (obj.contains("dropout_rate")) spec.dropout_rate = get_as<double>(obj, "dropout_rate", where);
}

void apply_train(TrainConfig& t, const json& obj) {
    constexpr std::string_view where = "train";
    if (!obj.is_object()) {
        throw ConfigError("train must be an object");
    }
    reject_unknown(obj,
                   {"learning_rate", "epochs", "bptt_horizon", "shuffle_each_epoch", "clip_gradients",
                    "clip_value", "allow_lr_outside_paper"},
                   where);
    if (obj.contains("learning_rate")) t.learning_rate = get_as<double>(obj, "learning_rate", where);
    if (obj.contains("epochs")) t.epochs = get_count(obj, "epochs", where);
    if (obj.contains("bptt_horizon")) t.bptt_horizon = get_count(obj, "bptt_horizon", where);
    if (obj.contains("shuffle_each_epoch")) t.shuffle_each_epoch = get_as<bool>(obj, "shuffle_each_epoch", where);
    if (obj.contains("clip_gradients")) t.clip_gradients = get_as<bool>(obj, "clip_gradients", where);
    if (obj.contains("clip_value")) t.clip_value = get_as<double>(obj, "clip_value", where);
    if (obj.contains("allow_lr_outside_paper")) {
        t.allow_lr_outside_paper = get_as<bool>(obj, "allow_lr_outside_paper", where);
    }
}

json spec_json(const ModelSpec& s) {
    return json{{"architecture", to_string(s.architecture)},
                {"window_len", s.window_len},
                {"hidden_layers", s.hidden_layers},
                {"hidden_size", s.hidden_size},
                {"input_activation", to_string(s.input_activation)},
                {"hidden_activation", to_string(s.hidden_activation)},
                {"output_activation", to_string(s.output_activation)},
                {"dropout_rate", s.dropout_rate},
                {"seed", s.seed}};
}

}  // namespace

std::string_view to_string(ScalerScope scope) noexcept {
    return scope == ScalerScope::TrainOnly ? "train_only" : "full_series";
}

ModelSpec ExperimentConfig::model_spec(Architecture arch) const {
    ModelSpec spec;
    if (auto it = models.find(arch); it != models.end()) {
        spec = it->second;
    } else {
        spec = ModelSpec::paper_profile(arch);
    }
    spec.architecture = arch;
    spec.window_len = window_len;
    spec.seed = seed;
    return spec;
}

TrainConfig ExperimentConfig::train_config(Architecture arch) const {
    TrainConfig t = train;
    t.seed = seed;
    t.dropout_rate = model_spec(arch).dropout_rate;
    return t;
}

void ExperimentConfig::set_seed(std::uint64_t s) { seed = s; }

void ExperimentConfig::validate() const {
    if (resample_seconds < 0) {
        throw ConfigError("resample_seconds must be non-negative");
    }
    if (window_len < 1) {
        throw ConfigError("window_len must be at least 1");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError(fmt::format("train_fraction must lie in (0, 1), got {}", train_fraction));
    }
    std::set<std::filesystem::path> seen;
    for (const auto& [pair, path] : sources) {
        if (!seen.insert(path).second) {
            throw ConfigError(fmt::format("source path '{}' is used by more than one pair", path.string()));
        }
    }
    if (architectures.empty()) {
        throw ConfigError("no architectures configured");
    }
    for (auto arch : architectures) {
        model_spec(arch).validate();
        train_config(arch).validate();
    }
}

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
    }
    if (!doc.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    constexpr std::string_view where = "config";
    reject_unknown(doc,
                   {"version", "sources", "resample_seconds", "window_len", "train_fraction", "scaler_scope",
                    "seed", "architectures", "profile", "models", "train", "output_dir"},
                   where);

    if (doc.contains("version") && get_as<int>(doc, "version", where) != kConfigVersion) {
        throw ConfigError(fmt::format("unsupported config version {} (expected {})",
                                      doc["version"].dump(), kConfigVersion));
    }

    ExperimentConfig cfg;
    if (doc.contains("sources")) {
        const auto& src = doc["sources"];
        if (!src.is_object()) {
            throw ConfigError("sources must map pair labels to CSV paths");
        }
        for (const auto& [pair, path] : src.items()) {
            if (!path.is_string()) {
                throw ConfigError(fmt::format("source for '{}' must be a path string", pair));
            }
            std::filesystem::path p = path.get<std::string>();
            if (p.is_relative()) {
                p = base_dir / p;
            }
            cfg.sources[pair] = p.lexically_normal();
        }
    }
    if (doc.contains("resample_seconds")) cfg.resample_seconds = get_as<std::int64_t>(doc, "resample_seconds", where);
    if (doc.contains("window_len")) cfg.window_len = get_count(doc, "window_len", where);
    if (doc.contains("train_fraction")) cfg.train_fraction = get_as<double>(doc, "train_fraction", where);
    if (doc.contains("scaler_scope")) {
        const auto scope = get_as<std::string>(doc, "scaler_scope", where);
        if (scope == "train_only") {
            cfg.scaler_scope = ScalerScope::TrainOnly;
        } else if (scope == "full_series") {
            cfg.scaler_scope = ScalerScope::FullSeries;
        } else {
            throw ConfigError(fmt::format("scaler_scope must be train_only or full_series, got '{}'", scope));
        }
    }
    if (doc.contains("seed")) cfg.seed = get_as<std::uint64_t>(doc, "seed", where);
    if (doc.contains("architectures")) {
        cfg.architectures.clear();
        for (const auto& a : doc["architectures"]) {
            if (!a.is_string()) {
                throw ConfigError("architectures must be a list of names");
            }
            const auto arch = parse_architecture(a.get<std::string>());
            if (std::find(cfg.architectures.begin(), cfg.architectures.end(), arch) != cfg.architectures.end()) {
                throw ConfigError(fmt::format("architecture '{}' listed twice", a.get<std::string>()));
            }
            cfg.architectures.push_back(arch);
        }
    }

    bool desk = false;
    if (doc.contains("profile")) {
        const auto profile = get_as<std::string>(doc, "profile", where);
        if (profile != "paper" && profile != "desk") {
            throw ConfigError(fmt::format("profile must be paper or desk, got '{}'", profile));
        }
        desk = profile == "desk";
        if (!desk && !doc.contains("scaler_scope")) {
            cfg.scaler_scope = ScalerScope::FullSeries;
        }
    }
    for (auto arch : {Architecture::Lstm, Architecture::Bp, Architecture::Rnn}) {
        cfg.models[arch] = desk ? ModelSpec::desk_profile(arch) : ModelSpec::paper_profile(arch);
    }
    if (doc.contains("models")) {
        const auto& models = doc["models"];
        if (!models.is_object()) {
            throw ConfigError("models must be an object keyed by architecture");
        }
        for (const auto& [name, overrides] : models.items()) {
            const auto arch = parse_architecture(name);
            apply_model_overrides(cfg.models[arch], overrides, cfg.window_len);
        }
    }
    if (doc.contains("train")) {
        apply_train(cfg.train, doc["train"]);
    }
    if (doc.contains("output_dir")) {
        std::filesystem::path out = get_as<std::string>(doc, "output_dir", where);
        cfg.output_dir = (out.is_relative() ? base_dir / out : out).lexically_normal();
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    auto base = path.parent_path();
    if (base.empty()) {
        base = ".";
    }
    ExperimentConfig cfg = parse_config(buffer.str(), base);
    if (const char* out = std::getenv("FXCAST_OUT_DIR"); out != nullptr && *out != '\0') {
        cfg.output_dir = out;
    }
    if (const char* jobs = std::getenv("FXCAST_JOBS"); jobs != nullptr && *jobs != '\0') {
        try {
            cfg.jobs = static_cast<std::size_t>(std::stoul(jobs));
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("FXCAST_JOBS must be a non-negative integer, got '{}'", jobs));
        }
    }
    return cfg;
}

std::string canonical_json(const ExperimentConfig& cfg) {
    json doc;
    doc["version"] = kConfigVersion;
    json sources = json::object();
    for (const auto& [pair, path] : cfg.sources) {
        sources[pair] = path.generic_string();
    }
    doc["sources"] = sources;
    doc["resample_seconds"] = cfg.resample_seconds;
    doc["window_len"] = cfg.window_len;
    doc["train_fraction"] = cfg.train_fraction;
    doc["scaler_scope"] = to_string(cfg.scaler_scope);
    doc["seed"] = cfg.seed;
    json archs = json::array();
    json models = json::object();
    for (auto arch : cfg.architectures) {
        archs.push_back(to_string(arch));
        models[std::string(to_string(arch))] = spec_json(cfg.model_spec(arch));
    }
    doc["architectures"] = archs;
    doc["models"] = models;
    const auto& t = cfg.train;
    doc["train"] = json{{"learning_rate", t.learning_rate},
                        {"epochs", t.epochs},
                        {"bptt_horizon", t.bptt_horizon},
                        {"shuffle_each_epoch", t.shuffle_each_epoch},
                        {"clip_gradients", t.clip_gradients},
                        {"clip_value", t.clip_value}};
    return doc.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical_json(cfg)) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return fmt::format("{:016x}", h);
}

}  // namespace fxcast::cli
