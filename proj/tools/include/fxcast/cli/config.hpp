#pragma once

// Experiment configuration: a versioned JSON document.
//
//   {
//     "version": 1,
//     "sources": { "AUD/USD": "data/audusd.csv", ... },   // pair label -> CSV path
//     "resample_seconds": 300,                             // 0 keeps the raw series
//     "window_len": 10,
//     "train_fraction": 0.8,
//     "scaler_scope": "train_only",                        // or "full_series"
//     "seed": 0,
//     "architectures": ["lstm", "bp", "rnn"],
//     "profile": "paper",                                  // or "desk": base model shapes
//     "models": { "lstm": { "hidden_layers": 2, "hidden_size": 16, ... } },
//     "train": { "learning_rate": 0.01, "epochs": 50, "bptt_horizon": 0,
//                "shuffle_each_epoch": true, "clip_gradients": false,
//                "allow_lr_outside_paper": false },
//     "output_dir": "fxcast-out"
//   }
//
// Every key is optional; unknown keys are rejected. Without "profile" the model shapes are the
// full-size ones (7 x 128) and the scaler is fit on the training side. "profile": "paper" additionally
// switches scaler_scope to full_series unless it is given explicitly; "desk" selects 2 x 16 networks. Relative source paths are resolved
// against the directory holding the config file.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <fxcast/models.hpp>
#include <fxcast/train.hpp>

namespace fxcast::cli {

inline constexpr int kConfigVersion = 1;

enum class ScalerScope { TrainOnly, FullSeries };

struct ExperimentConfig {
    std::map<std::string, std::filesystem::path> sources;
    std::int64_t resample_seconds = 300;
    std::size_t window_len = 10;
    double train_fraction = 0.8;
    ScalerScope scaler_scope = ScalerScope::TrainOnly;
    std::uint64_t seed = 0;
    std::vector<Architecture> architectures{Architecture::Lstm, Architecture::Bp, Architecture::Rnn};
    std::map<Architecture, ModelSpec> models;
    TrainConfig train;
    std::filesystem::path output_dir = "fxcast-out";
    std::size_t jobs = 0;  // 0 = hardware concurrency

    /// Spec used for `arch`, with the shared window length and seed applied.
    ModelSpec model_spec(Architecture arch) const;

    /// Training settings for `arch`; dropout comes from the model spec.
    TrainConfig train_config(Architecture arch) const;

    /// Replaces the experiment seed everywhere it is used.
    void set_seed(std::uint64_t s);

    /// Throws ConfigError.
    void validate() const;
};

/// Parses the JSON document. `base_dir` resolves relative source paths.
ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);

/// Reads a config file, then applies FXCAST_OUT_DIR and FXCAST_JOBS from the environment.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of the fields that affect results (excludes output_dir and jobs).
std::string canonical_json(const ExperimentConfig& cfg);

/// 16 hex digits of FNV-1a 64 over canonical_json().
std::string config_hash(const ExperimentConfig& cfg);

std::string_view to_string(ScalerScope scope) noexcept;

}  // namespace fxcast::cli
