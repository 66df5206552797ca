#pragma once

// Analytic gradients and per-sample gradient descent for the three networks, plus a
// central-difference gradient certifier.
//
// Sign conventions: the feedforward update works with error signals
// E = activation'(I) * (T - O), which point uphill in output space, and ADDS
// learning_rate * E * O_i to each weight. The recurrent networks use gradients of the
// loss 0.5 * (T - y)^2 and SUBTRACT learning_rate * gradient. Both describe the same step;
// mlp_gradients() exposes the feedforward case in gradient form so the two can be compared.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fxcast/models.hpp"
#include "fxcast/pipeline.hpp"

namespace fxcast {

struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t epochs = 50;
    double dropout_rate = 0.1;
    std::uint64_t seed = 0;
    /// Number of trailing time steps gradients flow through; 0 means the whole window.
    std::size_t bptt_horizon = 0;
    bool shuffle_each_epoch = true;
    /// Element-wise clipping of every gradient entry to [-clip_value, clip_value].
    bool clip_gradients = false;
    double clip_value = 5.0;
    /// Learning rates outside (0, 0.1) are rejected unless this is set.
    bool allow_lr_outside_paper = false;

    /// Throws ConfigError.
    void validate() const;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct LossHistory {
    std::vector<double> train_mse;
    std::vector<double> val_mse;  // empty when no validation set was given

    std::size_t epochs() const noexcept { return train_mse.size(); }

    /// `epoch,train_mse,val_mse`; val_mse is left blank when absent.
    void write_csv(std::ostream& out) const;
};

/// Parameter-shaped container of loss derivatives.
struct Gradients {
    ModelParams values;
};

using Rng = std::mt19937_64;

/// Mask with entries 0 (probability `rate`) or 1 / (1 - rate).
Vector dropout_mask(std::size_t n, double rate, Rng& rng);

/// Inverted dropout. Returns `h` unchanged when `training` is false or rate is 0.
Vector apply_dropout(const Vector& h, double rate, Rng& rng, bool training = true);

/// One mask per layer output per time step (a single step for the feedforward net).
DropoutMasks draw_masks(const ModelParams& params, std::size_t steps, double rate, Rng& rng);

/// Error signals E_j for every layer, output layer last.
std::vector<Vector> mlp_error_signals(const MlpParams& p, const MlpForward& fwd, double target,
                                      const DropoutMasks* masks = nullptr);

/// One online update: forward pass, output and hidden errors, then
/// W_ij += rate * E_j * O_i and theta_j += rate * E_j.
MlpParams mlp_backprop_step(MlpParams p, const Vector& x, double target, double learning_rate);

Gradients mlp_gradients(const MlpParams& p, const Vector& x, double target,
                        const DropoutMasks* masks = nullptr);

/// Gradient of 0.5 * (target - prediction)^2 through the unrolled window.
/// `horizon` limits how many trailing steps are back-propagated (0 = all).
Gradients bptt_gradients(const RnnParams& p, std::span<const double> window, double target,
                         std::size_t horizon = 0, const DropoutMasks* masks = nullptr);
Gradients bptt_gradients(const LstmParams& p, std::span<const double> window, double target,
                         std::size_t horizon = 0, const DropoutMasks* masks = nullptr);

/// Dispatches to mlp_gradients or bptt_gradients.
Gradients compute_gradients(const ModelParams& p, std::span<const double> window, double target,
                            std::size_t horizon = 0, const DropoutMasks* masks = nullptr);

/// 0.5 * (target - forward(window))^2, evaluation mode.
double sample_loss(const ModelParams& p, std::span<const double> window, double target);

/// Mean of (label - prediction)^2 over the dataset, evaluation mode.
double dataset_mse(const ModelParams& p, const WindowedDataset& data);

struct TrainResult {
    Model model;
    LossHistory history;
};

/// Online gradient descent from init_params(spec). Throws TrainingDiverged when an epoch's
/// MSE becomes non-finite or exceeds 1e6 times the initial MSE.
TrainResult train(const ModelSpec& spec, const TrainConfig& cfg, const WindowedDataset& data,
                  const WindowedDataset* validation = nullptr);

/// Continues training an existing model.
TrainResult train(Model model, const TrainConfig& cfg, const WindowedDataset& data,
                  const WindowedDataset* validation = nullptr);

struct GradientCheckReport {
    double max_relative_error = 0.0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    std::size_t parameters_checked = 0;
};

/// Arithmetic used for the finite-difference side of gradient_check. The analytic
/// gradients are always float64.
enum class DifferencePrecision {
    /// Loss evaluated by an independent reference forward pass in long double.
    Extended,
    /// Loss evaluated by the production forward pass in double.
    Double,
};

/// Compares every analytic derivative with (L(w+eps) - L(w-eps)) / (2 eps), relative error
/// |a - n| / max(|a|, |n|, 1e-12). Dropout is off and the full window is unrolled.
GradientCheckReport gradient_check(const Model& model, std::span<const double> window, double target,
                                   double eps = 1e-5,
                                   DifferencePrecision precision = DifferencePrecision::Extended);
GradientCheckReport gradient_check(const ModelSpec& spec, std::span<const double> window,
                                   double target, double eps = 1e-5,
                                   DifferencePrecision precision = DifferencePrecision::Extended);

}  // namespace fxcast
