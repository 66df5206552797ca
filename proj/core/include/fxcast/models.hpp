#pragma once

// Parameter containers and forward passes for the three forecasting networks:
// a stacked simple recurrent network, a stacked LSTM and a feedforward (BP) network.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "fxcast/numkit.hpp"
#include "fxcast/pipeline.hpp"

namespace fxcast {

enum class Architecture { Lstm, Bp, Rnn };

/// "lstm", "bp", "rnn".
std::string_view to_string(Architecture arch) noexcept;
/// "LSTM", "BP", "RNN".
std::string_view display_name(Architecture arch) noexcept;
/// Accepts either spelling, case-insensitive; "mlp" is an alias for "bp".
Architecture parse_architecture(std::string_view name);

/// Shape and hyper-parameters of one network.
///
/// `hidden_layers` counts every stacked cell layer, including the one that consumes the
/// raw input. Layer 0 uses `input_activation`, deeper layers `hidden_activation`, and the
/// readout `output_activation`. For the LSTM the gate and cell nonlinearities are fixed
/// (sigmoid / tanh); `input_activation` is applied to the first layer's output before it
/// feeds the next layer and `hidden_activation` is not used.
struct ModelSpec {
    Architecture architecture = Architecture::Lstm;
    std::size_t window_len = 10;
    std::size_t hidden_layers = 7;
    std::size_t hidden_size = 128;
    Activation input_activation = Activation::Relu;
    Activation hidden_activation = Activation::Tanh;
    Activation output_activation = Activation::Linear;
    double dropout_rate = 0.1;
    std::uint64_t seed = 0;

    /// Throws ConfigError.
    void validate() const;

    /// Full-size networks: seven stacked layers of 128 units and a linear readout.
    static ModelSpec paper_profile(Architecture arch);
    /// Small networks (2 layers of 16 units) that train in seconds.
    static ModelSpec desk_profile(Architecture arch);

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Fully connected map from the last hidden state to the scalar prediction.
struct Readout {
    Matrix weights;  // 1 x hidden
    Vector bias;     // 1
    Activation activation = Activation::Linear;
};

struct RnnLayer {
    Matrix input_weights;      // U: hidden x input
    Matrix recurrent_weights;  // W: hidden x hidden
    Vector bias;               // b: hidden
    Activation activation = Activation::Tanh;

    std::size_t hidden_size() const noexcept { return bias.size(); }
    std::size_t input_size() const noexcept { return input_weights.cols(); }
};

struct RnnParams {
    std::vector<RnnLayer> layers;
    Readout readout;
};

/// One LSTM layer. Every gate matrix acts on [h_{t-1}, x_t].
struct LstmLayer {
    Matrix forget_weights, input_weights, candidate_weights, output_weights;  // hidden x (hidden+input)
    Vector forget_bias, input_bias, candidate_bias, output_bias;
    /// Applied to h_t on its way to the next layer; never fed back into the recurrence.
    Activation output_activation = Activation::Linear;

    std::size_t hidden_size() const noexcept { return forget_bias.size(); }
    std::size_t input_size() const noexcept { return forget_weights.cols() - forget_bias.size(); }
};

struct LstmParams {
    std::vector<LstmLayer> layers;
    Readout readout;
};

struct DenseLayer {
    Matrix weights;  // out x in
    Vector bias;     // theta
    Activation activation = Activation::Tanh;
};

/// Feedforward network; the final layer has a single output neuron.
struct MlpParams {
    std::vector<DenseLayer> layers;
};

using ModelParams = std::variant<RnnParams, LstmParams, MlpParams>;

struct Model {
    ModelSpec spec;
    ModelParams params;
};

// ---------------------------------------------------------------------------
// Parameter enumeration: visits every weight and bias array in layer order.
// `fn(name, span)` receives a mutable span for non-const params.

namespace detail {
template <class M, class F>
void visit_readout(M& r, F& fn) {
    fn("readout.weights", r.weights.values());
    fn("readout.bias", r.bias.values());
}
}  // namespace detail

template <class P, class F>
    requires std::same_as<std::remove_const_t<P>, RnnParams>
void for_each_array(P& p, F&& fn) {
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto& layer = p.layers[l];
        const std::string prefix = "layer" + std::to_string(l) + ".";
        fn(prefix + "U", layer.input_weights.values());
        fn(prefix + "W", layer.recurrent_weights.values());
        fn(prefix + "b", layer.bias.values());
    }
    detail::visit_readout(p.readout, fn);
}

template <class P, class F>
    requires std::same_as<std::remove_const_t<P>, LstmParams>
void for_each_array(P& p, F&& fn) {
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto& layer = p.layers[l];
        const std::string prefix = "layer" + std::to_string(l) + ".";
        fn(prefix + "W_f", layer.forget_weights.values());
        fn(prefix + "W_i", layer.input_weights.values());
        fn(prefix + "W_c", layer.candidate_weights.values());
        fn(prefix + "W_o", layer.output_weights.values());
        fn(prefix + "b_f", layer.forget_bias.values());
        fn(prefix + "b_i", layer.input_bias.values());
        fn(prefix + "b_c", layer.candidate_bias.values());
        fn(prefix + "b_o", layer.output_bias.values());
    }
    detail::visit_readout(p.readout, fn);
}

template <class P, class F>
    requires std::same_as<std::remove_const_t<P>, MlpParams>
void for_each_array(P& p, F&& fn) {
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const std::string prefix = "layer" + std::to_string(l) + ".";
        fn(prefix + "W", p.layers[l].weights.values());
        fn(prefix + "theta", p.layers[l].bias.values());
    }
}

template <class F>
void for_each_array(ModelParams& p, F&& fn) {
    std::visit([&](auto& concrete) { for_each_array(concrete, fn); }, p);
}

template <class F>
void for_each_array(const ModelParams& p, F&& fn) {
    std::visit([&](const auto& concrete) { for_each_array(concrete, fn); }, p);
}

std::size_t parameter_count(const ModelParams& p);

/// Copy of `p` with every weight and bias set to zero (activations kept).
template <class P>
P zeros_like(P p) {
    for_each_array(p, [](const std::string&, std::span<double> values) {
        std::fill(values.begin(), values.end(), 0.0);
    });
    return p;
}

// ---------------------------------------------------------------------------
// Dropout masks. mask[layer][t] multiplies the output of `layer` at step t before it
// reaches the next layer (or the readout). Empty means no dropout.

using DropoutMasks = std::vector<std::vector<Vector>>;

// ---------------------------------------------------------------------------
// Simple recurrent network

/// h_t = f(U x_t + W h_{t-1} + b).
Vector rnn_step(const RnnLayer& layer, const Vector& x_t, const Vector& h_prev);

struct RnnTrace {
    std::vector<std::vector<Vector>> inputs;          // [layer][t] input seen by the layer
    std::vector<std::vector<Vector>> preactivations;  // [layer][t] U x + W h + b
    std::vector<std::vector<Vector>> states;          // [layer][t] h_t, t = 0..T (h_0 = 0)
    double readout_preactivation = 0.0;
};

struct RnnForward {
    double prediction = 0.0;
    RnnTrace trace;
};

RnnForward rnn_forward(const RnnParams& p, std::span<const double> window,
                       const DropoutMasks* masks = nullptr);

// ---------------------------------------------------------------------------
// LSTM

struct LstmState {
    Vector h;
    Vector c;

    static LstmState zeros(std::size_t hidden) { return {Vector(hidden), Vector(hidden)}; }
};

/// Intermediate values of one LSTM step, retained for backpropagation.
struct GateCache {
    Vector concat;     // [h_{t-1}, x_t]
    Vector forget;     // f_t
    Vector input;      // i_t
    Vector candidate;  // C~_t
    Vector output;     // o_t
    Vector cell_prev;  // C_{t-1}
    Vector cell;       // C_t
    Vector cell_tanh;  // tanh(C_t)
    Vector hidden;     // h_t
};

std::pair<LstmState, GateCache> lstm_step(const LstmLayer& layer, const Vector& x_t,
                                          const LstmState& state);

struct LstmForward {
    double prediction = 0.0;
    std::vector<std::vector<GateCache>> caches;  // [layer][t-1]
    std::vector<std::vector<Vector>> outputs;    // [layer][t-1] value passed upward
    double readout_preactivation = 0.0;
};

LstmForward lstm_forward(const LstmParams& p, std::span<const double> window,
                         const DropoutMasks* masks = nullptr);

// ---------------------------------------------------------------------------
// Feedforward network

struct MlpForward {
    double prediction = 0.0;
    std::vector<Vector> inputs;   // I_j per layer (pre-activation)
    std::vector<Vector> outputs;  // O_j per layer; outputs[0] is the network input
};

/// I_j = sum_i W_ij O_i + theta_j, O_j = activation(I_j), layer by layer.
MlpForward mlp_forward(const MlpParams& p, const Vector& x, const DropoutMasks* masks = nullptr);

// ---------------------------------------------------------------------------

/// Evaluation-mode forward pass on an already scaled window.
double forward(const ModelParams& p, std::span<const double> scaled_window);

/// Glorot-uniform weights, zero biases, fully determined by spec.seed.
Model init_params(const ModelSpec& spec);

/// unscale(forward(scale(raw_window))). Throws DimensionError on a wrong window length.
double predict(const Model& model, const Scaler& scaler, std::span<const double> raw_window);

}  // namespace fxcast
