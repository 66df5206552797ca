#include "fxcast/models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "fxcast/errors.hpp"

namespace fxcast {

std::string_view to_string(Architecture arch) noexcept {
    switch (arch) {
        case Architecture::Lstm: return "lstm";
        case Architecture::Bp: return "bp";
        case Architecture::Rnn: return "rnn";
    }
    return "unknown";
}

std::string_view display_name(Architecture arch) noexcept {
    switch (arch) {
        case Architecture::Lstm: return "LSTM";
        case Architecture::Bp: return "BP";
        case Architecture::Rnn: return "RNN";
    }
    return "UNKNOWN";
}

Architecture parse_architecture(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "lstm") return Architecture::Lstm;
    if (lower == "bp" || lower == "mlp") return Architecture::Bp;
    if (lower == "rnn") return Architecture::Rnn;
    throw ConfigError(fmt::format("unknown architecture '{}' (expected lstm, rnn or bp)", name));
}

void ModelSpec::validate() const {
    if (window_len < 1) {
        throw ConfigError("window_len must be at least 1");
    }
    if (hidden_size < 1) {
        throw ConfigError("hidden_size must be at least 1");
    }
    if (architecture != Architecture::Bp && hidden_layers < 1) {
        throw ConfigError(fmt::format("{} needs at least one hidden layer", display_name(architecture)));
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw ConfigError(fmt::format("dropout_rate must lie in [0, 1), got {}", dropout_rate));
    }
}

ModelSpec ModelSpec::paper_profile(Architecture arch) {
    ModelSpec s;
    s.architecture = arch;
    s.window_len = 10;
    s.hidden_layers = 7;
    s.hidden_size = 128;
    s.input_activation = arch == Architecture::Lstm ? Activation::Relu : Activation::Tanh;
    s.hidden_activation = Activation::Tanh;
    s.output_activation = Activation::Linear;
    s.dropout_rate = 0.1;
    return s;
}

ModelSpec ModelSpec::desk_profile(Architecture arch) {
    ModelSpec s = paper_profile(arch);
    s.hidden_layers = 2;
    s.hidden_size = 16;
    return s;
}

std::size_t parameter_count(const ModelParams& p) {
    std::size_t n = 0;
    for_each_array(p, [&](const std::string&, std::span<const double> v) { n += v.size(); });
    return n;
}

namespace {

// Message is only built on failure.
#define FXCAST_REQUIRE(cond, ...)                                  \
    do {                                                           \
        if (!(cond)) {                                             \
            throw DimensionError(fmt::format(__VA_ARGS__));        \
        }                                                          \
    } while (false)

double apply_readout(const Readout& r, const Vector& h, double& preactivation) {
    FXCAST_REQUIRE(r.weights.cols() == h.size() && r.weights.rows() == 1 && r.bias.size() == 1,
            "readout {} does not match hidden state of length {}",
                        shape_string(r.weights), h.size());
    const auto w = r.weights.row(0);
    double acc = r.bias[0];
    for (std::size_t k = 0; k < w.size(); ++k) {
        acc += w[k] * h[k];
    }
    preactivation = acc;
    return activate(r.activation, preactivation);
}

const Vector* mask_for(const DropoutMasks* masks, std::size_t layer, std::size_t t) {
    if (masks == nullptr || masks->empty()) {
        return nullptr;
    }
    return &(*masks)[layer][t];
}

}  // namespace

// ---------------------------------------------------------------------------

Vector rnn_step(const RnnLayer& layer, const Vector& x_t, const Vector& h_prev) {
    const std::size_t hidden = layer.hidden_size();
    FXCAST_REQUIRE(layer.input_weights.rows() == hidden && layer.recurrent_weights.rows() == hidden &&
                layer.recurrent_weights.cols() == hidden,
            "rnn layer shapes U {} W {} b {} disagree", shape_string(layer.input_weights),
                        shape_string(layer.recurrent_weights), hidden);
    FXCAST_REQUIRE(h_prev.size() == hidden,
            "rnn_step: h_prev has length {}, hidden size is {}", h_prev.size(), hidden);
    Vector a = matvec(layer.input_weights, x_t);
    axpy(a, matvec(layer.recurrent_weights, h_prev));
    axpy(a, layer.bias);
    return activate(layer.activation, a);
}

RnnForward rnn_forward(const RnnParams& p, std::span<const double> window, const DropoutMasks* masks) {
    FXCAST_REQUIRE(!window.empty(), "rnn_forward: empty window");
    FXCAST_REQUIRE(!p.layers.empty(), "rnn_forward: no layers");
    const std::size_t steps = window.size();
    const std::size_t depth = p.layers.size();

    RnnForward out;
    auto& tr = out.trace;
    tr.inputs.assign(depth, {});
    tr.preactivations.assign(depth, {});
    tr.states.assign(depth, {});

    std::vector<Vector> below(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        below[t] = Vector{window[t]};
    }
    for (std::size_t l = 0; l < depth; ++l) {
        const auto& layer = p.layers[l];
        FXCAST_REQUIRE(layer.input_size() == below[0].size(),
                "rnn layer {} expects input of length {}, got {}", l, layer.input_size(),
                            below[0].size());
        Vector h(layer.hidden_size());
        tr.states[l].push_back(h);
        for (std::size_t t = 0; t < steps; ++t) {
            Vector a = matvec(layer.input_weights, below[t]);
            axpy(a, matvec(layer.recurrent_weights, h));
            axpy(a, layer.bias);
            h = activate(layer.activation, a);
            tr.inputs[l].push_back(below[t]);
            tr.preactivations[l].push_back(std::move(a));
            tr.states[l].push_back(h);
        }
        for (std::size_t t = 0; t < steps; ++t) {
            const Vector* m = mask_for(masks, l, t);
            below[t] = m ? hadamard(tr.states[l][t + 1], *m) : tr.states[l][t + 1];
        }
    }
    out.prediction = apply_readout(p.readout, below[steps - 1], tr.readout_preactivation);
    return out;
}

// ---------------------------------------------------------------------------

std::pair<LstmState, GateCache> lstm_step(const LstmLayer& layer, const Vector& x_t,
                                          const LstmState& state) {
    const std::size_t hidden = layer.hidden_size();
    FXCAST_REQUIRE(state.h.size() == hidden && state.c.size() == hidden,
            "lstm_step: state lengths ({}, {}) do not match hidden size {}", state.h.size(),
                        state.c.size(), hidden);
    FXCAST_REQUIRE(layer.forget_weights.cols() == hidden + x_t.size(),
            "lstm_step: gate matrix {} cannot take [h, x] of length {}",
                        shape_string(layer.forget_weights), hidden + x_t.size());

    GateCache g;
    g.concat = concat(state.h, x_t);
    g.forget = Vector(hidden);
    g.input = Vector(hidden);
    g.candidate = Vector(hidden);
    g.output = Vector(hidden);
    g.cell = Vector(hidden);
    g.cell_tanh = Vector(hidden);
    g.hidden = Vector(hidden);
    g.cell_prev = state.c;
    const auto z = g.concat.values();
    for (std::size_t k = 0; k < hidden; ++k) {
        const double af = dot_span(layer.forget_weights.row(k), z) + layer.forget_bias[k];
        const double ai = dot_span(layer.input_weights.row(k), z) + layer.input_bias[k];
        const double ac = dot_span(layer.candidate_weights.row(k), z) + layer.candidate_bias[k];
        const double ao = dot_span(layer.output_weights.row(k), z) + layer.output_bias[k];
        g.forget[k] = sigmoid(af);
        g.input[k] = sigmoid(ai);
        g.candidate[k] = std::tanh(ac);
        g.output[k] = sigmoid(ao);
        g.cell[k] = g.forget[k] * state.c[k] + g.input[k] * g.candidate[k];
        g.cell_tanh[k] = std::tanh(g.cell[k]);
        g.hidden[k] = g.output[k] * g.cell_tanh[k];
    }
    LstmState next{g.hidden, g.cell};
    return {std::move(next), std::move(g)};
}

LstmForward lstm_forward(const LstmParams& p, std::span<const double> window, const DropoutMasks* masks) {
    FXCAST_REQUIRE(!window.empty(), "lstm_forward: empty window");
    FXCAST_REQUIRE(!p.layers.empty(), "lstm_forward: no layers");
    const std::size_t steps = window.size();
    const std::size_t depth = p.layers.size();

    LstmForward out;
    out.caches.assign(depth, {});
    out.outputs.assign(depth, {});

    std::vector<Vector> below(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        below[t] = Vector{window[t]};
    }
    for (std::size_t l = 0; l < depth; ++l) {
        const auto& layer = p.layers[l];
        FXCAST_REQUIRE(layer.input_size() == below[0].size(),
                "lstm layer {} expects input of length {}, got {}", l, layer.input_size(),
                            below[0].size());
        auto state = LstmState::zeros(layer.hidden_size());
        out.caches[l].reserve(steps);
        for (std::size_t t = 0; t < steps; ++t) {
            auto [next, cache] = lstm_step(layer, below[t], state);
            state = std::move(next);
            out.caches[l].push_back(std::move(cache));
        }
        for (std::size_t t = 0; t < steps; ++t) {
            Vector v = activate(layer.output_activation, out.caches[l][t].hidden);
            if (const Vector* m = mask_for(masks, l, t)) {
                v = hadamard(v, *m);
            }
            out.outputs[l].push_back(v);
            below[t] = std::move(v);
        }
    }
    out.prediction = apply_readout(p.readout, below[steps - 1], out.readout_preactivation);
    return out;
}

// ---------------------------------------------------------------------------

MlpForward mlp_forward(const MlpParams& p, const Vector& x, const DropoutMasks* masks) {
    FXCAST_REQUIRE(!p.layers.empty(), "mlp_forward: no layers");
    MlpForward out;
    out.outputs.push_back(x);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& layer = p.layers[l];
        FXCAST_REQUIRE(layer.bias.size() == layer.weights.rows(),
                "mlp layer {}: weights {} but bias of length {}", l,
                            shape_string(layer.weights), layer.bias.size());
        Vector in = matvec(layer.weights, out.outputs.back());
        axpy(in, layer.bias);
        Vector o = activate(layer.activation, in);
        if (l + 1 < p.layers.size()) {
            if (const Vector* m = mask_for(masks, l, 0)) {
                o = hadamard(o, *m);
            }
        }
        out.inputs.push_back(std::move(in));
        out.outputs.push_back(std::move(o));
    }
    FXCAST_REQUIRE(out.outputs.back().size() == 1,
            "mlp output layer has {} neurons, expected 1", out.outputs.back().size());
    out.prediction = out.outputs.back()[0];
    return out;
}

// ---------------------------------------------------------------------------

double forward(const ModelParams& p, std::span<const double> scaled_window) {
    return std::visit(
        [&](const auto& concrete) -> double {
            using P = std::decay_t<decltype(concrete)>;
            if constexpr (std::is_same_v<P, RnnParams>) {
                return rnn_forward(concrete, scaled_window).prediction;
            } else if constexpr (std::is_same_v<P, LstmParams>) {
                return lstm_forward(concrete, scaled_window).prediction;
            } else {
                return mlp_forward(concrete,
                                   Vector(std::vector<double>(scaled_window.begin(), scaled_window.end())))
                    .prediction;
            }
        },
        p);
}

namespace {

class GlorotInit {
public:
    explicit GlorotInit(std::uint64_t seed) : rng_(seed) {}

    Matrix matrix(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out) {
        Matrix m(rows, cols);
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double& w : m.values()) {
            w = dist(rng_);
        }
        return m;
    }

private:
    std::mt19937_64 rng_;
};

Readout make_readout(GlorotInit& init, std::size_t hidden, Activation activation) {
    return Readout{init.matrix(1, hidden, hidden, 1), Vector(1), activation};
}

}  // namespace

Model init_params(const ModelSpec& spec) {
    spec.validate();
    GlorotInit init(spec.seed);
    const std::size_t hidden = spec.hidden_size;
    auto layer_activation = [&](std::size_t l) {
        return l == 0 ? spec.input_activation : spec.hidden_activation;
    };

    switch (spec.architecture) {
        case Architecture::Rnn: {
            RnnParams p;
            for (std::size_t l = 0; l < spec.hidden_layers; ++l) {
                const std::size_t in = l == 0 ? 1 : hidden;
                RnnLayer layer;
                layer.input_weights = init.matrix(hidden, in, in, hidden);
                layer.recurrent_weights = init.matrix(hidden, hidden, hidden, hidden);
                layer.bias = Vector(hidden);
                layer.activation = layer_activation(l);
                p.layers.push_back(std::move(layer));
            }
            p.readout = make_readout(init, hidden, spec.output_activation);
            return Model{spec, std::move(p)};
        }
        case Architecture::Lstm: {
            LstmParams p;
            for (std::size_t l = 0; l < spec.hidden_layers; ++l) {
                const std::size_t in = l == 0 ? 1 : hidden;
                const std::size_t cols = hidden + in;
                LstmLayer layer;
                layer.forget_weights = init.matrix(hidden, cols, cols, hidden);
                layer.input_weights = init.matrix(hidden, cols, cols, hidden);
                layer.candidate_weights = init.matrix(hidden, cols, cols, hidden);
                layer.output_weights = init.matrix(hidden, cols, cols, hidden);
                layer.forget_bias = Vector(hidden);
                layer.input_bias = Vector(hidden);
                layer.candidate_bias = Vector(hidden);
                layer.output_bias = Vector(hidden);
                layer.output_activation = l == 0 ? spec.input_activation : Activation::Linear;
                p.layers.push_back(std::move(layer));
            }
            p.readout = make_readout(init, hidden, spec.output_activation);
            return Model{spec, std::move(p)};
        }
        case Architecture::Bp: {
            MlpParams p;
            std::size_t in = spec.window_len;
            for (std::size_t l = 0; l < spec.hidden_layers; ++l) {
                p.layers.push_back(
                    DenseLayer{init.matrix(hidden, in, in, hidden), Vector(hidden), layer_activation(l)});
                in = hidden;
            }
            p.layers.push_back(DenseLayer{init.matrix(1, in, in, 1), Vector(1), spec.output_activation});
            return Model{spec, std::move(p)};
        }
    }
    throw ConfigError("unknown architecture");
}

double predict(const Model& model, const Scaler& scaler, std::span<const double> raw_window) {
    if (raw_window.size() != model.spec.window_len) {
        throw DimensionError(fmt::format("prediction window has {} values, model expects {}",
                                         raw_window.size(), model.spec.window_len));
    }
    const Vector scaled = scaler.scale(raw_window);
    return scaler.unscale(forward(model.params, scaled.values()));
}

}  // namespace fxcast
