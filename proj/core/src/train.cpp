#include "fxcast/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "fxcast/errors.hpp"
#include "reference_forward.hpp"

namespace fxcast {

void TrainConfig::validate() const {
    if (!std::isfinite(learning_rate) || learning_rate <= 0.0) {
        throw ConfigError(fmt::format("learning rate must be positive, got {}", learning_rate));
    }
    if (learning_rate >= 0.1 && !allow_lr_outside_paper) {
        throw ConfigError(fmt::format(
            "learning rate {} is outside (0, 0.1); pass --allow-lr-outside-paper to use it",
            learning_rate));
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw ConfigError(fmt::format("dropout_rate must lie in [0, 1), got {}", dropout_rate));
    }
    if (clip_gradients && !(clip_value > 0.0)) {
        throw ConfigError("clip_value must be positive");
    }
}

void LossHistory::write_csv(std::ostream& out) const {
    out << "epoch,train_mse,val_mse\n";
    for (std::size_t e = 0; e < train_mse.size(); ++e) {
        out << fmt::format("{},{:.17g},", e + 1, train_mse[e]);
        if (e < val_mse.size()) {
            out << fmt::format("{:.17g}", val_mse[e]);
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Dropout

Vector dropout_mask(std::size_t n, double rate, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw ConfigError(fmt::format("dropout rate must lie in [0, 1), got {}", rate));
    }
    Vector mask(n, 1.0);
    if (rate == 0.0) {
        return mask;
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    std::bernoulli_distribution drop(rate);
    for (double& m : mask) {
        m = drop(rng) ? 0.0 : keep_scale;
    }
    return mask;
}

Vector apply_dropout(const Vector& h, double rate, Rng& rng, bool training) {
    if (!training || rate == 0.0) {
        return h;
    }
    return hadamard(h, dropout_mask(h.size(), rate, rng));
}

DropoutMasks draw_masks(const ModelParams& params, std::size_t steps, double rate, Rng& rng) {
    DropoutMasks masks;
    if (rate == 0.0) {
        return masks;
    }
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, MlpParams>) {
                for (std::size_t l = 0; l + 1 < p.layers.size(); ++l) {
                    masks.push_back({dropout_mask(p.layers[l].bias.size(), rate, rng)});
                }
            } else {
                for (const auto& layer : p.layers) {
                    std::vector<Vector> per_step;
                    per_step.reserve(steps);
                    for (std::size_t t = 0; t < steps; ++t) {
                        per_step.push_back(dropout_mask(layer.hidden_size(), rate, rng));
                    }
                    masks.push_back(std::move(per_step));
                }
            }
        },
        params);
    return masks;
}

namespace {

const Vector* mask_at(const DropoutMasks* masks, std::size_t layer, std::size_t t) {
    if (masks == nullptr || masks->empty()) {
        return nullptr;
    }
    return &(*masks)[layer][t];
}

void check_finite(const Vector& v, const std::string& parameter, std::size_t step) {
    if (!all_finite(v.values())) {
        throw NonFiniteGradient(parameter, step);
    }
}

double readout_delta(const Readout& r, double preactivation, double prediction, double target) {
    // d/dz of 0.5 (T - y)^2 with y = g(z)
    return -(target - prediction) * activate_prime(r.activation, preactivation);
}

void accumulate_readout(Readout& g, const Readout& r, const Vector& top, double dz,
                        Vector& d_top) {
    auto gw = g.weights.row(0);
    const auto w = r.weights.row(0);
    d_top = Vector(top.size());
    for (std::size_t k = 0; k < top.size(); ++k) {
        gw[k] += dz * top[k];
        d_top[k] = dz * w[k];
    }
    g.bias[0] += dz;
}

std::size_t first_step(std::size_t steps, std::size_t horizon) {
    if (horizon == 0 || horizon >= steps) {
        return 0;
    }
    return steps - horizon;
}

}  // namespace

// ---------------------------------------------------------------------------
// Feedforward network

std::vector<Vector> mlp_error_signals(const MlpParams& p, const MlpForward& fwd, double target,
                                      const DropoutMasks* masks) {
    const std::size_t depth = p.layers.size();
    std::vector<Vector> errors(depth);

    // Output layer: E_j = f'(I_j) (T_j - O_j).
    const auto& out_layer = p.layers.back();
    const Vector& out_in = fwd.inputs.back();
    errors.back() = Vector(out_in.size());
    for (std::size_t j = 0; j < out_in.size(); ++j) {
        errors.back()[j] = activate_prime(out_layer.activation, out_in[j]) * (target - fwd.outputs.back()[j]);
    }
    // Hidden layers: E_j = f'(I_j) sum_k E_k W_jk.
    for (std::size_t l = depth - 1; l-- > 0;) {
        Vector back = matvec_transposed(p.layers[l + 1].weights, errors[l + 1]);
        if (const Vector* m = mask_at(masks, l, 0)) {
            back = hadamard(back, *m);
        }
        const Vector& in = fwd.inputs[l];
        for (std::size_t j = 0; j < in.size(); ++j) {
            back[j] *= activate_prime(p.layers[l].activation, in[j]);
        }
        errors[l] = std::move(back);
    }
    for (std::size_t l = 0; l < depth; ++l) {
        if (!all_finite(errors[l].values())) {
            throw TrainingDiverged(fmt::format("non-finite error signal in layer {}", l));
        }
    }
    return errors;
}

MlpParams mlp_backprop_step(MlpParams p, const Vector& x, double target, double learning_rate) {
    if (!(learning_rate > 0.0)) {
        throw ConfigError("learning rate must be positive");
    }
    const MlpForward fwd = mlp_forward(p, x);
    const auto errors = mlp_error_signals(p, fwd, target);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        add_outer(p.layers[l].weights, errors[l], fwd.outputs[l], learning_rate);
        axpy(p.layers[l].bias, errors[l], learning_rate);
    }
    return p;
}

Gradients mlp_gradients(const MlpParams& p, const Vector& x, double target, const DropoutMasks* masks) {
    const MlpForward fwd = mlp_forward(p, x, masks);
    const auto errors = mlp_error_signals(p, fwd, target, masks);
    MlpParams g = zeros_like(p);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        add_outer(g.layers[l].weights, errors[l], fwd.outputs[l], -1.0);
        axpy(g.layers[l].bias, errors[l], -1.0);
    }
    return Gradients{std::move(g)};
}

// ---------------------------------------------------------------------------
// Simple recurrent network

namespace {

void rnn_backward(const RnnParams& p, const RnnForward& fwd, double target, std::size_t horizon,
                  const DropoutMasks* masks, RnnParams& g) {
    const auto& tr = fwd.trace;
    const std::size_t depth = p.layers.size();
    const std::size_t steps = tr.inputs[0].size();
    const std::size_t t0 = first_step(steps, horizon);

    const double dz = readout_delta(p.readout, tr.readout_preactivation, fwd.prediction, target);
    const std::size_t top = depth - 1;
    Vector top_out = tr.states[top][steps];
    if (const Vector* m = mask_at(masks, top, steps - 1)) {
        top_out = hadamard(top_out, *m);
    }
    // d_out[t]: gradient w.r.t. the value the layer passes upward at step t.
    std::vector<Vector> d_out(steps);
    accumulate_readout(g.readout, p.readout, top_out, dz, d_out[steps - 1]);

    for (std::size_t l = depth; l-- > 0;) {
        const auto& layer = p.layers[l];
        auto& gl = g.layers[l];
        const std::size_t hidden = layer.hidden_size();
        std::vector<Vector> d_below(steps);
        Vector dh_next(hidden);
        const std::string name = fmt::format("layer{}", l);
        for (std::size_t t = steps; t-- > t0;) {
            Vector dh = dh_next;
            if (!d_out[t].empty()) {
                const Vector* m = mask_at(masks, l, t);
                for (std::size_t k = 0; k < hidden; ++k) {
                    dh[k] += m ? d_out[t][k] * (*m)[k] : d_out[t][k];
                }
            }
            const Vector& a = tr.preactivations[l][t];
            Vector da(hidden);
            for (std::size_t k = 0; k < hidden; ++k) {
                da[k] = dh[k] * activate_prime(layer.activation, a[k]);
            }
            check_finite(da, name, t);
            add_outer(gl.input_weights, da, tr.inputs[l][t]);
            add_outer(gl.recurrent_weights, da, tr.states[l][t]);
            axpy(gl.bias, da);
            dh_next = matvec_transposed(layer.recurrent_weights, da);
            if (l > 0) {
                d_below[t] = matvec_transposed(layer.input_weights, da);
            }
        }
        d_out = std::move(d_below);
    }
}

// ---------------------------------------------------------------------------
// LSTM

void lstm_backward(const LstmParams& p, const LstmForward& fwd, double target, std::size_t horizon,
                   const DropoutMasks* masks, LstmParams& g) {
    const std::size_t depth = p.layers.size();
    const std::size_t steps = fwd.caches[0].size();
    const std::size_t t0 = first_step(steps, horizon);

    const double dz = readout_delta(p.readout, fwd.readout_preactivation, fwd.prediction, target);
    std::vector<Vector> d_out(steps);
    accumulate_readout(g.readout, p.readout, fwd.outputs[depth - 1][steps - 1], dz, d_out[steps - 1]);

    for (std::size_t l = depth; l-- > 0;) {
        const auto& layer = p.layers[l];
        auto& gl = g.layers[l];
        const std::size_t hidden = layer.hidden_size();
        std::vector<Vector> d_below(steps);
        Vector dh_next(hidden);
        Vector dc_next(hidden);
        Vector af(hidden), ai(hidden), ac(hidden), ao(hidden);
        const std::string name = fmt::format("layer{}", l);
        for (std::size_t t = steps; t-- > t0;) {
            const GateCache& c = fwd.caches[l][t];
            Vector dh = dh_next;
            if (!d_out[t].empty()) {
                const Vector* m = mask_at(masks, l, t);
                for (std::size_t k = 0; k < hidden; ++k) {
                    const double up = m ? d_out[t][k] * (*m)[k] : d_out[t][k];
                    dh[k] += up * activate_prime(layer.output_activation, c.hidden[k]);
                }
            }
            for (std::size_t k = 0; k < hidden; ++k) {
                const double dc = dc_next[k] + dh[k] * c.output[k] * (1.0 - c.cell_tanh[k] * c.cell_tanh[k]);
                const double d_o = dh[k] * c.cell_tanh[k];
                af[k] = dc * c.cell_prev[k] * c.forget[k] * (1.0 - c.forget[k]);
                ai[k] = dc * c.candidate[k] * c.input[k] * (1.0 - c.input[k]);
                ac[k] = dc * c.input[k] * (1.0 - c.candidate[k] * c.candidate[k]);
                ao[k] = d_o * c.output[k] * (1.0 - c.output[k]);
                dc_next[k] = dc * c.forget[k];
            }
            check_finite(af, name + ".W_f", t);
            check_finite(ai, name + ".W_i", t);
            check_finite(ac, name + ".W_c", t);
            check_finite(ao, name + ".W_o", t);
            // Weight gradients and d[h_{t-1}, x_t] in one sweep over the gate rows.
            const auto z = c.concat.values();
            Vector d_concat(z.size());
            auto dz = d_concat.values();
            for (std::size_t k = 0; k < hidden; ++k) {
                gl.forget_bias[k] += af[k];
                gl.input_bias[k] += ai[k];
                gl.candidate_bias[k] += ac[k];
                gl.output_bias[k] += ao[k];
                auto gf = gl.forget_weights.row(k);
                auto gi = gl.input_weights.row(k);
                auto gc = gl.candidate_weights.row(k);
                auto go = gl.output_weights.row(k);
                const auto wf = layer.forget_weights.row(k);
                const auto wi = layer.input_weights.row(k);
                const auto wc = layer.candidate_weights.row(k);
                const auto wo = layer.output_weights.row(k);
                const double ef = af[k], ei = ai[k], ec = ac[k], eo = ao[k];
                for (std::size_t j = 0; j < z.size(); ++j) {
                    gf[j] += ef * z[j];
                    gi[j] += ei * z[j];
                    gc[j] += ec * z[j];
                    go[j] += eo * z[j];
                    dz[j] += wf[j] * ef + wi[j] * ei + wc[j] * ec + wo[j] * eo;
                }
            }
            for (std::size_t k = 0; k < hidden; ++k) {
                dh_next[k] = d_concat[k];
            }
            if (l > 0) {
                Vector dx(d_concat.size() - hidden);
                for (std::size_t k = 0; k < dx.size(); ++k) {
                    dx[k] = d_concat[hidden + k];
                }
                d_below[t] = std::move(dx);
            }
        }
        d_out = std::move(d_below);
    }
}

void accumulate_gradients(const ModelParams& p, std::span<const double> window, double target,
                          std::size_t horizon, const DropoutMasks* masks, ModelParams& g) {
    std::visit(
        [&](const auto& concrete) {
            using P = std::decay_t<decltype(concrete)>;
            auto& gc = std::get<P>(g);
            if constexpr (std::is_same_v<P, RnnParams>) {
                rnn_backward(concrete, rnn_forward(concrete, window, masks), target, horizon, masks, gc);
            } else if constexpr (std::is_same_v<P, LstmParams>) {
                lstm_backward(concrete, lstm_forward(concrete, window, masks), target, horizon, masks, gc);
            } else {
                const Vector x(std::vector<double>(window.begin(), window.end()));
                const MlpForward fwd = mlp_forward(concrete, x, masks);
                const auto errors = mlp_error_signals(concrete, fwd, target, masks);
                for (std::size_t l = 0; l < concrete.layers.size(); ++l) {
                    add_outer(gc.layers[l].weights, errors[l], fwd.outputs[l], -1.0);
                    axpy(gc.layers[l].bias, errors[l], -1.0);
                }
            }
        },
        p);
}

void zero_fill(ModelParams& g) {
    for_each_array(g, [](const std::string&, std::span<double> v) { std::fill(v.begin(), v.end(), 0.0); });
}

void verify_finite(const ModelParams& g, std::size_t steps) {
    for_each_array(g, [&](const std::string& name, std::span<const double> v) {
        if (!all_finite(v)) {
            throw NonFiniteGradient(name, steps);
        }
    });
}

}  // namespace

Gradients bptt_gradients(const RnnParams& p, std::span<const double> window, double target,
                         std::size_t horizon, const DropoutMasks* masks) {
    RnnParams g = zeros_like(p);
    rnn_backward(p, rnn_forward(p, window, masks), target, horizon, masks, g);
    Gradients out{std::move(g)};
    verify_finite(out.values, window.size());
    return out;
}

Gradients bptt_gradients(const LstmParams& p, std::span<const double> window, double target,
                         std::size_t horizon, const DropoutMasks* masks) {
    LstmParams g = zeros_like(p);
    lstm_backward(p, lstm_forward(p, window, masks), target, horizon, masks, g);
    Gradients out{std::move(g)};
    verify_finite(out.values, window.size());
    return out;
}

Gradients compute_gradients(const ModelParams& p, std::span<const double> window, double target,
                            std::size_t horizon, const DropoutMasks* masks) {
    Gradients out{std::visit([](const auto& c) -> ModelParams { return zeros_like(c); }, p)};
    accumulate_gradients(p, window, target, horizon, masks, out.values);
    verify_finite(out.values, window.size());
    return out;
}

double sample_loss(const ModelParams& p, std::span<const double> window, double target) {
    const double err = target - forward(p, window);
    return 0.5 * err * err;
}

double dataset_mse(const ModelParams& p, const WindowedDataset& data) {
    if (data.empty()) {
        throw DataError("mean squared error of an empty dataset");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double err = data.labels[i] - forward(p, data.features.row(i));
        acc += err * err;
    }
    return acc / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------

namespace {

void apply_step(ModelParams& params, const ModelParams& grads, double learning_rate, const TrainConfig& cfg) {
    std::vector<std::span<const double>> g_arrays;
    for_each_array(grads, [&](const std::string&, std::span<const double> v) { g_arrays.push_back(v); });
    std::size_t idx = 0;
    for_each_array(params, [&](const std::string&, std::span<double> w) {
        const auto g = g_arrays[idx++];
        for (std::size_t k = 0; k < w.size(); ++k) {
            double gk = g[k];
            if (cfg.clip_gradients) {
                gk = std::clamp(gk, -cfg.clip_value, cfg.clip_value);
            }
            w[k] -= learning_rate * gk;
        }
    });
}

}  // namespace

TrainResult train(const ModelSpec& spec, const TrainConfig& cfg, const WindowedDataset& data,
                  const WindowedDataset* validation) {
    return train(init_params(spec), cfg, data, validation);
}

TrainResult train(Model model, const TrainConfig& cfg, const WindowedDataset& data,
                  const WindowedDataset* validation) {
    cfg.validate();
    if (data.empty()) {
        throw DataError("training set is empty");
    }
    if (data.window_len != model.spec.window_len) {
        throw DimensionError(fmt::format("dataset window {} does not match model window {}",
                                         data.window_len, model.spec.window_len));
    }
    TrainResult result{std::move(model), {}};
    if (cfg.epochs == 0) {
        return result;
    }
    auto& params = result.model.params;

    const double initial_mse = dataset_mse(params, data);
    const double divergence_bound = 1e6 * std::max(initial_mse, 1e-12);

    // Separate stream from init_params, which is keyed on spec.seed.
    Rng rng(cfg.seed ^ 0x9E3779B97F4A7C15ull);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    ModelParams grads = std::visit([](const auto& c) -> ModelParams { return zeros_like(c); }, params);
    const std::size_t steps = data.window_len;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle_each_epoch) {
            std::shuffle(order.begin(), order.end(), rng);
        }
        for (std::size_t idx : order) {
            const auto window = data.features.row(idx);
            const DropoutMasks masks =
                cfg.dropout_rate > 0.0 ? draw_masks(params, steps, cfg.dropout_rate, rng) : DropoutMasks{};
            zero_fill(grads);
            try {
                accumulate_gradients(params, window, data.labels[idx], cfg.bptt_horizon, &masks, grads);
            } catch (const TrainingDiverged& e) {
                throw TrainingDiverged(fmt::format("epoch {}, sample {}: {}", epoch + 1, idx, e.what()));
            }
            apply_step(params, grads, cfg.learning_rate, cfg);
        }
        const double mse = dataset_mse(params, data);
        if (!std::isfinite(mse) || mse > divergence_bound) {
            throw TrainingDiverged(fmt::format(
                "training diverged at epoch {}: MSE {} exceeds 1e6 x initial MSE {}", epoch + 1, mse,
                initial_mse));
        }
        result.history.train_mse.push_back(mse);
        if (validation != nullptr && !validation->empty()) {
            result.history.val_mse.push_back(dataset_mse(params, *validation));
        }
    }
    return result;
}

// ---------------------------------------------------------------------------

GradientCheckReport gradient_check(const Model& model, std::span<const double> window, double target,
                                   double eps, DifferencePrecision precision) {
    if (!(eps > 0.0)) {
        throw ConfigError("gradient_check step must be positive");
    }
    const Gradients analytic = compute_gradients(model.params, window, target);
    std::vector<std::span<const double>> a_arrays;
    for_each_array(analytic.values,
                   [&](const std::string&, std::span<const double> v) { a_arrays.push_back(v); });

    ModelParams probe = model.params;
    std::vector<std::pair<std::string, std::span<double>>> arrays;
    for_each_array(probe, [&](const std::string& name, std::span<double> v) { arrays.emplace_back(name, v); });

    // Loss with parameter (array, index) shifted by delta, in the requested precision.
    using Real = long double;
    auto shifted_loss = [&](std::size_t array, std::size_t index, double delta) -> Real {
        if (precision == DifferencePrecision::Double) {
            auto& slot = arrays[array].second[index];
            const double saved = slot;
            slot = saved + delta;
            const double loss = sample_loss(probe, window, target);
            slot = saved;
            return loss;
        }
        const auto weight = [&](std::size_t a, std::size_t k) -> Real {
            const Real v = arrays[a].second[k];
            return (a == array && k == index) ? v + Real(delta) : v;
        };
        const Real err = Real(target) - reference::forward<Real>(probe, weight, window);
        return Real(0.5) * err * err;
    };

    GradientCheckReport report;
    for (std::size_t a = 0; a < arrays.size(); ++a) {
        const auto& [name, values] = arrays[a];
        for (std::size_t k = 0; k < values.size(); ++k) {
            const double numeric = static_cast<double>(
                (shifted_loss(a, k, eps) - shifted_loss(a, k, -eps)) / (Real(2) * Real(eps)));
            const double exact = a_arrays[a][k];
            const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-12});
            const double rel = std::abs(exact - numeric) / denom;
            ++report.parameters_checked;
            if (rel > report.max_relative_error) {
                report.max_relative_error = rel;
                report.worst_parameter = name;
                report.worst_index = k;
            }
        }
    }
    return report;
}

GradientCheckReport gradient_check(const ModelSpec& spec, std::span<const double> window, double target,
                                   double eps, DifferencePrecision precision) {
    return gradient_check(init_params(spec), window, target, eps, precision);
}

}  // namespace fxcast
