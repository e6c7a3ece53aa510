#include "driftbench/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "driftbench/digest.hpp"
#include "driftbench/errors.hpp"
#include "driftbench/rng.hpp"

namespace driftbench {

namespace {

// Layer widths including input and output: [input_dim, hidden..., num_classes].
std::vector<std::size_t> layer_dims(const ArchitectureSpec& arch) {
    std::vector<std::size_t> dims;
    dims.reserve(arch.hidden_dims.size() + 2);
    dims.push_back(arch.input_dim);
    dims.insert(dims.end(), arch.hidden_dims.begin(), arch.hidden_dims.end());
    dims.push_back(arch.num_classes);
    return dims;
}

void validate_arch(const ArchitectureSpec& arch) {
    if (arch.input_dim == 0) {
        throw ConfigError("architecture: input_dim must be positive");
    }
    if (arch.num_classes < 2) {
        throw ConfigError("architecture: num_classes must be >= 2");
    }
    for (std::size_t h : arch.hidden_dims) {
        if (h == 0) {
            throw ConfigError("architecture: hidden layer width must be positive");
        }
    }
}

double activate(double x, Activation a) {
    return a == Activation::relu ? (x > 0.0 ? x : 0.0) : std::tanh(x);
}

double activate_grad(double pre, Activation a) {
    if (a == Activation::relu) {
        return pre > 0.0 ? 1.0 : 0.0;
    }
    const double t = std::tanh(pre);
    return 1.0 - t * t;
}

// out(B, fan_out) = in(B, fan_in) * W(fan_in, fan_out) + b
Tensor affine(const Tensor& in, const LayerTensors& layer) {
    const std::size_t batch = in.rows();
    const std::size_t fan_in = layer.weight.shape[0];
    const std::size_t fan_out = layer.weight.shape[1];
    Tensor out = Tensor::zeros({batch, fan_out});
    for (std::size_t r = 0; r < batch; ++r) {
        for (std::size_t k = 0; k < fan_in; ++k) {
            const double x = in.at(r, k);
            if (x == 0.0) {
                continue;
            }
            for (std::size_t c = 0; c < fan_out; ++c) {
                out.at(r, c) += x * layer.weight.at(k, c);
            }
        }
        for (std::size_t c = 0; c < fan_out; ++c) {
            out.at(r, c) += layer.bias.values[c];
        }
    }
    return out;
}

void check_batch_shape(const ModelState& model, const Tensor& batch) {
    if (batch.shape.size() != 2 || batch.shape[1] != model.arch.input_dim) {
        throw DimensionError("forward: expected batch of shape (B, " +
                             std::to_string(model.arch.input_dim) + ")");
    }
    if (batch.shape[0] == 0) {
        throw DimensionError("forward: batch must contain at least one example");
    }
}

void check_labels(const ModelState& model, const Tensor& batch, const std::vector<int>& labels) {
    if (labels.size() != batch.rows()) {
        throw DimensionError("labels: expected one label per batch row");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= model.arch.num_classes) {
            throw DataError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                            " is outside [0, " + std::to_string(model.arch.num_classes) + ")");
        }
    }
}

void check_congruent(const ModelState& model, const Gradients& grads, const char* context) {
    if (grads.size() != model.params.size()) {
        throw DimensionError(std::string(context) + ": gradient layer count mismatch");
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!grads[i].weight.same_shape(model.params[i].weight) ||
            !grads[i].bias.same_shape(model.params[i].bias)) {
            throw DimensionError(std::string(context) + ": gradient shape mismatch at layer " +
                                 std::to_string(i));
        }
    }
}

// In-place row softmax with max subtraction; stable for logits up to +-1e4.
void softmax_rows(Tensor& t) {
    const std::size_t rows = t.rows();
    const std::size_t cols = t.cols();
    for (std::size_t r = 0; r < rows; ++r) {
        double mx = t.at(r, 0);
        for (std::size_t c = 1; c < cols; ++c) {
            mx = std::max(mx, t.at(r, c));
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double e = std::exp(t.at(r, c) - mx);
            t.at(r, c) = e;
            sum += e;
        }
        for (std::size_t c = 0; c < cols; ++c) {
            t.at(r, c) /= sum;
        }
    }
}

// Forward pass keeping pre-activations and activations for backprop.
struct ForwardTrace {
    std::vector<Tensor> activations;     // activations[0] = input, size L+1
    std::vector<Tensor> preactivations;  // size L
};

ForwardTrace forward_trace(const ModelState& model, const Tensor& batch) {
    ForwardTrace tr;
    tr.activations.push_back(batch);
    const std::size_t layers = model.params.size();
    for (std::size_t l = 0; l < layers; ++l) {
        Tensor z = affine(tr.activations.back(), model.params[l]);
        tr.preactivations.push_back(z);
        if (l + 1 < layers) {
            Tensor a = z;
            for (double& x : a.values) {
                x = activate(x, model.arch.activation);
            }
            tr.activations.push_back(std::move(a));
        } else {
            tr.activations.push_back(std::move(z));
        }
    }
    return tr;
}

}  // namespace

ModelState init_model(const ArchitectureSpec& arch, std::uint64_t seed, OptimizerKind kind,
                      OptimizerHyper hyper) {
    validate_arch(arch);
    if (hyper.learning_rate <= 0.0 || hyper.epsilon <= 0.0 || hyper.beta1 <= 0.0 ||
        hyper.beta1 >= 1.0 || hyper.beta2 <= 0.0 || hyper.beta2 >= 1.0) {
        throw ConfigError("optimizer hyperparameters out of range");
    }

    ModelState model;
    model.arch = arch;
    Rng rng(seed);
    const auto dims = layer_dims(arch);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t fan_in = dims[l];
        const std::size_t fan_out = dims[l + 1];
        const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
        LayerTensors layer;
        layer.weight = Tensor::zeros({fan_in, fan_out});
        for (double& w : layer.weight.values) {
            w = rng.uniform(-a, a);
        }
        layer.bias = Tensor::zeros({fan_out});
        for (double& b : layer.bias.values) {
            b = rng.uniform(-a, a);
        }
        model.params.push_back(std::move(layer));
    }

    model.optimizer_state.kind = kind;
    model.optimizer_state.hyper = hyper;
    model.optimizer_state.step_count = 0;
    reset_optimizer(model);
    return model;
}

void reset_optimizer(ModelState& model) {
    auto& opt = model.optimizer_state;
    opt.step_count = 0;
    opt.first_moments.clear();
    opt.second_moments.clear();
    if (opt.kind == OptimizerKind::adam) {
        for (const auto& layer : model.params) {
            opt.first_moments.push_back(
                {Tensor::zeros(layer.weight.shape), Tensor::zeros(layer.bias.shape)});
            opt.second_moments.push_back(
                {Tensor::zeros(layer.weight.shape), Tensor::zeros(layer.bias.shape)});
        }
    }
}

Tensor forward(const ModelState& model, const Tensor& batch_features) {
    check_batch_shape(model, batch_features);
    Tensor a = batch_features;
    const std::size_t layers = model.params.size();
    for (std::size_t l = 0; l < layers; ++l) {
        a = affine(a, model.params[l]);
        if (l + 1 < layers) {
            for (double& x : a.values) {
                x = activate(x, model.arch.activation);
            }
        }
    }
    check_finite(a, "forward");
    return a;
}

ConfidenceVector predict_confidences(const ModelState& model, const Tensor& features) {
    if (features.shape.size() != 1 || features.shape[0] != model.arch.input_dim) {
        throw DimensionError("predict_confidences: expected features of shape (" +
                             std::to_string(model.arch.input_dim) + ")");
    }
    Tensor batch({1, model.arch.input_dim}, features.values);
    Tensor logits = forward(model, batch);
    softmax_rows(logits);

    ConfidenceVector cv;
    cv.probs = std::move(logits.values);
    double sum = std::accumulate(cv.probs.begin(), cv.probs.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9) {
        throw Error("predict_confidences: probabilities do not sum to 1");
    }
    return cv;
}

LossAndGradients loss_and_gradients(const ModelState& model, const Tensor& batch_features,
                                    const std::vector<int>& labels) {
    check_batch_shape(model, batch_features);
    check_labels(model, batch_features, labels);

    const std::size_t batch = batch_features.rows();
    const std::size_t layers = model.params.size();
    ForwardTrace tr = forward_trace(model, batch_features);

    // Loss via log-sum-exp; delta = (softmax - onehot) / B.
    Tensor probs = tr.activations.back();
    double loss = 0.0;
    for (std::size_t r = 0; r < batch; ++r) {
        double mx = probs.at(r, 0);
        for (std::size_t c = 1; c < model.arch.num_classes; ++c) {
            mx = std::max(mx, probs.at(r, c));
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < model.arch.num_classes; ++c) {
            sum += std::exp(probs.at(r, c) - mx);
        }
        loss += (std::log(sum) + mx) - probs.at(r, static_cast<std::size_t>(labels[r]));
    }
    loss /= static_cast<double>(batch);
    softmax_rows(probs);

    Tensor delta = std::move(probs);
    for (std::size_t r = 0; r < batch; ++r) {
        delta.at(r, static_cast<std::size_t>(labels[r])) -= 1.0;
    }
    for (double& d : delta.values) {
        d /= static_cast<double>(batch);
    }

    LossAndGradients out;
    out.loss = loss;
    out.grads.resize(layers);
    for (std::size_t l = layers; l-- > 0;) {
        const Tensor& a_prev = tr.activations[l];
        const std::size_t fan_in = model.params[l].weight.shape[0];
        const std::size_t fan_out = model.params[l].weight.shape[1];

        Tensor dw = Tensor::zeros({fan_in, fan_out});
        Tensor db = Tensor::zeros({fan_out});
        for (std::size_t r = 0; r < batch; ++r) {
            for (std::size_t k = 0; k < fan_in; ++k) {
                const double a = a_prev.at(r, k);
                if (a == 0.0) {
                    continue;
                }
                for (std::size_t c = 0; c < fan_out; ++c) {
                    dw.at(k, c) += a * delta.at(r, c);
                }
            }
            for (std::size_t c = 0; c < fan_out; ++c) {
                db.values[c] += delta.at(r, c);
            }
        }
        out.grads[l] = {std::move(dw), std::move(db)};

        if (l > 0) {
            // delta_prev = (delta * W^T) .* act'(z_{l-1})
            Tensor prev = Tensor::zeros({batch, fan_in});
            for (std::size_t r = 0; r < batch; ++r) {
                for (std::size_t c = 0; c < fan_out; ++c) {
                    const double d = delta.at(r, c);
                    if (d == 0.0) {
                        continue;
                    }
                    for (std::size_t k = 0; k < fan_in; ++k) {
                        prev.at(r, k) += d * model.params[l].weight.at(k, c);
                    }
                }
            }
            const Tensor& z_prev = tr.preactivations[l - 1];
            for (std::size_t i = 0; i < prev.values.size(); ++i) {
                prev.values[i] *= activate_grad(z_prev.values[i], model.arch.activation);
            }
            delta = std::move(prev);
        }
    }

    if (!std::isfinite(out.loss)) {
        throw Error("loss_and_gradients: loss is non-finite");
    }
    for (const auto& g : out.grads) {
        check_finite(g.weight, "loss_and_gradients");
        check_finite(g.bias, "loss_and_gradients");
    }
    return out;
}

double mean_loss(const ModelState& model, const Tensor& batch_features,
                 const std::vector<int>& labels) {
    check_batch_shape(model, batch_features);
    check_labels(model, batch_features, labels);
    Tensor logits = forward(model, batch_features);
    double loss = 0.0;
    const std::size_t batch = logits.rows();
    for (std::size_t r = 0; r < batch; ++r) {
        double mx = logits.at(r, 0);
        for (std::size_t c = 1; c < model.arch.num_classes; ++c) {
            mx = std::max(mx, logits.at(r, c));
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < model.arch.num_classes; ++c) {
            sum += std::exp(logits.at(r, c) - mx);
        }
        loss += (std::log(sum) + mx) - logits.at(r, static_cast<std::size_t>(labels[r]));
    }
    return loss / static_cast<double>(batch);
}

ModelState optimizer_step(ModelState model, const Gradients& grads) {
    check_congruent(model, grads, "optimizer_step");
    auto& opt = model.optimizer_state;
    const auto& h = opt.hyper;
    opt.step_count += 1;

    if (opt.kind == OptimizerKind::sgd) {
        for (std::size_t l = 0; l < model.params.size(); ++l) {
            auto& p = model.params[l];
            for (std::size_t i = 0; i < p.weight.values.size(); ++i) {
                p.weight.values[i] -= h.learning_rate * grads[l].weight.values[i];
            }
            for (std::size_t i = 0; i < p.bias.values.size(); ++i) {
                p.bias.values[i] -= h.learning_rate * grads[l].bias.values[i];
            }
        }
    } else {
        const double t = static_cast<double>(opt.step_count);
        const double bias1 = 1.0 - std::pow(h.beta1, t);
        const double bias2 = 1.0 - std::pow(h.beta2, t);
        auto adam_update = [&](std::vector<double>& p, const std::vector<double>& g,
                               std::vector<double>& m, std::vector<double>& v) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
                v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
                const double m_hat = m[i] / bias1;
                const double v_hat = v[i] / bias2;
                p[i] -= h.learning_rate * m_hat / (std::sqrt(v_hat) + h.epsilon);
            }
        };
        for (std::size_t l = 0; l < model.params.size(); ++l) {
            adam_update(model.params[l].weight.values, grads[l].weight.values,
                        opt.first_moments[l].weight.values, opt.second_moments[l].weight.values);
            adam_update(model.params[l].bias.values, grads[l].bias.values,
                        opt.first_moments[l].bias.values, opt.second_moments[l].bias.values);
        }
    }

    for (const auto& p : model.params) {
        check_finite(p.weight, "optimizer_step");
        check_finite(p.bias, "optimizer_step");
    }
    return model;
}

ModelState train_epochs(ModelState model, const Tensor& features, const std::vector<int>& labels,
                        std::size_t epochs, std::size_t batch_size, std::uint64_t shuffle_seed) {
    if (features.rows() == 0) {
        throw DataError("train_epochs: training set is empty");
    }
    check_batch_shape(model, features);
    check_labels(model, features, labels);
    if (batch_size == 0) {
        throw ConfigError("train_epochs: batch_size must be positive");
    }
    if (epochs == 0) {
        return model;
    }

    const std::size_t n = features.rows();
    const std::size_t dim = model.arch.input_dim;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(shuffle_seed);

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t count = std::min(batch_size, n - start);
            Tensor batch = Tensor::zeros({count, dim});
            std::vector<int> batch_labels(count);
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t src = order[start + i];
                std::copy_n(features.values.begin() + static_cast<std::ptrdiff_t>(src * dim), dim,
                            batch.values.begin() + static_cast<std::ptrdiff_t>(i * dim));
                batch_labels[i] = labels[src];
            }
            LossAndGradients lg = loss_and_gradients(model, batch, batch_labels);
            model = optimizer_step(std::move(model), lg.grads);
        }
    }
    return model;
}

double accuracy(const ModelState& model, const Tensor& features, const std::vector<int>& labels) {
    if (features.rows() == 0) {
        throw DataError("accuracy: evaluation set is empty");
    }
    check_batch_shape(model, features);
    check_labels(model, features, labels);

    // argmax of logits equals argmax of softmax confidences.
    Tensor logits = forward(model, features);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < model.arch.num_classes; ++c) {
            if (logits.at(r, c) > logits.at(r, best)) {
                best = c;
            }
        }
        if (best == static_cast<std::size_t>(labels[r])) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

std::uint64_t param_digest(const ModelState& model) {
    Fnv64 d;
    d.feed_u64(model.params.size());
    for (const auto& layer : model.params) {
        for (std::size_t s : layer.weight.shape) {
            d.feed_u64(s);
        }
        for (double w : layer.weight.values) {
            d.feed_double(w);
        }
        for (double b : layer.bias.values) {
            d.feed_double(b);
        }
    }
    return d.value();
}

}  // namespace driftbench
