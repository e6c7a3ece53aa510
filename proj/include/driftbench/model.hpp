#pragma once

#include <cstdint>
#include <vector>

#include "driftbench/tensor.hpp"

namespace driftbench {

enum class Activation { relu, tanh };

// Layer sizes for the dense classifier. hidden_dims may be empty, which
// yields a single linear softmax layer.
struct ArchitectureSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims;
    std::size_t num_classes = 0;
    Activation activation = Activation::relu;
};

struct LayerTensors {
    Tensor weight;  // (fan_in, fan_out)
    Tensor bias;    // (fan_out)
};

enum class OptimizerKind { sgd, adam };

struct OptimizerHyper {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::adam;
    std::uint64_t step_count = 0;
    // Present iff kind == adam; shape-congruent with ModelState::params.
    std::vector<LayerTensors> first_moments;
    std::vector<LayerTensors> second_moments;
    OptimizerHyper hyper;
};

struct ModelState {
    ArchitectureSpec arch;
    std::vector<LayerTensors> params;
    OptimizerState optimizer_state;
};

// Softmax output for one example; entries sum to 1 within 1e-9.
struct ConfidenceVector {
    std::vector<double> probs;
};

using Gradients = std::vector<LayerTensors>;

struct LossAndGradients {
    double loss = 0.0;
    Gradients grads;
};

// Deterministic initialization: weights and biases uniform in (-a, a) with
// a = 1/sqrt(fan_in), drawn layer by layer from a stream seeded by `seed`.
// Identical (arch, seed) pairs produce bit-identical states.
ModelState init_model(const ArchitectureSpec& arch, std::uint64_t seed,
                      OptimizerKind kind = OptimizerKind::adam,
                      OptimizerHyper hyper = OptimizerHyper{});

// Resets step count and (for adam) zeroes the moment tensors in place.
void reset_optimizer(ModelState& model);

// Logits for a batch. batch_features has shape (B, input_dim); the result
// has shape (B, num_classes).
Tensor forward(const ModelState& model, const Tensor& batch_features);

// Softmax confidences for a single example (features shape: (input_dim)).
// This is the defender's query API and the only surface the attack reads.
ConfidenceVector predict_confidences(const ModelState& model, const Tensor& features);

// Mean softmax cross-entropy and its gradients over a batch.
LossAndGradients loss_and_gradients(const ModelState& model, const Tensor& batch_features,
                                    const std::vector<int>& labels);

// Mean cross-entropy only (no gradients).
double mean_loss(const ModelState& model, const Tensor& batch_features,
                 const std::vector<int>& labels);

// One SGD or Adam update. Returns the updated model; step_count increments.
ModelState optimizer_step(ModelState model, const Gradients& grads);

// `epochs` full passes over the given examples with seeded shuffling and
// mini-batches of `batch_size`. Optimizer state carries across epochs.
// epochs == 0 returns the model unchanged.
ModelState train_epochs(ModelState model, const Tensor& features, const std::vector<int>& labels,
                        std::size_t epochs, std::size_t batch_size, std::uint64_t shuffle_seed);

// Fraction of examples whose argmax confidence equals the label. Ties break
// toward the lowest class index.
double accuracy(const ModelState& model, const Tensor& features, const std::vector<int>& labels);

// Fingerprint of the parameter tensors only (optimizer state excluded).
std::uint64_t param_digest(const ModelState& model);

}  // namespace driftbench
