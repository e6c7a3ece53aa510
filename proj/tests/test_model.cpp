#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "driftbench/digest.hpp"
#include "driftbench/errors.hpp"
#include "driftbench/model.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/tensor.hpp"

using namespace driftbench;

namespace {

ArchitectureSpec small_arch() {
    return {4, {5, 3}, 2, Activation::tanh};
}

// Straight-line reference forward pass, written independently of the library
// implementation: explicit triple loops, no shared helpers.
std::vector<double> oracle_forward(const ModelState& m, const std::vector<double>& x) {
    std::vector<double> cur = x;
    for (std::size_t l = 0; l < m.params.size(); ++l) {
        const Tensor& w = m.params[l].weight;
        const Tensor& b = m.params[l].bias;
        std::vector<double> next(w.cols(), 0.0);
        for (std::size_t j = 0; j < w.cols(); ++j) {
            double acc = b.values[j];
            for (std::size_t i = 0; i < w.rows(); ++i) {
                acc += cur[i] * w.values[i * w.cols() + j];
            }
            next[j] = acc;
        }
        if (l + 1 < m.params.size()) {
            for (double& v : next) {
                v = m.arch.activation == Activation::relu ? (v > 0.0 ? v : 0.0) : std::tanh(v);
            }
        }
        cur = next;
    }
    return cur;
}

void zero_params(ModelState& m) {
    for (LayerTensors& layer : m.params) {
        for (double& v : layer.weight.values) {
            v = 0.0;
        }
        for (double& v : layer.bias.values) {
            v = 0.0;
        }
    }
}

double max_rel_gradient_error(ModelState model, const Tensor& batch,
                              const std::vector<int>& labels) {
    const double h = 1e-5;
    const LossAndGradients lg = loss_and_gradients(model, batch, labels);
    double worst = 0.0;
    for (std::size_t l = 0; l < model.params.size(); ++l) {
        for (int part = 0; part < 2; ++part) {
            Tensor& t = part == 0 ? model.params[l].weight : model.params[l].bias;
            const Tensor& g = part == 0 ? lg.grads[l].weight : lg.grads[l].bias;
            for (std::size_t i = 0; i < t.values.size(); ++i) {
                const double saved = t.values[i];
                t.values[i] = saved + h;
                const double up = mean_loss(model, batch, labels);
                t.values[i] = saved - h;
                const double down = mean_loss(model, batch, labels);
                t.values[i] = saved;
                const double fd = (up - down) / (2.0 * h);
                const double denom = std::max({std::abs(fd), std::abs(g.values[i]), 1e-8});
                worst = std::max(worst, std::abs(fd - g.values[i]) / denom);
            }
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("tensor shape bookkeeping") {
    CHECK_THROWS_AS(Tensor({2, 3}, {1.0, 2.0}), DimensionError);
    const Tensor z = Tensor::zeros({2, 3});
    CHECK(z.size() == 6);
    CHECK(z.rows() == 2);
    CHECK(z.cols() == 3);
    Tensor t({2, 2}, {1.0, 2.0, 3.0, 4.0});
    CHECK(t.at(1, 0) == 3.0);
    t.values[2] = std::nan("");
    CHECK_THROWS_AS(check_finite(t, "test"), Error);
}

TEST_CASE("single-layer init has the forced shapes") {
    const ModelState m = init_model({4, {}, 2, Activation::relu}, 7);
    REQUIRE(m.params.size() == 1);
    CHECK(m.params[0].weight.shape == std::vector<std::size_t>{4, 2});
    CHECK(m.params[0].bias.shape == std::vector<std::size_t>{2});
    CHECK(m.optimizer_state.step_count == 0);
}

TEST_CASE("init is seed-deterministic and seed-sensitive") {
    const ModelState a = init_model(small_arch(), 1);
    const ModelState b = init_model(small_arch(), 1);
    const ModelState c = init_model(small_arch(), 2);
    CHECK(param_digest(a) == param_digest(b));
    CHECK(param_digest(a) != param_digest(c));

    // Scale bound: uniform(-a, a) with a = 1/sqrt(fan_in).
    for (std::size_t l = 0; l < a.params.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(a.params[l].weight.rows()));
        for (double v : a.params[l].weight.values) {
            CHECK(std::abs(v) < bound);
        }
    }
}

TEST_CASE("invalid architectures are rejected") {
    CHECK_THROWS_AS(init_model({0, {4}, 2, Activation::relu}, 1), ConfigError);
    CHECK_THROWS_AS(init_model({4, {0}, 2, Activation::relu}, 1), ConfigError);
    CHECK_THROWS_AS(init_model({4, {4}, 1, Activation::relu}, 1), ConfigError);
}

TEST_CASE("optimizer kind changes neither shapes nor the forward function") {
    const ModelState adam = init_model(small_arch(), 9, OptimizerKind::adam);
    const ModelState sgd = init_model(small_arch(), 9, OptimizerKind::sgd);
    CHECK(param_digest(adam) == param_digest(sgd));
    CHECK(adam.optimizer_state.first_moments.size() == adam.params.size());
    CHECK(sgd.optimizer_state.first_moments.empty());
}

TEST_CASE("zero model gives zero logits") {
    ModelState m = init_model(small_arch(), 3);
    zero_params(m);
    const Tensor batch({2, 4}, {1.0, -2.0, 3.0, 4.0, 0.5, 0.5, 0.5, 0.5});
    const Tensor logits = forward(m, batch);
    REQUIRE(logits.shape == std::vector<std::size_t>{2, 2});
    for (double v : logits.values) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("identity single-layer model reproduces a one-hot input") {
    ModelState m = init_model({3, {}, 3, Activation::relu}, 3);
    zero_params(m);
    for (std::size_t i = 0; i < 3; ++i) {
        m.params[0].weight.at(i, i) = 1.0;
    }
    const Tensor batch({1, 3}, {0.0, 1.0, 0.0});
    const Tensor logits = forward(m, batch);
    CHECK(logits.values == std::vector<double>{0.0, 1.0, 0.0});
}

TEST_CASE("forward matches an independent matrix-arithmetic oracle") {
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        const ModelState m = init_model({6, {4}, 3, Activation::relu}, rng.next_u64());
        std::vector<double> x(6);
        for (double& v : x) {
            v = rng.uniform(-2.0, 2.0);
        }
        const Tensor logits = forward(m, Tensor({1, 6}, x));
        const std::vector<double> expected = oracle_forward(m, x);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(logits.values[j] == doctest::Approx(expected[j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("forward rejects shape mismatches") {
    const ModelState m = init_model(small_arch(), 3);
    CHECK_THROWS_AS(forward(m, Tensor({1, 3}, {1.0, 2.0, 3.0})), DimensionError);
    CHECK_THROWS_AS(forward(m, Tensor({4}, {1.0, 2.0, 3.0, 4.0})), DimensionError);
}

TEST_CASE("confidences: uniform, saturated, and oracle cases") {
    // A zero model with bias set gives direct control over the logits.
    ModelState m = init_model({2, {}, 4, Activation::relu}, 1);
    zero_params(m);
    const Tensor x({2}, {0.0, 0.0});

    ConfidenceVector cv = predict_confidences(m, x);
    for (double p : cv.probs) {
        CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
    }

    ModelState two = init_model({2, {}, 2, Activation::relu}, 1);
    zero_params(two);
    two.params[0].bias.values = {1000.0, 0.0};
    cv = predict_confidences(two, x);
    CHECK(cv.probs[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cv.probs[1] == doctest::Approx(0.0).epsilon(1e-12));

    // Extreme magnitudes must not overflow.
    two.params[0].bias.values = {1e4, -1e4};
    cv = predict_confidences(two, x);
    CHECK(std::isfinite(cv.probs[0]));
    CHECK(cv.probs[0] + cv.probs[1] == doctest::Approx(1.0).epsilon(1e-9));

    ModelState three = init_model({2, {}, 3, Activation::relu}, 1);
    zero_params(three);
    three.params[0].bias.values = {1.0, 2.0, 3.0};
    cv = predict_confidences(three, x);
    long double denom = 0.0L;
    for (double b : {1.0, 2.0, 3.0}) {
        denom += expl(static_cast<long double>(b) - 3.0L);
    }
    for (std::size_t j = 0; j < 3; ++j) {
        const double expected = static_cast<double>(
            expl(static_cast<long double>(three.params[0].bias.values[j]) - 3.0L) / denom);
        CHECK(cv.probs[j] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("confidence vectors stay normalized for random models") {
    Rng rng(5150);
    for (int trial = 0; trial < 20; ++trial) {
        const ModelState m = init_model(small_arch(), rng.next_u64());
        std::vector<double> x(4);
        for (double& v : x) {
            v = rng.uniform(-3.0, 3.0);
        }
        const ConfidenceVector cv = predict_confidences(m, Tensor({4}, x));
        double sum = 0.0;
        for (double p : cv.probs) {
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("uniform predictions have loss ln(C)") {
    ModelState m = init_model({3, {}, 5, Activation::relu}, 1);
    zero_params(m);
    const Tensor batch({2, 3}, {1.0, 2.0, 3.0, -1.0, 0.0, 1.0});
    const double loss = mean_loss(m, batch, {0, 4});
    CHECK(loss == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("duplicating the batch leaves loss and gradients unchanged") {
    const ModelState m = init_model(small_arch(), 21);
    const Tensor batch({2, 4}, {0.3, -0.7, 1.1, 0.2, -0.4, 0.9, 0.0, -1.2});
    const std::vector<int> labels = {0, 1};
    std::vector<double> twice = batch.values;
    twice.insert(twice.end(), batch.values.begin(), batch.values.end());
    const Tensor doubled({4, 4}, twice);
    const LossAndGradients a = loss_and_gradients(m, batch, labels);
    const LossAndGradients b = loss_and_gradients(m, doubled, {0, 1, 0, 1});
    CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-12));
    for (std::size_t l = 0; l < a.grads.size(); ++l) {
        for (std::size_t i = 0; i < a.grads[l].weight.values.size(); ++i) {
            CHECK(a.grads[l].weight.values[i] ==
                  doctest::Approx(b.grads[l].weight.values[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("out-of-range labels are rejected") {
    const ModelState m = init_model(small_arch(), 21);
    const Tensor batch({1, 4}, {0.3, -0.7, 1.1, 0.2});
    CHECK_THROWS_AS(loss_and_gradients(m, batch, {2}), DataError);
    CHECK_THROWS_AS(loss_and_gradients(m, batch, {-1}), DataError);
}

TEST_CASE("gradients match central finite differences") {
    // tanh keeps the loss smooth everywhere, which central differences need;
    // a fixed seed known to keep relu pre-activations away from 0 covers the
    // piecewise-linear case.
    Rng rng(4242);
    for (int trial = 0; trial < 6; ++trial) {
        const ModelState m =
            init_model({5, {6, 4}, 3, Activation::tanh}, rng.next_u64());
        Tensor batch({8, 5}, std::vector<double>(40, 0.0));
        std::vector<int> labels(8);
        for (double& v : batch.values) {
            v = rng.uniform(-1.5, 1.5);
        }
        for (int& y : labels) {
            y = static_cast<int>(rng.below(3));
        }
        CHECK(max_rel_gradient_error(m, batch, labels) < 1e-4);
    }

    const ModelState relu_model = init_model({5, {6}, 3, Activation::relu}, 2024);
    Rng fixed(99);
    Tensor batch({8, 5}, std::vector<double>(40, 0.0));
    std::vector<int> labels(8);
    for (double& v : batch.values) {
        v = fixed.uniform(-1.5, 1.5);
    }
    for (int& y : labels) {
        y = static_cast<int>(fixed.below(3));
    }
    CHECK(max_rel_gradient_error(relu_model, batch, labels) < 1e-4);
}

TEST_CASE("sgd step is definitional and zero gradient is a fixed point") {
    ModelState m = init_model({1, {}, 2, Activation::relu}, 1, OptimizerKind::sgd,
                              {0.1, 0.9, 0.999, 1e-8});
    zero_params(m);
    m.params[0].weight.values = {1.0, 1.0};
    Gradients grads;
    grads.push_back({Tensor({1, 2}, {0.5, 0.0}), Tensor({2}, {0.0, 0.0})});
    const ModelState stepped = optimizer_step(m, grads);
    CHECK(stepped.params[0].weight.values[0] == 0.95);
    CHECK(stepped.params[0].weight.values[1] == 1.0);
    CHECK(stepped.optimizer_state.step_count == 1);

    Gradients zero;
    zero.push_back({Tensor::zeros({1, 2}), Tensor::zeros({2})});
    const ModelState unmoved = optimizer_step(m, zero);
    CHECK(unmoved.params[0].weight.values == m.params[0].weight.values);
}

TEST_CASE("adam's first step moves every coordinate by about lr") {
    const double lr = 1e-3;
    ModelState m = init_model(small_arch(), 8, OptimizerKind::adam, {lr, 0.9, 0.999, 1e-8});
    Gradients grads;
    Rng rng(31);
    for (const LayerTensors& layer : m.params) {
        LayerTensors g{Tensor::zeros(layer.weight.shape), Tensor::zeros(layer.bias.shape)};
        for (double& v : g.weight.values) {
            v = rng.uniform(0.1, 2.0) * (rng.uniform01() < 0.5 ? -1.0 : 1.0);
        }
        for (double& v : g.bias.values) {
            v = rng.uniform(0.1, 2.0) * (rng.uniform01() < 0.5 ? -1.0 : 1.0);
        }
        grads.push_back(std::move(g));
    }
    const ModelState stepped = optimizer_step(m, grads);
    for (std::size_t l = 0; l < m.params.size(); ++l) {
        for (std::size_t i = 0; i < m.params[l].weight.values.size(); ++i) {
            const double delta =
                stepped.params[l].weight.values[i] - m.params[l].weight.values[i];
            const double g = grads[l].weight.values[i];
            CHECK(std::abs(std::abs(delta) - lr) < 1e-6 * lr);
            CHECK(delta * g < 0.0);  // moves against the gradient
        }
    }
    CHECK(stepped.optimizer_state.step_count == 1);
}

TEST_CASE("train_epochs: identity at zero epochs, deterministic otherwise") {
    const ModelState m = init_model(small_arch(), 10);
    Rng rng(1234);
    Tensor feats({6, 4}, std::vector<double>(24, 0.0));
    for (double& v : feats.values) {
        v = rng.uniform(-1.0, 1.0);
    }
    const std::vector<int> labels = {0, 1, 0, 1, 0, 1};

    const ModelState same = train_epochs(m, feats, labels, 0, 2, 99);
    CHECK(param_digest(same) == param_digest(m));

    const ModelState a = train_epochs(m, feats, labels, 3, 2, 99);
    const ModelState b = train_epochs(m, feats, labels, 3, 2, 99);
    const ModelState c = train_epochs(m, feats, labels, 3, 2, 100);
    CHECK(param_digest(a) == param_digest(b));
    CHECK(param_digest(a) != param_digest(c));
    CHECK(a.optimizer_state.step_count == b.optimizer_state.step_count);

    CHECK_THROWS_AS(train_epochs(m, Tensor({0, 4}, {}), {}, 1, 2, 0), DataError);
    CHECK_THROWS_AS(train_epochs(m, feats, labels, 1, 0, 0), ConfigError);
}

TEST_CASE("separable data is fit and the loss drops") {
    // Two well-separated blobs, 100 examples each.
    Rng rng(555);
    const std::size_t n = 200;
    Tensor feats({n, 2}, std::vector<double>(2 * n, 0.0));
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = static_cast<int>(i % 2);
        labels[i] = y;
        feats.at(i, 0) = (y == 0 ? -3.0 : 3.0) + rng.normal();
        feats.at(i, 1) = rng.normal();
    }
    const ModelState m0 = init_model({2, {8}, 2, Activation::relu}, 77);
    const double initial_loss = mean_loss(m0, feats, labels);
    const ModelState m = train_epochs(m0, feats, labels, 50, 16, 7);
    CHECK(accuracy(m, feats, labels) >= 0.95);
    CHECK(mean_loss(m, feats, labels) < initial_loss);
}

TEST_CASE("accuracy matches a per-example argmax oracle") {
    const ModelState m = init_model({3, {4}, 3, Activation::relu}, 64);
    Rng rng(8);
    Tensor feats({10, 3}, std::vector<double>(30, 0.0));
    std::vector<int> labels(10);
    for (double& v : feats.values) {
        v = rng.uniform(-2.0, 2.0);
    }
    for (int& y : labels) {
        y = static_cast<int>(rng.below(3));
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < 10; ++i) {
        std::vector<double> x(feats.values.begin() + 3 * i, feats.values.begin() + 3 * i + 3);
        const ConfidenceVector cv = predict_confidences(m, Tensor({3}, x));
        std::size_t best = 0;
        for (std::size_t j = 1; j < cv.probs.size(); ++j) {
            if (cv.probs[j] > cv.probs[best]) {
                best = j;
            }
        }
        if (static_cast<int>(best) == labels[i]) {
            ++hits;
        }
    }
    CHECK(accuracy(m, feats, labels) == doctest::Approx(hits / 10.0));

    // A model biased to always pick class 2 scores 1.0 or 0.0 depending on
    // the labels, and ties break toward the lowest index.
    ModelState fixed = init_model({3, {}, 3, Activation::relu}, 1);
    zero_params(fixed);
    fixed.params[0].bias.values = {0.0, 0.0, 5.0};
    CHECK(accuracy(fixed, feats, {2, 2, 2, 2, 2, 2, 2, 2, 2, 2}) == 1.0);
    CHECK(accuracy(fixed, feats, {0, 0, 0, 0, 0, 0, 0, 0, 0, 0}) == 0.0);

    ModelState tie = init_model({3, {}, 3, Activation::relu}, 1);
    zero_params(tie);  // all logits equal: argmax must pick class 0
    CHECK(accuracy(tie, feats, {0, 0, 0, 0, 0, 0, 0, 0, 0, 0}) == 1.0);
    CHECK_THROWS_AS(accuracy(tie, Tensor({0, 3}, {}), {}), DataError);
}

TEST_CASE("rng stream building blocks behave") {
    CHECK(seed_mix(1, {2, 3}) == seed_mix(1, {2, 3}));
    CHECK(seed_mix(1, {2, 3}) != seed_mix(1, {3, 2}));
    CHECK(seed_mix(1, {2}) != seed_mix(2, {2}));

    Rng rng(99);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double o = rng.uniform_open01();
        CHECK(o > 0.0);
        CHECK(o < 1.0);
        CHECK(rng.below(7) < 7);
    }
    CHECK_THROWS_AS(rng.below(0), ConfigError);

    double sum = 0.0;
    double sumsq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sumsq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sumsq / n - 1.0) < 0.1);

    for (double alpha : {0.3, 1.0, 2.5}) {
        double mean = 0.0;
        for (int i = 0; i < 20000; ++i) {
            const double g = rng.gamma(alpha);
            CHECK(g > 0.0);
            mean += g;
        }
        mean /= 20000;
        CHECK(std::abs(mean - alpha) < 0.1);
    }

    const std::vector<double> dir = rng.dirichlet(0.5, 4);
    REQUIRE(dir.size() == 4);
    double total = 0.0;
    for (double v : dir) {
        CHECK(v > 0.0);
        total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<int> items = {1, 2, 3, 4, 5, 6, 7};
    std::vector<int> shuffled = items;
    Rng s1(5);
    s1.shuffle(shuffled);
    std::vector<int> again = items;
    Rng s2(5);
    s2.shuffle(again);
    CHECK(shuffled == again);
    std::vector<int> sorted = shuffled;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == items);
}
