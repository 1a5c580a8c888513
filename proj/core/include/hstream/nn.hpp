// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small differentiable layer library: conv2d, 2x2 max-pool, dense, relu,
// sigmoid, softmax, dropout and flatten over batch-major NHWC / [B,N]
// tensors, plus cross-entropy, SGD with momentum and a finite-difference
// gradient checker.
//
// Layers are templates over the scalar type. Training runs in float; the
// gradient checker evaluates a double copy of the same network to obtain
// finite differences that are not swamped by float rounding.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hstream/random.hpp"
#include "hstream/tensor.hpp"

namespace hstream::nn {

enum class LayerKind { conv2d, maxpool, dense, relu, sigmoid, softmax, dropout, flatten };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    std::size_t kernel_h = 0;
    std::size_t kernel_w = 0;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t stride = 1;
    std::size_t padding = 0;
    std::size_t in_features = 0;
    std::size_t out_features = 0;
    double dropout_rate = 0.0;

    static LayerSpec conv2d(std::size_t kernel, std::size_t in_ch, std::size_t out_ch, std::size_t stride = 1,
                            std::size_t padding = 0);
    static LayerSpec maxpool() { return {.kind = LayerKind::maxpool}; }
    static LayerSpec dense(std::size_t in, std::size_t out);
    static LayerSpec relu() { return {.kind = LayerKind::relu}; }
    static LayerSpec sigmoid() { return {.kind = LayerKind::sigmoid}; }
    static LayerSpec softmax() { return {.kind = LayerKind::softmax}; }
    static LayerSpec dropout(double rate);
    static LayerSpec flatten() { return {.kind = LayerKind::flatten}; }

    [[nodiscard]] bool has_parameters() const { return kind == LayerKind::conv2d || kind == LayerKind::dense; }
    [[nodiscard]] std::string describe() const;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// What backward() needs from the matching forward() call.
template <typename T>
struct LayerCache {
    LayerKind kind = LayerKind::relu;
    bool valid = false;
    bool training = false;
    BasicTensor<T> input;
    BasicTensor<T> output;
    BasicTensor<T> mask;               // dropout keep/scale factors
    std::vector<std::uint32_t> argmax;  // maxpool winners (flat input index)
    Shape input_shape;
};

template <typename T>
struct ForwardResult {
    BasicTensor<T> output;
    LayerCache<T> cache;
};

template <typename T>
struct BackwardResult {
    BasicTensor<T> input_grad;                // empty when not requested
    std::vector<BasicTensor<T>> param_grads;  // weight, bias for conv2d/dense
};

template <typename T>
class Layer {
public:
    explicit Layer(LayerSpec spec);

    /// Uniform Glorot initialisation of weights, zero biases.
    void initialize(Rng& rng);

    [[nodiscard]] const LayerSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] LayerKind kind() const noexcept { return spec_.kind; }

    /// Output shape for `input`, or ShapeError if incompatible.
    [[nodiscard]] Shape output_shape(const Shape& input) const;

    ForwardResult<T> forward(const BasicTensor<T>& input, bool training, Rng& rng) const;
    BackwardResult<T> backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache,
                               bool need_input_grad = true) const;

    /// backward() that adds parameter gradients into caller-owned buffers
    /// (both null for parameter-free layers).
    BasicTensor<T> accumulate_backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache,
                                       BasicTensor<T>* weight_grad, BasicTensor<T>* bias_grad,
                                       bool need_input_grad) const;

    /// Weight then bias; empty for parameter-free layers.
    std::vector<BasicTensor<T>*> parameters();
    std::vector<const BasicTensor<T>*> parameters() const;

    template <typename U>
    Layer<U> cast() const {
        Layer<U> out(spec_);
        if (spec_.has_parameters()) {
            *out.parameters()[0] = tensor_cast<U>(weight_);
            *out.parameters()[1] = tensor_cast<U>(bias_);
        }
        return out;
    }

private:
    LayerSpec spec_;
    BasicTensor<T> weight_;  // conv: [kh,kw,in,out]; dense: [in,out]
    BasicTensor<T> bias_;    // [out]
};

/// Layers applied in order. Owns the caches of the last forward pass, so an
/// instance must not be shared between concurrent forward/backward calls.
template <typename T>
class Sequential {
public:
    Sequential() = default;
    explicit Sequential(std::vector<LayerSpec> specs);

    void initialize(Rng& rng);

    BasicTensor<T> forward(const BasicTensor<T>& input, bool training, Rng& rng);

    /// Back-propagates through every layer, accumulating parameter gradients.
    /// Returns the input gradient unless `need_input_grad` is false.
    BasicTensor<T> backward(const BasicTensor<T>& grad_out, bool need_input_grad = true);

    /// Like backward(), but starts below a trailing softmax with the gradient
    /// with respect to its logits (the fused softmax + cross-entropy path).
    BasicTensor<T> backward_from_logits(const BasicTensor<T>& grad_logits, bool need_input_grad = true);

    void zero_grad();

    /// Relu on/off states and max-pool winners of the last forward pass.
    /// Inputs with equal patterns lie on the same smooth piece of the network.
    [[nodiscard]] std::vector<std::uint32_t> activation_pattern() const;

    [[nodiscard]] Shape output_shape(const Shape& input) const;
    [[nodiscard]] std::size_t parameter_count() const;

    std::vector<BasicTensor<T>*> parameters();
    std::vector<const BasicTensor<T>*> parameters() const;
    std::vector<BasicTensor<T>>& gradients() { return grads_; }

    std::vector<Layer<T>>& layers() noexcept { return layers_; }
    const std::vector<Layer<T>>& layers() const noexcept { return layers_; }

    template <typename U>
    Sequential<U> cast() const {
        std::vector<LayerSpec> specs;
        for (const auto& l : layers_) specs.push_back(l.spec());
        Sequential<U> out(specs);
        for (std::size_t i = 0; i < layers_.size(); ++i) out.layers()[i] = layers_[i].template cast<U>();
        return out;
    }

private:
    BasicTensor<T> backward_range(BasicTensor<T> grad, std::size_t end, bool need_input_grad);
    void ensure_grads();

    std::vector<Layer<T>> layers_;
    std::vector<LayerCache<T>> caches_;
    std::vector<BasicTensor<T>> grads_;  // aligned with parameters()
};

template <typename T>
struct CrossEntropy {
    double loss = 0.0;
    BasicTensor<T> grad_logits;  // (probs - labels) / B
};

/// Mean negative log-likelihood of [B,K] probabilities against [B,K]
/// one-hot labels. The true-class probability is clamped at 1e-12.
template <typename T>
CrossEntropy<T> cross_entropy_loss(const BasicTensor<T>& probs, const BasicTensor<T>& labels);

/// One-hot [B,K] label matrix.
Tensor one_hot(const std::vector<int>& labels, std::size_t classes);

struct OptimizerState {
    std::vector<Tensor> velocity;
    double learning_rate = 1e-2;
    double momentum = 0.9;
    double weight_decay = 0.0;

    /// Zero velocities shaped like `params`.
    static OptimizerState for_parameters(const std::vector<const Tensor*>& params, double lr, double momentum,
                                         double weight_decay = 0.0);
};

/// v <- momentum * v - lr * (g + weight_decay * w);  w <- w + v.
void sgd_momentum_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads, OptimizerState& state);

struct GradientCheckResult {
    double max_relative_error = 0.0;
    std::size_t parameter = 0;  // index into parameters() of the worst entry
    std::size_t element = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t checked = 0;
    std::size_t skipped_nonsmooth = 0;  // the +-epsilon probe crossed a relu or max-pool switch
};

/// Relative error |a - n| / max(|a|, |n|, 1e-6). Below the floor f32
/// back-propagation cannot resolve an entry, so the error becomes absolute.
inline double relative_error(double a, double n) {
    const double denom = std::max({std::abs(a), std::abs(n), 1e-6});
    return std::abs(a - n) / denom;
}

template <typename U, typename T>
BasicTensor<U> cast_input(const BasicTensor<T>& t) {
    return tensor_cast<U>(t);
}

/// Compares the float network's analytic parameter gradients against
/// central differences (step `epsilon`) of the loss evaluated on a double
/// copy of the same parameters. Dropout is disabled throughout. When the net
/// exposes activation_pattern(), entries whose probes change the pattern are
/// counted in skipped_nonsmooth instead of compared.
///
/// `Net<T>` must provide parameters(), gradients(), cast<U>(),
/// compute_loss(input, labels) and compute_loss_and_gradients(input, labels);
/// `Input` must be convertible with cast_input<U>().
template <template <typename> class Net, typename Input>
GradientCheckResult gradient_check(Net<float>& net, const Input& input, const Tensor& labels,
                                   double epsilon = 1e-3) {
    net.compute_loss_and_gradients(input, labels);
    const std::vector<Tensor> analytic = net.gradients();

    Net<double> twin = net.template cast<double>();
    const auto input_d = cast_input<double>(input);
    const auto labels_d = tensor_cast<double>(labels);
    auto params = twin.parameters();
    constexpr bool piecewise = requires { twin.activation_pattern(); };
    std::vector<std::uint32_t> pattern;
    if constexpr (piecewise) {
        twin.compute_loss(input_d, labels_d);
        pattern = twin.activation_pattern();
    }

    GradientCheckResult result;
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto& values = params[p]->values();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double original = values[i];
            bool smooth = true;
            values[i] = original + epsilon;
            const double plus = twin.compute_loss(input_d, labels_d);
            if constexpr (piecewise) smooth = smooth && twin.activation_pattern() == pattern;
            values[i] = original - epsilon;
            const double minus = twin.compute_loss(input_d, labels_d);
            if constexpr (piecewise) smooth = smooth && twin.activation_pattern() == pattern;
            values[i] = original;
            if (!smooth) {
                ++result.skipped_nonsmooth;
                continue;
            }
            const double numeric = (plus - minus) / (2.0 * epsilon);
            const double a = analytic[p][i];
            const double err = relative_error(a, numeric);
            if (err > result.max_relative_error || result.checked == 0) {
                result.max_relative_error = std::max(err, result.max_relative_error);
                result.parameter = p;
                result.element = i;
                result.analytic = a;
                result.numeric = numeric;
            }
            ++result.checked;
        }
    }
    return result;
}

/// A Sequential ending in softmax, trained with cross-entropy. Adapts
/// Sequential to the interface gradient_check() expects.
template <typename T>
class Classifier {
public:
    explicit Classifier(Sequential<T> net) : net_(std::move(net)) {}

    std::vector<BasicTensor<T>*> parameters() { return net_.parameters(); }
    std::vector<BasicTensor<T>>& gradients() { return net_.gradients(); }
    Sequential<T>& network() { return net_; }
    [[nodiscard]] std::vector<std::uint32_t> activation_pattern() const { return net_.activation_pattern(); }

    double compute_loss(const BasicTensor<T>& input, const BasicTensor<T>& labels) {
        Rng rng(0);
        return cross_entropy_loss(net_.forward(input, false, rng), labels).loss;
    }

    double compute_loss_and_gradients(const BasicTensor<T>& input, const BasicTensor<T>& labels) {
        Rng rng(0);
        net_.zero_grad();
        auto ce = cross_entropy_loss(net_.forward(input, false, rng), labels);
        net_.backward_from_logits(ce.grad_logits, false);
        return ce.loss;
    }

    template <typename U>
    Classifier<U> cast() const {
        return Classifier<U>(net_.template cast<U>());
    }

private:
    Sequential<T> net_;
};

}  // namespace hstream::nn
