// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0
//
// Two-stream action classifier. The optional flow branch turns a
// 56x56x4 stack of two optical flows into a 64-dim feature through three
// conv3x3/relu/maxpool stages and two relu dense layers. The fusion head
// maps [flow feature, latent joint feature] through dense/sigmoid layers of
// width 100 and 50, dropout, 20 (sigmoid) and finally 4 (softmax).

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "hstream/action.hpp"
#include "hstream/checkpoint.hpp"
#include "hstream/nn.hpp"

namespace hstream {

struct ModelConfig {
    bool use_flow = true;   // +OF / -OF
    bool use_stick = true;  // +ST / -ST
    std::size_t flow_input_size = 56;
    std::vector<std::size_t> conv_channels = {16, 32, 64};
    std::vector<std::size_t> flow_dense = {256, 64};
    std::array<std::size_t, 4> fusion = {100, 50, 20, 4};
    double dropout_rate = 0.3;
    std::uint64_t seed = 0;

    /// Throws ConfigError. The last fusion width must be 4, and the flow
    /// input must survive one 2x2 pool per conv stage.
    void validate() const;

    [[nodiscard]] std::size_t latent_length() const;
    [[nodiscard]] std::size_t flow_feature_length() const;
    [[nodiscard]] std::size_t fusion_input_length() const;

    /// Short tag such as "+ST,+OF".
    [[nodiscard]] std::string tag() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

void to_json(nlohmann::json& j, const ModelConfig& cfg);
void from_json(const nlohmann::json& j, ModelConfig& cfg);

/// A batch for the classifier: latent features [B, D] and, for flow-enabled
/// models, flow stacks [B, S, S, 4].
template <typename T>
struct TwoStreamInput {
    BasicTensor<T> latent;
    std::optional<BasicTensor<T>> flow;
};

template <typename U, typename T>
TwoStreamInput<U> cast_input(const TwoStreamInput<T>& in) {
    TwoStreamInput<U> out{tensor_cast<U>(in.latent), std::nullopt};
    if (in.flow) out.flow = tensor_cast<U>(*in.flow);
    return out;
}

template <typename T>
class TwoStreamNet {
public:
    /// Builds the layers; weights are zero until initialize().
    explicit TwoStreamNet(ModelConfig cfg);

    /// Glorot initialisation drawn from config().seed.
    void initialize();

    [[nodiscard]] const ModelConfig& config() const noexcept { return cfg_; }

    /// Class probabilities [B, 4].
    BasicTensor<T> forward(const TwoStreamInput<T>& input, bool training, Rng& rng);

    /// Back-propagates dL/dlogits [B, 4], accumulating parameter gradients.
    void backward_from_logits(const BasicTensor<T>& grad_logits);

    void zero_grad();

    /// Flow branch parameters (if any) followed by fusion head parameters.
    std::vector<BasicTensor<T>*> parameters();
    std::vector<const BasicTensor<T>*> parameters() const;
    std::vector<BasicTensor<T>> gradients();
    [[nodiscard]] std::size_t parameter_count() const;

    double compute_loss(const TwoStreamInput<T>& input, const BasicTensor<T>& labels);
    double compute_loss_and_gradients(const TwoStreamInput<T>& input, const BasicTensor<T>& labels);

    /// Relu/max-pool pattern of the last forward pass, flow branch first.
    [[nodiscard]] std::vector<std::uint32_t> activation_pattern() const;

    nn::Sequential<T>& flow_branch() noexcept { return flow_; }
    nn::Sequential<T>& fusion_head() noexcept { return fusion_; }

    /// Branch list for checkpoint I/O; flow comes first when present.
    std::vector<BranchRef> branches()
        requires std::is_same_v<T, float>;

    template <typename U>
    TwoStreamNet<U> cast() const {
        TwoStreamNet<U> out(cfg_);
        out.flow_branch() = flow_.template cast<U>();
        out.fusion_head() = fusion_.template cast<U>();
        return out;
    }

private:
    void check_input(const TwoStreamInput<T>& input) const;

    ModelConfig cfg_;
    nn::Sequential<T> flow_;
    nn::Sequential<T> fusion_;
};

/// Validates the config, builds and initialises the network.
TwoStreamNet<float> build_model(const ModelConfig& cfg);

/// Concatenates two [H,W,2] flows in temporal order and resizes to
/// size x size, rescaling displacements to the new grid.
Tensor prepare_flow_input(const Tensor& flow12, const Tensor& flow23, std::size_t size = 56);

/// Deterministic inference (dropout off) for a single example. `flow_input`
/// is [S,S,4] and required exactly when the model uses flow.
std::array<float, kActionCount> predict(TwoStreamNet<float>& net, std::span<const float> latent,
                                        const Tensor* flow_input);

/// Stacks per-example vectors / [S,S,4] tensors into batch tensors.
Tensor stack_latent(const std::vector<std::vector<float>>& rows);
Tensor stack_flows(const std::vector<const Tensor*>& flows);

void save_model(const std::filesystem::path& dir, TwoStreamNet<float>& net, const nn::OptimizerState* optimizer,
                const CheckpointMeta& meta);
/// Rebuilds the network from the checkpoint's model config and loads it.
TwoStreamNet<float> load_model(const std::filesystem::path& dir, CheckpointMeta* meta = nullptr);

/// (+ST,+OF) config with the full fusion head and a narrow flow branch over
/// 8x8 inputs, small enough for an exhaustive finite-difference check.
ModelConfig reduced_gradcheck_config(std::uint64_t seed);

struct GradcheckSummary {
    nn::GradientCheckResult model;  // reduced two-stream network, batch of 2
    nn::GradientCheckResult dense;  // one dense layer followed by softmax
};

GradcheckSummary run_gradient_checks(std::uint64_t seed, double epsilon = 1e-3);

}  // namespace hstream
