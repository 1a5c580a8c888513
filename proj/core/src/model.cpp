// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "hstream/model.hpp"

#include "hstream/latent_feature.hpp"

namespace hstream {

using nn::LayerSpec;

void ModelConfig::validate() const {
    if (fusion[3] != kActionCount) throw ConfigError("last fusion width must be 4");
    if (fusion[1] != 50) throw ConfigError("the second fusion layer (followed by dropout) must have 50 units");
    for (std::size_t w : fusion) {
        if (w == 0) throw ConfigError("fusion widths must be positive");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout rate must be in [0,1)");
    if (use_flow) {
        if (conv_channels.empty()) throw ConfigError("flow branch needs at least one conv stage");
        if (flow_dense.empty()) throw ConfigError("flow branch needs at least one dense layer");
        for (std::size_t c : conv_channels) {
            if (c == 0) throw ConfigError("conv channel counts must be positive");
        }
        for (std::size_t w : flow_dense) {
            if (w == 0) throw ConfigError("flow dense widths must be positive");
        }
        std::size_t s = flow_input_size;
        for (std::size_t i = 0; i < conv_channels.size(); ++i) {
            if (s < 2) throw ConfigError("flow input too small for " + std::to_string(conv_channels.size()) + " pools");
            s /= 2;
        }
    }
}

std::size_t ModelConfig::latent_length() const { return sequence_feature_length(use_stick); }

std::size_t ModelConfig::flow_feature_length() const { return use_flow ? flow_dense.back() : 0; }

std::size_t ModelConfig::fusion_input_length() const { return flow_feature_length() + latent_length(); }

std::string ModelConfig::tag() const {
    return std::string(use_stick ? "+ST" : "-ST") + "," + (use_flow ? "+OF" : "-OF");
}

void to_json(nlohmann::json& j, const ModelConfig& cfg) {
    j = {
        {"use_flow", cfg.use_flow},
        {"use_stick", cfg.use_stick},
        {"flow_input_size", cfg.flow_input_size},
        {"conv_channels", cfg.conv_channels},
        {"flow_dense", cfg.flow_dense},
        {"fusion", cfg.fusion},
        {"dropout_rate", cfg.dropout_rate},
        {"seed", cfg.seed},
    };
}

void from_json(const nlohmann::json& j, ModelConfig& cfg) {
    try {
        j.at("use_flow").get_to(cfg.use_flow);
        j.at("use_stick").get_to(cfg.use_stick);
        j.at("flow_input_size").get_to(cfg.flow_input_size);
        j.at("conv_channels").get_to(cfg.conv_channels);
        j.at("flow_dense").get_to(cfg.flow_dense);
        j.at("fusion").get_to(cfg.fusion);
        j.at("dropout_rate").get_to(cfg.dropout_rate);
        j.at("seed").get_to(cfg.seed);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed model config: ") + e.what());
    }
}

template <typename T>
TwoStreamNet<T>::TwoStreamNet(ModelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    if (cfg_.use_flow) {
        std::vector<LayerSpec> specs;
        std::size_t in_ch = 4;
        std::size_t size = cfg_.flow_input_size;
        for (std::size_t out_ch : cfg_.conv_channels) {
            specs.push_back(LayerSpec::conv2d(3, in_ch, out_ch, 1, 1));
            specs.push_back(LayerSpec::relu());
            specs.push_back(LayerSpec::maxpool());
            in_ch = out_ch;
            size /= 2;
        }
        specs.push_back(LayerSpec::flatten());
        std::size_t in = size * size * in_ch;
        for (std::size_t w : cfg_.flow_dense) {
            specs.push_back(LayerSpec::dense(in, w));
            specs.push_back(LayerSpec::relu());
            in = w;
        }
        flow_ = nn::Sequential<T>(std::move(specs));
    }
    const auto& f = cfg_.fusion;
    fusion_ = nn::Sequential<T>({
        LayerSpec::dense(cfg_.fusion_input_length(), f[0]),
        LayerSpec::sigmoid(),
        LayerSpec::dense(f[0], f[1]),
        LayerSpec::sigmoid(),
        LayerSpec::dropout(cfg_.dropout_rate),
        LayerSpec::dense(f[1], f[2]),
        LayerSpec::sigmoid(),
        LayerSpec::dense(f[2], f[3]),
        LayerSpec::softmax(),
    });
}

template <typename T>
void TwoStreamNet<T>::initialize() {
    Rng rng(derive_seed(cfg_.seed, 0x1417));
    flow_.initialize(rng);
    fusion_.initialize(rng);
}

template <typename T>
void TwoStreamNet<T>::check_input(const TwoStreamInput<T>& input) const {
    const auto& lat = input.latent;
    if (lat.rank() != 2 || lat.dim(1) != cfg_.latent_length()) {
        throw ContractError("latent input must be [B," + std::to_string(cfg_.latent_length()) + "] for " + cfg_.tag() +
                            ", got " + shape_to_string(lat.shape()));
    }
    if (cfg_.use_flow) {
        if (!input.flow) throw ContractError("flow input required for a " + cfg_.tag() + " model");
        const Shape want{lat.dim(0), cfg_.flow_input_size, cfg_.flow_input_size, 4};
        if (input.flow->shape() != want) {
            throw ContractError("flow input must be " + shape_to_string(want) + ", got " +
                                shape_to_string(input.flow->shape()));
        }
    }
}

template <typename T>
BasicTensor<T> TwoStreamNet<T>::forward(const TwoStreamInput<T>& input, bool training, Rng& rng) {
    check_input(input);
    if (!cfg_.use_flow) return fusion_.forward(input.latent, training, rng);

    const BasicTensor<T> flow_features = flow_.forward(*input.flow, training, rng);
    const std::size_t batch = input.latent.dim(0);
    const std::size_t nf = flow_features.dim(1), nl = input.latent.dim(1);
    BasicTensor<T> fused({batch, nf + nl});
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t i = 0; i < nf; ++i) fused.at(b, i) = flow_features.at(b, i);
        for (std::size_t i = 0; i < nl; ++i) fused.at(b, nf + i) = input.latent.at(b, i);
    }
    return fusion_.forward(fused, training, rng);
}

template <typename T>
void TwoStreamNet<T>::backward_from_logits(const BasicTensor<T>& grad_logits) {
    const BasicTensor<T> grad_fused = fusion_.backward_from_logits(grad_logits, cfg_.use_flow);
    if (!cfg_.use_flow) return;
    const std::size_t batch = grad_fused.dim(0), nf = cfg_.flow_feature_length();
    BasicTensor<T> grad_flow({batch, nf});
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t i = 0; i < nf; ++i) grad_flow.at(b, i) = grad_fused.at(b, i);
    }
    flow_.backward(grad_flow, false);
}

template <typename T>
void TwoStreamNet<T>::zero_grad() {
    flow_.zero_grad();
    fusion_.zero_grad();
}

template <typename T>
std::vector<BasicTensor<T>*> TwoStreamNet<T>::parameters() {
    auto out = flow_.parameters();
    for (auto* p : fusion_.parameters()) out.push_back(p);
    return out;
}

template <typename T>
std::vector<const BasicTensor<T>*> TwoStreamNet<T>::parameters() const {
    auto out = flow_.parameters();
    for (const auto* p : fusion_.parameters()) out.push_back(p);
    return out;
}

template <typename T>
std::vector<BasicTensor<T>> TwoStreamNet<T>::gradients() {
    auto out = flow_.gradients();
    const auto& fg = fusion_.gradients();
    out.insert(out.end(), fg.begin(), fg.end());
    return out;
}

template <typename T>
std::size_t TwoStreamNet<T>::parameter_count() const {
    return flow_.parameter_count() + fusion_.parameter_count();
}

template <typename T>
double TwoStreamNet<T>::compute_loss(const TwoStreamInput<T>& input, const BasicTensor<T>& labels) {
    Rng rng(0);
    return nn::cross_entropy_loss(forward(input, false, rng), labels).loss;
}

template <typename T>
double TwoStreamNet<T>::compute_loss_and_gradients(const TwoStreamInput<T>& input, const BasicTensor<T>& labels) {
    Rng rng(0);
    zero_grad();
    auto ce = nn::cross_entropy_loss(forward(input, false, rng), labels);
    backward_from_logits(ce.grad_logits);
    return ce.loss;
}

template <typename T>
std::vector<std::uint32_t> TwoStreamNet<T>::activation_pattern() const {
    std::vector<std::uint32_t> out = flow_.activation_pattern();
    const auto fusion = fusion_.activation_pattern();
    out.insert(out.end(), fusion.begin(), fusion.end());
    return out;
}

template <typename T>
std::vector<BranchRef> TwoStreamNet<T>::branches()
    requires std::is_same_v<T, float>
{
    std::vector<BranchRef> out;
    if (cfg_.use_flow) out.push_back({"flow", &flow_});
    out.push_back({"fusion", &fusion_});
    return out;
}

template class TwoStreamNet<float>;
template class TwoStreamNet<double>;

TwoStreamNet<float> build_model(const ModelConfig& cfg) {
    TwoStreamNet<float> net(cfg);
    net.initialize();
    return net;
}

Tensor prepare_flow_input(const Tensor& flow12, const Tensor& flow23, std::size_t size) {
    if (flow12.rank() != 3 || flow12.dim(2) != 2 || flow12.shape() != flow23.shape()) {
        throw ArgumentError("prepare_flow_input: expected two [H,W,2] flows of equal shape, got " +
                            shape_to_string(flow12.shape()) + " and " + shape_to_string(flow23.shape()));
    }
    return resize_bilinear(concat_channels(flow12, flow23), size, size, true);
}

std::array<float, kActionCount> predict(TwoStreamNet<float>& net, std::span<const float> latent,
                                        const Tensor* flow_input) {
    const ModelConfig& cfg = net.config();
    if (latent.size() != cfg.latent_length()) {
        throw ContractError("latent vector has " + std::to_string(latent.size()) + " values, " + cfg.tag() +
                            " model expects " + std::to_string(cfg.latent_length()));
    }
    if (cfg.use_flow && flow_input == nullptr) throw ContractError("flow input required for a " + cfg.tag() + " model");

    TwoStreamInput<float> in{Tensor({1, latent.size()}, std::vector<float>(latent.begin(), latent.end())), std::nullopt};
    if (cfg.use_flow) {
        const std::size_t s = cfg.flow_input_size;
        if (flow_input->shape() != Shape{s, s, 4}) {
            throw ContractError("flow input must be " + shape_to_string({s, s, 4}) + ", got " +
                                shape_to_string(flow_input->shape()));
        }
        in.flow = flow_input->reshaped({1, s, s, 4});
    }
    Rng rng(0);
    const Tensor probs = net.forward(in, false, rng);
    std::array<float, kActionCount> out{};
    for (std::size_t k = 0; k < kActionCount; ++k) out[k] = probs.at(0, k);
    return out;
}

Tensor stack_latent(const std::vector<std::vector<float>>& rows) {
    if (rows.empty()) throw ArgumentError("stack_latent: empty batch");
    const std::size_t n = rows.front().size();
    std::vector<float> data;
    data.reserve(rows.size() * n);
    for (const auto& r : rows) {
        if (r.size() != n) throw ArgumentError("stack_latent: ragged batch");
        data.insert(data.end(), r.begin(), r.end());
    }
    return Tensor({rows.size(), n}, std::move(data));
}

Tensor stack_flows(const std::vector<const Tensor*>& flows) {
    if (flows.empty()) throw ArgumentError("stack_flows: empty batch");
    const Shape& s = flows.front()->shape();
    if (s.size() != 3) throw ArgumentError("stack_flows: expected [S,S,C] tensors");
    std::vector<float> data;
    data.reserve(flows.size() * flows.front()->size());
    for (const Tensor* f : flows) {
        if (f->shape() != s) throw ArgumentError("stack_flows: ragged batch");
        data.insert(data.end(), f->values().begin(), f->values().end());
    }
    return Tensor({flows.size(), s[0], s[1], s[2]}, std::move(data));
}

void save_model(const std::filesystem::path& dir, TwoStreamNet<float>& net, const nn::OptimizerState* optimizer,
                const CheckpointMeta& meta) {
    CheckpointMeta m = meta;
    m.model_config = net.config();
    const auto branches = net.branches();
    save_checkpoint(dir, branches, optimizer, m);
}

TwoStreamNet<float> load_model(const std::filesystem::path& dir, CheckpointMeta* meta) {
    const CheckpointMeta m = read_checkpoint_meta(dir);
    TwoStreamNet<float> net(m.model_config.get<ModelConfig>());
    const auto branches = net.branches();
    load_checkpoint(dir, branches, nullptr);
    if (meta != nullptr) *meta = m;
    return net;
}

ModelConfig reduced_gradcheck_config(std::uint64_t seed) {
    ModelConfig cfg;
    cfg.flow_input_size = 8;
    cfg.conv_channels = {2, 3, 4};
    cfg.flow_dense = {8, 6};
    cfg.seed = seed;
    return cfg;
}

GradcheckSummary run_gradient_checks(std::uint64_t seed, double epsilon) {
    Rng rng(derive_seed(seed, 0x6763));
    auto gaussian = [&rng](Shape shape) {
        Tensor t(std::move(shape));
        for (float& v : t.values()) v = static_cast<float>(rng.normal());
        return t;
    };

    GradcheckSummary out;
    const ModelConfig cfg = reduced_gradcheck_config(seed);
    TwoStreamNet<float> net = build_model(cfg);
    const std::size_t s = cfg.flow_input_size;
    TwoStreamInput<float> input{gaussian({2, cfg.latent_length()}), gaussian({2, s, s, 4})};
    out.model = nn::gradient_check(net, input, nn::one_hot({1, 3}, kActionCount), epsilon);

    nn::Sequential<float> dense({LayerSpec::dense(6, 4), LayerSpec::softmax()});
    dense.initialize(rng);
    nn::Classifier<float> clf(std::move(dense));
    out.dense = nn::gradient_check(clf, gaussian({3, 6}), nn::one_hot({0, 2, 3}, kActionCount), epsilon);
    return out;
}

}  // namespace hstream
