// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "hstream/nn.hpp"

#include <cmath>
#include <limits>

namespace hstream::nn {

namespace {

[[noreturn]] void shape_mismatch(const LayerSpec& spec, const Shape& got, const std::string& expected) {
    throw ShapeError(spec.describe() + ": expected " + expected + ", got " + shape_to_string(got));
}

}  // namespace

std::string to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::conv2d: return "conv2d";
        case LayerKind::maxpool: return "maxpool";
        case LayerKind::dense: return "dense";
        case LayerKind::relu: return "relu";
        case LayerKind::sigmoid: return "sigmoid";
        case LayerKind::softmax: return "softmax";
        case LayerKind::dropout: return "dropout";
        case LayerKind::flatten: return "flatten";
    }
    return "unknown";
}

LayerKind layer_kind_from_string(const std::string& name) {
    for (LayerKind k : {LayerKind::conv2d, LayerKind::maxpool, LayerKind::dense, LayerKind::relu, LayerKind::sigmoid,
                        LayerKind::softmax, LayerKind::dropout, LayerKind::flatten}) {
        if (to_string(k) == name) return k;
    }
    throw FormatError("unknown layer kind `" + name + "`");
}

LayerSpec LayerSpec::conv2d(std::size_t kernel, std::size_t in_ch, std::size_t out_ch, std::size_t stride,
                            std::size_t padding) {
    return {.kind = LayerKind::conv2d,
            .kernel_h = kernel,
            .kernel_w = kernel,
            .in_channels = in_ch,
            .out_channels = out_ch,
            .stride = stride,
            .padding = padding};
}

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out) {
    return {.kind = LayerKind::dense, .in_features = in, .out_features = out};
}

LayerSpec LayerSpec::dropout(double rate) { return {.kind = LayerKind::dropout, .dropout_rate = rate}; }

std::string LayerSpec::describe() const {
    switch (kind) {
        case LayerKind::conv2d:
            return "conv2d(" + std::to_string(kernel_h) + "x" + std::to_string(kernel_w) + ", " +
                   std::to_string(in_channels) + "->" + std::to_string(out_channels) + ", stride " +
                   std::to_string(stride) + ", pad " + std::to_string(padding) + ")";
        case LayerKind::dense:
            return "dense(" + std::to_string(in_features) + "->" + std::to_string(out_features) + ")";
        case LayerKind::dropout: return "dropout(" + std::to_string(dropout_rate) + ")";
        default: return to_string(kind);
    }
}

// ---------------------------------------------------------------------------
// Layer

template <typename T>
Layer<T>::Layer(LayerSpec spec) : spec_(spec) {
    switch (spec_.kind) {
        case LayerKind::conv2d:
            if (spec_.kernel_h == 0 || spec_.kernel_w == 0 || spec_.in_channels == 0 || spec_.out_channels == 0 ||
                spec_.stride == 0) {
                throw ConfigError("invalid " + spec_.describe());
            }
            weight_ = BasicTensor<T>({spec_.kernel_h, spec_.kernel_w, spec_.in_channels, spec_.out_channels});
            bias_ = BasicTensor<T>({spec_.out_channels});
            break;
        case LayerKind::dense:
            if (spec_.in_features == 0 || spec_.out_features == 0) throw ConfigError("invalid " + spec_.describe());
            weight_ = BasicTensor<T>({spec_.in_features, spec_.out_features});
            bias_ = BasicTensor<T>({spec_.out_features});
            break;
        case LayerKind::dropout:
            if (!(spec_.dropout_rate >= 0.0 && spec_.dropout_rate < 1.0)) {
                throw ConfigError("dropout rate must be in [0,1), got " + std::to_string(spec_.dropout_rate));
            }
            break;
        default: break;
    }
}

template <typename T>
void Layer<T>::initialize(Rng& rng) {
    if (!spec_.has_parameters()) return;
    double fan_in, fan_out;
    if (spec_.kind == LayerKind::conv2d) {
        const double area = static_cast<double>(spec_.kernel_h * spec_.kernel_w);
        fan_in = area * static_cast<double>(spec_.in_channels);
        fan_out = area * static_cast<double>(spec_.out_channels);
    } else {
        fan_in = static_cast<double>(spec_.in_features);
        fan_out = static_cast<double>(spec_.out_features);
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (T& w : weight_.values()) w = static_cast<T>(rng.uniform(-limit, limit));
    bias_.fill(T{0});
}

template <typename T>
Shape Layer<T>::output_shape(const Shape& in) const {
    switch (spec_.kind) {
        case LayerKind::conv2d: {
            if (in.size() != 4 || in[3] != spec_.in_channels) {
                shape_mismatch(spec_, in, "[B,H,W," + std::to_string(spec_.in_channels) + "]");
            }
            const std::size_t ph = in[1] + 2 * spec_.padding, pw = in[2] + 2 * spec_.padding;
            if (ph < spec_.kernel_h || pw < spec_.kernel_w) shape_mismatch(spec_, in, "input at least kernel size");
            return {in[0], (ph - spec_.kernel_h) / spec_.stride + 1, (pw - spec_.kernel_w) / spec_.stride + 1,
                    spec_.out_channels};
        }
        case LayerKind::maxpool:
            if (in.size() != 4 || in[1] < 2 || in[2] < 2) shape_mismatch(spec_, in, "[B,H>=2,W>=2,C]");
            return {in[0], in[1] / 2, in[2] / 2, in[3]};
        case LayerKind::dense:
            if (in.size() != 2 || in[1] != spec_.in_features) {
                shape_mismatch(spec_, in, "[B," + std::to_string(spec_.in_features) + "]");
            }
            return {in[0], spec_.out_features};
        case LayerKind::softmax:
            if (in.size() != 2) shape_mismatch(spec_, in, "[B,K]");
            return in;
        case LayerKind::flatten: {
            if (in.size() < 2) shape_mismatch(spec_, in, "rank >= 2");
            std::size_t n = 1;
            for (std::size_t i = 1; i < in.size(); ++i) n *= in[i];
            return {in[0], n};
        }
        default:
            if (in.empty()) shape_mismatch(spec_, in, "a non-empty tensor");
            return in;
    }
}

template <typename T>
ForwardResult<T> Layer<T>::forward(const BasicTensor<T>& input, bool training, Rng& rng) const {
    const Shape out_shape = output_shape(input.shape());
    ForwardResult<T> r;
    r.cache.kind = spec_.kind;
    r.cache.valid = true;
    r.cache.training = training;
    r.cache.input_shape = input.shape();
    BasicTensor<T> out(out_shape);
    T* o = out.data().data();
    const T* x = input.data().data();

    switch (spec_.kind) {
        case LayerKind::conv2d: {
            const std::size_t batch = input.dim(0), ih = input.dim(1), iw = input.dim(2), ic = input.dim(3);
            const std::size_t oh = out_shape[1], ow = out_shape[2], oc = out_shape[3];
            const std::size_t kh = spec_.kernel_h, kw = spec_.kernel_w, st = spec_.stride, pad = spec_.padding;
            const T* w = weight_.data().data();
            const T* b = bias_.data().data();
            for (std::size_t n = 0; n < batch; ++n) {
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        T* acc = o + ((n * oh + oy) * ow + ox) * oc;
                        for (std::size_t c = 0; c < oc; ++c) acc[c] = b[c];
                        for (std::size_t ky = 0; ky < kh; ++ky) {
                            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * st + ky) -
                                                      static_cast<std::ptrdiff_t>(pad);
                            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(ih)) continue;
                            for (std::size_t kx = 0; kx < kw; ++kx) {
                                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * st + kx) -
                                                          static_cast<std::ptrdiff_t>(pad);
                                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(iw)) continue;
                                const T* px = x + ((n * ih + static_cast<std::size_t>(iy)) * iw +
                                                   static_cast<std::size_t>(ix)) * ic;
                                const T* pw = w + (ky * kw + kx) * ic * oc;
                                for (std::size_t c = 0; c < ic; ++c) {
                                    const T v = px[c];
                                    if (v == T{0}) continue;
                                    const T* wr = pw + c * oc;
                                    for (std::size_t k = 0; k < oc; ++k) acc[k] += v * wr[k];
                                }
                            }
                        }
                    }
                }
            }
            r.cache.input = input;
            break;
        }
        case LayerKind::maxpool: {
            const std::size_t batch = input.dim(0), ih = input.dim(1), iw = input.dim(2), ch = input.dim(3);
            const std::size_t oh = out_shape[1], ow = out_shape[2];
            r.cache.argmax.resize(out.size());
            for (std::size_t n = 0; n < batch; ++n) {
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        for (std::size_t c = 0; c < ch; ++c) {
                            std::size_t best = ((n * ih + 2 * oy) * iw + 2 * ox) * ch + c;
                            for (std::size_t dy = 0; dy < 2; ++dy) {
                                for (std::size_t dx = 0; dx < 2; ++dx) {
                                    const std::size_t idx = ((n * ih + 2 * oy + dy) * iw + 2 * ox + dx) * ch + c;
                                    if (x[idx] > x[best]) best = idx;
                                }
                            }
                            const std::size_t oidx = ((n * oh + oy) * ow + ox) * ch + c;
                            o[oidx] = x[best];
                            r.cache.argmax[oidx] = static_cast<std::uint32_t>(best);
                        }
                    }
                }
            }
            break;
        }
        case LayerKind::dense: {
            const std::size_t batch = input.dim(0), nin = spec_.in_features, nout = spec_.out_features;
            const T* w = weight_.data().data();
            const T* b = bias_.data().data();
            for (std::size_t n = 0; n < batch; ++n) {
                T* acc = o + n * nout;
                for (std::size_t k = 0; k < nout; ++k) acc[k] = b[k];
                for (std::size_t i = 0; i < nin; ++i) {
                    const T v = x[n * nin + i];
                    if (v == T{0}) continue;
                    const T* wr = w + i * nout;
                    for (std::size_t k = 0; k < nout; ++k) acc[k] += v * wr[k];
                }
            }
            r.cache.input = input;
            break;
        }
        case LayerKind::relu:
            for (std::size_t i = 0; i < out.size(); ++i) o[i] = x[i] > T{0} ? x[i] : T{0};
            r.cache.output = out;
            break;
        case LayerKind::sigmoid:
            for (std::size_t i = 0; i < out.size(); ++i) o[i] = T{1} / (T{1} + std::exp(-x[i]));
            r.cache.output = out;
            break;
        case LayerKind::softmax: {
            const std::size_t batch = input.dim(0), k = input.dim(1);
            for (std::size_t n = 0; n < batch; ++n) {
                const T* row = x + n * k;
                T* dst = o + n * k;
                T mx = row[0];
                for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
                double sum = 0.0;
                for (std::size_t j = 0; j < k; ++j) {
                    dst[j] = std::exp(row[j] - mx);
                    sum += static_cast<double>(dst[j]);
                }
                for (std::size_t j = 0; j < k; ++j) {
                    dst[j] = std::max(static_cast<T>(static_cast<double>(dst[j]) / sum), std::numeric_limits<T>::min());
                }
            }
            r.cache.output = out;
            break;
        }
        case LayerKind::dropout: {
            if (training && spec_.dropout_rate > 0.0) {
                const T scale = static_cast<T>(1.0 / (1.0 - spec_.dropout_rate));
                BasicTensor<T> mask(input.shape());
                for (std::size_t i = 0; i < mask.size(); ++i) {
                    mask[i] = rng.bernoulli(1.0 - spec_.dropout_rate) ? scale : T{0};
                    o[i] = x[i] * mask[i];
                }
                r.cache.mask = std::move(mask);
            } else {
                std::copy(x, x + input.size(), o);
            }
            break;
        }
        case LayerKind::flatten:
            std::copy(x, x + input.size(), o);
            break;
    }
    r.output = std::move(out);
    return r;
}

template <typename T>
BackwardResult<T> Layer<T>::backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache,
                                     bool need_input_grad) const {
    BackwardResult<T> r;
    BasicTensor<T>* gw = nullptr;
    BasicTensor<T>* gb = nullptr;
    if (spec_.has_parameters()) {
        r.param_grads.emplace_back(weight_.shape());
        r.param_grads.emplace_back(bias_.shape());
        gw = &r.param_grads[0];
        gb = &r.param_grads[1];
    }
    r.input_grad = accumulate_backward(grad_out, cache, gw, gb, need_input_grad);
    return r;
}

template <typename T>
BasicTensor<T> Layer<T>::accumulate_backward(const BasicTensor<T>& grad_out, const LayerCache<T>& cache,
                                             BasicTensor<T>* weight_grad, BasicTensor<T>* bias_grad,
                                             bool need_input_grad) const {
    if (!cache.valid || cache.kind != spec_.kind) {
        throw ContractError(spec_.describe() + ": backward called with a cache from " +
                            (cache.valid ? to_string(cache.kind) : std::string("no forward pass")));
    }
    const Shape out_shape = output_shape(cache.input_shape);
    if (grad_out.shape() != out_shape) {
        throw ContractError(spec_.describe() + ": gradient shape " + shape_to_string(grad_out.shape()) +
                            " does not match forward output " + shape_to_string(out_shape));
    }
    if (spec_.has_parameters() && (weight_grad == nullptr || bias_grad == nullptr)) {
        throw ContractError(spec_.describe() + ": parameter gradient buffers missing");
    }

    BasicTensor<T> gin;
    if (need_input_grad) gin = BasicTensor<T>(cache.input_shape);
    T* gi = need_input_grad ? gin.data().data() : nullptr;
    const T* g = grad_out.data().data();

    switch (spec_.kind) {
        case LayerKind::conv2d: {
            const BasicTensor<T>& input = cache.input;
            const T* x = input.data().data();
            const std::size_t batch = input.dim(0), ih = input.dim(1), iw = input.dim(2), ic = input.dim(3);
            const std::size_t oh = out_shape[1], ow = out_shape[2], oc = out_shape[3];
            const std::size_t kh = spec_.kernel_h, kw = spec_.kernel_w, st = spec_.stride, pad = spec_.padding;
            const T* w = weight_.data().data();
            T* dw = weight_grad->data().data();
            T* db = bias_grad->data().data();
            for (std::size_t n = 0; n < batch; ++n) {
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        const T* go = g + ((n * oh + oy) * ow + ox) * oc;
                        for (std::size_t k = 0; k < oc; ++k) db[k] += go[k];
                        for (std::size_t ky = 0; ky < kh; ++ky) {
                            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * st + ky) -
                                                      static_cast<std::ptrdiff_t>(pad);
                            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(ih)) continue;
                            for (std::size_t kx = 0; kx < kw; ++kx) {
                                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * st + kx) -
                                                          static_cast<std::ptrdiff_t>(pad);
                                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(iw)) continue;
                                const std::size_t in_off =
                                    ((n * ih + static_cast<std::size_t>(iy)) * iw + static_cast<std::size_t>(ix)) * ic;
                                const std::size_t w_off = (ky * kw + kx) * ic * oc;
                                for (std::size_t c = 0; c < ic; ++c) {
                                    const T v = x[in_off + c];
                                    T* dwr = dw + w_off + c * oc;
                                    if (v != T{0}) {
                                        for (std::size_t k = 0; k < oc; ++k) dwr[k] += v * go[k];
                                    }
                                    if (gi) {
                                        const T* wr = w + w_off + c * oc;
                                        T s{0};
                                        for (std::size_t k = 0; k < oc; ++k) s += wr[k] * go[k];
                                        gi[in_off + c] += s;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            break;
        }
        case LayerKind::maxpool:
            if (gi) {
                for (std::size_t i = 0; i < grad_out.size(); ++i) gi[cache.argmax[i]] += g[i];
            }
            break;
        case LayerKind::dense: {
            const BasicTensor<T>& input = cache.input;
            const T* x = input.data().data();
            const std::size_t batch = input.dim(0), nin = spec_.in_features, nout = spec_.out_features;
            const T* w = weight_.data().data();
            T* dw = weight_grad->data().data();
            T* db = bias_grad->data().data();
            for (std::size_t n = 0; n < batch; ++n) {
                const T* go = g + n * nout;
                for (std::size_t k = 0; k < nout; ++k) db[k] += go[k];
                for (std::size_t i = 0; i < nin; ++i) {
                    const T v = x[n * nin + i];
                    T* dwr = dw + i * nout;
                    if (v != T{0}) {
                        for (std::size_t k = 0; k < nout; ++k) dwr[k] += v * go[k];
                    }
                    if (gi) {
                        const T* wr = w + i * nout;
                        T s{0};
                        for (std::size_t k = 0; k < nout; ++k) s += wr[k] * go[k];
                        gi[n * nin + i] = s;
                    }
                }
            }
            break;
        }
        case LayerKind::relu:
            if (gi) {
                const T* y = cache.output.data().data();
                for (std::size_t i = 0; i < grad_out.size(); ++i) gi[i] = y[i] > T{0} ? g[i] : T{0};
            }
            break;
        case LayerKind::sigmoid:
            if (gi) {
                const T* y = cache.output.data().data();
                for (std::size_t i = 0; i < grad_out.size(); ++i) gi[i] = g[i] * y[i] * (T{1} - y[i]);
            }
            break;
        case LayerKind::softmax:
            if (gi) {
                const T* y = cache.output.data().data();
                const std::size_t batch = out_shape[0], k = out_shape[1];
                for (std::size_t n = 0; n < batch; ++n) {
                    double dot = 0.0;
                    for (std::size_t j = 0; j < k; ++j) dot += static_cast<double>(g[n * k + j]) * y[n * k + j];
                    for (std::size_t j = 0; j < k; ++j) {
                        gi[n * k + j] = static_cast<T>(static_cast<double>(y[n * k + j]) *
                                                       (static_cast<double>(g[n * k + j]) - dot));
                    }
                }
            }
            break;
        case LayerKind::dropout:
            if (gi) {
                if (cache.mask.empty()) {
                    std::copy(g, g + grad_out.size(), gi);
                } else {
                    const T* m = cache.mask.data().data();
                    for (std::size_t i = 0; i < grad_out.size(); ++i) gi[i] = g[i] * m[i];
                }
            }
            break;
        case LayerKind::flatten:
            if (gi) std::copy(g, g + grad_out.size(), gi);
            break;
    }
    return gin;
}

template <typename T>
std::vector<BasicTensor<T>*> Layer<T>::parameters() {
    if (!spec_.has_parameters()) return {};
    return {&weight_, &bias_};
}

template <typename T>
std::vector<const BasicTensor<T>*> Layer<T>::parameters() const {
    if (!spec_.has_parameters()) return {};
    return {&weight_, &bias_};
}

// ---------------------------------------------------------------------------
// Sequential

template <typename T>
Sequential<T>::Sequential(std::vector<LayerSpec> specs) {
    layers_.reserve(specs.size());
    for (const auto& s : specs) layers_.emplace_back(s);
}

template <typename T>
void Sequential<T>::initialize(Rng& rng) {
    for (auto& l : layers_) l.initialize(rng);
    grads_.clear();
}

template <typename T>
BasicTensor<T> Sequential<T>::forward(const BasicTensor<T>& input, bool training, Rng& rng) {
    caches_.assign(layers_.size(), {});
    BasicTensor<T> x = input;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        try {
            auto r = layers_[i].forward(x, training, rng);
            caches_[i] = std::move(r.cache);
            x = std::move(r.output);
        } catch (const ShapeError& e) {
            throw ShapeError("layer " + std::to_string(i) + " " + e.what());
        }
    }
    return x;
}

template <typename T>
std::vector<std::uint32_t> Sequential<T>::activation_pattern() const {
    std::vector<std::uint32_t> out;
    for (const auto& c : caches_) {
        if (c.kind == LayerKind::relu) {
            for (T v : c.output.values()) out.push_back(v > T{0});
        } else if (c.kind == LayerKind::maxpool) {
            out.insert(out.end(), c.argmax.begin(), c.argmax.end());
        }
    }
    return out;
}

template <typename T>
void Sequential<T>::ensure_grads() {
    auto params = parameters();
    bool ok = grads_.size() == params.size();
    for (std::size_t i = 0; ok && i < params.size(); ++i) ok = grads_[i].shape() == params[i]->shape();
    if (!ok) {
        grads_.clear();
        for (auto* p : params) grads_.emplace_back(p->shape());
    }
}

template <typename T>
void Sequential<T>::zero_grad() {
    ensure_grads();
    for (auto& g : grads_) g.fill(T{0});
}

template <typename T>
BasicTensor<T> Sequential<T>::backward_range(BasicTensor<T> grad, std::size_t end, bool need_input_grad) {
    if (caches_.size() != layers_.size()) throw ContractError("Sequential::backward called before forward");
    ensure_grads();
    // Parameter slot of each layer within grads_.
    std::vector<std::size_t> slot(layers_.size(), 0);
    std::size_t next = 0;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        slot[i] = next;
        if (layers_[i].spec().has_parameters()) next += 2;
    }
    for (std::size_t i = end; i-- > 0;) {
        const bool need = i > 0 || need_input_grad;
        BasicTensor<T>* gw = nullptr;
        BasicTensor<T>* gb = nullptr;
        if (layers_[i].spec().has_parameters()) {
            gw = &grads_[slot[i]];
            gb = &grads_[slot[i] + 1];
        }
        grad = layers_[i].accumulate_backward(grad, caches_[i], gw, gb, need);
        if (!need) break;
    }
    return grad;
}

template <typename T>
BasicTensor<T> Sequential<T>::backward(const BasicTensor<T>& grad_out, bool need_input_grad) {
    return backward_range(grad_out, layers_.size(), need_input_grad);
}

template <typename T>
BasicTensor<T> Sequential<T>::backward_from_logits(const BasicTensor<T>& grad_logits, bool need_input_grad) {
    if (layers_.empty() || layers_.back().kind() != LayerKind::softmax) {
        throw ContractError("backward_from_logits requires a trailing softmax layer");
    }
    return backward_range(grad_logits, layers_.size() - 1, need_input_grad);
}

template <typename T>
Shape Sequential<T>::output_shape(const Shape& input) const {
    Shape s = input;
    for (const auto& l : layers_) s = l.output_shape(s);
    return s;
}

template <typename T>
std::size_t Sequential<T>::parameter_count() const {
    std::size_t n = 0;
    for (const auto* p : parameters()) n += p->size();
    return n;
}

template <typename T>
std::vector<BasicTensor<T>*> Sequential<T>::parameters() {
    std::vector<BasicTensor<T>*> out;
    for (auto& l : layers_) {
        for (auto* p : l.parameters()) out.push_back(p);
    }
    return out;
}

template <typename T>
std::vector<const BasicTensor<T>*> Sequential<T>::parameters() const {
    std::vector<const BasicTensor<T>*> out;
    for (const auto& l : layers_) {
        for (const auto* p : l.parameters()) out.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Loss and optimiser

template <typename T>
CrossEntropy<T> cross_entropy_loss(const BasicTensor<T>& probs, const BasicTensor<T>& labels) {
    if (probs.rank() != 2 || probs.shape() != labels.shape()) {
        throw ShapeError("cross_entropy_loss: probs " + shape_to_string(probs.shape()) + " vs labels " +
                         shape_to_string(labels.shape()));
    }
    const std::size_t batch = probs.dim(0), k = probs.dim(1);
    CrossEntropy<T> r;
    r.grad_logits = BasicTensor<T>(probs.shape());
    double total = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) row_sum += static_cast<double>(probs.at(n, j));
        if (std::abs(row_sum - 1.0) > 1e-5) {
            throw ContractError("cross_entropy_loss: probability row " + std::to_string(n) + " sums to " +
                                std::to_string(row_sum));
        }
        for (std::size_t j = 0; j < k; ++j) {
            const double y = static_cast<double>(labels.at(n, j));
            const double p = static_cast<double>(probs.at(n, j));
            if (y != 0.0) total -= y * std::log(std::max(p, 1e-12));
            r.grad_logits.at(n, j) = static_cast<T>((p - y) / static_cast<double>(batch));
        }
    }
    r.loss = total / static_cast<double>(batch);
    return r;
}

Tensor one_hot(const std::vector<int>& labels, std::size_t classes) {
    if (labels.empty()) throw ArgumentError("one_hot: empty label list");
    Tensor out({labels.size(), classes});
    for (std::size_t n = 0; n < labels.size(); ++n) {
        if (labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= classes) {
            throw ArgumentError("one_hot: label " + std::to_string(labels[n]) + " out of range");
        }
        out.at(n, static_cast<std::size_t>(labels[n])) = 1.0f;
    }
    return out;
}

OptimizerState OptimizerState::for_parameters(const std::vector<const Tensor*>& params, double lr, double momentum,
                                              double weight_decay) {
    OptimizerState s;
    s.learning_rate = lr;
    s.momentum = momentum;
    s.weight_decay = weight_decay;
    for (const Tensor* p : params) s.velocity.emplace_back(p->shape());
    return s;
}

void sgd_momentum_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads, OptimizerState& state) {
    if (params.size() != grads.size() || params.size() != state.velocity.size()) {
        throw ContractError("sgd_momentum_step: " + std::to_string(params.size()) + " params, " +
                            std::to_string(grads.size()) + " grads, " + std::to_string(state.velocity.size()) +
                            " velocities");
    }
    const float mu = static_cast<float>(state.momentum);
    const float lr = static_cast<float>(state.learning_rate);
    const float wd = static_cast<float>(state.weight_decay);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& w = *params[i];
        const Tensor& g = grads[i];
        Tensor& v = state.velocity[i];
        if (w.shape() != g.shape() || w.shape() != v.shape()) {
            throw ContractError("sgd_momentum_step: shape mismatch at parameter " + std::to_string(i) + ": " +
                                shape_to_string(w.shape()) + " / " + shape_to_string(g.shape()) + " / " +
                                shape_to_string(v.shape()));
        }
        float* wp = w.data().data();
        const float* gp = g.data().data();
        float* vp = v.data().data();
        for (std::size_t k = 0; k < w.size(); ++k) {
            vp[k] = mu * vp[k] - lr * (gp[k] + wd * wp[k]);
            wp[k] += vp[k];
        }
    }
}

template class Layer<float>;
template class Layer<double>;
template class Sequential<float>;
template class Sequential<double>;
template CrossEntropy<float> cross_entropy_loss(const BasicTensor<float>&, const BasicTensor<float>&);
template CrossEntropy<double> cross_entropy_loss(const BasicTensor<double>&, const BasicTensor<double>&);

}  // namespace hstream::nn
