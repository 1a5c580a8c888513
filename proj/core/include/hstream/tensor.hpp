// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense row-major tensors, the .htsr file format and the two image-domain
// primitives (bilinear resize, horizontal flip) used across the pipeline.

#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hstream/errors.hpp"

namespace hstream {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);

/// Row-major dense tensor of rank 1..4 with every dimension >= 1.
template <typename T>
class BasicTensor {
public:
    BasicTensor() = default;

    explicit BasicTensor(Shape shape, T fill = T{0}) : shape_(std::move(shape)) {
        validate_shape(shape_);
        data_.assign(element_count(shape_), fill);
    }

    BasicTensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
        validate_shape(shape_);
        if (data_.size() != element_count(shape_)) {
            throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_to_string(shape_));
        }
    }

    static BasicTensor from_list(Shape shape, std::initializer_list<T> values) {
        return BasicTensor(std::move(shape), std::vector<T>(values));
    }

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t rank() const noexcept { return shape_.size(); }
    [[nodiscard]] std::size_t dim(std::size_t i) const { return shape_.at(i); }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] std::span<T> data() noexcept { return data_; }
    [[nodiscard]] std::span<const T> data() const noexcept { return data_; }
    [[nodiscard]] std::vector<T>& values() noexcept { return data_; }
    [[nodiscard]] const std::vector<T>& values() const noexcept { return data_; }

    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    // Rank-specific accessors; no bounds checks on the hot path.
    T& at(std::size_t i, std::size_t j) noexcept { return data_[i * shape_[1] + j]; }
    const T& at(std::size_t i, std::size_t j) const noexcept { return data_[i * shape_[1] + j]; }
    T& at(std::size_t i, std::size_t j, std::size_t k) noexcept {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    const T& at(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    T& at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) noexcept {
        return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
    }
    const T& at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const noexcept {
        return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
    }

    /// Same data viewed under a new shape with equal element count.
    [[nodiscard]] BasicTensor reshaped(Shape shape) const {
        return BasicTensor(std::move(shape), data_);
    }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

    static std::size_t element_count(const Shape& shape) {
        return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
    }

private:
    static void validate_shape(const Shape& shape) {
        if (shape.empty() || shape.size() > 4) {
            throw ShapeError("tensor rank must be in [1,4], got " + std::to_string(shape.size()));
        }
        for (std::size_t d : shape) {
            if (d == 0) throw ShapeError("tensor dimensions must be >= 1: " + shape_to_string(shape));
        }
    }

    Shape shape_;
    std::vector<T> data_;
};

using Tensor = BasicTensor<float>;

/// Converts element type, e.g. to evaluate a float model in double precision.
template <typename To, typename From>
BasicTensor<To> tensor_cast(const BasicTensor<From>& t) {
    std::vector<To> out(t.values().begin(), t.values().end());
    return BasicTensor<To>(t.shape(), std::move(out));
}

/// Equal shapes and identical bit patterns (NaN payloads included).
bool bitwise_equal(const Tensor& a, const Tensor& b);

// .htsr layout: "HTSR", version 0x01, dtype 0x00 (f32), rank byte,
// rank x u32 LE dims, then the row-major f32 LE payload.
inline constexpr unsigned char kHtsrVersion = 0x01;
inline constexpr unsigned char kHtsrDtypeF32 = 0x00;

std::vector<unsigned char> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const unsigned char> bytes, const std::string& origin = "<memory>");

void write_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor read_tensor(const std::filesystem::path& path);

/// Corner-aligned bilinear resize of an [H,W,C] tensor. With
/// `scale_values_as_displacements`, even channels are treated as x
/// displacements (scaled by out_w/W) and odd channels as y displacements
/// (scaled by out_h/H).
Tensor resize_bilinear(const Tensor& t, std::size_t out_h, std::size_t out_w,
                       bool scale_values_as_displacements);

/// Reverses the columns of an [H,W,C] tensor and negates the listed channels.
Tensor hflip(const Tensor& t, const std::set<std::size_t>& negate_channels);

/// Copies channel `c` of an [H,W,C] tensor into an [H,W] tensor.
Tensor channel(const Tensor& t, std::size_t c);

/// Concatenates [H,W,Ca] and [H,W,Cb] along the channel axis.
Tensor concat_channels(const Tensor& a, const Tensor& b);

}  // namespace hstream
