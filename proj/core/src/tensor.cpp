// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "hstream/tensor.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace hstream {

namespace {

constexpr std::array<unsigned char, 4> kMagic = {'H', 'T', 'S', 'R'};
constexpr std::size_t kFixedHeader = 7;  // magic + version + dtype + rank

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void require_hwc(const Tensor& t, const char* op) {
    if (t.rank() != 3) {
        throw ShapeError(std::string(op) + " expects an [H,W,C] tensor, got " + shape_to_string(t.shape()));
    }
}

}  // namespace

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
    return a.shape() == b.shape() &&
           std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(float)) == 0;
}

std::vector<unsigned char> encode_tensor(const Tensor& t) {
    if (t.rank() == 0) throw ShapeError("cannot encode an empty tensor");
    std::vector<unsigned char> out;
    out.reserve(kFixedHeader + 4 * t.rank() + 4 * t.size());
    for (unsigned char c : kMagic) out.push_back(c);
    out.push_back(kHtsrVersion);
    out.push_back(kHtsrDtypeF32);
    out.push_back(static_cast<unsigned char>(t.rank()));
    for (std::size_t d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    for (float v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

Tensor decode_tensor(std::span<const unsigned char> bytes, const std::string& origin) {
    if (bytes.size() < kFixedHeader) {
        if (bytes.size() >= 4 && !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
            throw FormatError(origin + ": bad magic");
        }
        throw LengthError(origin + ": truncated header (" + std::to_string(bytes.size()) + " bytes)");
    }
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
        throw FormatError(origin + ": bad magic, expected HTSR");
    }
    if (bytes[4] != kHtsrVersion) {
        throw FormatError(origin + ": unsupported version " + std::to_string(bytes[4]));
    }
    if (bytes[5] != kHtsrDtypeF32) {
        throw FormatError(origin + ": unsupported dtype " + std::to_string(bytes[5]));
    }
    const std::size_t rank = bytes[6];
    if (rank < 1 || rank > 4) throw FormatError(origin + ": invalid rank " + std::to_string(rank));
    if (bytes.size() < kFixedHeader + 4 * rank) throw LengthError(origin + ": truncated dimensions");

    Shape shape(rank);
    for (std::size_t i = 0; i < rank; ++i) {
        shape[i] = get_u32(bytes.data() + kFixedHeader + 4 * i);
        if (shape[i] == 0) throw FormatError(origin + ": zero dimension");
    }
    const std::size_t count = Tensor::element_count(shape);
    const std::size_t payload_offset = kFixedHeader + 4 * rank;
    const std::size_t available = bytes.size() - payload_offset;
    if (available != 4 * count) {
        throw LengthError(origin + ": declared " + std::to_string(count) + " elements but payload holds " +
                          std::to_string(available) + " bytes");
    }
    std::vector<float> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        data[i] = std::bit_cast<float>(get_u32(bytes.data() + payload_offset + 4 * i));
    }
    return Tensor(std::move(shape), std::move(data));
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
    const auto bytes = encode_tensor(t);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_tensor(bytes, path.string());
}

Tensor resize_bilinear(const Tensor& t, std::size_t out_h, std::size_t out_w,
                       bool scale_values_as_displacements) {
    require_hwc(t, "resize_bilinear");
    if (out_h == 0 || out_w == 0) throw ArgumentError("resize_bilinear: target size must be positive");
    const std::size_t in_h = t.dim(0), in_w = t.dim(1), chans = t.dim(2);
    if (scale_values_as_displacements && chans % 2 != 0) {
        throw ArgumentError("resize_bilinear: displacement scaling needs (x,y) channel pairs, got C=" +
                            std::to_string(chans));
    }

    auto src_coord = [](std::size_t i, std::size_t out, std::size_t in) {
        if (out == 1 || in == 1) return 0.0;
        return static_cast<double>(i) * static_cast<double>(in - 1) / static_cast<double>(out - 1);
    };
    const double sx = static_cast<double>(out_w) / static_cast<double>(in_w);
    const double sy = static_cast<double>(out_h) / static_cast<double>(in_h);

    Tensor out({out_h, out_w, chans});
    for (std::size_t y = 0; y < out_h; ++y) {
        const double fy = src_coord(y, out_h, in_h);
        const std::size_t y0 = std::min(static_cast<std::size_t>(fy), in_h - 1);
        const std::size_t y1 = std::min(y0 + 1, in_h - 1);
        const double wy = fy - static_cast<double>(y0);
        for (std::size_t x = 0; x < out_w; ++x) {
            const double fx = src_coord(x, out_w, in_w);
            const std::size_t x0 = std::min(static_cast<std::size_t>(fx), in_w - 1);
            const std::size_t x1 = std::min(x0 + 1, in_w - 1);
            const double wx = fx - static_cast<double>(x0);
            for (std::size_t c = 0; c < chans; ++c) {
                const double top = (1.0 - wx) * t.at(y0, x0, c) + wx * t.at(y0, x1, c);
                const double bottom = (1.0 - wx) * t.at(y1, x0, c) + wx * t.at(y1, x1, c);
                double v = (1.0 - wy) * top + wy * bottom;
                if (scale_values_as_displacements) v *= (c % 2 == 0) ? sx : sy;
                out.at(y, x, c) = static_cast<float>(v);
            }
        }
    }
    return out;
}

Tensor hflip(const Tensor& t, const std::set<std::size_t>& negate_channels) {
    require_hwc(t, "hflip");
    const std::size_t h = t.dim(0), w = t.dim(1), chans = t.dim(2);
    for (std::size_t c : negate_channels) {
        if (c >= chans) throw ArgumentError("hflip: channel index " + std::to_string(c) + " out of range");
    }
    std::vector<bool> negate(chans, false);
    for (std::size_t c : negate_channels) negate[c] = true;

    Tensor out(t.shape());
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < chans; ++c) {
                const float v = t.at(y, w - 1 - x, c);
                out.at(y, x, c) = negate[c] ? -v : v;
            }
        }
    }
    return out;
}

Tensor channel(const Tensor& t, std::size_t c) {
    require_hwc(t, "channel");
    if (c >= t.dim(2)) throw ArgumentError("channel index " + std::to_string(c) + " out of range");
    Tensor out({t.dim(0), t.dim(1)});
    for (std::size_t y = 0; y < t.dim(0); ++y) {
        for (std::size_t x = 0; x < t.dim(1); ++x) out.at(y, x) = t.at(y, x, c);
    }
    return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    require_hwc(a, "concat_channels");
    require_hwc(b, "concat_channels");
    if (a.dim(0) != b.dim(0) || a.dim(1) != b.dim(1)) {
        throw ArgumentError("concat_channels: spatial shapes differ " + shape_to_string(a.shape()) + " vs " +
                            shape_to_string(b.shape()));
    }
    const std::size_t ca = a.dim(2), cb = b.dim(2);
    Tensor out({a.dim(0), a.dim(1), ca + cb});
    for (std::size_t y = 0; y < a.dim(0); ++y) {
        for (std::size_t x = 0; x < a.dim(1); ++x) {
            for (std::size_t c = 0; c < ca; ++c) out.at(y, x, c) = a.at(y, x, c);
            for (std::size_t c = 0; c < cb; ++c) out.at(y, x, ca + c) = b.at(y, x, c);
        }
    }
    return out;
}

}  // namespace hstream
