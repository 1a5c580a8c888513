// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0
//
// Single-person pose decoding from part confidence maps and part affinity
// fields. Each joint keeps its two strongest peaks; the pose is grown from
// the best head_top peak by repeatedly committing the (limb, candidate)
// pair with the strongest PAF line-integral support.

#pragma once

#include <span>
#include <vector>

#include "hstream/skeleton.hpp"
#include "hstream/tensor.hpp"

namespace hstream {

/// Network outputs for one frame on the decode grid.
struct PartMaps {
    Tensor confidence;  // [H, W, 18]
    Tensor pafs;        // [H, W, 34], limb k in channels 2k (x), 2k+1 (y)
    float stride = 8.0f;  // image pixels per grid cell
};

struct Candidate {
    float x = 0.0f;  // grid column
    float y = 0.0f;  // grid row
    float score = 0.0f;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

inline constexpr int kPeaksPerJoint = 2;
inline constexpr int kLineIntegralSamples = 10;

/// Strict 8-neighbourhood local maxima of an [H,W] map, best first, ties in
/// row-major scan order, truncated to `k`. Short lists are padded with the
/// best candidate, or with the global argmax when no strict maximum exists.
std::vector<Candidate> extract_peaks(const Tensor& map, int k = kPeaksPerJoint);

/// Mean of PAF(p) . u over `samples` evenly spaced points from p1 to p2,
/// where u is the unit limb direction. Nearest-cell lookup, clamped to the
/// grid. Returns 0 for p1 == p2. Swapping the endpoints negates the result
/// bit-for-bit.
double paf_line_integral(const Tensor& paf_x, const Tensor& paf_y, Point p1, Point p2,
                         int samples = kLineIntegralSamples);

/// Same, reading limb `limb` straight out of an [H,W,34] PAF stack.
double paf_line_integral(const Tensor& pafs, std::size_t limb, Point p1, Point p2,
                         int samples = kLineIntegralSamples);

Pose assemble_pose(const PartMaps& maps, const LimbTree& tree);

/// Decodes a 3-frame sequence; frames are independent.
std::vector<Pose> decode_sequence(std::span<const PartMaps> frames, const LimbTree& tree);

/// Horizontal mirror of a frame's maps: columns reversed, left/right
/// confidence channels swapped, PAF x channels negated. The result decodes
/// under `tree.mirrored()` for maps that decode under `tree`.
PartMaps mirror_part_maps(const PartMaps& maps);

/// Throws ArgumentError unless the maps are [H,W,18] / [H,W,34] on one grid.
void validate_part_maps(const PartMaps& maps);

}  // namespace hstream
