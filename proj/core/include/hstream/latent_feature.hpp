// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0
//
// Latent joint features: per frame, joint coordinates relative to the image
// centre divided by that frame's head segment length, followed by 16 limb
// angles. Three frames concatenate to 156 values (144 without the stick).

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hstream/skeleton.hpp"

namespace hstream {

inline constexpr std::size_t kAngleCount = 16;
inline constexpr std::size_t kSequenceFrames = 3;

/// Angle ABC with B the vertex.
struct AngleTriple {
    JointId a;
    JointId b;
    JointId c;
};

using AngleSpec = std::array<AngleTriple, kAngleCount>;

/// The 16 body angles in canonical order.
const AngleSpec& standard_angles();

/// One `a b c` joint-name triple per line.
std::string angles_to_text(const AngleSpec& spec);
AngleSpec parse_angles(std::string_view text);

/// For each angle row, the row measuring the left/right mirrored angle.
std::array<std::size_t, kAngleCount> mirrored_angle_rows(const AngleSpec& spec);

constexpr std::size_t frame_feature_length(bool include_stick) {
    return 2 * (include_stick ? kJointCount : kJointCount - 2) + kAngleCount;
}
constexpr std::size_t sequence_feature_length(bool include_stick) {
    return kSequenceFrames * frame_feature_length(include_stick);
}

struct ImageSize {
    int width = 368;
    int height = 368;
};

/// ((x - w/2) / L, (y - h/2) / L) per joint; invalid joints give (0, 0).
/// Throws DegenerateHeadError when the head segment is missing or < 1e-6.
std::array<Point, kJointCount> normalize_joints(const Pose& pose, ImageSize image);

/// Unsigned angle at b in [0, pi]; 0 when either arm is shorter than 1e-9.
double limb_angle(Point a, Point b, Point c);

std::vector<float> featurize_frame(const Pose& pose, ImageSize image, bool include_stick,
                                   const AngleSpec& angles = standard_angles());

std::vector<float> featurize_sequence(std::span<const Pose> poses, std::span<const ImageSize> images,
                                      bool include_stick, const AngleSpec& angles = standard_angles());

}  // namespace hstream
