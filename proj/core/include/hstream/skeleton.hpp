// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0
//
// Joint vocabulary shared by the decoder, featurizer, augmentation and
// evaluation: 16 body joints plus the two ends of the hockey stick.

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hstream {

inline constexpr std::size_t kJointCount = 18;
inline constexpr std::size_t kLimbCount = kJointCount - 1;

enum class JointId : int {
    head_top = 0,
    upper_neck = 1,
    thorax = 2,
    l_shoulder = 3,
    r_shoulder = 4,
    l_elbow = 5,
    r_elbow = 6,
    l_wrist = 7,
    r_wrist = 8,
    pelvis = 9,
    l_hip = 10,
    r_hip = 11,
    l_knee = 12,
    r_knee = 13,
    l_ankle = 14,
    r_ankle = 15,
    stick_top = 16,
    stick_end = 17,
};

constexpr std::size_t index(JointId j) { return static_cast<std::size_t>(j); }
constexpr JointId joint_at(std::size_t i) { return static_cast<JointId>(static_cast<int>(i)); }

std::string_view joint_name(JointId j);
std::optional<JointId> joint_from_name(std::string_view name);

/// Left/right counterpart; central and stick joints map to themselves.
JointId mirror_joint(JointId j);

constexpr bool is_stick_joint(JointId j) { return j == JointId::stick_top || j == JointId::stick_end; }

struct Limb {
    JointId parent;
    JointId child;

    friend bool operator==(const Limb&, const Limb&) = default;
};

/// Spanning tree over the 18 joints rooted at head_top. Limb k owns PAF
/// channels 2k (x) and 2k+1 (y).
class LimbTree {
public:
    /// Default skeleton; the stick hangs off r_wrist.
    static LimbTree standard();

    /// Validates that the edges form a spanning tree rooted at head_top with
    /// every edge oriented away from the root. Throws ConfigError otherwise.
    explicit LimbTree(std::array<Limb, kLimbCount> limbs);

    /// Plain text, one `parent_joint_name child_joint_name` per line;
    /// blank lines and `#` comments are ignored.
    static LimbTree parse(std::string_view text);
    static LimbTree load(const std::filesystem::path& path);
    [[nodiscard]] std::string to_text() const;

    /// Tree whose limbs are the left/right mirror of these, in the same
    /// channel order (e.g. a stick on r_wrist becomes a stick on l_wrist).
    [[nodiscard]] LimbTree mirrored() const;

    [[nodiscard]] const std::array<Limb, kLimbCount>& limbs() const noexcept { return limbs_; }
    [[nodiscard]] const Limb& operator[](std::size_t k) const { return limbs_[k]; }
    [[nodiscard]] std::size_t size() const noexcept { return limbs_.size(); }

    friend bool operator==(const LimbTree&, const LimbTree&) = default;

private:
    std::array<Limb, kLimbCount> limbs_;
};

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

struct Joint {
    float x = 0.0f;
    float y = 0.0f;
    bool valid = false;

    friend bool operator==(const Joint&, const Joint&) = default;
};

/// One person's joints in image pixel coordinates.
struct Pose {
    std::array<Joint, kJointCount> joints{};

    Joint& operator[](JointId j) { return joints[index(j)]; }
    const Joint& operator[](JointId j) const { return joints[index(j)]; }

    friend bool operator==(const Pose&, const Pose&) = default;
};

/// Mirrors about the vertical line x = image_w / 2 (x -> image_w - x) and
/// swaps left/right joint labels.
Pose mirror_pose(const Pose& pose, double image_w);

/// Head segment length |head_top - upper_neck|.
double head_segment_length(const Pose& pose);

}  // namespace hstream
