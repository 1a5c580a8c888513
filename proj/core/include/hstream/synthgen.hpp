// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic data: planted skeletons, their confidence maps and PAFs, flow
// fields and labelled 3-frame action sequences.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "hstream/action.hpp"
#include "hstream/dataset.hpp"
#include "hstream/pose_decoder.hpp"
#include "hstream/random.hpp"

namespace hstream {

struct SynthConfig {
    std::size_t grid_h = 46;
    std::size_t grid_w = 46;
    int stride = 8;
    double gaussian_sigma = 3.0;  // map cells
    double paf_half_width = 1.5;  // map cells
    double distractor_amplitude = 0.0;
    double distractor_min_distance = 10.0;  // map cells from every limb
    double min_limb_length = 1.5;           // map cells; shorter skeletons are redrawn
    std::size_t sequences_per_class = 100;
    std::optional<std::array<std::size_t, kActionCount>> class_counts;  // overrides sequences_per_class
    std::uint64_t seed = 0;
    bool with_maps = false;
    bool random_facing = false;
    double joint_noise_sigma = 2.5;     // annotation noise, image px
    std::array<double, 2> forward_speed = {6.0, 9.0};   // skating displacement per frame, image px
    std::array<double, 2> backward_speed = {2.0, 4.0};
    double drift = 1.0;                                  // max displacement while passing or shooting
    double flow_noise_sigma = 0.2;      // map cells

    /// Throws ConfigError.
    void validate() const;

    [[nodiscard]] ImageSize image() const {
        return {static_cast<int>(grid_w) * stride, static_cast<int>(grid_h) * stride};
    }
    [[nodiscard]] std::size_t count_for(ActionLabel a) const;
};

void to_json(nlohmann::json& j, const SynthConfig& cfg);
void from_json(const nlohmann::json& j, SynthConfig& cfg);

/// Snaps a coordinate to an odd multiple of 1/32 px. Such values are exact
/// under x -> W - x and never sit on a half-cell boundary of the map grid.
float quantize_coordinate(double v);

/// Per joint a unit Gaussian at the joint's grid position (max-combined
/// with a distractor Gaussian of distractor_amplitude placed at least
/// distractor_min_distance cells from every limb when the amplitude is
/// positive); per limb a unit vector field within paf_half_width of the
/// segment. Throws ArgumentError for joints outside the image.
PartMaps render_maps(const Pose& pose, const SynthConfig& cfg, Rng& rng, const LimbTree& tree = LimbTree::standard());

/// Random in-bounds skeleton with a random stick pose, quantized, whose
/// limbs are all at least min_limb_length cells long.
Pose random_pose(const SynthConfig& cfg, Rng& rng);

struct SynthSequence {
    std::array<Pose, kSequenceFrames> poses;
    std::array<Tensor, kSequenceFrames - 1> flows;  // [grid_h, grid_w, 2], displacement in map cells
    ActionLabel label = ActionLabel::forward;
    int facing = 1;  // +1 faces +x
};

/// Class archetypes. Skating moves the whole body along (forward) or against
/// (backward) the facing direction with the stick held still, forward at the
/// higher speed range; passing sweeps the stick
/// by 22-30 degrees near vertical; shooting raises the blade by more than
/// two head lengths. Flows are the uniform body translation plus noise.
SynthSequence gen_action_sequence(ActionLabel label, const SynthConfig& cfg, Rng& rng);

/// Depth-1 rule on (stick_end rise, stick sweep, mean flow dx).
ActionLabel oracle_classify(const SynthSequence& seq);

/// Writes a full dataset under `out` (manifest.json plus one directory per
/// sequence) with a per-class 70/15/15 split, and returns it.
Dataset gen_dataset(const SynthConfig& cfg, const std::filesystem::path& out);

}  // namespace hstream
