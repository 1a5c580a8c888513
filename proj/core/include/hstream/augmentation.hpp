// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

#include <nlohmann/json.hpp>

#include "hstream/latent_feature.hpp"
#include "hstream/random.hpp"
#include "hstream/tensor.hpp"

namespace hstream {

struct AugmentConfig {
    double flip_prob = 0.5;
    double scale_min = 0.8;
    double scale_max = 1.2;
    double rotation_deg = 15.0;  // uniform in [-rotation_deg, +rotation_deg]
    double joint_jitter_sigma = 2.0;

    /// Throws ConfigError.
    void validate() const;

    /// Everything off: augment_sequence becomes the identity.
    static AugmentConfig none();

    friend bool operator==(const AugmentConfig&, const AugmentConfig&) = default;
};

void to_json(nlohmann::json& j, const AugmentConfig& cfg);
void from_json(const nlohmann::json& j, AugmentConfig& cfg);

struct AugmentedSequence {
    std::array<Pose, kSequenceFrames> poses;
    std::array<Tensor, kSequenceFrames - 1> flows;  // [H,W,2] each
    bool flipped = false;
};

/// Flips the sequence: joints mirrored about the vertical image axis with
/// left/right ids swapped, flows column-reversed with dx negated.
AugmentedSequence flip_sequence(const AugmentedSequence& seq, ImageSize image);

/// One similarity transform (scale and rotation about the image centre)
/// shared by all frames, independent per-joint Gaussian jitter, then a coupled
/// flip with probability flip_prob. Flows are only touched by the flip.
/// Invalid joints are left untouched.
AugmentedSequence augment_sequence(const std::array<Pose, kSequenceFrames>& poses,
                                   const std::array<Tensor, kSequenceFrames - 1>& flows, ImageSize image,
                                   const AugmentConfig& cfg, Rng& rng);

}  // namespace hstream
