// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "hstream/augmentation.hpp"

#include <cmath>
#include <numbers>

#include "hstream/errors.hpp"

namespace hstream {

void AugmentConfig::validate() const {
    if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw ConfigError("flip_prob must be in [0,1]");
    if (!(scale_min > 0.0 && scale_max >= scale_min)) throw ConfigError("scale range must be positive and ordered");
    if (!(rotation_deg >= 0.0 && rotation_deg < 180.0)) throw ConfigError("rotation range must be in [0,180)");
    if (!(joint_jitter_sigma >= 0.0)) throw ConfigError("joint jitter sigma must be >= 0");
}

AugmentConfig AugmentConfig::none() {
    AugmentConfig c;
    c.flip_prob = 0.0;
    c.scale_min = c.scale_max = 1.0;
    c.rotation_deg = 0.0;
    c.joint_jitter_sigma = 0.0;
    return c;
}

void to_json(nlohmann::json& j, const AugmentConfig& cfg) {
    j = {
        {"flip_prob", cfg.flip_prob},
        {"scale_range", {cfg.scale_min, cfg.scale_max}},
        {"rotation_deg", cfg.rotation_deg},
        {"joint_jitter_sigma", cfg.joint_jitter_sigma},
    };
}

void from_json(const nlohmann::json& j, AugmentConfig& cfg) {
    try {
        j.at("flip_prob").get_to(cfg.flip_prob);
        const auto& s = j.at("scale_range");
        if (!s.is_array() || s.size() != 2) throw FormatError("scale_range must be [min, max]");
        s[0].get_to(cfg.scale_min);
        s[1].get_to(cfg.scale_max);
        j.at("rotation_deg").get_to(cfg.rotation_deg);
        j.at("joint_jitter_sigma").get_to(cfg.joint_jitter_sigma);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed augmentation config: ") + e.what());
    }
}

AugmentedSequence flip_sequence(const AugmentedSequence& seq, ImageSize image) {
    AugmentedSequence out;
    for (std::size_t f = 0; f < kSequenceFrames; ++f) out.poses[f] = mirror_pose(seq.poses[f], image.width);
    for (std::size_t k = 0; k < seq.flows.size(); ++k) out.flows[k] = hflip(seq.flows[k], {0});
    out.flipped = !seq.flipped;
    return out;
}

AugmentedSequence augment_sequence(const std::array<Pose, kSequenceFrames>& poses,
                                   const std::array<Tensor, kSequenceFrames - 1>& flows, ImageSize image,
                                   const AugmentConfig& cfg, Rng& rng) {
    cfg.validate();
    for (const Tensor& f : flows) {
        if (f.rank() != 3 || f.dim(2) != 2) throw ArgumentError("flow fields must be [H,W,2]");
    }

    // Draw order is fixed so that streams depend only on the seed.
    const double s = rng.uniform(cfg.scale_min, cfg.scale_max);
    const double theta = rng.uniform(-cfg.rotation_deg, cfg.rotation_deg) * std::numbers::pi / 180.0;
    const double cx = image.width / 2.0, cy = image.height / 2.0;
    const double c = std::cos(theta), sn = std::sin(theta);

    AugmentedSequence seq;
    seq.flows = flows;
    for (std::size_t f = 0; f < kSequenceFrames; ++f) {
        seq.poses[f] = poses[f];
        for (Joint& j : seq.poses[f].joints) {
            const double dx = j.x - cx, dy = j.y - cy;
            double x = cx + s * (c * dx - sn * dy);
            double y = cy + s * (sn * dx + c * dy);
            if (cfg.joint_jitter_sigma > 0.0) {
                x += rng.normal(0.0, cfg.joint_jitter_sigma);
                y += rng.normal(0.0, cfg.joint_jitter_sigma);
            }
            if (!j.valid) continue;
            j.x = static_cast<float>(x);
            j.y = static_cast<float>(y);
        }
    }
    if (rng.bernoulli(cfg.flip_prob)) return flip_sequence(seq, image);
    return seq;
}

}  // namespace hstream
