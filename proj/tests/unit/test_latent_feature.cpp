// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hstream/errors.hpp"
#include "hstream/latent_feature.hpp"
#include "hstream/synthgen.hpp"

namespace hstream {
namespace {

constexpr ImageSize kImage{368, 368};

Pose sample_pose(Rng& rng) {
    SynthConfig cfg;
    return random_pose(cfg, rng);
}

Pose transform(const Pose& p, double scale, double rot_deg, double tx, double ty) {
    const double cx = kImage.width / 2.0, cy = kImage.height / 2.0;
    const double c = std::cos(rot_deg * std::numbers::pi / 180.0), s = std::sin(rot_deg * std::numbers::pi / 180.0);
    Pose out = p;
    for (Joint& j : out.joints) {
        const double dx = j.x - cx, dy = j.y - cy;
        j.x = static_cast<float>(cx + scale * (c * dx - s * dy) + tx);
        j.y = static_cast<float>(cy + scale * (s * dx + c * dy) + ty);
    }
    return out;
}

TEST(Latent, SequenceLengths) {
    Rng rng(1);
    const std::array<Pose, 3> poses = {sample_pose(rng), sample_pose(rng), sample_pose(rng)};
    const std::array<ImageSize, 3> dims = {kImage, kImage, kImage};
    EXPECT_EQ(featurize_sequence(poses, dims, true).size(), 156u);
    EXPECT_EQ(featurize_sequence(poses, dims, false).size(), 144u);
    EXPECT_EQ(featurize_frame(poses[0], kImage, false).size(), 48u);
    EXPECT_THROW(featurize_sequence(std::span(poses).first(2), std::span(dims).first(2), true), ArgumentError);
}

TEST(Latent, HandComputedValues) {
    Pose p;
    for (auto& j : p.joints) j = {184, 184, true};
    p[JointId::head_top] = {184, 104, true};
    p[JointId::upper_neck] = {184, 124, true};  // L = 20
    p[JointId::thorax] = {184, 144, true};
    p[JointId::l_shoulder] = {164, 144, true};
    p[JointId::stick_end] = {224, 224, true};
    p[JointId::r_ankle].valid = false;
    const auto f = featurize_frame(p, kImage, true);
    EXPECT_FLOAT_EQ(f[0], 0.0f);
    EXPECT_FLOAT_EQ(f[1], -4.0f);
    EXPECT_FLOAT_EQ(f[2 * index(JointId::l_shoulder)], -1.0f);
    EXPECT_FLOAT_EQ(f[2 * index(JointId::l_shoulder) + 1], -2.0f);
    EXPECT_FLOAT_EQ(f[2 * index(JointId::stick_end)], 2.0f);
    EXPECT_FLOAT_EQ(f[2 * index(JointId::stick_end) + 1], 2.0f);
    EXPECT_EQ(f[2 * index(JointId::r_ankle)], 0.0f);
    const std::size_t a0 = 2 * kJointCount;
    EXPECT_FLOAT_EQ(f[a0 + 0], static_cast<float>(std::numbers::pi));      // head_top, upper_neck, thorax
    EXPECT_FLOAT_EQ(f[a0 + 1], static_cast<float>(std::numbers::pi / 2));  // upper_neck, thorax, l_shoulder
    EXPECT_EQ(f[a0 + 14], 0.0f);                                           // r_ankle invalid
}

TEST(Latent, LimbAngle) {
    EXPECT_NEAR(limb_angle({1, 0}, {0, 0}, {0, 1}), std::numbers::pi / 2, 1e-12);
    EXPECT_NEAR(limb_angle({1, 0}, {0, 0}, {-1, 0}), std::numbers::pi, 1e-12);
    EXPECT_NEAR(limb_angle({1, 1}, {0, 0}, {1, 0}), std::numbers::pi / 4, 1e-12);
    EXPECT_EQ(limb_angle({0, 0}, {0, 0}, {1, 0}), 0.0);
}

TEST(Latent, ScaleInvariantAboutImageCentre) {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const Pose p = sample_pose(rng);
        const auto base = featurize_frame(p, kImage, true);
        for (double s : {0.5, 2.0}) {
            const auto f = featurize_frame(transform(p, s, 0, 0, 0), kImage, true);
            for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(f[i], base[i], 1e-6) << i;
        }
    }
}

// Offsets from the image centre snapped to multiples of h/16, so rotating by
// the Pythagorean angle (a/h, b/h) maps float joints to float joints exactly.
Pose snap_for_rotation(const Pose& p, int h) {
    const double cx = kImage.width / 2.0, cy = kImage.height / 2.0, q = h / 16.0;
    Pose out = p;
    for (Joint& j : out.joints) {
        j.x = static_cast<float>(cx + q * std::round((j.x - cx) / q));
        j.y = static_cast<float>(cy + q * std::round((j.y - cy) / q));
    }
    return out;
}

Pose exact_similarity(const Pose& p, int a, int b, int h, double scale, int tx, int ty) {
    const double cx = kImage.width / 2.0, cy = kImage.height / 2.0;
    Pose out = p;
    for (Joint& j : out.joints) {
        const double dx = (j.x - cx) / h, dy = (j.y - cy) / h;  // multiples of 1/16
        j.x = static_cast<float>(cx + scale * (a * dx - b * dy) + tx);
        j.y = static_cast<float>(cy + scale * (b * dx + a * dy) + ty);
    }
    return out;
}

TEST(Latent, AnglesAreSimilarityInvariant) {
    struct Triple {
        int a, b, h;
    };
    const Triple triples[] = {{3, 4, 5}, {5, 12, 13}, {8, 15, 17}, {-4, 3, 5}, {-12, -5, 13}};
    Rng rng(3);
    const std::size_t a0 = 2 * kJointCount;
    for (int trial = 0; trial < 100; ++trial) {
        const Triple& t = triples[trial % 5];
        const Pose p = snap_for_rotation(sample_pose(rng), t.h);
        const auto base = featurize_frame(p, kImage, true);
        const double s = trial % 2 ? 2.0 : 0.5;
        const int tx = static_cast<int>(rng.uniform_index(61)) - 30, ty = static_cast<int>(rng.uniform_index(61)) - 30;
        const auto f = featurize_frame(exact_similarity(p, t.a, t.b, t.h, s, tx, ty), kImage, true);
        for (std::size_t i = a0; i < f.size(); ++i) EXPECT_NEAR(f[i], base[i], 1e-6) << i;
    }
}

TEST(Latent, AnglesTrackGeneralSimilarityWithinInputRounding) {
    // Arbitrary transforms round the float joints themselves.
    Rng rng(3);
    const std::size_t a0 = 2 * kJointCount;
    for (int trial = 0; trial < 100; ++trial) {
        const Pose p = sample_pose(rng);
        const auto base = featurize_frame(p, kImage, true);
        const double s = rng.uniform(0.5, 2.0), r = rng.uniform(-180, 180);
        const auto f = featurize_frame(transform(p, s, r, rng.uniform(-30, 30), rng.uniform(-30, 30)), kImage, true);
        for (std::size_t i = a0; i < f.size(); ++i) EXPECT_NEAR(f[i], base[i], 2e-5) << i;
    }
}

TEST(Latent, RotationRotatesCoordinateBlock) {
    Rng rng(4);
    const Pose p = sample_pose(rng);
    const auto base = featurize_frame(p, kImage, true);
    const auto f = featurize_frame(transform(p, 1.0, 30.0, 0, 0), kImage, true);
    const double c = std::cos(std::numbers::pi / 6), s = std::sin(std::numbers::pi / 6);
    for (std::size_t j = 0; j < kJointCount; ++j) {
        EXPECT_NEAR(f[2 * j], c * base[2 * j] - s * base[2 * j + 1], 1e-4);
        EXPECT_NEAR(f[2 * j + 1], s * base[2 * j] + c * base[2 * j + 1], 1e-4);
    }
}

TEST(Latent, MirrorPermutesFeatures) {
    Rng rng(5);
    const auto rows = mirrored_angle_rows(standard_angles());
    const std::size_t a0 = 2 * kJointCount;
    for (int trial = 0; trial < 100; ++trial) {
        const Pose p = sample_pose(rng);
        const auto base = featurize_frame(p, kImage, true);
        const auto m = featurize_frame(mirror_pose(p, kImage.width), kImage, true);
        for (std::size_t j = 0; j < kJointCount; ++j) {
            const std::size_t src = index(mirror_joint(joint_at(j)));
            EXPECT_EQ(m[2 * j], -base[2 * src]);
            EXPECT_EQ(m[2 * j + 1], base[2 * src + 1]);
        }
        for (std::size_t i = 0; i < kAngleCount; ++i) EXPECT_EQ(m[a0 + i], base[a0 + rows[i]]);
    }
}

TEST(Latent, DegenerateHeadThrows) {
    Rng rng(6);
    Pose p = sample_pose(rng);
    p[JointId::upper_neck] = p[JointId::head_top];
    EXPECT_THROW(featurize_frame(p, kImage, true), DegenerateHeadError);
    p = sample_pose(rng);
    p[JointId::head_top].valid = false;
    EXPECT_THROW(featurize_frame(p, kImage, true), DegenerateHeadError);
}

TEST(Latent, AngleSpecText) {
    const AngleSpec& spec = standard_angles();
    const AngleSpec back = parse_angles(angles_to_text(spec));
    for (std::size_t i = 0; i < kAngleCount; ++i) {
        EXPECT_EQ(back[i].a, spec[i].a);
        EXPECT_EQ(back[i].b, spec[i].b);
        EXPECT_EQ(back[i].c, spec[i].c);
    }
    EXPECT_THROW(parse_angles("head_top upper_neck thorax\n"), ConfigError);
    EXPECT_THROW(parse_angles("head_top upper_neck stick_end\n"), ConfigError);
}

}  // namespace
}  // namespace hstream
