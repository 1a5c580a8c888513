// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <iterator>

#include "hstream/errors.hpp"
#include "hstream/synthgen.hpp"
#include "test_support.hpp"

namespace hstream {
namespace {

using testing::TempDir;

TEST(Synth, QuantizedCoordinatesAreOddThirtySeconds) {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const float q = quantize_coordinate(rng.uniform(0, 368));
        const double k = static_cast<double>(q) * 32.0;
        EXPECT_EQ(k, std::floor(k));
        EXPECT_EQ(std::fmod(k, 2.0), 1.0);
        EXPECT_EQ(static_cast<float>(368.0f - (368.0f - q)), q);
    }
}

TEST(Synth, MapValuesFollowGaussianAndLimbGeometry) {
    SynthConfig cfg;
    Rng rng(2);
    const Pose p = random_pose(cfg, rng);
    const PartMaps maps = render_maps(p, cfg, rng);
    ASSERT_EQ(maps.confidence.shape(), (Shape{46, 46, 18}));
    ASSERT_EQ(maps.pafs.shape(), (Shape{46, 46, 34}));
    const double inv = 1.0 / (2.0 * cfg.gaussian_sigma * cfg.gaussian_sigma);
    for (std::size_t j = 0; j < kJointCount; ++j) {
        const double gx = p.joints[j].x / 8.0, gy = p.joints[j].y / 8.0;
        for (std::size_t y = 0; y < 46; y += 5) {
            for (std::size_t x = 0; x < 46; x += 5) {
                const double d2 = (x - gx) * (x - gx) + (y - gy) * (y - gy);
                EXPECT_NEAR(maps.confidence.at(y, x, j), std::exp(-d2 * inv), 1e-6);
            }
        }
    }
    const LimbTree tree = LimbTree::standard();
    for (std::size_t k = 0; k < kLimbCount; ++k) {
        const Joint& a = p[tree[k].parent];
        const Joint& b = p[tree[k].child];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        const double ux = (b.x - a.x) / len, uy = (b.y - a.y) / len;
        // The cell nearest the midpoint lies within half a cell of the segment.
        const auto mx = static_cast<std::size_t>(std::lround((a.x + b.x) / 16.0));
        const auto my = static_cast<std::size_t>(std::lround((a.y + b.y) / 16.0));
        EXPECT_NEAR(maps.pafs.at(my, mx, 2 * k), ux, 1e-6);
        EXPECT_NEAR(maps.pafs.at(my, mx, 2 * k + 1), uy, 1e-6);
    }
    EXPECT_EQ(maps.pafs.at(0, 0, 0), 0.0f);
}

TEST(Synth, JointsOutsideImageAreRejected) {
    SynthConfig cfg;
    Rng rng(3);
    Pose p = random_pose(cfg, rng);
    p[JointId::l_ankle].x = 400.0f;
    EXPECT_THROW(render_maps(p, cfg, rng), ArgumentError);
}

SynthConfig clean_config() {
    SynthConfig cfg;
    cfg.joint_noise_sigma = 0.0;
    cfg.flow_noise_sigma = 0.0;
    return cfg;
}

double pelvis_shift(const SynthSequence& s) {
    return (s.poses[2][JointId::pelvis].x - s.poses[0][JointId::pelvis].x) / 2.0;
}

TEST(Synth, SkatingMovesWithOrAgainstFacing) {
    SynthConfig cfg = clean_config();
    cfg.random_facing = true;
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        const auto fw = gen_action_sequence(ActionLabel::forward, cfg, rng);
        const double v = pelvis_shift(fw) * fw.facing;
        EXPECT_GE(v, cfg.forward_speed[0] - 0.1);
        EXPECT_LE(v, cfg.forward_speed[1] + 0.1);
        EXPECT_NEAR(fw.flows[0].at(10, 10, 0) * 8.0 * fw.facing, v, 0.1);
        const auto bw = gen_action_sequence(ActionLabel::backward, cfg, rng);
        const double u = -pelvis_shift(bw) * bw.facing;
        EXPECT_GE(u, cfg.backward_speed[0] - 0.1);
        EXPECT_LE(u, cfg.backward_speed[1] + 0.1);
    }
}

TEST(Synth, ShootingRaisesBladeTwoHeadLengths) {
    const SynthConfig cfg = clean_config();
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const auto s = gen_action_sequence(ActionLabel::shooting, cfg, rng);
        const double rise = s.poses[0][JointId::stick_end].y - s.poses[2][JointId::stick_end].y;
        EXPECT_GE(rise, 2.0 * head_segment_length(s.poses[0]));
    }
}

TEST(Synth, OracleRecoversEveryLabel) {
    SynthConfig cfg;
    cfg.random_facing = true;
    Rng rng(6);
    for (int i = 0; i < 1000; ++i) {
        const ActionLabel a = kAllActions[static_cast<std::size_t>(i % 4)];
        EXPECT_EQ(oracle_classify(gen_action_sequence(a, cfg, rng)), a) << i;
    }
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Synth, DatasetSplitsAndDeterminism) {
    TempDir a("synth"), b("synth");
    SynthConfig cfg;
    cfg.sequences_per_class = 20;
    cfg.seed = 9;
    const Dataset da = gen_dataset(cfg, a.path());
    gen_dataset(cfg, b.path());
    EXPECT_EQ(da.sequences.size(), 80u);
    EXPECT_EQ(da.split(Split::train).size(), 56u);
    EXPECT_EQ(da.split(Split::val).size(), 12u);
    EXPECT_EQ(da.split(Split::test).size(), 12u);
    EXPECT_EQ(slurp(a / kManifestFile), slurp(b / kManifestFile));
    const auto& rec = da.sequences[5];
    EXPECT_EQ(slurp(a.path() / rec.flow_files[1]), slurp(b.path() / rec.flow_files[1]));
    const Dataset reloaded = load_dataset(a.path());
    EXPECT_EQ(reloaded.sequences.size(), 80u);
    EXPECT_EQ(reloaded.sequences[5].joints, rec.joints);
}

TEST(Synth, UnevenClassCounts) {
    TempDir dir("synth");
    SynthConfig cfg;
    cfg.class_counts = std::array<std::size_t, 4>{106, 104, 113, 101};
    const Dataset ds = gen_dataset(cfg, dir.path());
    std::array<std::array<std::size_t, 3>, 4> n{};
    for (const auto& s : ds.sequences) ++n[index(s.action)][static_cast<std::size_t>(s.split)];
    const std::array<std::size_t, 4> totals = {106, 104, 113, 101};
    for (std::size_t c = 0; c < 4; ++c) {
        const auto t = static_cast<double>(totals[c]);
        EXPECT_EQ(n[c][0], static_cast<std::size_t>(std::lround(0.7 * t)));
        EXPECT_EQ(n[c][1], static_cast<std::size_t>(std::lround(0.15 * t)));
        EXPECT_EQ(n[c][0] + n[c][1] + n[c][2], totals[c]);
    }
}

TEST(Synth, MapsWrittenWhenRequested) {
    TempDir dir("synth");
    SynthConfig cfg;
    cfg.sequences_per_class = 7;
    cfg.with_maps = true;
    const Dataset ds = gen_dataset(cfg, dir.path());
    const auto& rec = ds.sequences.front();
    ASSERT_TRUE(rec.has_maps);
    const PartMaps maps = load_maps(ds, rec, 1);
    EXPECT_EQ(maps.confidence.shape(), (Shape{46, 46, 18}));
}

TEST(Synth, ConfigValidation) {
    SynthConfig cfg;
    cfg.sequences_per_class = 6;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = SynthConfig{};
    cfg.distractor_amplitude = 1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = SynthConfig{};
    cfg.backward_speed = {0.5, 2.0};
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = SynthConfig{};
    cfg.class_counts = std::array<std::size_t, 4>{10, 11, 12, 13};
    nlohmann::json j = cfg;
    const auto back = j.get<SynthConfig>();
    EXPECT_EQ(nlohmann::json(back), j);
}

}  // namespace
}  // namespace hstream
