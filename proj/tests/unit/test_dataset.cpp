// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "hstream/dataset.hpp"
#include "hstream/errors.hpp"
#include "hstream/json_io.hpp"
#include "hstream/synthgen.hpp"
#include "test_support.hpp"

namespace hstream {
namespace {

using testing::TempDir;

class DatasetTest : public ::testing::Test {
protected:
    void SetUp() override {
        SynthConfig cfg;
        cfg.sequences_per_class = 7;
        cfg.seed = 2;
        ds_ = gen_dataset(cfg, dir_.path());
        manifest_ = read_json_file(dir_ / kManifestFile);
    }

    TempDir dir_{"dataset"};
    Dataset ds_;
    nlohmann::json manifest_;
};

TEST_F(DatasetTest, ManifestRoundTrip) {
    EXPECT_EQ(manifest_.at("version"), kManifestVersion);
    const Dataset back = dataset_from_json(manifest_, dir_.path());
    EXPECT_EQ(manifest_to_json(back), manifest_);
    const Dataset via_file = load_dataset(dir_ / kManifestFile);
    EXPECT_EQ(via_file.sequences.size(), 28u);
    EXPECT_EQ(via_file.find(ds_.sequences[3].id).joints, ds_.sequences[3].joints);
    EXPECT_THROW(static_cast<void>(via_file.find("nope")), DatasetError);
}

TEST_F(DatasetTest, PoseJsonRoundTrip) {
    const Pose& p = ds_.sequences[0].joints[1];
    EXPECT_EQ(pose_from_json(pose_to_json(p)), p);
    EXPECT_THROW(pose_from_json(nlohmann::json::array({1, 2, 3})), DatasetError);
}

TEST_F(DatasetTest, MissingFlowFile) {
    std::filesystem::remove(dir_.path() / ds_.sequences[0].flow_files[0]);
    EXPECT_THROW(load_dataset(dir_.path()), DatasetError);
    EXPECT_NO_THROW(dataset_from_json(manifest_, dir_.path(), false));
}

TEST_F(DatasetTest, SchemaViolations) {
    auto bad_action = manifest_;
    bad_action["sequences"][0]["action"] = "dancing";
    EXPECT_THROW(dataset_from_json(bad_action, dir_.path()), DatasetError);
    auto bad_split = manifest_;
    bad_split["sequences"][0]["split"] = "holdout";
    EXPECT_THROW(dataset_from_json(bad_split, dir_.path()), DatasetError);
    auto dup = manifest_;
    dup["sequences"][1]["id"] = dup["sequences"][0]["id"];
    EXPECT_THROW(dataset_from_json(dup, dir_.path()), DatasetError);
    auto version = manifest_;
    version["version"] = 2;
    EXPECT_THROW(dataset_from_json(version, dir_.path()), DatasetError);
}

TEST_F(DatasetTest, FlowsAndMissingMaps) {
    const Tensor f = load_flow(ds_, ds_.sequences[0], 1);
    EXPECT_EQ(f.shape(), (Shape{46, 46, 2}));
    EXPECT_THROW(load_maps(ds_, ds_.sequences[0], 0), DatasetError);
}

TEST(DatasetLoad, MissingDirectory) {
    EXPECT_THROW(load_dataset("/nonexistent/hstream/data"), Error);
}

}  // namespace
}  // namespace hstream
