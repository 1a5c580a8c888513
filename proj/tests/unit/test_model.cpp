// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <numeric>

#include "hstream/checkpoint.hpp"
#include "hstream/errors.hpp"
#include "hstream/model.hpp"
#include "hstream/synthgen.hpp"
#include "hstream/training.hpp"
#include "test_support.hpp"

namespace hstream {
namespace {

namespace fs = std::filesystem;
using testing::random_tensor;
using testing::TempDir;

std::vector<float> random_latent(std::size_t n, Rng& rng) {
    std::vector<float> v(n);
    for (float& x : v) x = static_cast<float>(rng.normal());
    return v;
}

TEST(ModelConfig, Lengths) {
    ModelConfig cfg;
    EXPECT_EQ(cfg.latent_length(), 156u);
    EXPECT_EQ(cfg.flow_feature_length(), 64u);
    EXPECT_EQ(cfg.fusion_input_length(), 220u);
    cfg.use_flow = false;
    cfg.use_stick = false;
    EXPECT_EQ(cfg.fusion_input_length(), 144u);
    EXPECT_EQ(cfg.tag(), "-ST,-OF");
    cfg.fusion[3] = 5;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ModelConfig, JsonRoundTrip) {
    ModelConfig cfg;
    cfg.use_stick = false;
    cfg.seed = 99;
    cfg.dropout_rate = 0.25;
    nlohmann::json j = cfg;
    EXPECT_EQ(j.get<ModelConfig>(), cfg);
}

TEST(Model, PredictionsAreDistributions) {
    TwoStreamNet<float> net = build_model(ModelConfig{});
    Rng rng(3);
    const Tensor flow = random_tensor({56, 56, 4}, rng);
    for (int i = 0; i < 5; ++i) {
        const auto p = predict(net, random_latent(156, rng), &flow);
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-6);
        for (float v : p) {
            EXPECT_GT(v, 0.0f);
            EXPECT_LT(v, 1.0f);
        }
    }
    EXPECT_THROW(predict(net, random_latent(156, rng), nullptr), ContractError);
    EXPECT_THROW(predict(net, random_latent(144, rng), &flow), ContractError);
}

TEST(Model, ZeroFinalLayerIsUniform) {
    TwoStreamNet<float> net = build_model(ModelConfig{});
    auto params = net.fusion_head().parameters();
    for (float& v : params[params.size() - 2]->values()) v = 0.0f;
    for (float& v : params.back()->values()) v = 0.0f;
    Rng rng(4);
    const Tensor flow = random_tensor({56, 56, 4}, rng);
    for (float v : predict(net, random_latent(156, rng), &flow)) EXPECT_FLOAT_EQ(v, 0.25f);
}

TEST(Model, FlowInputPreparation) {
    Rng rng(5);
    const Tensor a = random_tensor({56, 56, 2}, rng), b = random_tensor({56, 56, 2}, rng);
    const Tensor f = prepare_flow_input(a, b);
    EXPECT_TRUE(bitwise_equal(f, concat_channels(a, b)));
    EXPECT_THROW(prepare_flow_input(a, random_tensor({46, 56, 2}, rng)), ArgumentError);
}

TEST(Model, AblatedCheckpointHasNoFlowParameters) {
    TempDir dir("ckpt");
    ModelConfig cfg;
    cfg.use_flow = false;
    TwoStreamNet<float> net = build_model(cfg);
    save_model(dir.path(), net, nullptr, {nlohmann::json(cfg), 0, 0, 0.0});
    const auto manifest = read_checkpoint_manifest(dir.path());
    for (const auto& layer : manifest.at("layers")) {
        EXPECT_NE(layer.at("branch"), "flow");
        EXPECT_NE(layer.at("spec").at("kind"), "conv2d");
    }
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir.path())) files += e.path().extension() == ".htsr";
    EXPECT_EQ(files, 8u);  // four dense layers, weight + bias
}

TEST(Model, SaveLoadRoundTrip) {
    TempDir dir("ckpt");
    ModelConfig cfg;
    cfg.seed = 12;
    TwoStreamNet<float> net = build_model(cfg);
    save_model(dir.path(), net, nullptr, {nlohmann::json(cfg), 12, 3, 0.5});
    CheckpointMeta meta;
    TwoStreamNet<float> back = load_model(dir.path(), &meta);
    EXPECT_EQ(back.config(), cfg);
    EXPECT_EQ(meta.epoch, 3);
    EXPECT_EQ(meta.validation_accuracy, 0.5);
    const auto pa = net.parameters();
    const auto pb = back.parameters();
    ASSERT_EQ(pa.size(), pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_TRUE(bitwise_equal(*pa[i], *pb[i]));
}

TEST(Model, ReducedGradientCheck) {
    const auto r = run_gradient_checks(1);
    EXPECT_LT(r.model.max_relative_error, 1e-2);
    EXPECT_LT(r.dense.max_relative_error, 1e-4);
    EXPECT_GT(r.model.checked, 10000u);
}

class TrainingTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        data_ = std::make_unique<TempDir>("train");
        SynthConfig cfg;
        cfg.sequences_per_class = 10;
        cfg.seed = 4;
        dataset_ = std::make_unique<Dataset>(gen_dataset(cfg, data_->path()));
    }
    static void TearDownTestSuite() {
        dataset_.reset();
        data_.reset();
    }

    static std::unique_ptr<TempDir> data_;
    static std::unique_ptr<Dataset> dataset_;
};

std::unique_ptr<TempDir> TrainingTest::data_;
std::unique_ptr<Dataset> TrainingTest::dataset_;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

TEST_F(TrainingTest, ZeroEpochsKeepsNothing) {
    TempDir out("run");
    TrainConfig tc;
    tc.epochs = 0;
    const auto r = train(*dataset_, ModelConfig{}, tc, 1, out.path());
    EXPECT_TRUE(r.kept.empty());
    EXPECT_TRUE(read_ranking(out.path()).empty());
}

TEST_F(TrainingTest, SameSeedGivesIdenticalCheckpoints) {
    TempDir a("run"), b("run");
    ModelConfig mc;
    mc.use_flow = false;
    TrainConfig tc;
    tc.epochs = 4;
    tc.keep_top = 2;
    const auto ra = train(*dataset_, mc, tc, 3, a.path());
    const auto rb = train(*dataset_, mc, tc, 3, b.path());
    ASSERT_EQ(ra.kept.size(), 2u);
    ASSERT_EQ(ra.validation_accuracy, rb.validation_accuracy);
    for (std::size_t i = 0; i < ra.kept.size(); ++i) {
        EXPECT_EQ(ra.kept[i].epoch, rb.kept[i].epoch);
        for (const auto& e : fs::directory_iterator(ra.kept[i].dir)) {
            EXPECT_EQ(slurp(e.path()), slurp(rb.kept[i].dir / e.path().filename())) << e.path();
        }
    }
    EXPECT_EQ(slurp(a / kRankingFile), slurp(b / kRankingFile));
    for (std::size_t i = 1; i < ra.kept.size(); ++i) {
        EXPECT_GE(ra.kept[i - 1].validation_accuracy, ra.kept[i].validation_accuracy);
        if (ra.kept[i - 1].validation_accuracy == ra.kept[i].validation_accuracy) {
            EXPECT_LT(ra.kept[i - 1].epoch, ra.kept[i].epoch);
        }
    }
    std::size_t ckpts = 0;
    for (const auto& e : fs::directory_iterator(a.path())) ckpts += e.path().extension() == ".ckpt";
    EXPECT_EQ(ckpts, 2u);
}

TEST_F(TrainingTest, EvaluationRejectsMismatchedConfig) {
    TempDir out("run");
    ModelConfig mc;
    mc.use_flow = false;
    TrainConfig tc;
    tc.epochs = 1;
    tc.keep_top = 1;
    const auto r = train(*dataset_, mc, tc, 5, out.path());
    ASSERT_EQ(r.kept.size(), 1u);
    const auto report = evaluate_checkpoints({r.kept[0].dir}, *dataset_, Split::test, &mc);
    EXPECT_EQ(report.checkpoints.size(), 1u);
    ModelConfig other = mc;
    other.use_stick = false;
    EXPECT_THROW(evaluate_checkpoints({r.kept[0].dir}, *dataset_, Split::test, &other), ContractError);
}

}  // namespace
}  // namespace hstream
