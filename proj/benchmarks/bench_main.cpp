// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "hstream/latent_feature.hpp"
#include "hstream/model.hpp"
#include "hstream/pose_decoder.hpp"
#include "hstream/synthgen.hpp"

namespace {

using namespace hstream;

void BM_FlowBranchForward(benchmark::State& state) {
    ModelConfig cfg;
    TwoStreamNet<float> net = build_model(cfg);
    const auto batch = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    Tensor flow({batch, 56, 56, 4});
    for (float& v : flow.values()) v = static_cast<float>(rng.normal());
    for (auto _ : state) {
        Tensor f = net.flow_branch().forward(flow, false, rng);
        benchmark::DoNotOptimize(f.values().data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FlowBranchForward)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
    ModelConfig cfg;
    cfg.use_flow = state.range(0) != 0;
    TwoStreamNet<float> net = build_model(cfg);
    Rng rng(2);
    TwoStreamInput<float> in{Tensor({2, cfg.latent_length()}), std::nullopt};
    for (float& v : in.latent.values()) v = static_cast<float>(rng.normal());
    if (cfg.use_flow) {
        in.flow = Tensor({2, 56, 56, 4});
        for (float& v : in.flow->values()) v = static_cast<float>(rng.normal());
    }
    const Tensor labels = nn::one_hot({0, 3}, kActionCount);
    auto params = net.parameters();
    auto opt = nn::OptimizerState::for_parameters(std::vector<const Tensor*>(params.begin(), params.end()), 1e-2, 0.9);
    for (auto _ : state) {
        net.zero_grad();
        const auto ce = nn::cross_entropy_loss(net.forward(in, true, rng), labels);
        net.backward_from_logits(ce.grad_logits);
        nn::sgd_momentum_step(net.parameters(), net.gradients(), opt);
        benchmark::DoNotOptimize(ce.loss);
    }
}
BENCHMARK(BM_TrainStep)->ArgName("flow")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_AssemblePose(benchmark::State& state) {
    SynthConfig cfg;
    cfg.distractor_amplitude = 0.6;
    Rng rng(3);
    const PartMaps maps = render_maps(random_pose(cfg, rng), cfg, rng);
    const LimbTree tree = LimbTree::standard();
    for (auto _ : state) {
        Pose p = assemble_pose(maps, tree);
        benchmark::DoNotOptimize(p.joints.data());
    }
}
BENCHMARK(BM_AssemblePose)->Unit(benchmark::kMicrosecond);

void BM_RenderMaps(benchmark::State& state) {
    SynthConfig cfg;
    cfg.distractor_amplitude = 0.6;
    Rng rng(4);
    const Pose pose = random_pose(cfg, rng);
    for (auto _ : state) {
        PartMaps m = render_maps(pose, cfg, rng);
        benchmark::DoNotOptimize(m.confidence.values().data());
    }
}
BENCHMARK(BM_RenderMaps)->Unit(benchmark::kMicrosecond);

void BM_FeaturizeSequence(benchmark::State& state) {
    SynthConfig cfg;
    Rng rng(5);
    const SynthSequence seq = gen_action_sequence(ActionLabel::shooting, cfg, rng);
    const std::array<ImageSize, 3> images{};
    for (auto _ : state) {
        auto v = featurize_sequence(seq.poses, images, true);
        benchmark::DoNotOptimize(v.data());
    }
}
BENCHMARK(BM_FeaturizeSequence);

void BM_PrepareFlowInput(benchmark::State& state) {
    SynthConfig cfg;
    Rng rng(6);
    const SynthSequence seq = gen_action_sequence(ActionLabel::forward, cfg, rng);
    for (auto _ : state) {
        Tensor t = prepare_flow_input(seq.flows[0], seq.flows[1]);
        benchmark::DoNotOptimize(t.values().data());
    }
}
BENCHMARK(BM_PrepareFlowInput)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
