// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint directories: `manifest.json` (layer kinds and shapes, seed,
// epoch, validation accuracy, model config echo) plus one .htsr file per
// parameter named `layer{i}.weight.htsr` / `layer{i}.bias.htsr`, where i
// counts layers across all branches in order. Momentum buffers, when saved,
// sit beside them as `layer{i}.weight.velocity.htsr`.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "hstream/nn.hpp"

namespace hstream {

struct CheckpointMeta {
    nlohmann::json model_config = nlohmann::json::object();
    std::uint64_t seed = 0;
    int epoch = 0;
    double validation_accuracy = 0.0;
};

struct BranchRef {
    std::string name;
    nn::Sequential<float>* network = nullptr;
};

inline constexpr const char* kCheckpointManifest = "manifest.json";

void save_checkpoint(const std::filesystem::path& dir, std::span<const BranchRef> branches,
                     const nn::OptimizerState* optimizer, const CheckpointMeta& meta);

/// Loads parameters into already-built branches. Throws ContractError when
/// branch names, layer kinds or parameter shapes differ from the manifest.
/// Velocities are restored when `optimizer` is non-null and were saved.
CheckpointMeta load_checkpoint(const std::filesystem::path& dir, std::span<const BranchRef> branches,
                               nn::OptimizerState* optimizer = nullptr);

CheckpointMeta read_checkpoint_meta(const std::filesystem::path& dir);

/// Raw manifest, e.g. to verify which branches a checkpoint contains.
nlohmann::json read_checkpoint_manifest(const std::filesystem::path& dir);

}  // namespace hstream
