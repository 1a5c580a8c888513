// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hstream/augmentation.hpp"
#include "hstream/dataset.hpp"
#include "hstream/evaluation.hpp"
#include "hstream/model.hpp"

namespace hstream {

/// Where joints come from when featurizing: annotations or decoded part maps.
enum class JointSource { gt, pred };

std::string_view joint_source_name(JointSource s);
std::optional<JointSource> joint_source_from_name(std::string_view name);

struct TrainConfig {
    std::size_t batch_size = 2;
    double momentum = 0.9;
    double lr = 1e-2;
    int epochs = 30;
    int keep_top = 3;
    bool keep_all = false;  // keep every epoch_{k}.ckpt instead of only the ranked ones
    bool augment = true;
    AugmentConfig augmentation;
    JointSource validation_joints = JointSource::gt;

    /// Throws ConfigError.
    void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);

inline constexpr const char* kRankingFile = "ranking.json";

std::string checkpoint_dir_name(int epoch);

/// The joints of a sequence, either annotated or decoded from its maps.
PoseSequence sequence_joints(const Dataset& ds, const SequenceRecord& rec, JointSource source);

struct PreparedExample {
    std::string id;
    ActionLabel label = ActionLabel::forward;
    std::vector<float> latent;
    std::optional<Tensor> flow;  // [S,S,4] for flow models
};

/// Featurizes `poses` (and the two flows when the model uses them). Returns
/// nullopt when any frame has a degenerate head segment.
std::optional<PreparedExample> prepare_example(const PoseSequence& poses, const std::array<Tensor, 2>& flows,
                                               ImageSize image, const ModelConfig& cfg);

/// Loads and featurizes every sequence of a split without augmentation.
/// Sequences with a degenerate head are dropped and counted in `skipped`.
std::vector<PreparedExample> prepare_split(const Dataset& ds, Split split, const ModelConfig& cfg, JointSource source,
                                           std::size_t* skipped = nullptr);

struct RankedCheckpoint {
    int epoch = 0;
    double validation_accuracy = 0.0;
    std::filesystem::path dir;

    friend bool operator==(const RankedCheckpoint&, const RankedCheckpoint&) = default;
};

struct TrainResult {
    std::vector<RankedCheckpoint> kept;  // best first; ties go to the earlier epoch
    std::vector<double> validation_accuracy;
    std::vector<double> train_loss;
    std::size_t skipped_train = 0;  // degenerate-head examples skipped, summed over epochs
    std::size_t skipped_val = 0;
};

/// Trains from scratch on the train split (augmented annotated joints),
/// validating on the val split after every epoch. Every epoch is saved as
/// out_dir/epoch_{k}.ckpt; afterwards only the keep_top best remain unless
/// keep_all is set. Writes out_dir/ranking.json. `seed` overrides
/// model_cfg.seed.
TrainResult train(const Dataset& ds, ModelConfig model_cfg, const TrainConfig& cfg, std::uint64_t seed,
                  const std::filesystem::path& out_dir, std::ostream* log = nullptr);

/// Ranked checkpoints listed in out_dir/ranking.json, best first.
std::vector<RankedCheckpoint> read_ranking(const std::filesystem::path& out_dir);

/// Runs every checkpoint over a split and returns per-checkpoint metrics and
/// their means. When `expected` is given, a checkpoint built from a different
/// model config raises ContractError.
ClassificationReport evaluate_checkpoints(const std::vector<std::filesystem::path>& checkpoints, const Dataset& ds,
                                          Split split, const ModelConfig* expected = nullptr,
                                          JointSource source = JointSource::gt);

}  // namespace hstream
