// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0
//
// On-disk dataset: a manifest.json with embedded joint annotations and one
// subdirectory per sequence holding joints.json, flow_12.htsr, flow_23.htsr
// and, optionally, confidence_{k}.htsr / pafs_{k}.htsr for frames k = 1..3.

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hstream/action.hpp"
#include "hstream/latent_feature.hpp"
#include "hstream/pose_decoder.hpp"
#include "hstream/skeleton.hpp"

namespace hstream {

inline constexpr int kManifestVersion = 1;
inline constexpr const char* kManifestFile = "manifest.json";

enum class Split { train, val, test };

std::string_view split_name(Split s);
std::optional<Split> split_from_name(std::string_view name);

using PoseSequence = std::array<Pose, kSequenceFrames>;

struct SequenceRecord {
    std::string id;
    ActionLabel action = ActionLabel::forward;
    Split split = Split::train;
    PoseSequence joints;
    std::array<std::string, kSequenceFrames - 1> flow_files;  // relative to the dataset root
    bool has_maps = false;
    std::array<std::string, kSequenceFrames> confidence_files;
    std::array<std::string, kSequenceFrames> paf_files;
};

struct Dataset {
    std::filesystem::path root;
    ImageSize image;
    int stride = 8;
    LimbTree limbs = LimbTree::standard();
    std::vector<SequenceRecord> sequences;

    [[nodiscard]] std::vector<const SequenceRecord*> split(Split s) const;
    [[nodiscard]] const SequenceRecord& find(std::string_view id) const;
};

/// Per-sequence file names used by the writer.
std::string flow_file_name(std::size_t k);
std::string confidence_file_name(std::size_t frame);
std::string paf_file_name(std::size_t frame);

nlohmann::json pose_to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j);
nlohmann::json sequence_joints_to_json(const PoseSequence& poses);
PoseSequence sequence_joints_from_json(const nlohmann::json& j);

nlohmann::json manifest_to_json(const Dataset& ds);

/// Parses a manifest. Throws DatasetError for schema violations and, when
/// `check_files` is set, for referenced files that do not exist.
Dataset dataset_from_json(const nlohmann::json& j, const std::filesystem::path& root, bool check_files = true);

/// Writes manifest.json under ds.root.
void write_manifest(const Dataset& ds);

/// Accepts the dataset directory or the manifest file itself.
Dataset load_dataset(const std::filesystem::path& path);

/// Flow k in {0: frames 1->2, 1: frames 2->3}, [H,W,2].
Tensor load_flow(const Dataset& ds, const SequenceRecord& rec, std::size_t k);

/// Throws DatasetError if the sequence has no maps.
PartMaps load_maps(const Dataset& ds, const SequenceRecord& rec, std::size_t frame);

}  // namespace hstream
