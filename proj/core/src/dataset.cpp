// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "hstream/dataset.hpp"

#include <array>

#include "hstream/errors.hpp"
#include "hstream/json_io.hpp"

namespace hstream {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 3> kSplitNames = {"train", "val", "test"};

void require_file(const fs::path& root, const std::string& rel, const std::string& id) {
    if (rel.empty() || !fs::is_regular_file(root / rel)) {
        throw DatasetError("sequence " + id + ": missing file " + (root / rel).string());
    }
}

}  // namespace

std::string_view split_name(Split s) { return kSplitNames[static_cast<std::size_t>(s)]; }

std::optional<Split> split_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kSplitNames.size(); ++i) {
        if (kSplitNames[i] == name) return static_cast<Split>(i);
    }
    return std::nullopt;
}

std::vector<const SequenceRecord*> Dataset::split(Split s) const {
    std::vector<const SequenceRecord*> out;
    for (const auto& r : sequences) {
        if (r.split == s) out.push_back(&r);
    }
    return out;
}

const SequenceRecord& Dataset::find(std::string_view id) const {
    for (const auto& r : sequences) {
        if (r.id == id) return r;
    }
    throw DatasetError("no sequence with id " + std::string(id));
}

std::string flow_file_name(std::size_t k) { return k == 0 ? "flow_12.htsr" : "flow_23.htsr"; }
std::string confidence_file_name(std::size_t frame) { return "confidence_" + std::to_string(frame + 1) + ".htsr"; }
std::string paf_file_name(std::size_t frame) { return "pafs_" + std::to_string(frame + 1) + ".htsr"; }

json pose_to_json(const Pose& pose) {
    json arr = json::array();
    for (const Joint& j : pose.joints) arr.push_back(json::array({j.x, j.y, j.valid}));
    return arr;
}

Pose pose_from_json(const json& j) {
    if (!j.is_array() || j.size() != kJointCount) {
        throw DatasetError("pose must be an array of " + std::to_string(kJointCount) + " [x, y, valid] triples");
    }
    Pose p;
    for (std::size_t i = 0; i < kJointCount; ++i) {
        const json& t = j[i];
        if (!t.is_array() || t.size() != 3 || !t[0].is_number() || !t[1].is_number() || !t[2].is_boolean()) {
            throw DatasetError("joint " + std::to_string(i) + " must be [x, y, valid]");
        }
        p.joints[i] = {t[0].get<float>(), t[1].get<float>(), t[2].get<bool>()};
    }
    return p;
}

json sequence_joints_to_json(const PoseSequence& poses) {
    json arr = json::array();
    for (const Pose& p : poses) arr.push_back(pose_to_json(p));
    return arr;
}

PoseSequence sequence_joints_from_json(const json& j) {
    if (!j.is_array() || j.size() != kSequenceFrames) throw DatasetError("joints must list exactly 3 frames");
    PoseSequence out;
    for (std::size_t f = 0; f < kSequenceFrames; ++f) out[f] = pose_from_json(j[f]);
    return out;
}

json manifest_to_json(const Dataset& ds) {
    json names = json::array();
    for (std::size_t i = 0; i < kJointCount; ++i) names.push_back(joint_name(joint_at(i)));
    json limbs = json::array();
    for (const Limb& l : ds.limbs.limbs()) limbs.push_back({joint_name(l.parent), joint_name(l.child)});
    json seqs = json::array();
    for (const auto& r : ds.sequences) {
        json s = {
            {"id", r.id},
            {"action", action_name(r.action)},
            {"split", split_name(r.split)},
            {"flows", r.flow_files},
            {"joints", sequence_joints_to_json(r.joints)},
        };
        if (r.has_maps) s["maps"] = {{"confidence", r.confidence_files}, {"pafs", r.paf_files}};
        seqs.push_back(std::move(s));
    }
    return {
        {"version", kManifestVersion},
        {"image_size", {ds.image.width, ds.image.height}},
        {"stride", ds.stride},
        {"joint_names", names},
        {"limbs", limbs},
        {"sequences", seqs},
    };
}

Dataset dataset_from_json(const json& j, const fs::path& root, bool check_files) {
    Dataset ds;
    ds.root = root;
    try {
        if (j.at("version").get<int>() != kManifestVersion) {
            throw DatasetError("unsupported manifest version " + j.at("version").dump());
        }
        const auto& size = j.at("image_size");
        ds.image = {size.at(0).get<int>(), size.at(1).get<int>()};
        ds.stride = j.at("stride").get<int>();
        if (ds.image.width <= 0 || ds.image.height <= 0 || ds.stride <= 0) {
            throw DatasetError("image size and stride must be positive");
        }
        const auto& names = j.at("joint_names");
        if (names.size() != kJointCount) throw DatasetError("manifest must name 18 joints");
        for (std::size_t i = 0; i < kJointCount; ++i) {
            if (names[i].get<std::string>() != joint_name(joint_at(i))) {
                throw DatasetError("joint " + std::to_string(i) + " is named " + names[i].dump() + ", expected " +
                                   std::string(joint_name(joint_at(i))));
            }
        }
        const auto& limbs = j.at("limbs");
        if (limbs.size() != kLimbCount) throw DatasetError("manifest must list 17 limbs");
        std::string text;
        for (const auto& l : limbs) text += l.at(0).get<std::string>() + " " + l.at(1).get<std::string>() + "\n";
        try {
            ds.limbs = LimbTree::parse(text);
        } catch (const ConfigError& e) {
            throw DatasetError(std::string("invalid limb table: ") + e.what());
        }

        for (const auto& s : j.at("sequences")) {
            SequenceRecord r;
            r.id = s.at("id").get<std::string>();
            if (r.id.empty()) throw DatasetError("sequence id must not be empty");
            const auto action = action_from_name(s.at("action").get<std::string>());
            if (!action) throw DatasetError("sequence " + r.id + ": unknown action " + s.at("action").dump());
            r.action = *action;
            const auto split = split_from_name(s.at("split").get<std::string>());
            if (!split) throw DatasetError("sequence " + r.id + ": unknown split " + s.at("split").dump());
            r.split = *split;
            r.joints = sequence_joints_from_json(s.at("joints"));
            const auto& flows = s.at("flows");
            if (flows.size() != r.flow_files.size()) throw DatasetError("sequence " + r.id + ": expected 2 flows");
            for (std::size_t k = 0; k < r.flow_files.size(); ++k) r.flow_files[k] = flows[k].get<std::string>();
            if (s.contains("maps")) {
                r.has_maps = true;
                const auto& conf = s["maps"].at("confidence");
                const auto& pafs = s["maps"].at("pafs");
                if (conf.size() != kSequenceFrames || pafs.size() != kSequenceFrames) {
                    throw DatasetError("sequence " + r.id + ": maps must cover 3 frames");
                }
                for (std::size_t f = 0; f < kSequenceFrames; ++f) {
                    r.confidence_files[f] = conf[f].get<std::string>();
                    r.paf_files[f] = pafs[f].get<std::string>();
                }
            }
            ds.sequences.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw DatasetError(std::string("malformed manifest: ") + e.what());
    }

    for (std::size_t a = 0; a < ds.sequences.size(); ++a) {
        for (std::size_t b = a + 1; b < ds.sequences.size(); ++b) {
            if (ds.sequences[a].id == ds.sequences[b].id) throw DatasetError("duplicate sequence id " + ds.sequences[a].id);
        }
    }
    if (check_files) {
        for (const auto& r : ds.sequences) {
            for (const auto& f : r.flow_files) require_file(root, f, r.id);
            if (!r.has_maps) continue;
            for (std::size_t f = 0; f < kSequenceFrames; ++f) {
                require_file(root, r.confidence_files[f], r.id);
                require_file(root, r.paf_files[f], r.id);
            }
        }
    }
    return ds;
}

void write_manifest(const Dataset& ds) {
    fs::create_directories(ds.root);
    write_json_file(manifest_to_json(ds), ds.root / kManifestFile);
}

Dataset load_dataset(const fs::path& path) {
    const fs::path manifest = fs::is_directory(path) ? path / kManifestFile : path;
    if (!fs::is_regular_file(manifest)) throw DatasetError("no manifest at " + manifest.string());
    json j;
    try {
        j = read_json_file(manifest);
    } catch (const FormatError& e) {
        throw DatasetError(e.what());
    }
    return dataset_from_json(j, manifest.parent_path());
}

Tensor load_flow(const Dataset& ds, const SequenceRecord& rec, std::size_t k) {
    Tensor t = read_tensor(ds.root / rec.flow_files.at(k));
    if (t.rank() != 3 || t.dim(2) != 2) {
        throw DatasetError("sequence " + rec.id + ": flow must be [H,W,2], got " + shape_to_string(t.shape()));
    }
    return t;
}

PartMaps load_maps(const Dataset& ds, const SequenceRecord& rec, std::size_t frame) {
    if (!rec.has_maps) throw DatasetError("sequence " + rec.id + " has no part maps");
    PartMaps m{read_tensor(ds.root / rec.confidence_files.at(frame)), read_tensor(ds.root / rec.paf_files.at(frame)),
               static_cast<float>(ds.stride)};
    try {
        validate_part_maps(m);
    } catch (const ArgumentError& e) {
        throw DatasetError("sequence " + rec.id + ": " + e.what());
    }
    return m;
}

}  // namespace hstream
