// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "hstream/skeleton.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "hstream/errors.hpp"

namespace hstream {

namespace {

constexpr std::array<std::string_view, kJointCount> kNames = {
    "head_top", "upper_neck", "thorax",  "l_shoulder", "r_shoulder", "l_elbow",
    "r_elbow",  "l_wrist",    "r_wrist", "pelvis",     "l_hip",      "r_hip",
    "l_knee",   "r_knee",     "l_ankle", "r_ankle",    "stick_top",  "stick_end",
};

}  // namespace

std::string_view joint_name(JointId j) { return kNames.at(index(j)); }

std::optional<JointId> joint_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == name) return joint_at(i);
    }
    return std::nullopt;
}

JointId mirror_joint(JointId j) {
    switch (j) {
        case JointId::l_shoulder: return JointId::r_shoulder;
        case JointId::r_shoulder: return JointId::l_shoulder;
        case JointId::l_elbow: return JointId::r_elbow;
        case JointId::r_elbow: return JointId::l_elbow;
        case JointId::l_wrist: return JointId::r_wrist;
        case JointId::r_wrist: return JointId::l_wrist;
        case JointId::l_hip: return JointId::r_hip;
        case JointId::r_hip: return JointId::l_hip;
        case JointId::l_knee: return JointId::r_knee;
        case JointId::r_knee: return JointId::l_knee;
        case JointId::l_ankle: return JointId::r_ankle;
        case JointId::r_ankle: return JointId::l_ankle;
        default: return j;
    }
}

LimbTree LimbTree::standard() {
    using J = JointId;
    return LimbTree({{
        {J::head_top, J::upper_neck},
        {J::upper_neck, J::thorax},
        {J::thorax, J::l_shoulder},
        {J::thorax, J::r_shoulder},
        {J::l_shoulder, J::l_elbow},
        {J::r_shoulder, J::r_elbow},
        {J::l_elbow, J::l_wrist},
        {J::r_elbow, J::r_wrist},
        {J::thorax, J::pelvis},
        {J::pelvis, J::l_hip},
        {J::pelvis, J::r_hip},
        {J::l_hip, J::l_knee},
        {J::r_hip, J::r_knee},
        {J::l_knee, J::l_ankle},
        {J::r_knee, J::r_ankle},
        {J::r_wrist, J::stick_top},
        {J::stick_top, J::stick_end},
    }});
}

LimbTree::LimbTree(std::array<Limb, kLimbCount> limbs) : limbs_(limbs) {
    std::array<int, kJointCount> parent_count{};
    for (const Limb& l : limbs_) {
        if (l.parent == l.child) throw ConfigError("limb tree: self loop at " + std::string(joint_name(l.parent)));
        ++parent_count[index(l.child)];
    }
    if (parent_count[index(JointId::head_top)] != 0) {
        throw ConfigError("limb tree: head_top must be the root");
    }
    for (std::size_t j = 1; j < kJointCount; ++j) {
        if (parent_count[j] != 1) {
            throw ConfigError("limb tree: joint " + std::string(joint_name(joint_at(j))) + " has " +
                              std::to_string(parent_count[j]) + " parents, expected 1");
        }
    }
    // Every joint has one parent; reachability from the root rules out cycles.
    std::array<bool, kJointCount> reached{};
    reached[index(JointId::head_top)] = true;
    for (std::size_t pass = 0; pass < kJointCount; ++pass) {
        for (const Limb& l : limbs_) {
            if (reached[index(l.parent)]) reached[index(l.child)] = true;
        }
    }
    for (std::size_t j = 0; j < kJointCount; ++j) {
        if (!reached[j]) {
            throw ConfigError("limb tree: joint " + std::string(joint_name(joint_at(j))) +
                              " is not reachable from head_top");
        }
    }
}

LimbTree LimbTree::parse(std::string_view text) {
    std::vector<Limb> limbs;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string parent, child, extra;
        if (!(fields >> parent)) continue;
        if (!(fields >> child) || (fields >> extra)) {
            throw ConfigError("limb file line " + std::to_string(line_no) + ": expected `parent child`");
        }
        auto p = joint_from_name(parent);
        auto c = joint_from_name(child);
        if (!p || !c) {
            throw ConfigError("limb file line " + std::to_string(line_no) + ": unknown joint name");
        }
        limbs.push_back({*p, *c});
    }
    if (limbs.size() != kLimbCount) {
        throw ConfigError("limb file must list exactly 17 limbs, got " + std::to_string(limbs.size()));
    }
    std::array<Limb, kLimbCount> arr;
    std::copy(limbs.begin(), limbs.end(), arr.begin());
    return LimbTree(arr);
}

LimbTree LimbTree::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open limb file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string LimbTree::to_text() const {
    std::string out;
    for (const Limb& l : limbs_) {
        out += joint_name(l.parent);
        out += ' ';
        out += joint_name(l.child);
        out += '\n';
    }
    return out;
}

LimbTree LimbTree::mirrored() const {
    std::array<Limb, kLimbCount> out;
    for (std::size_t k = 0; k < kLimbCount; ++k) {
        out[k] = {mirror_joint(limbs_[k].parent), mirror_joint(limbs_[k].child)};
    }
    return LimbTree(out);
}

Pose mirror_pose(const Pose& pose, double image_w) {
    Pose out;
    for (std::size_t j = 0; j < kJointCount; ++j) {
        const Joint& src = pose.joints[j];
        Joint& dst = out[mirror_joint(joint_at(j))];
        dst.x = static_cast<float>(image_w - static_cast<double>(src.x));
        dst.y = src.y;
        dst.valid = src.valid;
    }
    return out;
}

double head_segment_length(const Pose& pose) {
    const Joint& a = pose[JointId::head_top];
    const Joint& b = pose[JointId::upper_neck];
    return std::hypot(static_cast<double>(a.x) - b.x, static_cast<double>(a.y) - b.y);
}

}  // namespace hstream
