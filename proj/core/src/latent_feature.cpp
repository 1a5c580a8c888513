// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "hstream/latent_feature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hstream/errors.hpp"

namespace hstream {

namespace {

Point as_point(const Joint& j) { return {j.x, j.y}; }

}  // namespace

const AngleSpec& standard_angles() {
    using J = JointId;
    static const AngleSpec spec = {{
        {J::head_top, J::upper_neck, J::thorax},
        {J::upper_neck, J::thorax, J::l_shoulder},
        {J::pelvis, J::thorax, J::l_shoulder},
        {J::thorax, J::l_shoulder, J::l_elbow},
        {J::l_shoulder, J::l_elbow, J::l_wrist},
        {J::upper_neck, J::thorax, J::r_shoulder},
        {J::pelvis, J::thorax, J::r_shoulder},
        {J::thorax, J::r_shoulder, J::r_elbow},
        {J::r_shoulder, J::r_elbow, J::r_wrist},
        {J::thorax, J::pelvis, J::l_hip},
        {J::pelvis, J::l_hip, J::l_knee},
        {J::l_hip, J::l_knee, J::l_ankle},
        {J::thorax, J::pelvis, J::r_hip},
        {J::pelvis, J::r_hip, J::r_knee},
        {J::r_hip, J::r_knee, J::r_ankle},
        {J::l_hip, J::pelvis, J::r_hip},
    }};
    return spec;
}

std::string angles_to_text(const AngleSpec& spec) {
    std::string out;
    for (const auto& t : spec) {
        out += std::string(joint_name(t.a)) + ' ' + std::string(joint_name(t.b)) + ' ' +
               std::string(joint_name(t.c)) + '\n';
    }
    return out;
}

AngleSpec parse_angles(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::vector<AngleTriple> rows;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string a, b, c, extra;
        if (!(fields >> a)) continue;
        if (!(fields >> b >> c) || (fields >> extra)) throw ConfigError("angle spec: expected `a b c` per line");
        auto ja = joint_from_name(a), jb = joint_from_name(b), jc = joint_from_name(c);
        if (!ja || !jb || !jc) throw ConfigError("angle spec: unknown joint name in `" + line + "`");
        if (is_stick_joint(*ja) || is_stick_joint(*jb) || is_stick_joint(*jc)) {
            throw ConfigError("angle spec: stick joints cannot appear in angles");
        }
        rows.push_back({*ja, *jb, *jc});
    }
    if (rows.size() != kAngleCount) {
        throw ConfigError("angle spec must have 16 rows, got " + std::to_string(rows.size()));
    }
    AngleSpec spec;
    std::copy(rows.begin(), rows.end(), spec.begin());
    return spec;
}

std::array<std::size_t, kAngleCount> mirrored_angle_rows(const AngleSpec& spec) {
    std::array<std::size_t, kAngleCount> out{};
    for (std::size_t i = 0; i < kAngleCount; ++i) {
        const AngleTriple m{mirror_joint(spec[i].a), mirror_joint(spec[i].b), mirror_joint(spec[i].c)};
        bool found = false;
        for (std::size_t r = 0; r < kAngleCount && !found; ++r) {
            const auto& s = spec[r];
            // The angle is unsigned, so ABC and CBA are the same row.
            if (s.b == m.b && ((s.a == m.a && s.c == m.c) || (s.a == m.c && s.c == m.a))) {
                out[i] = r;
                found = true;
            }
        }
        if (!found) throw ConfigError("angle spec is not closed under left/right mirroring");
    }
    return out;
}

std::array<Point, kJointCount> normalize_joints(const Pose& pose, ImageSize image) {
    const Joint& top = pose[JointId::head_top];
    const Joint& neck = pose[JointId::upper_neck];
    if (!top.valid || !neck.valid) throw DegenerateHeadError("head_top/upper_neck not annotated");
    const double length = head_segment_length(pose);
    if (!(length >= 1e-6)) {
        throw DegenerateHeadError("head segment length " + std::to_string(length) + " below 1e-6");
    }
    const double cx = image.width / 2.0;
    const double cy = image.height / 2.0;
    std::array<Point, kJointCount> out{};
    for (std::size_t j = 0; j < kJointCount; ++j) {
        const Joint& p = pose.joints[j];
        if (!p.valid) continue;
        out[j] = {(p.x - cx) / length, (p.y - cy) / length};
    }
    return out;
}

double limb_angle(Point a, Point b, Point c) {
    const double ux = a.x - b.x, uy = a.y - b.y;
    const double vx = c.x - b.x, vy = c.y - b.y;
    const double nu = std::hypot(ux, uy);
    const double nv = std::hypot(vx, vy);
    if (nu < 1e-9 || nv < 1e-9) return 0.0;
    const double cosine = std::clamp((ux * vx + uy * vy) / (nu * nv), -1.0, 1.0);
    return std::acos(cosine);
}

std::vector<float> featurize_frame(const Pose& pose, ImageSize image, bool include_stick, const AngleSpec& angles) {
    const auto coords = normalize_joints(pose, image);
    std::vector<float> out;
    out.reserve(frame_feature_length(include_stick));
    for (std::size_t j = 0; j < kJointCount; ++j) {
        if (!include_stick && is_stick_joint(joint_at(j))) continue;
        out.push_back(static_cast<float>(coords[j].x));
        out.push_back(static_cast<float>(coords[j].y));
    }
    for (const AngleTriple& t : angles) {
        const Joint& a = pose[t.a];
        const Joint& b = pose[t.b];
        const Joint& c = pose[t.c];
        const bool ok = a.valid && b.valid && c.valid;
        out.push_back(ok ? static_cast<float>(limb_angle(as_point(a), as_point(b), as_point(c))) : 0.0f);
    }
    return out;
}

std::vector<float> featurize_sequence(std::span<const Pose> poses, std::span<const ImageSize> images,
                                      bool include_stick, const AngleSpec& angles) {
    if (poses.size() != kSequenceFrames || images.size() != kSequenceFrames) {
        throw ArgumentError("featurize_sequence expects 3 poses and 3 image sizes, got " +
                            std::to_string(poses.size()) + " and " + std::to_string(images.size()));
    }
    std::vector<float> out;
    out.reserve(sequence_feature_length(include_stick));
    for (std::size_t f = 0; f < kSequenceFrames; ++f) {
        const auto frame = featurize_frame(poses[f], images[f], include_stick, angles);
        out.insert(out.end(), frame.begin(), frame.end());
    }
    return out;
}

}  // namespace hstream
