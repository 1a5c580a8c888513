// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "hstream/pose_decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hstream {

namespace {

std::size_t clamp_cell(double v, std::size_t n) {
    const double r = std::round(v);
    if (!(r > 0.0)) return 0;  // also catches NaN
    return std::min(static_cast<std::size_t>(r), n - 1);
}

// Shared by both public overloads; `field(row, col)` yields the (x, y) vector.
template <typename Field>
double line_integral(Field field, std::size_t h, std::size_t w, Point p1, Point p2, int samples) {
    if (samples < 2) throw ArgumentError("paf_line_integral: samples must be >= 2");
    if (p1 == p2) return 0.0;
    // Always walk from the lexicographically smaller endpoint so that
    // score(p1, p2) == -score(p2, p1) exactly.
    const bool swapped = (p2.x < p1.x) || (p2.x == p1.x && p2.y < p1.y);
    const Point a = swapped ? p2 : p1;
    const Point b = swapped ? p1 : p2;
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double norm = std::hypot(dx, dy);
    const double ux = dx / norm;
    const double uy = dy / norm;

    double sum = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(samples - 1);
        const std::size_t col = clamp_cell(a.x + u * dx, w);
        const std::size_t row = clamp_cell(a.y + u * dy, h);
        const auto [fx, fy] = field(row, col);
        sum += static_cast<double>(fx) * ux + static_cast<double>(fy) * uy;
    }
    const double mean = sum / static_cast<double>(samples);
    return swapped ? -mean : mean;
}

struct FrontierChoice {
    double score = -std::numeric_limits<double>::infinity();
    std::size_t joint = kJointCount;
    int candidate = 0;
    bool found = false;
};

bool better(double score, std::size_t joint, int candidate, const FrontierChoice& best) {
    if (!best.found) return true;
    if (score != best.score) return score > best.score;
    if (joint != best.joint) return joint < best.joint;
    return candidate < best.candidate;
}

}  // namespace

std::vector<Candidate> extract_peaks(const Tensor& map, int k) {
    if (map.rank() != 2 || map.empty()) throw ArgumentError("extract_peaks: expected a non-empty [H,W] map");
    if (k < 1) throw ArgumentError("extract_peaks: k must be >= 1");
    const std::size_t h = map.dim(0), w = map.dim(1);
    if (h < 3 || w < 3) throw ArgumentError("extract_peaks: map must be at least 3x3");

    struct Peak {
        float score;
        std::size_t scan;
    };
    std::vector<Peak> peaks;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const float v = map.at(y, x);
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const auto ny = static_cast<std::ptrdiff_t>(y) + dy;
                    const auto nx = static_cast<std::ptrdiff_t>(x) + dx;
                    if (ny < 0 || nx < 0 || ny >= static_cast<std::ptrdiff_t>(h) ||
                        nx >= static_cast<std::ptrdiff_t>(w)) {
                        continue;
                    }
                    if (!(v > map.at(static_cast<std::size_t>(ny), static_cast<std::size_t>(nx)))) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) peaks.push_back({v, y * w + x});
        }
    }
    std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.score > b.score; });

    if (peaks.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < map.size(); ++i) {
            if (map[i] > map[best]) best = i;
        }
        peaks.push_back({map[best], best});
    }

    std::vector<Candidate> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const Peak& use = idx < peaks.size() ? peaks[idx] : peaks.front();
        out.push_back({static_cast<float>(use.scan % w), static_cast<float>(use.scan / w), use.score});
    }
    return out;
}

double paf_line_integral(const Tensor& paf_x, const Tensor& paf_y, Point p1, Point p2, int samples) {
    if (paf_x.rank() != 2 || paf_x.shape() != paf_y.shape()) {
        throw ArgumentError("paf_line_integral: expected two [H,W] fields of equal shape");
    }
    auto field = [&](std::size_t r, std::size_t c) { return std::pair{paf_x.at(r, c), paf_y.at(r, c)}; };
    return line_integral(field, paf_x.dim(0), paf_x.dim(1), p1, p2, samples);
}

double paf_line_integral(const Tensor& pafs, std::size_t limb, Point p1, Point p2, int samples) {
    if (pafs.rank() != 3 || 2 * limb + 1 >= pafs.dim(2)) {
        throw ArgumentError("paf_line_integral: limb " + std::to_string(limb) + " not present in " +
                            shape_to_string(pafs.shape()));
    }
    const std::size_t cx = 2 * limb, cy = 2 * limb + 1;
    auto field = [&](std::size_t r, std::size_t c) { return std::pair{pafs.at(r, c, cx), pafs.at(r, c, cy)}; };
    return line_integral(field, pafs.dim(0), pafs.dim(1), p1, p2, samples);
}

void validate_part_maps(const PartMaps& maps) {
    const auto& c = maps.confidence;
    const auto& p = maps.pafs;
    if (c.rank() != 3 || c.dim(2) != kJointCount) {
        throw ArgumentError("confidence maps must be [H,W,18], got " + shape_to_string(c.shape()));
    }
    if (p.rank() != 3 || p.dim(2) != 2 * kLimbCount) {
        throw ArgumentError("PAFs must be [H,W,34], got " + shape_to_string(p.shape()));
    }
    if (c.dim(0) != p.dim(0) || c.dim(1) != p.dim(1)) {
        throw ArgumentError("confidence and PAF grids differ: " + shape_to_string(c.shape()) + " vs " +
                            shape_to_string(p.shape()));
    }
    if (!(maps.stride > 0.0f)) throw ArgumentError("map stride must be positive");
}

Pose assemble_pose(const PartMaps& maps, const LimbTree& tree) {
    validate_part_maps(maps);

    std::array<std::vector<Candidate>, kJointCount> candidates;
    for (std::size_t j = 0; j < kJointCount; ++j) {
        candidates[j] = extract_peaks(channel(maps.confidence, j), kPeaksPerJoint);
    }

    std::array<bool, kJointCount> determined{};
    std::array<Point, kJointCount> position{};
    const std::size_t root = index(JointId::head_top);
    determined[root] = true;
    position[root] = {candidates[root][0].x, candidates[root][0].y};

    for (std::size_t step = 1; step < kJointCount; ++step) {
        FrontierChoice best;
        for (std::size_t k = 0; k < tree.size(); ++k) {
            const std::size_t parent = index(tree[k].parent);
            const std::size_t child = index(tree[k].child);
            if (!determined[parent] || determined[child]) continue;
            for (int c = 0; c < kPeaksPerJoint; ++c) {
                const Candidate& cand = candidates[child][static_cast<std::size_t>(c)];
                const double s = paf_line_integral(maps.pafs, k, position[parent], {cand.x, cand.y});
                if (better(s, child, c, best)) best = {s, child, c, true};
            }
        }
        // A spanning tree always leaves a frontier edge until every joint is set.
        const Candidate& chosen = candidates[best.joint][static_cast<std::size_t>(best.candidate)];
        determined[best.joint] = true;
        position[best.joint] = {chosen.x, chosen.y};
    }

    Pose pose;
    for (std::size_t j = 0; j < kJointCount; ++j) {
        pose.joints[j] = {static_cast<float>(position[j].x * maps.stride),
                          static_cast<float>(position[j].y * maps.stride), true};
    }
    return pose;
}

std::vector<Pose> decode_sequence(std::span<const PartMaps> frames, const LimbTree& tree) {
    if (frames.size() != 3) {
        throw ArgumentError("decode_sequence expects 3 frames, got " + std::to_string(frames.size()));
    }
    std::vector<Pose> poses;
    poses.reserve(frames.size());
    for (const PartMaps& f : frames) poses.push_back(assemble_pose(f, tree));
    return poses;
}

PartMaps mirror_part_maps(const PartMaps& maps) {
    validate_part_maps(maps);
    const Tensor flipped_conf = hflip(maps.confidence, {});
    Tensor conf(flipped_conf.shape());
    for (std::size_t y = 0; y < conf.dim(0); ++y) {
        for (std::size_t x = 0; x < conf.dim(1); ++x) {
            for (std::size_t j = 0; j < kJointCount; ++j) {
                conf.at(y, x, index(mirror_joint(joint_at(j)))) = flipped_conf.at(y, x, j);
            }
        }
    }
    std::set<std::size_t> x_channels;
    for (std::size_t k = 0; k < kLimbCount; ++k) x_channels.insert(2 * k);
    return {std::move(conf), hflip(maps.pafs, x_channels), maps.stride};
}

}  // namespace hstream
