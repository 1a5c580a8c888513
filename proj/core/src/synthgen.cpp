// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "hstream/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "hstream/errors.hpp"
#include "hstream/json_io.hpp"

namespace hstream {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kStickLength = 140.0;

// Standing skeleton facing +x, offsets in px from the body centre.
constexpr std::array<Point, kJointCount> kBaseSkeleton = {{
    {0, -104},   // head_top
    {0, -80},    // upper_neck
    {0, -60},    // thorax
    {-26, -56},  // l_shoulder
    {26, -56},   // r_shoulder
    {-36, -24},  // l_elbow
    {36, -24},   // r_elbow
    {-30, 8},    // l_wrist
    {34, 8},     // r_wrist
    {0, 10},     // pelvis
    {-18, 14},   // l_hip
    {18, 14},    // r_hip
    {-22, 56},   // l_knee
    {22, 56},    // r_knee
    {-24, 100},  // l_ankle
    {24, 100},   // r_ankle
    {0, 0},      // stick_top, placed from the wrist
    {0, 0},      // stick_end, placed from the stick angle
}};

double segment_distance(Point p, Point a, Point b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

struct BodyParams {
    double cx = 184.0, cy = 184.0;
    double scale = 1.0;
    double lean = 8.0;  // upper body shift towards the facing direction, px
    int facing = 1;
    std::array<Point, kJointCount> posture{};  // per-sequence joint offsets
};

BodyParams random_body(const SynthConfig& cfg, Rng& rng) {
    BodyParams b;
    const ImageSize img = cfg.image();
    b.cx = img.width / 2.0 + rng.uniform(-20.0, 20.0);
    b.cy = img.height / 2.0 + rng.uniform(-10.0, 10.0);
    b.scale = rng.uniform(0.9, 1.1);
    b.lean = rng.uniform(4.0, 12.0);
    b.facing = cfg.random_facing && rng.bernoulli(0.5) ? -1 : 1;
    for (auto& p : b.posture) p = {rng.normal(0.0, 3.0), rng.normal(0.0, 3.0)};
    return b;
}

// Noise-free pose for a body, horizontal shift and stick angle (0 = blade
// straight down, 90 = pointing forward, > 90 raised).
Pose body_pose(const BodyParams& b, double shift, double stick_deg) {
    std::array<Point, kJointCount> p{};
    for (std::size_t j = 0; j < kJointCount; ++j) {
        const Point base = kBaseSkeleton[j];
        // Upper body leans forward in proportion to height above the pelvis.
        const double lean = base.y < 10.0 ? b.lean * (10.0 - base.y) / 114.0 : 0.0;
        p[j] = {base.x + lean + b.posture[j].x, base.y + b.posture[j].y};
    }
    const Point wrist = p[index(JointId::r_wrist)];
    const Point top = {wrist.x - 8.0, wrist.y - 28.0};
    const double phi = stick_deg * kDeg;
    p[index(JointId::stick_top)] = top;
    p[index(JointId::stick_end)] = {top.x + kStickLength * std::sin(phi), top.y + kStickLength * std::cos(phi)};

    Pose pose;
    for (std::size_t j = 0; j < kJointCount; ++j) {
        pose.joints[j] = {static_cast<float>(b.cx + shift + b.facing * b.scale * p[j].x),
                          static_cast<float>(b.cy + b.scale * p[j].y), true};
    }
    return pose;
}

void annotate(Pose& pose, double sigma, Rng& rng) {
    for (Joint& j : pose.joints) {
        j.x = quantize_coordinate(j.x + rng.normal(0.0, sigma));
        j.y = quantize_coordinate(j.y + rng.normal(0.0, sigma));
    }
}

bool in_bounds(const Pose& pose, ImageSize img, double margin) {
    for (const Joint& j : pose.joints) {
        if (j.x < margin || j.y < margin || j.x > img.width - margin || j.y > img.height - margin) return false;
    }
    return true;
}

bool limbs_resolvable(const Pose& pose, const SynthConfig& cfg) {
    const double min_px = cfg.min_limb_length * cfg.stride;
    for (const Limb& l : LimbTree::standard().limbs()) {
        const Joint& a = pose[l.parent];
        const Joint& b = pose[l.child];
        if (std::hypot(b.x - a.x, b.y - a.y) < min_px) return false;
    }
    return true;
}

Tensor uniform_flow(const SynthConfig& cfg, double dx_px, Rng& rng) {
    Tensor f({cfg.grid_h, cfg.grid_w, 2});
    const double dx = dx_px / cfg.stride;
    for (std::size_t y = 0; y < cfg.grid_h; ++y) {
        for (std::size_t x = 0; x < cfg.grid_w; ++x) {
            f.at(y, x, 0) = static_cast<float>(dx + rng.normal(0.0, cfg.flow_noise_sigma));
            f.at(y, x, 1) = static_cast<float>(rng.normal(0.0, cfg.flow_noise_sigma));
        }
    }
    return f;
}

double stick_angle(const Pose& p, int facing) {
    const Joint& a = p[JointId::stick_top];
    const Joint& b = p[JointId::stick_end];
    return std::atan2(facing * (static_cast<double>(b.x) - a.x), static_cast<double>(b.y) - a.y) / kDeg;
}

}  // namespace

void SynthConfig::validate() const {
    if (grid_h < 3 || grid_w < 3) throw ConfigError("synthetic grid must be at least 3x3");
    if (stride <= 0) throw ConfigError("stride must be positive");
    if (!(gaussian_sigma > 0.0)) throw ConfigError("gaussian sigma must be positive");
    if (!(paf_half_width > 0.0)) throw ConfigError("PAF half width must be positive");
    if (!(distractor_amplitude >= 0.0 && distractor_amplitude < 1.0)) {
        throw ConfigError("distractor amplitude must be in [0,1)");
    }
    if (!(min_limb_length >= 0.0)) throw ConfigError("min limb length must be >= 0");
    if (!(joint_noise_sigma >= 0.0) || !(flow_noise_sigma >= 0.0)) throw ConfigError("noise sigmas must be >= 0");
    for (const auto& r : {forward_speed, backward_speed}) {
        if (!(r[0] > drift && r[1] >= r[0])) throw ConfigError("skating speed ranges must be ordered and exceed the drift");
    }
    if (!(drift >= 0.0)) throw ConfigError("drift must be >= 0");
    for (ActionLabel a : kAllActions) {
        if (count_for(a) < 7) throw ConfigError("every class needs at least 7 sequences for a 70/15/15 split");
    }
}

std::size_t SynthConfig::count_for(ActionLabel a) const {
    return class_counts ? (*class_counts)[index(a)] : sequences_per_class;
}

void to_json(json& j, const SynthConfig& cfg) {
    j = {
        {"grid", {cfg.grid_h, cfg.grid_w}},
        {"stride", cfg.stride},
        {"gaussian_sigma", cfg.gaussian_sigma},
        {"paf_half_width", cfg.paf_half_width},
        {"distractor_amplitude", cfg.distractor_amplitude},
        {"distractor_min_distance", cfg.distractor_min_distance},
        {"min_limb_length", cfg.min_limb_length},
        {"sequences_per_class", cfg.sequences_per_class},
        {"class_counts", cfg.class_counts ? json(*cfg.class_counts) : json(nullptr)},
        {"seed", cfg.seed},
        {"with_maps", cfg.with_maps},
        {"random_facing", cfg.random_facing},
        {"joint_noise_sigma", cfg.joint_noise_sigma},
        {"forward_speed_px", cfg.forward_speed},
        {"backward_speed_px", cfg.backward_speed},
        {"drift_px", cfg.drift},
        {"flow_noise_sigma", cfg.flow_noise_sigma},
    };
}

void from_json(const json& j, SynthConfig& cfg) {
    try {
        cfg.grid_h = j.at("grid").at(0).get<std::size_t>();
        cfg.grid_w = j.at("grid").at(1).get<std::size_t>();
        j.at("stride").get_to(cfg.stride);
        j.at("gaussian_sigma").get_to(cfg.gaussian_sigma);
        j.at("paf_half_width").get_to(cfg.paf_half_width);
        j.at("distractor_amplitude").get_to(cfg.distractor_amplitude);
        j.at("distractor_min_distance").get_to(cfg.distractor_min_distance);
        j.at("min_limb_length").get_to(cfg.min_limb_length);
        j.at("sequences_per_class").get_to(cfg.sequences_per_class);
        if (j.at("class_counts").is_null()) {
            cfg.class_counts.reset();
        } else {
            cfg.class_counts = j.at("class_counts").get<std::array<std::size_t, kActionCount>>();
        }
        j.at("seed").get_to(cfg.seed);
        j.at("with_maps").get_to(cfg.with_maps);
        j.at("random_facing").get_to(cfg.random_facing);
        j.at("joint_noise_sigma").get_to(cfg.joint_noise_sigma);
        j.at("forward_speed_px").get_to(cfg.forward_speed);
        j.at("backward_speed_px").get_to(cfg.backward_speed);
        j.at("drift_px").get_to(cfg.drift);
        j.at("flow_noise_sigma").get_to(cfg.flow_noise_sigma);
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed synth config: ") + e.what());
    }
}

float quantize_coordinate(double v) { return static_cast<float>((std::floor(v * 16.0) + 0.5) / 16.0); }

PartMaps render_maps(const Pose& pose, const SynthConfig& cfg, Rng& rng, const LimbTree& tree) {
    const ImageSize img = cfg.image();
    for (std::size_t j = 0; j < kJointCount; ++j) {
        const Joint& jt = pose.joints[j];
        if (!(jt.x >= 0.0f && jt.y >= 0.0f && jt.x < img.width && jt.y < img.height)) {
            throw ArgumentError("joint " + std::string(joint_name(joint_at(j))) + " lies outside the " +
                                std::to_string(img.width) + "x" + std::to_string(img.height) + " image");
        }
    }
    const std::size_t h = cfg.grid_h, w = cfg.grid_w;
    const double s = cfg.stride;
    std::array<Point, kJointCount> g{};
    for (std::size_t j = 0; j < kJointCount; ++j) g[j] = {pose.joints[j].x / s, pose.joints[j].y / s};

    PartMaps maps{Tensor({h, w, kJointCount}), Tensor({h, w, 2 * kLimbCount}), static_cast<float>(s)};
    const double inv2s2 = 1.0 / (2.0 * cfg.gaussian_sigma * cfg.gaussian_sigma);
    auto splat = [&](std::size_t c, Point centre, double amplitude) {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const double dx = static_cast<double>(x) - centre.x, dy = static_cast<double>(y) - centre.y;
                const auto v = static_cast<float>(amplitude * std::exp(-(dx * dx + dy * dy) * inv2s2));
                float& dst = maps.confidence.at(y, x, c);
                dst = std::max(dst, v);
            }
        }
    };

    for (std::size_t j = 0; j < kJointCount; ++j) {
        splat(j, g[j], 1.0);
        if (cfg.distractor_amplitude <= 0.0) continue;
        Point best{};
        double best_d = -1.0;
        for (int attempt = 0; attempt < 200; ++attempt) {
            const Point c{static_cast<double>(rng.uniform_index(w)), static_cast<double>(rng.uniform_index(h))};
            double d = std::numeric_limits<double>::infinity();
            for (const Limb& l : tree.limbs()) d = std::min(d, segment_distance(c, g[index(l.parent)], g[index(l.child)]));
            if (d > best_d) {
                best_d = d;
                best = c;
            }
            if (d >= cfg.distractor_min_distance) break;
        }
        splat(j, best, cfg.distractor_amplitude);
    }

    for (std::size_t k = 0; k < tree.size(); ++k) {
        const Point a = g[index(tree[k].parent)], b = g[index(tree[k].child)];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        if (len <= 0.0) continue;
        const double ux = (b.x - a.x) / len, uy = (b.y - a.y) / len;
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const double px = static_cast<double>(x) - a.x, py = static_cast<double>(y) - a.y;
                const double along = px * ux + py * uy;
                const double across = std::abs(px * uy - py * ux);
                if (along < 0.0 || along > len || across > cfg.paf_half_width) continue;
                maps.pafs.at(y, x, 2 * k) = static_cast<float>(ux);
                maps.pafs.at(y, x, 2 * k + 1) = static_cast<float>(uy);
            }
        }
    }
    return maps;
}

Pose random_pose(const SynthConfig& cfg, Rng& rng) {
    const ImageSize img = cfg.image();
    for (;;) {
        BodyParams b = random_body(cfg, rng);
        b.facing = rng.bernoulli(0.5) ? -1 : 1;
        const double theta = rng.uniform(-15.0, 15.0) * kDeg;
        Pose p = body_pose(b, 0.0, rng.uniform(-20.0, 150.0));
        const double c = std::cos(theta), sn = std::sin(theta);
        for (Joint& j : p.joints) {
            const double dx = j.x - b.cx, dy = j.y - b.cy;
            j.x = static_cast<float>(b.cx + c * dx - sn * dy);
            j.y = static_cast<float>(b.cy + sn * dx + c * dy);
        }
        annotate(p, cfg.joint_noise_sigma, rng);
        if (in_bounds(p, img, cfg.stride) && limbs_resolvable(p, cfg)) return p;
    }
}

SynthSequence gen_action_sequence(ActionLabel label, const SynthConfig& cfg, Rng& rng) {
    const ImageSize img = cfg.image();
    for (;;) {
        SynthSequence seq;
        seq.label = label;
        const BodyParams b = random_body(cfg, rng);
        seq.facing = b.facing;

        double step = 0.0;  // px per frame, signed in image space
        std::array<double, kSequenceFrames> stick{};
        switch (label) {
            case ActionLabel::forward:
            case ActionLabel::backward: {
                const bool fw = label == ActionLabel::forward;
                const auto& range = fw ? cfg.forward_speed : cfg.backward_speed;
                step = (fw ? 1 : -1) * b.facing * rng.uniform(range[0], range[1]);
                stick.fill(rng.uniform(30.0, 40.0));
                break;
            }
            case ActionLabel::passing: {
                step = rng.uniform(-1.0, 1.0) * cfg.drift;
                const double start = rng.uniform(-15.0, -5.0);
                const double sweep = rng.uniform(22.0, 30.0);
                stick = {start, start + sweep / 2.0, start + sweep};
                break;
            }
            case ActionLabel::shooting: {
                step = rng.uniform(-1.0, 1.0) * cfg.drift;
                const double start = rng.uniform(30.0, 40.0);
                const double lift = rng.uniform(100.0, 120.0);
                stick = {start, start + lift / 2.0, start + lift};
                break;
            }
        }
        for (std::size_t f = 0; f < kSequenceFrames; ++f) {
            seq.poses[f] = body_pose(b, step * (static_cast<double>(f) - 1.0), stick[f]);
            annotate(seq.poses[f], cfg.joint_noise_sigma, rng);
        }
        for (std::size_t k = 0; k < seq.flows.size(); ++k) seq.flows[k] = uniform_flow(cfg, step, rng);
        bool ok = true;
        for (const Pose& p : seq.poses) ok = ok && in_bounds(p, img, cfg.stride) && limbs_resolvable(p, cfg);
        if (ok) return seq;
    }
}

ActionLabel oracle_classify(const SynthSequence& seq) {
    const Pose& first = seq.poses.front();
    const Pose& last = seq.poses.back();
    const double head = head_segment_length(first);
    const double rise = first[JointId::stick_end].y - last[JointId::stick_end].y;
    if (rise >= 2.0 * head) return ActionLabel::shooting;

    const double sweep = std::abs(stick_angle(last, seq.facing) - stick_angle(first, seq.facing));
    if (sweep > 10.0) return ActionLabel::passing;

    double dx = 0.0;
    std::size_t n = 0;
    for (const Tensor& f : seq.flows) {
        for (std::size_t i = 0; i < f.size(); i += 2) dx += f[i];
        n += f.size() / 2;
    }
    return dx / static_cast<double>(n) * seq.facing > 0.0 ? ActionLabel::forward : ActionLabel::backward;
}

Dataset gen_dataset(const SynthConfig& cfg, const fs::path& out) {
    cfg.validate();
    Dataset ds;
    ds.root = out;
    ds.image = cfg.image();
    ds.stride = cfg.stride;
    fs::create_directories(out);

    std::size_t next_id = 0;
    for (ActionLabel a : kAllActions) {
        const std::size_t n = cfg.count_for(a);
        std::vector<Split> splits(n, Split::test);
        const auto n_train = static_cast<std::size_t>(std::lround(0.70 * static_cast<double>(n)));
        const auto n_val = static_cast<std::size_t>(std::lround(0.15 * static_cast<double>(n)));
        std::fill_n(splits.begin(), n_train, Split::train);
        std::fill_n(splits.begin() + static_cast<std::ptrdiff_t>(n_train), n_val, Split::val);
        Rng split_rng(derive_seed(cfg.seed, 0x5911, index(a)));
        split_rng.shuffle(splits);

        for (std::size_t i = 0; i < n; ++i) {
            Rng rng(derive_seed(cfg.seed, index(a) + 1, i));
            const SynthSequence seq = gen_action_sequence(a, cfg, rng);

            SequenceRecord rec;
            char id[32];
            std::snprintf(id, sizeof id, "seq_%04zu", next_id++);
            rec.id = id;
            rec.action = a;
            rec.split = splits[i];
            rec.joints = seq.poses;
            const fs::path dir = out / rec.id;
            fs::create_directories(dir);
            write_json_file(sequence_joints_to_json(seq.poses), dir / "joints.json");
            for (std::size_t k = 0; k < seq.flows.size(); ++k) {
                rec.flow_files[k] = rec.id + "/" + flow_file_name(k);
                write_tensor(seq.flows[k], out / rec.flow_files[k]);
            }
            if (cfg.with_maps) {
                rec.has_maps = true;
                for (std::size_t f = 0; f < kSequenceFrames; ++f) {
                    const PartMaps m = render_maps(seq.poses[f], cfg, rng, ds.limbs);
                    rec.confidence_files[f] = rec.id + "/" + confidence_file_name(f);
                    rec.paf_files[f] = rec.id + "/" + paf_file_name(f);
                    write_tensor(m.confidence, out / rec.confidence_files[f]);
                    write_tensor(m.pafs, out / rec.paf_files[f]);
                }
            }
            ds.sequences.push_back(std::move(rec));
        }
    }
    write_manifest(ds);
    return ds;
}

}  // namespace hstream
