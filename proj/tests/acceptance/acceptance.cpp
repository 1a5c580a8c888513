// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
//   hstream_acceptance --workdir DIR [--only 1,2,7]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11/CLI11.hpp>

#include "../../tools/cli.hpp"
#include "hstream/augmentation.hpp"
#include "hstream/errors.hpp"
#include "hstream/evaluation.hpp"
#include "hstream/json_io.hpp"
#include "hstream/latent_feature.hpp"
#include "hstream/model.hpp"
#include "hstream/pose_decoder.hpp"
#include "hstream/synthgen.hpp"
#include "hstream/tensor.hpp"

namespace fs = std::filesystem;
using namespace hstream;
using nlohmann::json;

namespace {

constexpr ImageSize kImage{368, 368};

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Stopwatch {
public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

int run_cli(const std::vector<std::string>& args, const fs::path& log) {
    std::ofstream out(log, std::ios::app);
    out << "$ hstream";
    for (const auto& a : args) out << ' ' << a;
    out << '\n';
    return cli::dispatch(args, out, out);
}

Pose random_valid_pose(Rng& rng) {
    static const SynthConfig cfg;
    return random_pose(cfg, rng);
}

// 1 -------------------------------------------------------------------------

Outcome feature_geometry() {
    Rng rng(101);
    std::size_t inputs = 0, bad = 0;
    for (int trial = 0; trial < 500; ++trial) {
        std::array<Pose, 3> poses;
        std::array<ImageSize, 3> dims;
        for (std::size_t f = 0; f < 3; ++f) {
            poses[f] = random_valid_pose(rng);
            // Non-head joints may be unannotated.
            for (std::size_t j = 2; j < kJointCount; ++j) {
                if (rng.bernoulli(0.1)) poses[f].joints[j].valid = false;
            }
            dims[f] = {static_cast<int>(200 + rng.uniform_index(400)), static_cast<int>(200 + rng.uniform_index(400))};
        }
        for (bool stick : {true, false}) {
            ++inputs;
            const auto v = featurize_sequence(poses, dims, stick);
            const std::size_t expected = stick ? 156 : 144;
            if (v.size() != expected) ++bad;
            for (std::size_t f = 0; f < 3; ++f) {
                if (featurize_frame(poses[f], dims[f], stick).size() != (stick ? 52u : 48u)) ++bad;
            }
        }
    }
    const bool decomposition = frame_feature_length(true) == 18 * 2 + 16 && sequence_feature_length(true) == 156 &&
                               sequence_feature_length(false) == 144;
    return {bad == 0 && decomposition,
            std::to_string(inputs) + " sequences, " + std::to_string(bad) + " wrong lengths (156 +ST / 144 -ST, 52 per frame)"};
}

// 2 -------------------------------------------------------------------------

Outcome gradient_correctness() {
    Stopwatch clock;
    bool ok = true;
    double worst_model = 0.0, worst_dense = 0.0;
    std::size_t skipped = 0, checked = 0;
    for (std::uint64_t seed : {0u, 1u, 2u}) {
        const auto g = run_gradient_checks(seed, 1e-3);
        worst_model = std::max(worst_model, g.model.max_relative_error);
        worst_dense = std::max(worst_dense, g.dense.max_relative_error);
        skipped += g.model.skipped_nonsmooth;
        checked += g.model.checked;
        ok = ok && g.model.max_relative_error < 1e-2 && g.dense.max_relative_error < 1e-4;
        ok = ok && static_cast<double>(g.model.skipped_nonsmooth) <=
                       0.01 * static_cast<double>(g.model.checked + g.model.skipped_nonsmooth);
    }
    const double t = clock.seconds();
    return {ok && t < 60.0, "3 seeds: two-stream max rel err " + fmt(worst_model) + " (< 1e-2) over " +
                                std::to_string(checked) + " entries, " + std::to_string(skipped) +
                                " kink probes excluded; dense " + fmt(worst_dense) + " (< 1e-4); " + fmt(t, 3) + " s"};
}

// 3 -------------------------------------------------------------------------

Outcome decoder_inversion() {
    Stopwatch clock;
    SynthConfig cfg;
    cfg.distractor_amplitude = 0.6;
    Rng rng(303);
    const LimbTree tree = LimbTree::standard();
    std::size_t recovered = 0;
    double worst = 0.0;
    for (int frame = 0; frame < 200; ++frame) {
        const Pose truth = random_pose(cfg, rng);
        const PartMaps maps = render_maps(truth, cfg, rng, tree);
        const Pose got = assemble_pose(maps, tree);
        bool all = true;
        for (std::size_t j = 0; j < kJointCount; ++j) {
            const double d = std::hypot(got.joints[j].x - truth.joints[j].x, got.joints[j].y - truth.joints[j].y) /
                             cfg.stride;
            worst = std::max(worst, d);
            all = all && got.joints[j].valid && d <= 1.0;
        }
        recovered += all;
    }
    const double t = clock.seconds();
    return {recovered == 200 && t < 30.0, std::to_string(recovered) + "/200 frames with all 18 joints within 1 cell (worst " +
                                              fmt(worst, 3) + " cells); " + fmt(t, 3) + " s"};
}

// 4 -------------------------------------------------------------------------

Outcome line_integral_oracle() {
    Rng rng(404);
    double aligned_err = 0.0, orth_err = 0.0;
    bool antisymmetric = true;
    for (int trial = 0; trial < 500; ++trial) {
        const double phi = rng.uniform(-std::numbers::pi, std::numbers::pi);
        const Point a{rng.uniform(0, 20), rng.uniform(0, 20)};
        const double len = rng.uniform(1.0, 15.0);
        const Point b{a.x + len * std::cos(phi), a.y + len * std::sin(phi)};
        Tensor ux({24, 24}), uy({24, 24}), ox({24, 24}), oy({24, 24});
        std::fill(ux.values().begin(), ux.values().end(), static_cast<float>(std::cos(phi)));
        std::fill(uy.values().begin(), uy.values().end(), static_cast<float>(std::sin(phi)));
        std::fill(ox.values().begin(), ox.values().end(), static_cast<float>(-std::sin(phi)));
        std::fill(oy.values().begin(), oy.values().end(), static_cast<float>(std::cos(phi)));
        aligned_err = std::max(aligned_err, std::abs(paf_line_integral(ux, uy, a, b) - 1.0));
        orth_err = std::max(orth_err, std::abs(paf_line_integral(ox, oy, a, b)));

        Tensor rx({24, 24}), ry({24, 24});
        for (float& v : rx.values()) v = static_cast<float>(rng.normal());
        for (float& v : ry.values()) v = static_cast<float>(rng.normal());
        antisymmetric = antisymmetric && paf_line_integral(rx, ry, a, b) == -paf_line_integral(rx, ry, b, a);
    }
    return {aligned_err <= 1e-6 && orth_err <= 1e-6 && antisymmetric,
            "500 segments: aligned |I-1| max " + fmt(aligned_err, 3) + ", orthogonal |I| max " + fmt(orth_err, 3) +
                ", endpoint swap " + (antisymmetric ? "exactly antisymmetric" : "NOT antisymmetric")};
}

// 5 -------------------------------------------------------------------------

Outcome pckh_oracle() {
    Rng rng(505);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        Pose gt, pred;
        for (std::size_t j = 0; j < kJointCount; ++j) {
            gt.joints[j] = {static_cast<float>(rng.uniform(0, 368)), static_cast<float>(rng.uniform(0, 368)),
                            j < 2 || rng.bernoulli(0.9)};
            pred.joints[j] = {static_cast<float>(gt.joints[j].x + rng.normal(0, 25)),
                              static_cast<float>(gt.joints[j].y + rng.normal(0, 25)), rng.bernoulli(0.95)};
        }
        // Independent threshold computation.
        const double hx = static_cast<double>(gt.joints[0].x) - gt.joints[1].x;
        const double hy = static_cast<double>(gt.joints[0].y) - gt.joints[1].y;
        const double threshold = 0.5 * std::sqrt(hx * hx + hy * hy);
        const PckhResult r = pckh(pred, gt);
        for (std::size_t j = 0; j < kJointCount; ++j) {
            const double dx = static_cast<double>(pred.joints[j].x) - gt.joints[j].x;
            const double dy = static_cast<double>(pred.joints[j].y) - gt.joints[j].y;
            const bool evaluated = gt.joints[j].valid;
            const bool correct = evaluated && pred.joints[j].valid && std::sqrt(dx * dx + dy * dy) < threshold;
            mismatches += r.evaluated[j] != evaluated || r.correct[j] != correct;
        }
    }
    Pose gt;
    for (auto& j : gt.joints) j = {100.0f, 100.0f, true};
    gt.joints[0] = {100.0f, 80.0f, true};  // L = 20
    Pose pred = gt;
    pred[JointId::l_knee].x += 0.49f * 20.0f;
    pred[JointId::r_knee].x += 0.51f * 20.0f;
    const PckhResult b = pckh(pred, gt);
    const bool boundary = b.correct[index(JointId::l_knee)] && !b.correct[index(JointId::r_knee)];
    return {mismatches == 0 && boundary, "1000 pose pairs, " + std::to_string(mismatches) +
                                             " joint mismatches against brute force; 0.49L correct / 0.51L incorrect: " +
                                             (boundary ? "yes" : "no")};
}

// 6 -------------------------------------------------------------------------

Pose scaled_about_centre(const Pose& p, double s) {
    Pose out = p;
    for (Joint& j : out.joints) {
        j.x = static_cast<float>(kImage.width / 2.0 + s * (j.x - kImage.width / 2.0));
        j.y = static_cast<float>(kImage.height / 2.0 + s * (j.y - kImage.height / 2.0));
    }
    return out;
}

// Snaps offsets from the image centre to multiples of h/16 and rotates by the
// Pythagorean angle (a/h, b/h), scales and translates, all exactly in float.
Pose exact_similarity(const Pose& p, int a, int b, int h, double s, int tx, int ty, Pose* snapped) {
    const double cx = kImage.width / 2.0, cy = kImage.height / 2.0, q = h / 16.0;
    Pose src = p, out = p;
    for (std::size_t j = 0; j < kJointCount; ++j) {
        const double dx = std::round((p.joints[j].x - cx) / q), dy = std::round((p.joints[j].y - cy) / q);
        src.joints[j].x = static_cast<float>(cx + q * dx);
        src.joints[j].y = static_cast<float>(cy + q * dy);
        out.joints[j].x = static_cast<float>(cx + s * (a * dx - b * dy) / 16.0 + tx);
        out.joints[j].y = static_cast<float>(cy + s * (b * dx + a * dy) / 16.0 + ty);
    }
    *snapped = src;
    return out;
}

Outcome invariance_suite() {
    Rng rng(606);
    double scale_err = 0.0, angle_err = 0.0;
    std::size_t mirror_bad = 0, flip_bad = 0;
    const std::size_t a0 = 2 * kJointCount;
    const auto rows = mirrored_angle_rows(standard_angles());
    struct Triple {
        int a, b, h;
    };
    const Triple triples[] = {{3, 4, 5}, {5, 12, 13}, {8, 15, 17}, {-4, 3, 5}, {-12, -5, 13}, {20, -21, 29}};
    for (int trial = 0; trial < 300; ++trial) {
        const Pose p = random_valid_pose(rng);
        const auto base = featurize_frame(p, kImage, true);
        for (double s : {0.5, 2.0}) {
            const auto f = featurize_frame(scaled_about_centre(p, s), kImage, true);
            for (std::size_t i = 0; i < f.size(); ++i) scale_err = std::max(scale_err, std::abs(double(f[i]) - base[i]));
        }

        const Triple& t = triples[trial % 6];
        Pose snapped;
        const Pose moved = exact_similarity(p, t.a, t.b, t.h, trial % 2 ? 2.0 : 0.5,
                                            static_cast<int>(rng.uniform_index(61)) - 30,
                                            static_cast<int>(rng.uniform_index(61)) - 30, &snapped);
        const auto fs0 = featurize_frame(snapped, kImage, true);
        const auto fs1 = featurize_frame(moved, kImage, true);
        for (std::size_t i = a0; i < fs0.size(); ++i) angle_err = std::max(angle_err, std::abs(double(fs1[i]) - fs0[i]));

        const auto m = featurize_frame(mirror_pose(p, kImage.width), kImage, true);
        for (std::size_t j = 0; j < kJointCount; ++j) {
            const std::size_t src = index(mirror_joint(joint_at(j)));
            mirror_bad += m[2 * j] != -base[2 * src] || m[2 * j + 1] != base[2 * src + 1];
        }
        for (std::size_t i = 0; i < kAngleCount; ++i) mirror_bad += m[a0 + i] != base[a0 + rows[i]];

        AugmentedSequence seq{{p, random_valid_pose(rng), random_valid_pose(rng)}, {Tensor({46, 46, 2}), Tensor({46, 46, 2})}, false};
        for (auto& f : seq.flows) {
            for (float& v : f.values()) v = static_cast<float>(rng.normal());
        }
        const auto twice = flip_sequence(flip_sequence(seq, kImage), kImage);
        bool same = twice.poses == seq.poses && !twice.flipped;
        for (std::size_t k = 0; k < 2; ++k) same = same && bitwise_equal(twice.flows[k], seq.flows[k]);
        // Coupling: an augmented flip touches joints and flows together.
        AugmentConfig cfg, no_flip;
        no_flip.flip_prob = 0.0;
        const std::uint64_t seed = rng.next_u64();
        Rng r1(seed), r2(seed);
        const auto a = augment_sequence(seq.poses, seq.flows, kImage, cfg, r1);
        const auto b = augment_sequence(seq.poses, seq.flows, kImage, no_flip, r2);
        const auto expect = a.flipped ? flip_sequence(b, kImage) : b;
        same = same && a.poses == expect.poses;
        for (std::size_t k = 0; k < 2; ++k) same = same && bitwise_equal(a.flows[k], expect.flows[k]);
        flip_bad += !same;
    }
    const bool ok = scale_err < 1e-6 && angle_err < 1e-6 && mirror_bad == 0 && flip_bad == 0;
    return {ok, "300 poses: scale |d| max " + fmt(scale_err, 3) + ", similarity angle |d| max " + fmt(angle_err, 3) +
                    ", mirror mismatches " + std::to_string(mirror_bad) + ", flip coupling/involution failures " +
                    std::to_string(flip_bad)};
}

// 7, 8, 9 -------------------------------------------------------------------

struct TrainedRun {
    bool ok = false;
    double mean_accuracy = 0.0;
    double seconds = 0.0;
    fs::path dir;
};

TrainedRun train_and_eval(const fs::path& dataset, const fs::path& dir, std::uint64_t seed,
                          const std::vector<std::string>& flags, const fs::path& log) {
    Stopwatch clock;
    TrainedRun r;
    r.dir = dir;
    fs::remove_all(dir);
    std::vector<std::string> train = {"train", "--dataset", dataset.string(), "--seed", std::to_string(seed),
                                      "--epochs", "30", "--batch-size", "2", "--momentum", "0.9", "--lr", "0.01",
                                      "--dropout", "0.3", "--out", dir.string()};
    train.insert(train.end(), flags.begin(), flags.end());
    if (run_cli(train, log) != 0) return r;
    if (run_cli({"eval", "--dataset", dataset.string(), "--ckpts", dir.string(), "--top", "3", "--report",
                 (dir / "report.json").string()},
                log) != 0) {
        return r;
    }
    r.mean_accuracy = read_json_file(dir / "report.json").at("mean").at("accuracy").get<double>();
    r.seconds = clock.seconds();
    r.ok = true;
    return r;
}

bool synth(const fs::path& out, std::uint64_t seed, const fs::path& log) {
    fs::remove_all(out);
    return run_cli({"synth", "--out", out.string(), "--per-class", "100", "--seed", std::to_string(seed)}, log) == 0;
}

struct EndToEnd {
    fs::path dataset;
    TrainedRun run;
};

Outcome end_to_end(const fs::path& work, EndToEnd& state) {
    Stopwatch clock;
    const fs::path log = work / "criterion7.log";
    state.dataset = work / "synth_seed7";
    if (!synth(state.dataset, 7, log)) return {false, "synth failed, see " + log.string()};
    state.run = train_and_eval(state.dataset, work / "run_seed7_a", 7, {}, log);
    if (!state.run.ok) return {false, "train/eval failed, see " + log.string()};
    const double t = clock.seconds();
    return {state.run.mean_accuracy >= 0.95 && t < 600.0,
            "(+ST,+OF) seed 7 top-3 mean test accuracy " + fmt(state.run.mean_accuracy) + " (>= 0.95); " + fmt(t, 4) +
                " s (< 600)"};
}

std::vector<fs::path> files_under(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().filename() != cli::kRunConfigFile) out.push_back(fs::relative(e.path(), dir));
    }
    std::sort(out.begin(), out.end());
    return out;
}

Outcome determinism(const fs::path& work, EndToEnd& state) {
    const fs::path log = work / "criterion9.log";
    if (state.dataset.empty()) {
        state.dataset = work / "synth_seed7";
        if (!synth(state.dataset, 7, log)) return {false, "synth failed"};
        state.run = train_and_eval(state.dataset, work / "run_seed7_a", 7, {}, log);
    }
    const TrainedRun again = train_and_eval(state.dataset, work / "run_seed7_b", 7, {}, log);
    if (!state.run.ok || !again.ok) return {false, "train/eval failed, see " + log.string()};
    const auto a = files_under(state.run.dir), b = files_under(again.dir);
    std::size_t differing = a == b ? 0 : 1;
    for (const auto& rel : a) {
        if (slurp(state.run.dir / rel) != slurp(again.dir / rel)) ++differing;
    }
    const fs::path regen = work / "synth_seed7_b";
    const bool data_same = synth(regen, 7, log) && slurp(regen / kManifestFile) == slurp(state.dataset / kManifestFile);
    return {differing == 0 && data_same, std::to_string(a.size()) + " checkpoint/ranking/report files compared, " +
                                             std::to_string(differing) + " differ; regenerated manifest " +
                                             (data_same ? "identical" : "DIFFERENT")};
}

Outcome ablation_ordering(const fs::path& work) {
    const fs::path log = work / "criterion8.log";
    struct Config {
        std::string name;
        std::vector<std::string> flags;
    };
    const std::vector<Config> configs = {{"+ST,+OF", {}},
                                         {"-ST,+OF", {"--no-stick"}},
                                         {"+ST,-OF", {"--no-flow"}},
                                         {"-ST,-OF", {"--no-stick", "--no-flow"}}};
    std::vector<double> sums(configs.size(), 0.0);
    std::ostringstream per_seed;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const fs::path data = work / ("ablation_data_" + std::to_string(seed));
        if (!synth(data, seed, log)) return {false, "synth failed, see " + log.string()};
        per_seed << " s" << seed << "[";
        for (std::size_t c = 0; c < configs.size(); ++c) {
            const auto r = train_and_eval(data, work / ("ablation_" + std::to_string(seed) + "_" + std::to_string(c)),
                                          seed, configs[c].flags, log);
            if (!r.ok) return {false, "train/eval failed for " + configs[c].name + ", see " + log.string()};
            sums[c] += r.mean_accuracy;
            per_seed << (c ? " " : "") << fmt(r.mean_accuracy, 3);
            std::cout << "  criterion 8 progress: seed " << seed << " " << configs[c].name << " " << fmt(r.mean_accuracy)
                      << " (" << fmt(r.seconds, 3) << " s)" << std::endl;
        }
        per_seed << "]";
    }
    bool ok = true;
    std::string means;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        const double m = sums[c] / 5.0;
        if (c > 0) ok = ok && sums[0] >= sums[c];
        means += (c ? ", " : "") + configs[c].name + " " + fmt(m);
    }
    return {ok, "5-seed means: " + means + ";" + per_seed.str()};
}

// 10 ------------------------------------------------------------------------

Outcome format_round_trips(const fs::path& work) {
    Rng rng(1010);
    const fs::path dir = work / "formats";
    fs::create_directories(dir);
    std::size_t tensor_bad = 0;
    for (int trial = 0; trial < 200; ++trial) {
        Shape shape(1 + rng.uniform_index(4));
        for (auto& d : shape) d = 1 + rng.uniform_index(7);
        Tensor t(shape);
        for (float& v : t.values()) v = static_cast<float>(rng.normal(0.0, 1e3));
        const fs::path p = dir / "t.htsr";
        write_tensor(t, p);
        const Tensor back = read_tensor(p);
        tensor_bad += !bitwise_equal(t, back) || encode_tensor(back) != encode_tensor(t);
    }

    ClassificationReport report;
    report.model_config = ModelConfig{};
    for (int c = 0; c < 3; ++c) {
        std::vector<ActionLabel> gt(37), pred(37);
        for (std::size_t i = 0; i < gt.size(); ++i) {
            gt[i] = kAllActions[rng.uniform_index(4)];
            pred[i] = rng.bernoulli(0.7) ? gt[i] : kAllActions[rng.uniform_index(4)];
        }
        report.checkpoints.push_back({"epoch_" + std::to_string(c) + ".ckpt", c, rng.uniform01(),
                                      classification_metrics(pred, gt)});
    }
    report.update_means();
    write_json_file(to_json_value(report), dir / "report.json");
    const bool report_ok = classification_report_from_json(read_json_file(dir / "report.json")) == report;

    PckhReport pr;
    for (int i = 0; i < 20; ++i) {
        const Pose gt = random_valid_pose(rng);
        Pose pred = gt;
        for (Joint& j : pred.joints) j.x += static_cast<float>(rng.normal(0, 10));
        pr.add(pckh(pred, gt));
    }
    const bool pckh_ok = pckh_report_from_json(to_json_value(pr)) == pr;

    const auto good = encode_tensor(Tensor::from_list({2, 3}, {1, 2, 3, 4, 5, 6}));
    std::size_t rejected = 0, cases = 0;
    auto expect = [&](std::vector<unsigned char> bytes, auto tag) {
        using E = decltype(tag);
        ++cases;
        try {
            decode_tensor(bytes);
        } catch (const E&) {
            ++rejected;
        } catch (const Error&) {
        }
    };
    for (std::size_t n = 0; n < good.size(); ++n) expect({good.begin(), good.begin() + static_cast<long>(n)}, LengthError(""));
    auto extra = good;
    extra.push_back(7);
    expect(extra, LengthError(""));
    for (std::size_t at : {0u, 1u, 2u, 3u}) {
        auto b = good;
        b[at] ^= 0x20;
        expect(b, FormatError(""));
    }
    auto version = good;
    version[4] = 9;
    expect(version, FormatError(""));
    auto dtype = good;
    dtype[5] = 3;
    expect(dtype, FormatError(""));
    auto rank = good;
    rank[6] = 0;
    expect(rank, FormatError(""));
    auto zero = good;
    zero[7] = 0;
    expect(zero, FormatError(""));

    // A truncated file on disk.
    {
        std::ofstream out(dir / "short.htsr", std::ios::binary);
        out.write(reinterpret_cast<const char*>(good.data()), 20);
    }
    ++cases;
    try {
        read_tensor(dir / "short.htsr");
    } catch (const LengthError&) {
        ++rejected;
    } catch (const Error&) {
    }

    const bool ok = tensor_bad == 0 && report_ok && pckh_ok && rejected == cases;
    return {ok, "200 random tensors, " + std::to_string(tensor_bad) + " round-trip failures; report JSON " +
                    (report_ok ? "identical" : "DIFFERENT") + ", PCKh JSON " + (pckh_ok ? "identical" : "DIFFERENT") +
                    "; " + std::to_string(rejected) + "/" + std::to_string(cases) +
                    " corrupt inputs rejected with the expected error class"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hstream acceptance suite"};
    std::string workdir = (fs::temp_directory_path() / "hstream_acceptance").string();
    std::vector<int> only;
    app.add_option("--workdir", workdir, "Scratch directory for generated data and runs");
    app.add_option("--only", only, "Run only these criteria")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    const fs::path work = workdir;
    fs::create_directories(work);
    EndToEnd e2e;

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"feature geometry", feature_geometry},
        {"gradient correctness", gradient_correctness},
        {"decoder inversion", decoder_inversion},
        {"line-integral oracle", line_integral_oracle},
        {"PCKh oracle equivalence", pckh_oracle},
        {"invariance suite", invariance_suite},
        {"end-to-end synthetic learning", [&] { return end_to_end(work, e2e); }},
        {"ablation ordering", [&] { return ablation_ordering(work); }},
        {"determinism", [&] { return determinism(work, e2e); }},
        {"format round-trips", [&] { return format_round_trips(work); }},
    };

    const std::set<int> selected(only.begin(), only.end());
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << criteria[i].first << "): " << o.detail
                  << std::endl;
    }
    std::cout << (failures == 0 ? "all selected criteria passed" : std::to_string(failures) + " criterion/criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
