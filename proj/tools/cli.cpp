// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>

#include <CLI11/CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hstream/dataset.hpp"
#include "hstream/errors.hpp"
#include "hstream/evaluation.hpp"
#include "hstream/json_io.hpp"
#include "hstream/model.hpp"
#include "hstream/synthgen.hpp"
#include "hstream/training.hpp"

namespace hstream::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kModelGradTolerance = 1e-2;
constexpr double kDenseGradTolerance = 1e-4;
constexpr double kMaxNonsmoothFraction = 0.01;

class UsageError : public Error {
public:
    using Error::Error;
};

std::uint64_t default_seed() {
    const char* env = std::getenv(kSeedEnv);
    if (env == nullptr || *env == '\0') return 0;
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument(env);
        return v;
    } catch (const std::exception&) {
        throw UsageError(std::string(kSeedEnv) + " must be a non-negative integer, got '" + env + "'");
    }
}

JointSource parse_source(const std::string& s) {
    const auto v = joint_source_from_name(s);
    if (!v) throw UsageError("joint source must be gt or pred, got '" + s + "'");
    return *v;
}

Split parse_split(const std::string& s) {
    const auto v = split_from_name(s);
    if (!v) throw UsageError("split must be train, val or test, got '" + s + "'");
    return *v;
}

fs::path parent_or_cwd(const fs::path& file) {
    const fs::path p = file.parent_path();
    return p.empty() ? fs::path(".") : p;
}

// Echoes the resolved config and stores it, with the replayable argument
// vector, as run_config.json in `dir`.
void record_run(const std::string& command, const json& config, const std::vector<std::string>& argv,
                const fs::path& dir, std::ostream& out) {
    json run = {{"command", command}, {"argv", argv}, {"config", config}};
    out << run.dump(2) << '\n';
    fs::create_directories(dir);
    write_json_file(run, dir / kRunConfigFile);
}

struct Context {
    std::vector<std::string> argv;  // canonical, with the seed made explicit
    std::ostream& out;
    std::ostream& err;
};

std::vector<std::string> with_seed(std::vector<std::string> argv, bool given, std::uint64_t seed) {
    if (!given) {
        argv.push_back("--seed");
        argv.push_back(std::to_string(seed));
    }
    return argv;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-stream hockey action recognition pipeline", "hstream"};
    app.require_subcommand(1);
    std::uint64_t seed = 0;

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic 4-class dataset");
    SynthConfig scfg;
    std::string synth_out;
    std::vector<std::size_t> class_counts;
    synth->add_option("--out", synth_out, "Output dataset directory")->required();
    synth->add_option("--per-class", scfg.sequences_per_class, "Sequences per class")->capture_default_str();
    synth->add_option("--class-counts", class_counts, "Per-class counts (forward backward passing shooting)")
        ->expected(4);
    auto* synth_seed = synth->add_option("--seed", seed, "Random seed (default: $HSTREAM_SEED or 0)");
    synth->add_flag("--with-maps", scfg.with_maps, "Also write confidence maps and PAFs");
    synth->add_option("--distractor", scfg.distractor_amplitude, "Distractor peak amplitude in [0,1)")
        ->capture_default_str();
    synth->add_flag("--random-facing", scfg.random_facing, "Let skaters face either direction");
    synth->add_option("--joint-noise", scfg.joint_noise_sigma, "Annotation noise sigma (px)")->capture_default_str();
    synth->add_option("--flow-noise", scfg.flow_noise_sigma, "Flow noise sigma (map cells)")->capture_default_str();
    synth->add_option("--forward-speed", scfg.forward_speed, "Forward skating displacement per frame (px): MIN MAX")
        ->capture_default_str();
    synth->add_option("--backward-speed", scfg.backward_speed, "Backward skating displacement per frame (px): MIN MAX")
        ->capture_default_str();
    synth->add_option("--drift", scfg.drift, "Max displacement per frame while passing or shooting (px)")
        ->capture_default_str();

    // decode
    auto* decode = app.add_subcommand("decode", "Decode poses from part maps");
    std::string dataset_path, decode_out, limbs_path;
    decode->add_option("--dataset", dataset_path, "Dataset directory or manifest")->required();
    decode->add_option("--out", decode_out, "Output poses JSON")->required();
    decode->add_option("--limbs", limbs_path, "Limb definition file");

    // featurize
    auto* featurize = app.add_subcommand("featurize", "Compute latent joint feature vectors");
    std::string feat_out, joints_name = "gt";
    bool no_stick = false, no_flow = false;
    featurize->add_option("--dataset", dataset_path, "Dataset directory or manifest")->required();
    featurize->add_option("--joints", joints_name, "Joint source: gt or pred")->capture_default_str();
    featurize->add_flag("--no-stick", no_stick, "Drop the stick joints");
    featurize->add_option("--out", feat_out, "Output directory")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "Train the action classifier");
    TrainConfig tcfg;
    ModelConfig mcfg;
    std::string train_out, val_joints = "gt";
    bool no_augment = false;
    train_cmd->add_option("--dataset", dataset_path, "Dataset directory or manifest")->required();
    train_cmd->add_flag("--no-stick", no_stick, "Drop the stick joints (-ST)");
    train_cmd->add_flag("--no-flow", no_flow, "Drop the optical flow branch (-OF)");
    auto* train_seed = train_cmd->add_option("--seed", seed, "Random seed (default: $HSTREAM_SEED or 0)");
    train_cmd->add_option("--epochs", tcfg.epochs, "Training epochs")->capture_default_str();
    train_cmd->add_option("--out", train_out, "Checkpoint directory")->required();
    train_cmd->add_option("--batch-size", tcfg.batch_size, "Batch size")->capture_default_str();
    train_cmd->add_option("--lr", tcfg.lr, "Learning rate")->capture_default_str();
    train_cmd->add_option("--momentum", tcfg.momentum, "SGD momentum")->capture_default_str();
    train_cmd->add_option("--dropout", mcfg.dropout_rate, "Dropout rate")->capture_default_str();
    train_cmd->add_option("--keep-top", tcfg.keep_top, "Checkpoints kept by validation accuracy")->capture_default_str();
    train_cmd->add_flag("--keep-all", tcfg.keep_all, "Keep every epoch checkpoint");
    train_cmd->add_flag("--no-augment", no_augment, "Disable augmentation");
    train_cmd->add_option("--flip-prob", tcfg.augmentation.flip_prob, "Flip probability")->capture_default_str();
    train_cmd->add_option("--jitter", tcfg.augmentation.joint_jitter_sigma, "Joint jitter sigma (px)")
        ->capture_default_str();
    train_cmd->add_option("--val-joints", val_joints, "Validation joint source: gt or pred")->capture_default_str();

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate the top checkpoints of a training run");
    std::string ckpt_dir, report_path, split_name_arg = "test";
    int top = 3;
    eval->add_option("--dataset", dataset_path, "Dataset directory or manifest")->required();
    eval->add_option("--ckpts", ckpt_dir, "Checkpoint directory written by train")->required();
    eval->add_option("--top", top, "Number of top checkpoints")->capture_default_str();
    eval->add_option("--report", report_path, "Output report JSON")->required();
    eval->add_option("--split", split_name_arg, "Split to evaluate")->capture_default_str();
    eval->add_option("--joints", joints_name, "Joint source: gt or pred")->capture_default_str();

    // pckh
    auto* pckh_cmd = app.add_subcommand("pckh", "Score decoded poses with PCKh@0.5");
    std::string pred_path;
    pckh_cmd->add_option("--pred", pred_path, "Poses JSON written by decode")->required();
    pckh_cmd->add_option("--dataset", dataset_path, "Dataset directory or manifest")->required();
    pckh_cmd->add_option("--report", report_path, "Output report JSON")->required();

    // gradcheck
    auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
    double epsilon = 1e-3;
    std::string grad_out;
    auto* grad_seed = grad->add_option("--seed", seed, "Random seed (default: $HSTREAM_SEED or 0)");
    grad->add_option("--epsilon", epsilon, "Finite-difference step")->capture_default_str();
    grad->add_option("--out", grad_out, "Directory for run_config.json");

    // rerun
    auto* rerun = app.add_subcommand("rerun", "Replay a command from its run_config.json");
    std::string rerun_path;
    rerun->add_option("config", rerun_path, "Path to run_config.json")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*synth) {
            if (!synth_seed->count()) seed = default_seed();
            scfg.seed = seed;
            if (!class_counts.empty()) scfg.class_counts = {class_counts[0], class_counts[1], class_counts[2], class_counts[3]};
            scfg.validate();
            const auto argv = with_seed(args, synth_seed->count() > 0, seed);
            record_run("synth", scfg, argv, synth_out, out);
            const Dataset ds = gen_dataset(scfg, synth_out);
            out << "wrote " << ds.sequences.size() << " sequences to " << synth_out << " (train "
                << ds.split(Split::train).size() << ", val " << ds.split(Split::val).size() << ", test "
                << ds.split(Split::test).size() << ")\n";
        } else if (*decode) {
            Dataset ds = load_dataset(dataset_path);
            if (!limbs_path.empty()) ds.limbs = LimbTree::load(limbs_path);
            json cfg = {{"dataset", dataset_path}, {"out", decode_out}, {"limbs", ds.limbs.to_text()}};
            record_run("decode", cfg, args, parent_or_cwd(decode_out), out);
            json poses = json::array();
            for (const auto& rec : ds.sequences) {
                poses.push_back({{"id", rec.id}, {"joints", sequence_joints_to_json(sequence_joints(ds, rec, JointSource::pred))}});
            }
            write_json_file({{"poses", poses}}, decode_out);
            out << "decoded " << poses.size() << " sequences to " << decode_out << '\n';
        } else if (*featurize) {
            const Dataset ds = load_dataset(dataset_path);
            const JointSource src = parse_source(joints_name);
            json cfg = {{"dataset", dataset_path}, {"joints", joints_name}, {"use_stick", !no_stick}, {"out", feat_out}};
            record_run("featurize", cfg, args, feat_out, out);
            ModelConfig fcfg;
            fcfg.use_flow = false;
            fcfg.use_stick = !no_stick;
            json index = {{"length", fcfg.latent_length()}, {"sequences", json::array()}, {"excluded", json::array()}};
            std::vector<std::vector<float>> rows;
            for (const auto& rec : ds.sequences) {
                auto ex = prepare_example(sequence_joints(ds, rec, src), {}, ds.image, fcfg);
                if (!ex) {
                    index["excluded"].push_back(rec.id);
                    continue;
                }
                index["sequences"].push_back({{"id", rec.id}, {"action", action_name(rec.action)}, {"split", split_name(rec.split)}});
                rows.push_back(std::move(ex->latent));
            }
            if (rows.empty()) throw DatasetError("no sequence could be featurized");
            write_tensor(stack_latent(rows), fs::path(feat_out) / "features.htsr");
            write_json_file(index, fs::path(feat_out) / "features.json");
            out << "featurized " << rows.size() << " sequences (" << index["excluded"].size() << " excluded) into "
                << feat_out << '\n';
        } else if (*train_cmd) {
            if (!train_seed->count()) seed = default_seed();
            mcfg.use_stick = !no_stick;
            mcfg.use_flow = !no_flow;
            mcfg.seed = seed;
            tcfg.augment = !no_augment;
            tcfg.validation_joints = parse_source(val_joints);
            tcfg.validate();
            mcfg.validate();
            const Dataset ds = load_dataset(dataset_path);
            json cfg = {{"dataset", dataset_path}, {"out", train_out}, {"seed", seed}, {"model", mcfg}, {"train", tcfg}};
            record_run("train", cfg, with_seed(args, train_seed->count() > 0, seed), train_out, out);
            const TrainResult r = train(ds, mcfg, tcfg, seed, train_out, &out);
            for (std::size_t i = 0; i < r.kept.size(); ++i) {
                out << "rank " << i + 1 << ": epoch " << r.kept[i].epoch << " val_acc " << r.kept[i].validation_accuracy
                    << '\n';
            }
            if (r.skipped_train + r.skipped_val > 0) {
                out << "skipped degenerate-head sequences: train " << r.skipped_train << ", val " << r.skipped_val << '\n';
            }
        } else if (*eval) {
            if (top < 1) throw UsageError("--top must be >= 1");
            const Split split = parse_split(split_name_arg);
            const JointSource src = parse_source(joints_name);
            const Dataset ds = load_dataset(dataset_path);
            json cfg = {{"dataset", dataset_path}, {"ckpts", ckpt_dir}, {"top", top}, {"report", report_path},
                        {"split", split_name_arg}, {"joints", joints_name}};
            record_run("eval", cfg, args, parent_or_cwd(report_path), out);
            auto ranked = read_ranking(ckpt_dir);
            if (ranked.empty()) throw DatasetError("no ranked checkpoints in " + ckpt_dir);
            if (ranked.size() > static_cast<std::size_t>(top)) ranked.resize(static_cast<std::size_t>(top));
            std::vector<fs::path> dirs;
            for (const auto& r : ranked) dirs.push_back(r.dir);
            const ClassificationReport report = evaluate_checkpoints(dirs, ds, split, nullptr, src);
            write_json_file(to_json_value(report), report_path);
            const std::string text = format_classification_tables(report);
            std::ofstream(fs::path(report_path).replace_extension(".txt")) << text;
            out << text;
        } else if (*pckh_cmd) {
            const Dataset ds = load_dataset(dataset_path);
            json cfg = {{"pred", pred_path}, {"dataset", dataset_path}, {"report", report_path}};
            record_run("pckh", cfg, args, parent_or_cwd(report_path), out);
            const json pred = read_json_file(pred_path);
            PckhReport report;
            try {
                for (const auto& e : pred.at("poses")) {
                    const auto& rec = ds.find(e.at("id").get<std::string>());
                    const PoseSequence p = sequence_joints_from_json(e.at("joints"));
                    report.add_sequence(p, rec.joints);
                }
            } catch (const json::exception& e) {
                throw FormatError(std::string("malformed poses file: ") + e.what());
            }
            write_json_file(to_json_value(report), report_path);
            const std::string text = format_pckh_table(report);
            std::ofstream(fs::path(report_path).replace_extension(".txt")) << text;
            out << text;
        } else if (*grad) {
            if (!grad_seed->count()) seed = default_seed();
            json cfg = {{"seed", seed}, {"epsilon", epsilon}, {"model", reduced_gradcheck_config(seed)}};
            const auto argv = with_seed(args, grad_seed->count() > 0, seed);
            if (grad_out.empty()) {
                out << json{{"command", "gradcheck"}, {"argv", argv}, {"config", cfg}}.dump(2) << '\n';
            } else {
                record_run("gradcheck", cfg, argv, grad_out, out);
            }
            const GradcheckSummary g = run_gradient_checks(seed, epsilon);
            const auto total = static_cast<double>(g.model.checked + g.model.skipped_nonsmooth);
            const bool ok = g.model.max_relative_error < kModelGradTolerance &&
                            g.dense.max_relative_error < kDenseGradTolerance &&
                            static_cast<double>(g.model.skipped_nonsmooth) <= kMaxNonsmoothFraction * total;
            out << "two-stream (reduced): max rel err " << g.model.max_relative_error << " over " << g.model.checked
                << " parameters (" << g.model.skipped_nonsmooth << " probes crossed a relu/max-pool switch)\n";
            out << "dense layer:          max rel err " << g.dense.max_relative_error << " over " << g.dense.checked
                << " parameters\n";
            out << (ok ? "gradient check passed\n" : "gradient check FAILED\n");
            return ok ? kExitOk : kExitData;
        } else if (*rerun) {
            const json run = read_json_file(rerun_path);
            std::vector<std::string> argv;
            try {
                argv = run.at("argv").get<std::vector<std::string>>();
            } catch (const json::exception& e) {
                throw FormatError("malformed run config " + rerun_path + ": " + e.what());
            }
            if (!argv.empty() && argv.front() == "rerun") throw UsageError("a run config cannot replay rerun");
            return dispatch(argv, out, err);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

}  // namespace hstream::cli
