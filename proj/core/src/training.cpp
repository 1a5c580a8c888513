// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "hstream/training.hpp"

#include <algorithm>
#include <cstdio>

#include "hstream/errors.hpp"
#include "hstream/json_io.hpp"

namespace hstream {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Salts that separate the independent random streams of one run.
constexpr std::uint64_t kShuffleStream = 0x5348;
constexpr std::uint64_t kAugmentStream = 0x4155;
constexpr std::uint64_t kDropoutStream = 0x4452;

std::size_t argmax(const float* p, std::size_t n) {
    return static_cast<std::size_t>(std::max_element(p, p + n) - p);
}

double accuracy_of(TwoStreamNet<float>& net, const std::vector<PreparedExample>& examples) {
    if (examples.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& ex : examples) {
        const auto probs = predict(net, ex.latent, ex.flow ? &*ex.flow : nullptr);
        if (argmax(probs.data(), probs.size()) == index(ex.label)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(examples.size());
}

}  // namespace

std::string_view joint_source_name(JointSource s) { return s == JointSource::gt ? "gt" : "pred"; }

std::optional<JointSource> joint_source_from_name(std::string_view name) {
    if (name == "gt") return JointSource::gt;
    if (name == "pred") return JointSource::pred;
    return std::nullopt;
}

void TrainConfig::validate() const {
    if (batch_size == 0) throw ConfigError("batch size must be positive");
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0,1)");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (keep_top <= 0) throw ConfigError("keep_top must be positive");
    if (epochs > 0 && epochs < keep_top) throw ConfigError("epochs must be >= keep_top");
    augmentation.validate();
}

void to_json(json& j, const TrainConfig& cfg) {
    j = {
        {"batch_size", cfg.batch_size},
        {"momentum", cfg.momentum},
        {"lr", cfg.lr},
        {"epochs", cfg.epochs},
        {"keep_top", cfg.keep_top},
        {"keep_all", cfg.keep_all},
        {"augment", cfg.augment},
        {"augmentation", cfg.augmentation},
        {"validation_joints", joint_source_name(cfg.validation_joints)},
    };
}

void from_json(const json& j, TrainConfig& cfg) {
    try {
        j.at("batch_size").get_to(cfg.batch_size);
        j.at("momentum").get_to(cfg.momentum);
        j.at("lr").get_to(cfg.lr);
        j.at("epochs").get_to(cfg.epochs);
        j.at("keep_top").get_to(cfg.keep_top);
        j.at("keep_all").get_to(cfg.keep_all);
        j.at("augment").get_to(cfg.augment);
        j.at("augmentation").get_to(cfg.augmentation);
        const auto src = joint_source_from_name(j.at("validation_joints").get<std::string>());
        if (!src) throw FormatError("validation_joints must be gt or pred");
        cfg.validation_joints = *src;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed train config: ") + e.what());
    }
}

std::string checkpoint_dir_name(int epoch) { return "epoch_" + std::to_string(epoch) + ".ckpt"; }

PoseSequence sequence_joints(const Dataset& ds, const SequenceRecord& rec, JointSource source) {
    if (source == JointSource::gt) return rec.joints;
    std::vector<PartMaps> maps;
    for (std::size_t f = 0; f < kSequenceFrames; ++f) maps.push_back(load_maps(ds, rec, f));
    const auto poses = decode_sequence(maps, ds.limbs);
    PoseSequence out;
    std::copy(poses.begin(), poses.end(), out.begin());
    return out;
}

std::optional<PreparedExample> prepare_example(const PoseSequence& poses, const std::array<Tensor, 2>& flows,
                                               ImageSize image, const ModelConfig& cfg) {
    PreparedExample ex;
    const std::array<ImageSize, kSequenceFrames> images = {image, image, image};
    try {
        ex.latent = featurize_sequence(poses, images, cfg.use_stick);
    } catch (const DegenerateHeadError&) {
        return std::nullopt;
    }
    if (cfg.use_flow) ex.flow = prepare_flow_input(flows[0], flows[1], cfg.flow_input_size);
    return ex;
}

std::vector<PreparedExample> prepare_split(const Dataset& ds, Split split, const ModelConfig& cfg, JointSource source,
                                           std::size_t* skipped) {
    std::vector<PreparedExample> out;
    std::size_t n_skipped = 0;
    for (const SequenceRecord* rec : ds.split(split)) {
        std::array<Tensor, 2> flows;
        if (cfg.use_flow) flows = {load_flow(ds, *rec, 0), load_flow(ds, *rec, 1)};
        auto ex = prepare_example(sequence_joints(ds, *rec, source), flows, ds.image, cfg);
        if (!ex) {
            ++n_skipped;
            continue;
        }
        ex->id = rec->id;
        ex->label = rec->action;
        out.push_back(std::move(*ex));
    }
    if (skipped != nullptr) *skipped = n_skipped;
    return out;
}

TrainResult train(const Dataset& ds, ModelConfig model_cfg, const TrainConfig& cfg, std::uint64_t seed,
                  const fs::path& out_dir, std::ostream* log) {
    cfg.validate();
    model_cfg.seed = seed;
    model_cfg.validate();

    const auto train_records = ds.split(Split::train);
    if (train_records.empty()) throw DatasetError("training split is empty");
    if (ds.split(Split::val).empty()) throw DatasetError("validation split is empty");

    TrainResult result;
    fs::create_directories(out_dir);
    json ranking = {{"model_config", model_cfg}, {"train_config", cfg}, {"seed", seed}};
    if (cfg.epochs == 0) {
        ranking["ranking"] = json::array();
        ranking["history"] = json::array();
        write_json_file(ranking, out_dir / kRankingFile);
        return result;
    }

    std::vector<std::array<Tensor, 2>> train_flows;
    train_flows.reserve(train_records.size());
    for (const SequenceRecord* rec : train_records) train_flows.push_back({load_flow(ds, *rec, 0), load_flow(ds, *rec, 1)});
    const auto val = prepare_split(ds, Split::val, model_cfg, cfg.validation_joints, &result.skipped_val);
    if (val.empty()) throw DatasetError("no usable validation sequences");

    TwoStreamNet<float> net = build_model(model_cfg);
    auto params = net.parameters();
    nn::OptimizerState opt = nn::OptimizerState::for_parameters(
        std::vector<const Tensor*>(params.begin(), params.end()), cfg.lr, cfg.momentum);
    const AugmentConfig aug = cfg.augment ? cfg.augmentation : AugmentConfig::none();

    std::vector<std::size_t> order(train_records.size());
    std::vector<RankedCheckpoint> all;
    json history = json::array();
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng shuffle_rng(derive_seed(seed ^ kShuffleStream, static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<std::vector<float>> latents;
            std::vector<Tensor> flows;
            std::vector<int> labels;
            for (std::size_t b = start; b < end; ++b) {
                const std::size_t i = order[b];
                const SequenceRecord& rec = *train_records[i];
                Rng rng(derive_seed(seed ^ kAugmentStream, static_cast<std::uint64_t>(epoch), i));
                const auto a = augment_sequence(rec.joints, train_flows[i], ds.image, aug, rng);
                auto ex = prepare_example(a.poses, a.flows, ds.image, model_cfg);
                if (!ex) {
                    ++result.skipped_train;
                    continue;
                }
                latents.push_back(std::move(ex->latent));
                if (ex->flow) flows.push_back(std::move(*ex->flow));
                labels.push_back(static_cast<int>(index(rec.action)));
            }
            if (labels.empty()) continue;

            TwoStreamInput<float> input{stack_latent(latents), std::nullopt};
            if (model_cfg.use_flow) {
                std::vector<const Tensor*> ptrs;
                for (const auto& f : flows) ptrs.push_back(&f);
                input.flow = stack_flows(ptrs);
            }
            Rng dropout_rng(derive_seed(seed ^ kDropoutStream, static_cast<std::uint64_t>(epoch), start));
            net.zero_grad();
            const Tensor probs = net.forward(input, true, dropout_rng);
            const auto ce = nn::cross_entropy_loss(probs, nn::one_hot(labels, kActionCount));
            net.backward_from_logits(ce.grad_logits);
            nn::sgd_momentum_step(net.parameters(), net.gradients(), opt);
            loss_sum += ce.loss;
            ++batches;
        }

        const double loss = batches > 0 ? loss_sum / static_cast<double>(batches) : 0.0;
        const double acc = accuracy_of(net, val);
        result.train_loss.push_back(loss);
        result.validation_accuracy.push_back(acc);
        const fs::path dir = out_dir / checkpoint_dir_name(epoch);
        save_model(dir, net, &opt, {json(model_cfg), seed, epoch, acc});
        all.push_back({epoch, acc, dir});
        history.push_back({{"epoch", epoch}, {"train_loss", loss}, {"validation_accuracy", acc}});
        if (log != nullptr) {
            char line[128];
            std::snprintf(line, sizeof line, "epoch %3d  loss %.4f  val_acc %.4f\n", epoch, loss, acc);
            *log << line << std::flush;
        }
    }

    std::stable_sort(all.begin(), all.end(), [](const RankedCheckpoint& a, const RankedCheckpoint& b) {
        return a.validation_accuracy > b.validation_accuracy;
    });
    const std::size_t keep = std::min(all.size(), static_cast<std::size_t>(cfg.keep_top));
    result.kept.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep));
    if (!cfg.keep_all) {
        for (std::size_t i = keep; i < all.size(); ++i) fs::remove_all(all[i].dir);
    }

    json ranked = json::array();
    for (const auto& k : result.kept) {
        ranked.push_back({{"epoch", k.epoch},
                          {"validation_accuracy", k.validation_accuracy},
                          {"checkpoint", checkpoint_dir_name(k.epoch)}});
    }
    ranking["ranking"] = ranked;
    ranking["history"] = history;
    ranking["skipped_train"] = result.skipped_train;
    ranking["skipped_val"] = result.skipped_val;
    write_json_file(ranking, out_dir / kRankingFile);
    return result;
}

std::vector<RankedCheckpoint> read_ranking(const fs::path& out_dir) {
    const json j = read_json_file(out_dir / kRankingFile);
    std::vector<RankedCheckpoint> out;
    try {
        for (const auto& e : j.at("ranking")) {
            out.push_back({e.at("epoch").get<int>(), e.at("validation_accuracy").get<double>(),
                           out_dir / e.at("checkpoint").get<std::string>()});
        }
    } catch (const json::exception& e) {
        throw FormatError("malformed " + (out_dir / kRankingFile).string() + ": " + e.what());
    }
    return out;
}

ClassificationReport evaluate_checkpoints(const std::vector<fs::path>& checkpoints, const Dataset& ds, Split split,
                                          const ModelConfig* expected, JointSource source) {
    if (checkpoints.empty()) throw ArgumentError("evaluate_checkpoints needs at least one checkpoint");

    ClassificationReport report;
    std::optional<ModelConfig> cfg0;
    std::vector<PreparedExample> examples;
    for (const fs::path& dir : checkpoints) {
        CheckpointMeta meta;
        TwoStreamNet<float> net = load_model(dir, &meta);
        const ModelConfig& cfg = net.config();
        if (expected != nullptr) {
            ModelConfig a = *expected, b = cfg;
            a.seed = b.seed = 0;
            if (!(a == b)) {
                throw ContractError("checkpoint " + dir.string() + " was built for " + cfg.tag() +
                                    " with a different architecture than the requested " + expected->tag());
            }
        }
        if (!cfg0) {
            cfg0 = cfg;
            examples = prepare_split(ds, split, cfg, source, &report.excluded_sequences);
            if (examples.empty()) throw DatasetError(std::string("no usable sequences in split ") + std::string(split_name(split)));
            report.model_config = cfg;
        } else if (cfg0->use_stick != cfg.use_stick || cfg0->use_flow != cfg.use_flow) {
            throw ContractError("checkpoints in one report must share the same model variant");
        }

        std::vector<ActionLabel> preds, gts;
        for (const auto& ex : examples) {
            const auto probs = predict(net, ex.latent, ex.flow ? &*ex.flow : nullptr);
            preds.push_back(kAllActions[argmax(probs.data(), probs.size())]);
            gts.push_back(ex.label);
        }
        report.checkpoints.push_back({dir.filename().string(), meta.epoch, meta.validation_accuracy,
                                      classification_metrics(preds, gts)});
    }
    report.update_means();
    return report;
}

}  // namespace hstream
