// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "hstream/checkpoint.hpp"

#include <fstream>

#include "hstream/json_io.hpp"

namespace hstream {

namespace {

nlohmann::json spec_to_json(const nn::LayerSpec& s) {
    nlohmann::json j = {{"kind", nn::to_string(s.kind)}};
    switch (s.kind) {
        case nn::LayerKind::conv2d:
            j["kernel"] = {s.kernel_h, s.kernel_w};
            j["in_channels"] = s.in_channels;
            j["out_channels"] = s.out_channels;
            j["stride"] = s.stride;
            j["padding"] = s.padding;
            break;
        case nn::LayerKind::dense:
            j["in_features"] = s.in_features;
            j["out_features"] = s.out_features;
            break;
        case nn::LayerKind::dropout: j["rate"] = s.dropout_rate; break;
        default: break;
    }
    return j;
}

std::string param_stem(std::size_t layer, std::size_t slot) {
    return "layer" + std::to_string(layer) + (slot == 0 ? ".weight" : ".bias");
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, std::span<const BranchRef> branches,
                     const nn::OptimizerState* optimizer, const CheckpointMeta& meta) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create checkpoint directory " + dir.string() + ": " + ec.message());

    nlohmann::json layers = nlohmann::json::array();
    std::size_t layer_index = 0;
    std::size_t param_index = 0;
    for (const BranchRef& b : branches) {
        for (const auto& layer : b.network->layers()) {
            nlohmann::json entry = {{"index", layer_index}, {"branch", b.name}, {"spec", spec_to_json(layer.spec())}};
            nlohmann::json params = nlohmann::json::array();
            const auto ps = layer.parameters();
            for (std::size_t slot = 0; slot < ps.size(); ++slot) {
                const std::string stem = param_stem(layer_index, slot);
                write_tensor(*ps[slot], dir / (stem + ".htsr"));
                nlohmann::json p = {{"name", stem}, {"file", stem + ".htsr"}, {"shape", ps[slot]->shape()}};
                if (optimizer != nullptr) {
                    if (param_index >= optimizer->velocity.size()) {
                        throw ContractError("optimizer state has fewer velocities than parameters");
                    }
                    write_tensor(optimizer->velocity[param_index], dir / (stem + ".velocity.htsr"));
                    p["velocity_file"] = stem + ".velocity.htsr";
                }
                params.push_back(std::move(p));
                ++param_index;
            }
            entry["parameters"] = std::move(params);
            layers.push_back(std::move(entry));
            ++layer_index;
        }
    }

    nlohmann::json manifest = {
        {"format", "hstream-checkpoint"},
        {"version", 1},
        {"seed", meta.seed},
        {"epoch", meta.epoch},
        {"validation_accuracy", meta.validation_accuracy},
        {"model_config", meta.model_config},
        {"layers", std::move(layers)},
    };
    if (optimizer != nullptr) {
        manifest["optimizer"] = {{"learning_rate", optimizer->learning_rate},
                                 {"momentum", optimizer->momentum},
                                 {"weight_decay", optimizer->weight_decay}};
    }
    write_json_file(manifest, dir / kCheckpointManifest);
}

nlohmann::json read_checkpoint_manifest(const std::filesystem::path& dir) {
    auto manifest = read_json_file(dir / kCheckpointManifest);
    if (manifest.value("format", "") != "hstream-checkpoint") {
        throw FormatError(dir.string() + ": not an hstream checkpoint");
    }
    return manifest;
}

CheckpointMeta read_checkpoint_meta(const std::filesystem::path& dir) {
    const auto m = read_checkpoint_manifest(dir);
    try {
        CheckpointMeta meta;
        meta.model_config = m.at("model_config");
        meta.seed = m.at("seed").get<std::uint64_t>();
        meta.epoch = m.at("epoch").get<int>();
        meta.validation_accuracy = m.at("validation_accuracy").get<double>();
        return meta;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(dir.string() + ": malformed checkpoint manifest: " + e.what());
    }
}

CheckpointMeta load_checkpoint(const std::filesystem::path& dir, std::span<const BranchRef> branches,
                               nn::OptimizerState* optimizer) {
    const auto manifest = read_checkpoint_manifest(dir);
    const auto& layers = manifest.at("layers");

    std::size_t expected_layers = 0;
    for (const BranchRef& b : branches) expected_layers += b.network->layers().size();
    if (layers.size() != expected_layers) {
        throw ContractError(dir.string() + ": checkpoint has " + std::to_string(layers.size()) +
                            " layers, model has " + std::to_string(expected_layers));
    }

    std::size_t layer_index = 0;
    std::size_t param_index = 0;
    for (const BranchRef& b : branches) {
        for (auto& layer : b.network->layers()) {
            const auto& entry = layers.at(layer_index);
            if (entry.at("branch").get<std::string>() != b.name) {
                throw ContractError(dir.string() + ": layer " + std::to_string(layer_index) + " belongs to branch `" +
                                    entry.at("branch").get<std::string>() + "`, model expects `" + b.name + "`");
            }
            if (entry.at("spec") != spec_to_json(layer.spec())) {
                throw ContractError(dir.string() + ": layer " + std::to_string(layer_index) + " is " +
                                    entry.at("spec").dump() + ", model has " + layer.spec().describe());
            }
            auto ps = layer.parameters();
            const auto& params = entry.at("parameters");
            if (params.size() != ps.size()) throw ContractError(dir.string() + ": parameter count mismatch");
            for (std::size_t slot = 0; slot < ps.size(); ++slot) {
                Tensor t = read_tensor(dir / params[slot].at("file").get<std::string>());
                if (t.shape() != ps[slot]->shape()) {
                    throw ContractError(dir.string() + ": " + params[slot].at("name").get<std::string>() +
                                        " has shape " + shape_to_string(t.shape()) + ", model expects " +
                                        shape_to_string(ps[slot]->shape()));
                }
                *ps[slot] = std::move(t);
                if (optimizer != nullptr && params[slot].contains("velocity_file")) {
                    if (optimizer->velocity.size() <= param_index) optimizer->velocity.resize(param_index + 1);
                    optimizer->velocity[param_index] =
                        read_tensor(dir / params[slot].at("velocity_file").get<std::string>());
                }
                ++param_index;
            }
            ++layer_index;
        }
    }
    if (optimizer != nullptr && manifest.contains("optimizer")) {
        const auto& o = manifest.at("optimizer");
        optimizer->learning_rate = o.at("learning_rate").get<double>();
        optimizer->momentum = o.at("momentum").get<double>();
        optimizer->weight_decay = o.at("weight_decay").get<double>();
    }
    return read_checkpoint_meta(dir);
}

}  // namespace hstream
