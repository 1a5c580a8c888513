// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "hstream/json_io.hpp"

#include <fstream>

#include "hstream/errors.hpp"

namespace hstream {

void write_json_file(const nlohmann::json& value, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << value.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": invalid JSON: " + e.what());
    }
}

}  // namespace hstream
