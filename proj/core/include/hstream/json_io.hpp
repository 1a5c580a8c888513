// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

namespace hstream {

/// Pretty-printed (2-space) JSON with a trailing newline. Output is a pure
/// function of the value, so equal values give byte-identical files.
void write_json_file(const nlohmann::json& value, const std::filesystem::path& path);

/// Throws IoError if unreadable, FormatError if not valid JSON.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace hstream
