// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace hstream {

enum class ActionLabel : int { forward = 0, backward = 1, passing = 2, shooting = 3 };

inline constexpr std::size_t kActionCount = 4;

inline constexpr std::array<ActionLabel, kActionCount> kAllActions = {
    ActionLabel::forward, ActionLabel::backward, ActionLabel::passing, ActionLabel::shooting};

constexpr std::size_t index(ActionLabel a) { return static_cast<std::size_t>(a); }

constexpr std::string_view action_name(ActionLabel a) {
    constexpr std::array<std::string_view, kActionCount> names = {"forward", "backward", "passing", "shooting"};
    return names[index(a)];
}

constexpr std::optional<ActionLabel> action_from_name(std::string_view name) {
    for (ActionLabel a : kAllActions) {
        if (action_name(a) == name) return a;
    }
    return std::nullopt;
}

}  // namespace hstream
