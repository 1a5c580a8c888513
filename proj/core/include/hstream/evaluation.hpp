// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hstream/action.hpp"
#include "hstream/skeleton.hpp"

namespace hstream {

inline constexpr double kPckhThreshold = 0.5;

struct PckhResult {
    std::array<bool, kJointCount> correct{};
    std::array<bool, kJointCount> evaluated{};  // false where the ground truth joint is invalid
};

/// Joint j is correct iff |pred_j - gt_j| < 0.5 * |gt.head_top - gt.upper_neck|.
/// Throws DegenerateHeadError if either gt head joint is invalid or the
/// segment has zero length.
PckhResult pckh(const Pose& pred, const Pose& gt);

struct PckhReport {
    std::array<std::size_t, kJointCount> correct{};
    std::array<std::size_t, kJointCount> evaluated{};
    std::size_t sequences = 0;
    std::size_t excluded_sequences = 0;

    /// Adds one sequence; if any frame has a degenerate gt head the whole
    /// sequence is excluded and counted instead.
    void add_sequence(std::span<const Pose> pred, std::span<const Pose> gt);
    void add(const PckhResult& r);

    [[nodiscard]] double fraction(JointId j) const;
    [[nodiscard]] double overall() const;
    [[nodiscard]] std::size_t total_evaluated() const;

    friend bool operator==(const PckhReport&, const PckhReport&) = default;
};

nlohmann::json to_json_value(const PckhReport& r);
PckhReport pckh_report_from_json(const nlohmann::json& j);

/// Table with one row per body part, left/right (and stick top/end) side by
/// side plus their mean.
std::string format_pckh_table(const PckhReport& r);

struct ClassificationMetrics {
    std::array<double, kActionCount> precision{};
    std::array<bool, kActionCount> precision_defined{};  // false when the class was never predicted
    std::array<double, kActionCount> recall{};
    std::array<bool, kActionCount> recall_defined{};  // false when the class has no examples
    double accuracy = 0.0;
    std::array<std::array<double, kActionCount>, kActionCount> confusion{};  // row = truth, percent
    std::array<std::array<std::size_t, kActionCount>, kActionCount> counts{};
    std::size_t total = 0;

    friend bool operator==(const ClassificationMetrics&, const ClassificationMetrics&) = default;
};

/// Throws ArgumentError on length mismatch or empty input.
ClassificationMetrics classification_metrics(std::span<const ActionLabel> preds, std::span<const ActionLabel> gts);

struct CheckpointResult {
    std::string name;
    int epoch = 0;
    double validation_accuracy = 0.0;
    ClassificationMetrics metrics;

    friend bool operator==(const CheckpointResult&, const CheckpointResult&) = default;
};

struct ClassificationReport {
    nlohmann::json model_config = nlohmann::json::object();
    std::vector<CheckpointResult> checkpoints;
    std::size_t excluded_sequences = 0;

    // Arithmetic means over checkpoints.
    std::array<double, kActionCount> mean_precision{};
    std::array<double, kActionCount> mean_recall{};
    double mean_accuracy = 0.0;
    std::array<std::array<double, kActionCount>, kActionCount> mean_confusion{};

    /// Recomputes the means from `checkpoints`.
    void update_means();

    friend bool operator==(const ClassificationReport&, const ClassificationReport&) = default;
};

/// Single-run report: one checkpoint entry and means equal to it.
ClassificationReport classification_report(std::span<const ActionLabel> preds, std::span<const ActionLabel> gts);

nlohmann::json to_json_value(const ClassificationReport& r);
ClassificationReport classification_report_from_json(const nlohmann::json& j);

/// Precision/recall, per-checkpoint accuracy and mean confusion tables.
std::string format_classification_tables(const ClassificationReport& r);

}  // namespace hstream
