// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "hstream/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "hstream/errors.hpp"

namespace hstream {

using nlohmann::json;

namespace {

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%6.2f%%", 100.0 * v);
    return buf;
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

template <typename T>
T get_field(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("report field '") + key + "': " + e.what());
    }
}

json metrics_to_json(const ClassificationMetrics& m) {
    json per_class = json::object();
    for (ActionLabel a : kAllActions) {
        const std::size_t c = index(a);
        per_class[std::string(action_name(a))] = {
            {"precision", m.precision[c]},
            {"precision_defined", m.precision_defined[c]},
            {"recall", m.recall[c]},
            {"recall_defined", m.recall_defined[c]},
        };
    }
    return {
        {"accuracy", m.accuracy},
        {"total", m.total},
        {"per_class", per_class},
        {"confusion_percent", m.confusion},
        {"confusion_counts", m.counts},
    };
}

ClassificationMetrics metrics_from_json(const json& j) {
    ClassificationMetrics m;
    m.accuracy = get_field<double>(j, "accuracy");
    m.total = get_field<std::size_t>(j, "total");
    m.confusion = get_field<decltype(m.confusion)>(j, "confusion_percent");
    m.counts = get_field<decltype(m.counts)>(j, "confusion_counts");
    const json& pc = j.at("per_class");
    for (ActionLabel a : kAllActions) {
        const std::size_t c = index(a);
        const json& e = pc.at(std::string(action_name(a)));
        m.precision[c] = get_field<double>(e, "precision");
        m.precision_defined[c] = get_field<bool>(e, "precision_defined");
        m.recall[c] = get_field<double>(e, "recall");
        m.recall_defined[c] = get_field<bool>(e, "recall_defined");
    }
    return m;
}

struct PartRow {
    const char* name;
    JointId first;
    std::optional<JointId> second;
};

constexpr std::array<PartRow, 11> kPartRows = {{
    {"Head", JointId::head_top, std::nullopt},
    {"Upper Neck", JointId::upper_neck, std::nullopt},
    {"Thorax", JointId::thorax, std::nullopt},
    {"Shoulder", JointId::l_shoulder, JointId::r_shoulder},
    {"Elbow", JointId::l_elbow, JointId::r_elbow},
    {"Wrist", JointId::l_wrist, JointId::r_wrist},
    {"Pelvis", JointId::pelvis, std::nullopt},
    {"Hip", JointId::l_hip, JointId::r_hip},
    {"Knee", JointId::l_knee, JointId::r_knee},
    {"Ankle", JointId::l_ankle, JointId::r_ankle},
    {"Stick", JointId::stick_top, JointId::stick_end},
}};

}  // namespace

PckhResult pckh(const Pose& pred, const Pose& gt) {
    const Joint& ht = gt[JointId::head_top];
    const Joint& un = gt[JointId::upper_neck];
    if (!ht.valid || !un.valid) throw DegenerateHeadError("ground truth head joints are not annotated");
    const double head = head_segment_length(gt);
    if (!(head > 0.0)) throw DegenerateHeadError("ground truth head segment has zero length");
    const double threshold = kPckhThreshold * head;

    PckhResult r;
    for (std::size_t j = 0; j < kJointCount; ++j) {
        const Joint& g = gt.joints[j];
        if (!g.valid) continue;
        r.evaluated[j] = true;
        const Joint& p = pred.joints[j];
        const double d = std::hypot(static_cast<double>(p.x) - g.x, static_cast<double>(p.y) - g.y);
        r.correct[j] = p.valid && d < threshold;
    }
    return r;
}

void PckhReport::add(const PckhResult& r) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
        if (!r.evaluated[j]) continue;
        ++evaluated[j];
        if (r.correct[j]) ++correct[j];
    }
}

void PckhReport::add_sequence(std::span<const Pose> pred, std::span<const Pose> gt) {
    if (pred.size() != gt.size()) {
        throw ArgumentError("pckh: " + std::to_string(pred.size()) + " predicted frames vs " +
                            std::to_string(gt.size()) + " ground truth frames");
    }
    std::vector<PckhResult> frames;
    try {
        for (std::size_t f = 0; f < pred.size(); ++f) frames.push_back(pckh(pred[f], gt[f]));
    } catch (const DegenerateHeadError&) {
        ++excluded_sequences;
        return;
    }
    for (const auto& r : frames) add(r);
    ++sequences;
}

double PckhReport::fraction(JointId j) const {
    const std::size_t n = evaluated[index(j)];
    return n == 0 ? 0.0 : static_cast<double>(correct[index(j)]) / static_cast<double>(n);
}

std::size_t PckhReport::total_evaluated() const {
    std::size_t n = 0;
    for (std::size_t v : evaluated) n += v;
    return n;
}

double PckhReport::overall() const {
    std::size_t c = 0;
    for (std::size_t v : correct) c += v;
    const std::size_t n = total_evaluated();
    return n == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(n);
}

json to_json_value(const PckhReport& r) {
    json joints = json::object();
    for (std::size_t j = 0; j < kJointCount; ++j) {
        const JointId id = joint_at(j);
        joints[std::string(joint_name(id))] = {
            {"correct", r.correct[j]}, {"evaluated", r.evaluated[j]}, {"fraction", r.fraction(id)}};
    }
    return {
        {"threshold", kPckhThreshold},
        {"sequences", r.sequences},
        {"excluded_sequences", r.excluded_sequences},
        {"overall", r.overall()},
        {"joints", joints},
    };
}

PckhReport pckh_report_from_json(const json& j) {
    PckhReport r;
    r.sequences = get_field<std::size_t>(j, "sequences");
    r.excluded_sequences = get_field<std::size_t>(j, "excluded_sequences");
    try {
        const json& joints = j.at("joints");
        for (std::size_t k = 0; k < kJointCount; ++k) {
            const json& e = joints.at(std::string(joint_name(joint_at(k))));
            r.correct[k] = e.at("correct").get<std::size_t>();
            r.evaluated[k] = e.at("evaluated").get<std::size_t>();
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed PCKh report: ") + e.what());
    }
    return r;
}

std::string format_pckh_table(const PckhReport& r) {
    std::ostringstream os;
    os << pad("Parts", 12) << "  PCKh@0.5 (left/right, top/end)   mean\n";
    for (const PartRow& row : kPartRows) {
        os << pad(row.name, 12) << "  ";
        if (row.second) {
            const double a = r.fraction(row.first), b = r.fraction(*row.second);
            os << pad(percent(a) + " / " + percent(b), 33) << percent(0.5 * (a + b));
        } else {
            os << pad(percent(r.fraction(row.first)), 33) << percent(r.fraction(row.first));
        }
        os << '\n';
    }
    os << pad("Overall", 12) << "  " << pad(percent(r.overall()), 33) << percent(r.overall()) << '\n';
    os << "sequences: " << r.sequences << "  excluded (degenerate head): " << r.excluded_sequences << '\n';
    return os.str();
}

ClassificationMetrics classification_metrics(std::span<const ActionLabel> preds, std::span<const ActionLabel> gts) {
    if (preds.size() != gts.size()) {
        throw ArgumentError("classification report: " + std::to_string(preds.size()) + " predictions vs " +
                            std::to_string(gts.size()) + " labels");
    }
    if (gts.empty()) throw ArgumentError("classification report needs at least one example");

    ClassificationMetrics m;
    m.total = gts.size();
    for (std::size_t i = 0; i < gts.size(); ++i) ++m.counts[index(gts[i])][index(preds[i])];

    std::size_t correct = 0;
    for (std::size_t c = 0; c < kActionCount; ++c) {
        correct += m.counts[c][c];
        std::size_t row = 0, col = 0;
        for (std::size_t k = 0; k < kActionCount; ++k) {
            row += m.counts[c][k];
            col += m.counts[k][c];
        }
        m.precision_defined[c] = col > 0;
        m.precision[c] = col > 0 ? static_cast<double>(m.counts[c][c]) / static_cast<double>(col) : 0.0;
        m.recall_defined[c] = row > 0;
        m.recall[c] = row > 0 ? static_cast<double>(m.counts[c][c]) / static_cast<double>(row) : 0.0;
        for (std::size_t k = 0; k < kActionCount; ++k) {
            m.confusion[c][k] = row > 0 ? 100.0 * static_cast<double>(m.counts[c][k]) / static_cast<double>(row) : 0.0;
        }
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
    return m;
}

void ClassificationReport::update_means() {
    mean_precision = {};
    mean_recall = {};
    mean_accuracy = 0.0;
    mean_confusion = {};
    if (checkpoints.empty()) return;
    for (const auto& c : checkpoints) {
        const auto& m = c.metrics;
        mean_accuracy += m.accuracy;
        for (std::size_t a = 0; a < kActionCount; ++a) {
            mean_precision[a] += m.precision[a];
            mean_recall[a] += m.recall[a];
            for (std::size_t b = 0; b < kActionCount; ++b) mean_confusion[a][b] += m.confusion[a][b];
        }
    }
    const double n = static_cast<double>(checkpoints.size());
    mean_accuracy /= n;
    for (std::size_t a = 0; a < kActionCount; ++a) {
        mean_precision[a] /= n;
        mean_recall[a] /= n;
        for (std::size_t b = 0; b < kActionCount; ++b) mean_confusion[a][b] /= n;
    }
}

ClassificationReport classification_report(std::span<const ActionLabel> preds, std::span<const ActionLabel> gts) {
    ClassificationReport r;
    r.checkpoints.push_back({"run", 0, 0.0, classification_metrics(preds, gts)});
    r.update_means();
    return r;
}

json to_json_value(const ClassificationReport& r) {
    json cks = json::array();
    for (const auto& c : r.checkpoints) {
        cks.push_back({{"name", c.name},
                       {"epoch", c.epoch},
                       {"validation_accuracy", c.validation_accuracy},
                       {"metrics", metrics_to_json(c.metrics)}});
    }
    json mean_pc = json::object();
    for (ActionLabel a : kAllActions) {
        mean_pc[std::string(action_name(a))] = {{"precision", r.mean_precision[index(a)]},
                                                {"recall", r.mean_recall[index(a)]}};
    }
    return {
        {"model_config", r.model_config},
        {"excluded_sequences", r.excluded_sequences},
        {"checkpoints", cks},
        {"mean", {{"accuracy", r.mean_accuracy}, {"per_class", mean_pc}, {"confusion_percent", r.mean_confusion}}},
    };
}

ClassificationReport classification_report_from_json(const json& j) {
    ClassificationReport r;
    try {
        r.model_config = j.at("model_config");
        r.excluded_sequences = j.at("excluded_sequences").get<std::size_t>();
        for (const json& c : j.at("checkpoints")) {
            r.checkpoints.push_back({c.at("name").get<std::string>(), c.at("epoch").get<int>(),
                                     c.at("validation_accuracy").get<double>(), metrics_from_json(c.at("metrics"))});
        }
        const json& mean = j.at("mean");
        r.mean_accuracy = mean.at("accuracy").get<double>();
        r.mean_confusion = mean.at("confusion_percent").get<decltype(r.mean_confusion)>();
        for (ActionLabel a : kAllActions) {
            const json& e = mean.at("per_class").at(std::string(action_name(a)));
            r.mean_precision[index(a)] = e.at("precision").get<double>();
            r.mean_recall[index(a)] = e.at("recall").get<double>();
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed classification report: ") + e.what());
    }
    return r;
}

std::string format_classification_tables(const ClassificationReport& r) {
    constexpr std::array<const char*, kActionCount> abbrev = {"Fw.", "Bw.", "Ps.", "St."};
    std::ostringstream os;
    std::string tag = "model";
    if (r.model_config.contains("use_stick") && r.model_config.contains("use_flow")) {
        tag = std::string(r.model_config["use_stick"].get<bool>() ? "+ST" : "-ST") + ", " +
              (r.model_config["use_flow"].get<bool>() ? "+OF" : "-OF");
    }

    auto class_row = [&](const char* title, const std::array<double, kActionCount>& v) {
        os << pad(title, 10);
        for (std::size_t c = 0; c < kActionCount; ++c) os << "  " << abbrev[c] << ' ' << percent(v[c]);
        os << '\n';
    };
    os << "[" << tag << "] mean over " << r.checkpoints.size() << " checkpoint(s)\n";
    class_row("Precision", r.mean_precision);
    class_row("Recall", r.mean_recall);

    os << "\nAccuracy  ";
    for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
        os << "  #" << i + 1 << " (epoch " << r.checkpoints[i].epoch << ") " << percent(r.checkpoints[i].metrics.accuracy);
    }
    os << "  Avg. " << percent(r.mean_accuracy) << '\n';

    os << "\nConfusion (row = truth, %)\n" << pad("", 6);
    for (const char* a : abbrev) os << pad(a, 9);
    os << '\n';
    for (std::size_t t = 0; t < kActionCount; ++t) {
        os << pad(abbrev[t], 6);
        for (std::size_t p = 0; p < kActionCount; ++p) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%6.2f", r.mean_confusion[t][p]);
            os << pad(buf, 9);
        }
        os << '\n';
    }
    if (r.excluded_sequences > 0) os << "excluded (degenerate head): " << r.excluded_sequences << '\n';
    return os.str();
}

}  // namespace hstream
