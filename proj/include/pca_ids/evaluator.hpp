#pragma once

// Confusion matrix (attack = positive), per-class rates, per-category detection
// counts, threshold sweeps, and the text/machine report renderings.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pca_ids/detector.hpp"
#include "pca_ids/kdd.hpp"
#include "pca_ids/model.hpp"
#include "pca_ids/trainer.hpp"

namespace pca_ids {

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fn = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fn + fp + tn; }

    void add(bool actual_attack, bool predicted_attack) {
        if (actual_attack) (predicted_attack ? tp : fn)++;
        else (predicted_attack ? fp : tn)++;
    }

    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        tp += o.tp;
        fn += o.fn;
        fp += o.fp;
        tn += o.tn;
        return *this;
    }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// A rate; nullopt when its denominator is zero.
using Rate = std::optional<double>;

inline Rate ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

struct ClassMetrics {
    Rate recall;  // identical to TPR
    Rate tpr;
    Rate fpr;
    Rate precision;
};

struct MetricsReport {
    ClassMetrics anomaly;
    ClassMetrics normal;  // same formulas with the positive class swapped
    double overall_success = 0.0;
    double error_rate = 0.0;
};

inline ClassMetrics class_metrics(std::uint64_t tp, std::uint64_t fn, std::uint64_t fp, std::uint64_t tn) {
    return {ratio(tp, tp + fn), ratio(tp, tp + fn), ratio(fp, fp + tn), ratio(tp, tp + fp)};
}

inline MetricsReport metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw EmptyMatrix();
    MetricsReport m;
    m.anomaly = class_metrics(cm.tp, cm.fn, cm.fp, cm.tn);
    m.normal = class_metrics(cm.tn, cm.fp, cm.fn, cm.tp);
    m.overall_success = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    m.error_rate = 1.0 - m.overall_success;
    return m;
}

inline ConfusionMatrix confusion(const std::vector<bool>& predicted_attack, const std::vector<Label>& labels) {
    if (predicted_attack.size() != labels.size()) throw LengthMismatch(predicted_attack.size(), labels.size());
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) cm.add(labels[i].is_attack, predicted_attack[i]);
    return cm;
}

inline ConfusionMatrix confusion(const std::vector<Verdict>& verdicts, const std::vector<Label>& labels) {
    std::vector<bool> pred(verdicts.size());
    for (std::size_t i = 0; i < verdicts.size(); ++i) pred[i] = verdicts[i].is_attack;
    return confusion(pred, labels);
}

struct CategoryRow {
    AttackCategory category;
    std::uint64_t exist = 0;
    std::uint64_t detected = 0;

    Rate rate() const { return ratio(detected, exist); }
};

/// Rows for DOS, PROBE, R2L, U2R, then UNKNOWN.
inline std::vector<CategoryRow> per_category(const std::vector<bool>& predicted_attack,
                                             const std::vector<Label>& labels) {
    if (predicted_attack.size() != labels.size()) throw LengthMismatch(predicted_attack.size(), labels.size());
    std::vector<CategoryRow> rows;
    for (auto c : kTableCategories) rows.push_back({c});
    rows.push_back({AttackCategory::Unknown});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i].is_attack) continue;
        for (auto& row : rows) {
            if (row.category != labels[i].category) continue;
            ++row.exist;
            if (predicted_attack[i]) ++row.detected;
        }
    }
    return rows;
}

inline std::vector<CategoryRow> per_category(const std::vector<Verdict>& verdicts,
                                             const std::vector<Label>& labels) {
    std::vector<bool> pred(verdicts.size());
    for (std::size_t i = 0; i < verdicts.size(); ++i) pred[i] = verdicts[i].is_attack;
    return per_category(pred, labels);
}

// ---------------------------------------------------------------------------
// Scoring once, thresholding many times

struct ScoredDataset {
    std::vector<Scores> scores;
    std::vector<Label> labels;
    std::size_t unknown_token_records = 0;
};

inline ScoredDataset score_dataset(const PcaModel& model, const Dataset& data) {
    ScoredDataset sd;
    sd.scores = score_records(model, data.records);
    sd.labels.reserve(data.size());
    for (const auto& rec : data.records) sd.labels.push_back(*rec.label);
    for (const auto& s : sd.scores) sd.unknown_token_records += s.unknown_token ? 1 : 0;
    return sd;
}

inline std::vector<bool> predictions(const ScoredDataset& sd, double t_major, std::optional<double> t_minor) {
    std::vector<bool> pred(sd.scores.size());
    for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = decide(sd.scores[i], t_major, t_minor).is_attack;
    return pred;
}

struct EvaluationReport {
    double t_major = 0.0;
    std::optional<double> t_minor;
    ConfusionMatrix cm;
    MetricsReport metrics;
    std::vector<CategoryRow> categories;
};

inline EvaluationReport evaluate_scored(const ScoredDataset& sd, double t_major, std::optional<double> t_minor) {
    auto pred = predictions(sd, t_major, t_minor);
    EvaluationReport rep;
    rep.t_major = t_major;
    rep.t_minor = t_minor;
    rep.cm = confusion(pred, sd.labels);
    rep.metrics = metrics(rep.cm);
    rep.categories = per_category(pred, sd.labels);
    return rep;
}

inline EvaluationReport evaluate(const PcaModel& model, const Dataset& data) {
    return evaluate_scored(score_dataset(model, data), model.t_major,
                           model.r > 0 ? model.t_minor : std::nullopt);
}

struct GridPoint {
    double t_major;
    std::optional<double> t_minor;
};

struct SweepResult {
    std::vector<EvaluationReport> points;
    std::size_t best = 0;  // first point with maximal overall success
};

inline SweepResult sweep_scored(const ScoredDataset& sd, const std::vector<GridPoint>& grid) {
    if (grid.empty()) throw EmptyGrid();
    SweepResult out;
    out.points.reserve(grid.size());
    for (const auto& g : grid) {
        out.points.push_back(evaluate_scored(sd, g.t_major, g.t_minor));
        if (out.points.back().metrics.overall_success > out.points[out.best].metrics.overall_success)
            out.best = out.points.size() - 1;
    }
    return out;
}

inline SweepResult sweep(const PcaModel& model, const Dataset& data, const std::vector<GridPoint>& grid) {
    if (grid.empty()) throw EmptyGrid();
    return sweep_scored(score_dataset(model, data), grid);
}

/// `steps` evenly spaced values in [lo, hi]; a single value when lo == hi.
inline std::vector<double> linear_grid(double lo, double hi, std::size_t steps) {
    if (steps == 0) return {};
    if (lo == hi || steps == 1) return {lo};
    std::vector<double> g(steps);
    for (std::size_t i = 0; i < steps; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
    g.back() = hi;
    return g;
}

/// Cartesian product; a model without minor components gets t_m = none.
inline std::vector<GridPoint> make_grid(const std::vector<double>& majors, const std::vector<double>& minors,
                                        bool use_minor) {
    std::vector<GridPoint> grid;
    for (double tM : majors) {
        if (!use_minor || minors.empty()) {
            grid.push_back({tM, std::nullopt});
            continue;
        }
        for (double tm : minors) grid.push_back({tM, tm});
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string format_rate(const Rate& r) { return r ? fmt::format("{:.4f}", *r) : "undefined"; }

inline nlohmann::ordered_json rate_json(const Rate& r) {
    return r ? nlohmann::ordered_json(*r) : nlohmann::ordered_json("undefined");
}

inline nlohmann::ordered_json report_json(const EvaluationReport& rep) {
    nlohmann::ordered_json j;
    j["t_major"] = rep.t_major;
    j["t_minor"] = rep.t_minor ? nlohmann::ordered_json(*rep.t_minor) : nlohmann::ordered_json(nullptr);
    j["tp"] = rep.cm.tp;
    j["fn"] = rep.cm.fn;
    j["fp"] = rep.cm.fp;
    j["tn"] = rep.cm.tn;
    j["recall_anomaly"] = rate_json(rep.metrics.anomaly.recall);
    j["fpr_anomaly"] = rate_json(rep.metrics.anomaly.fpr);
    j["precision_anomaly"] = rate_json(rep.metrics.anomaly.precision);
    j["recall_normal"] = rate_json(rep.metrics.normal.recall);
    j["fpr_normal"] = rate_json(rep.metrics.normal.fpr);
    j["precision_normal"] = rate_json(rep.metrics.normal.precision);
    j["overall_success"] = rep.metrics.overall_success;
    j["error_rate"] = rep.metrics.error_rate;
    auto cats = nlohmann::ordered_json::array();
    for (const auto& row : rep.categories) {
        cats.push_back(nlohmann::ordered_json{{"category", std::string(category_name(row.category))},
                        {"exist", row.exist},
                        {"detected", row.detected},
                        {"rate", rate_json(row.rate())}});
    }
    j["categories"] = cats;
    return j;
}

inline std::string report_text(const EvaluationReport& rep) {
    const auto& m = rep.metrics;
    std::string out;
    out += fmt::format("Thresholds: t_M = {}  t_m = {}\n\n", format_real(rep.t_major),
                       rep.t_minor ? format_real(*rep.t_minor) : std::string("none"));

    out += "Confusion matrix (rows = actual, columns = predicted)\n";
    out += fmt::format("  {:<8} {:>10} {:>10}\n", "", "Attack", "Normal");
    out += fmt::format("  {:<8} {:>10} {:>10}\n", "Attack", rep.cm.tp, rep.cm.fn);
    out += fmt::format("  {:<8} {:>10} {:>10}\n\n", "Normal", rep.cm.fp, rep.cm.tn);

    out += "Detection by attack category\n";
    out += fmt::format("  {:<10}", "Attacks");
    for (const auto& row : rep.categories) out += fmt::format(" {:>8}", category_name(row.category));
    out += fmt::format("\n  {:<10}", "Exist");
    for (const auto& row : rep.categories) out += fmt::format(" {:>8}", row.exist);
    out += fmt::format("\n  {:<10}", "Detected");
    for (const auto& row : rep.categories) out += fmt::format(" {:>8}", row.detected);
    out += fmt::format("\n  {:<10}", "Rate");
    for (const auto& row : rep.categories) out += fmt::format(" {:>8}", format_rate(row.rate()));
    out += "\n\n";

    out += "Metrics\n";
    out += fmt::format("  {:<16} {:>12} {:>13}\n", "", "Normal class", "Anomaly class");
    out += fmt::format("  {:<16} {:>12} {:>13}\n", "Recall and TPR", format_rate(m.normal.recall),
                       format_rate(m.anomaly.recall));
    out += fmt::format("  {:<16} {:>12} {:>13}\n", "FPR", format_rate(m.normal.fpr), format_rate(m.anomaly.fpr));
    out += fmt::format("  {:<16} {:>12} {:>13}\n", "Precision", format_rate(m.normal.precision),
                       format_rate(m.anomaly.precision));
    out += fmt::format("  {:<16} {:>12.4f}\n", "Overall success", m.overall_success);
    out += fmt::format("  {:<16} {:>12.4f}\n", "Error", m.error_rate);
    return out;
}

}  // namespace pca_ids
