// Reproduction acceptance suite against KDDTrain_20Percent.
// Usage: acceptance_reproduction [path]; falls back to $PCA_IDS_KDD_TRAIN.
// Exits 77 (skipped) when the file is not present.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <fmt/format.h>

#include "pca_ids/pca_ids.hpp"

using namespace pca_ids;

namespace {

constexpr std::size_t kRecords = 25192;
constexpr std::uint64_t kExist[4] = {9234, 2289, 209, 11};
constexpr double kA1Recall = 0.90, kA1Success = 0.89;
constexpr double kA2Recall = 0.93, kA2Success = 0.82;
constexpr double kA3High = 0.85, kA3Low = 0.50;
constexpr int kSkip = 77;

int failures = 0;

void report(const std::string& id, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

// Thresholds at quantiles lo..hi of the normal records' scores.
std::vector<double> quantile_grid(const ScoredDataset& sd, bool minor, double lo, double hi, std::size_t steps) {
    std::vector<double> s;
    for (std::size_t i = 0; i < sd.scores.size(); ++i)
        if (!sd.labels[i].is_attack) s.push_back(minor ? sd.scores[i].minc : sd.scores[i].majc);
    std::sort(s.begin(), s.end());
    std::vector<double> out;
    for (double f : linear_grid(lo, hi, steps)) {
        auto k = static_cast<std::size_t>(f * static_cast<double>(s.size() - 1));
        out.push_back(s[k]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Best overall success among points reaching the recall floor, else best overall.
const EvaluationReport& pick(const SweepResult& sw, double recall_floor) {
    const EvaluationReport* best = nullptr;
    for (const auto& p : sw.points)
        if (p.metrics.anomaly.recall && *p.metrics.anomaly.recall >= recall_floor &&
            (!best || p.metrics.overall_success > best->metrics.overall_success))
            best = &p;
    return best ? *best : sw.points[sw.best];
}

std::string point_text(const EvaluationReport& p) {
    return fmt::format("t_M = {} t_m = {}: anomaly recall {}, overall success {:.4f}", format_real(p.t_major),
                       p.t_minor ? format_real(*p.t_minor) : "none", format_rate(p.metrics.anomaly.recall),
                       p.metrics.overall_success);
}

PcaModel train(const Dataset& ds, const Preset& preset) {
    TrainerConfig cfg;
    cfg.q_override = preset.q;
    cfg.r_override = preset.r;
    auto profile = preset.profile == ProfileName::Basic6 ? FeatureProfile::basic6() : FeatureProfile::traffic10();
    auto m = fit(ds, profile, cfg);
    m.provenance.created = "fixed";
    return m;
}

std::string full_run(const std::string& path) {
    std::string out;
    for (const auto& preset : {kStep1, kStep2}) {
        auto profile = preset.profile == ProfileName::Basic6 ? FeatureProfile::basic6() : FeatureProfile::traffic10();
        auto ds = load_dataset(path, profile);
        auto model = load_model_string(save_model_string(train(ds, preset)));
        out += save_model_string(model);
        out += report_json(evaluate(model, ds)).dump();
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::string path;
    if (argc > 1) path = argv[1];
    if (path.empty())
        if (const char* env = std::getenv("PCA_IDS_KDD_TRAIN")) path = env;
    if (path.empty()) path = "data/KDDTrain_20Percent.txt";

    if (!std::filesystem::exists(path)) {
        for (auto id : {"A0", "A1", "A2", "A3", "A5"})
            std::printf("SKIP %s: training file %s not found\n", id, path.c_str());
        return kSkip;
    }
    const auto t0 = std::chrono::steady_clock::now();

    auto basic = load_dataset(path, FeatureProfile::basic6());
    const auto& s = basic.summary;
    const bool a0 = s.total == kRecords && s.dos == kExist[0] && s.probe == kExist[1] && s.r2l == kExist[2] &&
                    s.u2r == kExist[3];
    report("A0", a0,
           fmt::format("{} records (normal {}, DOS {}, PROBE {}, R2L {}, U2R {}, unknown {}, malformed {})", s.total,
                       s.normal, s.dos, s.probe, s.r2l, s.u2r, s.unknown, s.malformed));

    auto m1 = train(basic, kStep1);
    auto sd1 = score_dataset(m1, basic);
    auto grid1 = make_grid(quantile_grid(sd1, false, 0.50, 1.0, 2001), {}, false);
    grid1.push_back({m1.t_major, std::nullopt});
    auto sw1 = sweep_scored(sd1, grid1);
    const auto& p1 = pick(sw1, kA1Recall);
    report("A1",
           p1.metrics.anomaly.recall && *p1.metrics.anomaly.recall >= kA1Recall && p1.metrics.overall_success >= kA1Success,
           fmt::format("step1, {} grid points, best point {} (need recall >= {}, success >= {})", grid1.size(),
                       point_text(p1), kA1Recall, kA1Success));

    auto traffic = load_dataset(path, FeatureProfile::traffic10());
    auto m2 = train(traffic, kStep2);
    auto sd2 = score_dataset(m2, traffic);
    auto grid2 = make_grid(quantile_grid(sd2, false, 0.50, 1.0, 101), quantile_grid(sd2, true, 0.50, 1.0, 101), true);
    grid2.push_back({m2.t_major, m2.t_minor});
    auto sw2 = sweep_scored(sd2, grid2);
    const auto& p2 = pick(sw2, kA2Recall);
    report("A2",
           p2.metrics.anomaly.recall && *p2.metrics.anomaly.recall >= kA2Recall && p2.metrics.overall_success >= kA2Success,
           fmt::format("step2, {} grid points, best point {} (need recall >= {}, success >= {})", grid2.size(),
                       point_text(p2), kA2Recall, kA2Success));

    bool a3 = true;
    std::string detail = "at the A1 point:";
    for (const auto& row : p1.categories) {
        if (row.category == AttackCategory::Unknown) continue;
        const auto rate = row.rate();
        const bool high = row.category == AttackCategory::Dos || row.category == AttackCategory::Probe;
        const bool ok = rate && (high ? *rate >= kA3High : *rate <= kA3Low);
        a3 = a3 && ok;
        detail += fmt::format(" {} {}/{} ({})", category_name(row.category), row.detected, row.exist, format_rate(rate));
    }
    report("A3", a3, detail + fmt::format(" (need DOS, PROBE >= {}; R2L, U2R <= {})", kA3High, kA3Low));

    const auto first = full_run(path), second = full_run(path);
    report("A5", first == second,
           fmt::format("two full train+evaluate runs, {} bytes, {}", first.size(), first == second ? "identical" : "different"));

    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d criteria failed, %.1f s\n", failures, elapsed);
    return failures == 0 ? 0 : 1;
}
