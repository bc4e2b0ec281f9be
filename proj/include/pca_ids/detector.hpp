#pragma once

// Online phase: map a record into the eigenspace and apply the two-threshold
// rule  MajC > t_M  or  MinC > t_m.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "pca_ids/kdd.hpp"
#include "pca_ids/model.hpp"
#include "pca_ids/mvstats.hpp"

namespace pca_ids {

/// Sum of y_i^2 / lambda_i over the q leading components.
inline double major_score(std::span<const double> y, std::span<const double> lambda, int q) {
    double s = 0.0;
    for (int i = 0; i < q; ++i) {
        const double l = std::max(lambda[i], kLambdaFloor);
        s += y[i] * y[i] / l;
    }
    return s;
}

/// Sum of y_i^2 / lambda_i over the r trailing components; 0 when r == 0.
inline double minor_score(std::span<const double> y, std::span<const double> lambda, int r) {
    const std::size_t p = y.size();
    double s = 0.0;
    for (std::size_t i = p - static_cast<std::size_t>(r); i < p; ++i) {
        const double l = std::max(lambda[i], kLambdaFloor);
        s += y[i] * y[i] / l;
    }
    return s;
}

enum class Trigger { None, Major, Minor, Both };

inline std::string_view trigger_name(Trigger t) {
    switch (t) {
        case Trigger::None: return "none";
        case Trigger::Major: return "major";
        case Trigger::Minor: return "minor";
        case Trigger::Both: return "both";
    }
    return "none";
}

struct Scores {
    double majc = 0.0;
    double minc = 0.0;
    bool unknown_token = false;
};

struct Verdict {
    bool is_attack = false;
    double majc_score = 0.0;
    double minc_score = 0.0;
    Trigger triggered_by = Trigger::None;
    bool unknown_token_flag = false;
};

/// Principal-component scores of an already-encoded feature vector.
inline std::vector<double> pc_scores(const PcaModel& model, std::span<const double> features) {
    auto z = mvstats::standardize(features, model.standardizer);
    return mvstats::project(z, model.eigen);
}

inline Scores score_record(const PcaModel& model, const ConnectionRecord& rec) {
    auto fv = extract_features(rec, model.profile, model.encoder);
    auto y = pc_scores(model, fv.values);
    return {major_score(y, model.eigen.values, model.q), minor_score(y, model.eigen.values, model.r),
            fv.unknown_token};
}

/// Applies the decision rule with explicit thresholds; t_minor is ignored when absent.
inline Verdict decide(const Scores& s, double t_major, std::optional<double> t_minor) {
    const bool major = s.majc > t_major;
    const bool minor = t_minor.has_value() && s.minc > *t_minor;
    Verdict v;
    v.majc_score = s.majc;
    v.minc_score = s.minc;
    v.unknown_token_flag = s.unknown_token;
    v.triggered_by = major && minor ? Trigger::Both
                     : major        ? Trigger::Major
                     : minor        ? Trigger::Minor
                                    : Trigger::None;
    v.is_attack = v.triggered_by != Trigger::None;
    return v;
}

inline Verdict classify(const PcaModel& model, const ConnectionRecord& rec) {
    return decide(score_record(model, rec), model.t_major, model.r > 0 ? model.t_minor : std::nullopt);
}

// ---------------------------------------------------------------------------
// Order-preserving parallel map, capped by PCA_IDS_THREADS.

inline unsigned worker_count(std::size_t work_items) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("PCA_IDS_THREADS")) {
        unsigned cap = 0;
        std::string_view s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
        if (ec == std::errc{} && cap > 0) n = std::min(n, cap);
    }
    // Small batches are not worth a thread.
    const std::size_t by_work = std::max<std::size_t>(1, work_items / 2048);
    return static_cast<unsigned>(std::min<std::size_t>(n, by_work));
}

template <typename In, typename Out, typename Fn>
void parallel_transform(const std::vector<In>& in, std::vector<Out>& out, Fn fn) {
    out.resize(in.size());
    const unsigned workers = worker_count(in.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = fn(in[i]);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (in.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(in.size(), lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) out[i] = fn(in[i]);
        });
    }
    for (auto& t : pool) t.join();
}

inline std::vector<Scores> score_records(const PcaModel& model, const std::vector<ConnectionRecord>& recs) {
    std::vector<Scores> out;
    parallel_transform(recs, out, [&](const ConnectionRecord& r) { return score_record(model, r); });
    return out;
}

// ---------------------------------------------------------------------------
// Streaming

/// One entry per input line: a verdict, or the parse error for that line.
using StreamResult = std::variant<Verdict, MalformedRow>;

/// Classifies each line independently; labels are optional. Blank lines are
/// passed through as malformed so output stays aligned with input.
inline std::vector<StreamResult> classify_stream(const PcaModel& model, const std::vector<std::string>& lines,
                                                 std::size_t first_line_no = 1) {
    std::vector<std::size_t> idx(lines.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<StreamResult> out;
    parallel_transform(idx, out, [&](std::size_t i) -> StreamResult {
        try {
            return classify(model, parse_record(lines[i], first_line_no + i, true));
        } catch (const MalformedRow& e) {
            return e;
        }
    });
    return out;
}

/// Shortest decimal that round-trips to the same double.
inline std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ec == std::errc{} ? ptr : buf);
}

inline std::string format_verdict(const Verdict& v) {
    std::string line = "verdict=";
    line += v.is_attack ? "attack" : "normal";
    line += " majc=" + format_real(v.majc_score);
    line += " minc=" + format_real(v.minc_score);
    line += " trigger=";
    line += trigger_name(v.triggered_by);
    if (v.unknown_token_flag) line += " flags=unknown_token";
    return line;
}

inline std::string format_stream_result(const StreamResult& r) {
    if (const auto* v = std::get_if<Verdict>(&r)) return format_verdict(*v);
    const auto& e = std::get<MalformedRow>(r);
    return "error=malformed_row line=" + std::to_string(e.line()) + " reason=\"" + e.reason() + "\"";
}

}  // namespace pca_ids
