#pragma once

// Offline phase: normal-only training data -> standardization -> correlation
// matrix -> eigenpairs -> (q, r) selection -> threshold calibration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pca_ids/detector.hpp"
#include "pca_ids/kdd.hpp"
#include "pca_ids/model.hpp"
#include "pca_ids/mvstats.hpp"

namespace pca_ids {

/// Smallest k with (lambda_1 + ... + lambda_k) / p >= variance_target, at least 1.
inline int select_major(std::span<const double> eigenvalues, double variance_target) {
    const double p = static_cast<double>(eigenvalues.size());
    double cum = 0.0;
    for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
        cum += eigenvalues[k];
        if (cum / p >= variance_target - 1e-12) return static_cast<int>(k + 1);
    }
    return std::max<int>(1, static_cast<int>(eigenvalues.size()));
}

/// Number of eigenvalues strictly below the cutoff.
inline int select_minor(std::span<const double> eigenvalues, double minor_cutoff) {
    return static_cast<int>(
        std::count_if(eigenvalues.begin(), eigenvalues.end(), [&](double l) { return l < minor_cutoff; }));
}

/// Nearest-rank (1 - alpha) quantile.
inline double nearest_rank_quantile(std::vector<double> scores, double alpha) {
    if (scores.empty()) throw EmptyScores();
    std::sort(scores.begin(), scores.end());
    const double n = static_cast<double>(scores.size());
    auto rank = static_cast<std::ptrdiff_t>(std::ceil((1.0 - alpha) * n - 1e-9));
    rank = std::clamp<std::ptrdiff_t>(rank, 1, static_cast<std::ptrdiff_t>(scores.size()));
    return scores[static_cast<std::size_t>(rank - 1)];
}

struct Thresholds {
    double t_major = 0.0;
    std::optional<double> t_minor;
};

/// t_M from the major scores; t_m only when minor scores are supplied (r > 0).
inline Thresholds calibrate_thresholds(const std::vector<double>& scores_major,
                                       const std::vector<double>& scores_minor, double alpha_major,
                                       double alpha_minor) {
    Thresholds t;
    t.t_major = nearest_rank_quantile(scores_major, alpha_major);
    if (!scores_minor.empty()) t.t_minor = nearest_rank_quantile(scores_minor, alpha_minor);
    return t;
}

/// Encoded feature matrix for a set of records.
inline mvstats::Matrix feature_matrix(const std::vector<const ConnectionRecord*>& recs,
                                      const FeatureProfile& profile, const CategoricalEncoder& enc) {
    mvstats::Matrix m(0, profile.dimension());
    for (const auto* rec : recs) m.append_row(extract_features(*rec, profile, enc).values);
    return m;
}

inline PcaModel fit(const std::vector<ConnectionRecord>& training, const FeatureProfile& profile,
                    const TrainerConfig& config, std::string source = {}) {
    config.validate();

    std::vector<const ConnectionRecord*> normals;
    for (const auto& rec : training)
        if (rec.label && !rec.label->is_attack) normals.push_back(&rec);
    if (normals.empty()) throw EmptyDataset("training data contains no normal records");

    PcaModel model;
    model.profile = profile;
    model.config = config;
    model.provenance.training_source = std::move(source);
    model.provenance.training_records = training.size();
    model.provenance.normals_used = normals.size();

    if (config.encoder_scope == EncoderScope::AllRecords) {
        model.encoder = build_encoder(training, profile);
    } else {
        std::vector<ConnectionRecord> copy;
        copy.reserve(normals.size());
        for (const auto* r : normals) copy.push_back(*r);
        model.encoder = build_encoder(copy, profile);
    }

    const auto X = feature_matrix(normals, profile, model.encoder);
    model.standardizer = mvstats::fit_standardizer(X);
    const auto R = mvstats::correlation_matrix(X, model.standardizer);
    model.eigen = mvstats::eigen_sym(R);

    const int p = static_cast<int>(profile.dimension());
    int q = config.q_override ? *config.q_override : select_major(model.eigen.values, config.variance_target);
    if (q > p) throw Error("q=" + std::to_string(q) + " exceeds dimension " + std::to_string(p));
    int r = config.r_override ? *config.r_override : select_minor(model.eigen.values, config.minor_cutoff);
    if (q + r > p) {
        model.warnings.push_back("q + r = " + std::to_string(q + r) + " exceeds p = " + std::to_string(p) +
                                 "; r shrunk from " + std::to_string(r) + " to " + std::to_string(p - q));
        r = p - q;
    }
    model.q = q;
    model.r = r;

    std::vector<double> maj(normals.size());
    std::vector<double> min;
    if (r > 0) min.resize(normals.size());
    for (std::size_t i = 0; i < normals.size(); ++i) {
        auto y = pc_scores(model, X.row(i));
        maj[i] = major_score(y, model.eigen.values, q);
        if (r > 0) min[i] = minor_score(y, model.eigen.values, r);
    }
    auto t = calibrate_thresholds(maj, min, config.alpha_major, config.alpha_minor);
    model.t_major = t.t_major;
    model.t_minor = t.t_minor;
    return model;
}

inline PcaModel fit(const Dataset& training, const FeatureProfile& profile, const TrainerConfig& config) {
    return fit(training.records, profile, config, training.source);
}

}  // namespace pca_ids
