#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pca_ids/kdd.hpp"
#include "pca_ids/mvstats.hpp"

namespace pca_ids {

/// Eigenvalues are floored here before being used as score denominators.
inline constexpr double kLambdaFloor = 1e-12;

inline constexpr int kModelFormatVersion = 1;

enum class EncoderScope {
    AllRecords,   // every record of the training file contributes tokens
    NormalsOnly,  // only the normal records the model is fitted on
};

struct TrainerConfig {
    double variance_target = 0.60;
    double minor_cutoff = 0.20;
    double alpha_major = 0.08;
    double alpha_minor = 0.02;
    std::optional<int> q_override;
    std::optional<int> r_override;
    EncoderScope encoder_scope = EncoderScope::AllRecords;

    /// Throws pca_ids::Error describing the first violated range.
    void validate() const {
        if (!(variance_target > 0.0 && variance_target <= 1.0))
            throw Error("variance_target must be in (0, 1]");
        if (!(minor_cutoff > 0.0)) throw Error("minor_cutoff must be > 0");
        if (!(alpha_major > 0.0 && alpha_major < 1.0)) throw Error("alpha_major must be in (0, 1)");
        if (!(alpha_minor > 0.0 && alpha_minor < 1.0)) throw Error("alpha_minor must be in (0, 1)");
        if (q_override && *q_override < 1) throw Error("q must be >= 1");
        if (r_override && *r_override < 0) throw Error("r must be >= 0");
    }
};

/// The two experiment configurations: six basic features with q=3, r=0, and
/// ten basic+traffic features with q=3, r=2.
struct Preset {
    std::string_view name;
    ProfileName profile;
    int q;
    int r;
};

inline constexpr Preset kStep1{"step1", ProfileName::Basic6, 3, 0};
inline constexpr Preset kStep2{"step2", ProfileName::Traffic10, 3, 2};

inline std::optional<Preset> preset_from_name(std::string_view name) {
    if (name == kStep1.name) return kStep1;
    if (name == kStep2.name) return kStep2;
    return std::nullopt;
}

struct Provenance {
    std::string training_source;
    std::size_t training_records = 0;
    std::size_t normals_used = 0;
    std::string created;  // filled by whoever persists the model
};

/// Everything the online phase needs to score a record.
struct PcaModel {
    FeatureProfile profile;
    CategoricalEncoder encoder;
    mvstats::StandardizationParams standardizer;
    mvstats::EigenPairs eigen;
    int q = 1;
    int r = 0;
    double t_major = 0.0;
    std::optional<double> t_minor;  // set iff r > 0
    TrainerConfig config;
    Provenance provenance;
    std::vector<std::string> warnings;  // fit-time notes, not persisted

    std::size_t dimension() const { return eigen.dimension(); }

    double clipped_lambda(std::size_t i) const { return std::max(eigen.values[i], kLambdaFloor); }
};

}  // namespace pca_ids
