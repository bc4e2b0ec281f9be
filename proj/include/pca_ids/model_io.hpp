#pragma once

// Model file: a versioned JSON document holding every offline output needed
// by the online phase. Doubles are written in shortest round-trip form, so
// load(save(m)) scores every record bit-identically.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "pca_ids/error.hpp"
#include "pca_ids/kdd.hpp"
#include "pca_ids/model.hpp"
#include "pca_ids/mvstats.hpp"

namespace pca_ids {

inline constexpr double kIntegrityTolerance = 1e-9;

struct IntegrityReport {
    double orthonormality_residual = 0.0;
    double trace_residual = 0.0;  // |sum(lambda) - p|

    bool orthonormal_ok() const { return orthonormality_residual < kIntegrityTolerance; }
    bool trace_ok(std::size_t p) const { return trace_residual < kIntegrityTolerance * static_cast<double>(p); }
};

inline IntegrityReport check_integrity(const PcaModel& m) {
    return {mvstats::orthonormality_residual(m.eigen), mvstats::trace_residual(m.eigen)};
}

inline nlohmann::ordered_json model_to_json(const PcaModel& m) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["format_version"] = kModelFormatVersion;
    j["profile"] = {{"name", std::string(profile_name(m.profile.name))},
                    {"indices", m.profile.indices},
                    {"categorical_indices", m.profile.categorical_indices}};

    ordered_json enc = ordered_json::object();
    for (const auto& [pos, table] : m.encoder.tables()) {
        ordered_json t = ordered_json::object();
        for (const auto& [tok, code] : table) t[tok] = code;
        enc[std::to_string(pos)] = t;
    }
    j["encoder"] = enc;

    std::vector<int> degenerate;
    for (bool d : m.standardizer.degenerate) degenerate.push_back(d ? 1 : 0);
    j["standardizer"] = {{"mean", m.standardizer.mean}, {"std", m.standardizer.std}, {"degenerate", degenerate}};
    j["eigen"] = {{"lambda", m.eigen.values}, {"vectors", m.eigen.vectors}};
    j["selection"] = {{"q", m.q}, {"r", m.r}};
    j["thresholds"] = {{"t_major", m.t_major},
                       {"t_minor", m.t_minor ? ordered_json(*m.t_minor) : ordered_json(nullptr)},
                       {"alpha_major", m.config.alpha_major},
                       {"alpha_minor", m.config.alpha_minor}};

    const auto& c = m.config;
    ordered_json cfg = {{"variance_target", c.variance_target},
                        {"minor_cutoff", c.minor_cutoff},
                        {"alpha_major", c.alpha_major},
                        {"alpha_minor", c.alpha_minor},
                        {"q_override", c.q_override ? ordered_json(*c.q_override) : ordered_json(nullptr)},
                        {"r_override", c.r_override ? ordered_json(*c.r_override) : ordered_json(nullptr)},
                        {"encoder_scope", c.encoder_scope == EncoderScope::AllRecords ? "all" : "normal"}};
    j["provenance"] = {{"training_file", m.provenance.training_source},
                       {"training_records", m.provenance.training_records},
                       {"normals_used", m.provenance.normals_used},
                       {"created", m.provenance.created},
                       {"config", cfg}};
    return j;
}

inline std::string save_model_string(const PcaModel& m) { return model_to_json(m).dump(2) + "\n"; }

inline void save_model(const PcaModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << save_model_string(m);
    if (!out) throw IoError("write failed for " + path);
}

namespace detail {

template <typename T>
T opt_get(const nlohmann::json& j, const char* key, T fallback) {
    auto it = j.find(key);
    return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

}  // namespace detail

/// Parses a model document. With `verify`, eigenvector orthonormality and
/// sum(lambda) == p are re-checked and a failure throws ModelFormatError.
inline PcaModel model_from_json(const nlohmann::json& j, bool verify = true) {
    PcaModel m;
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion) {
            throw ModelFormatError("unsupported model format_version " + std::to_string(version) +
                                   " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
        }

        const auto& prof = j.at("profile");
        auto profile = profile_from_name(prof.at("name").get<std::string>());
        if (!profile) throw ModelFormatError("unknown profile '" + prof.at("name").get<std::string>() + "'");
        if (prof.at("indices").get<std::vector<std::size_t>>() != profile->indices)
            throw ModelFormatError("profile indices do not match profile name");
        m.profile = *profile;

        std::map<std::size_t, std::vector<std::string>> tokens;
        for (const auto& [key, table] : j.at("encoder").items()) {
            const std::size_t pos = std::stoul(key);
            // Codes must be the dense sorted assignment; rebuild and compare.
            std::vector<std::string> list;
            for (const auto& [tok, code] : table.items()) list.push_back(tok);
            tokens[pos] = list;
            auto rebuilt = CategoricalEncoder::from_tokens({{pos, list}});
            for (const auto& [tok, code] : table.items()) {
                if (rebuilt.code(pos, tok) != code.get<int>())
                    throw ModelFormatError("encoder codes for feature " + key + " are not the sorted dense assignment");
            }
        }
        m.encoder = CategoricalEncoder::from_tokens(tokens);
        for (auto pos : m.profile.categorical_indices)
            if (!m.encoder.has_feature(pos))
                throw ModelFormatError("encoder lacks categorical feature " + std::to_string(pos));

        const auto& st = j.at("standardizer");
        m.standardizer.mean = st.at("mean").get<std::vector<double>>();
        m.standardizer.std = st.at("std").get<std::vector<double>>();
        for (int d : st.at("degenerate").get<std::vector<int>>()) m.standardizer.degenerate.push_back(d != 0);

        const auto& eg = j.at("eigen");
        m.eigen.values = eg.at("lambda").get<std::vector<double>>();
        m.eigen.vectors = eg.at("vectors").get<std::vector<std::vector<double>>>();

        const std::size_t p = m.profile.dimension();
        if (m.standardizer.mean.size() != p || m.standardizer.std.size() != p ||
            m.standardizer.degenerate.size() != p || m.eigen.values.size() != p || m.eigen.vectors.size() != p)
            throw ModelFormatError("model arrays do not match profile dimension " + std::to_string(p));
        for (const auto& v : m.eigen.vectors)
            if (v.size() != p) throw ModelFormatError("eigenvector length does not match dimension");
        for (std::size_t i = 0; i < p; ++i) {
            if (!(m.standardizer.std[i] >= 0.0)) throw ModelFormatError("negative standard deviation");
            if ((m.standardizer.std[i] == 0.0) != m.standardizer.degenerate[i])
                throw ModelFormatError("degenerate flags disagree with std");
        }
        for (std::size_t i = 1; i < p; ++i)
            if (m.eigen.values[i] > m.eigen.values[i - 1])
                throw ModelFormatError("eigenvalues are not sorted descending");

        m.q = j.at("selection").at("q").get<int>();
        m.r = j.at("selection").at("r").get<int>();
        if (m.q < 1 || m.q > static_cast<int>(p) || m.r < 0 || m.q + m.r > static_cast<int>(p))
            throw ModelFormatError("invalid q/r selection");

        const auto& th = j.at("thresholds");
        m.t_major = th.at("t_major").get<double>();
        if (!th.at("t_minor").is_null()) m.t_minor = th.at("t_minor").get<double>();
        if (m.r > 0 && !m.t_minor) throw ModelFormatError("t_minor missing although r > 0");

        const auto& pv = j.at("provenance");
        m.provenance.training_source = pv.at("training_file").get<std::string>();
        m.provenance.training_records = pv.at("training_records").get<std::size_t>();
        m.provenance.normals_used = pv.at("normals_used").get<std::size_t>();
        m.provenance.created = pv.at("created").get<std::string>();
        const auto& cfg = pv.at("config");
        m.config.variance_target = cfg.at("variance_target").get<double>();
        m.config.minor_cutoff = cfg.at("minor_cutoff").get<double>();
        m.config.alpha_major = cfg.at("alpha_major").get<double>();
        m.config.alpha_minor = cfg.at("alpha_minor").get<double>();
        if (!cfg.at("q_override").is_null()) m.config.q_override = cfg.at("q_override").get<int>();
        if (!cfg.at("r_override").is_null()) m.config.r_override = cfg.at("r_override").get<int>();
        m.config.encoder_scope = detail::opt_get<std::string>(cfg, "encoder_scope", "all") == "normal"
                                     ? EncoderScope::NormalsOnly
                                     : EncoderScope::AllRecords;
    } catch (const nlohmann::json::exception& e) {
        throw ModelFormatError(std::string("malformed model file: ") + e.what());
    }

    if (verify) {
        auto rep = check_integrity(m);
        if (!rep.orthonormal_ok())
            throw ModelFormatError("integrity check failed: eigenvectors not orthonormal (residual " +
                                   std::to_string(rep.orthonormality_residual) + ")");
        if (!rep.trace_ok(m.dimension()))
            throw ModelFormatError("integrity check failed: eigenvalues do not sum to p (residual " +
                                   std::to_string(rep.trace_residual) + ")");
    }
    return m;
}

inline PcaModel load_model_string(const std::string& text, bool verify = true) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ModelFormatError(std::string("model file is not valid JSON: ") + e.what());
    }
    return model_from_json(j, verify);
}

inline PcaModel load_model(const std::string& path, bool verify = true) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_model_string(ss.str(), verify);
}

}  // namespace pca_ids
