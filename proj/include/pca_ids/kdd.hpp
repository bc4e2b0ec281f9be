#pragma once

// NSL-KDD connection records: parsing, attack taxonomy, feature profiles and
// categorical encoding.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pca_ids/error.hpp"

namespace pca_ids {

inline constexpr std::size_t kRawFeatureCount = 41;

inline constexpr std::array<std::string_view, kRawFeatureCount> kFeatureNames = {
    "duration",          "protocol_type",
    "service",           "flag",
    "src_bytes",         "dst_bytes",
    "land",              "wrong_fragment",
    "urgent",            "hot",
    "num_failed_logins", "logged_in",
    "num_compromised",   "root_shell",
    "su_attempted",      "num_root",
    "num_file_creations", "num_shells",
    "num_access_files",  "num_outbound_cmds",
    "is_host_login",     "is_guest_login",
    "count",             "srv_count",
    "serror_rate",       "srv_serror_rate",
    "rerror_rate",       "srv_rerror_rate",
    "same_srv_rate",     "diff_srv_rate",
    "srv_diff_host_rate", "dst_host_count",
    "dst_host_srv_count", "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate", "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate", "dst_host_serror_rate",
    "dst_host_srv_serror_rate", "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
};

/// 1-based positions of the symbolic fields in a raw record.
inline constexpr bool is_symbolic_position(std::size_t pos) {
    return pos == 2 || pos == 3 || pos == 4;
}

enum class AttackCategory { Normal, Dos, Probe, R2L, U2R, Unknown };

inline constexpr std::array<AttackCategory, 4> kTableCategories = {
    AttackCategory::Dos, AttackCategory::Probe, AttackCategory::R2L, AttackCategory::U2R};

inline std::string_view category_name(AttackCategory c) {
    switch (c) {
        case AttackCategory::Normal: return "NORMAL";
        case AttackCategory::Dos: return "DOS";
        case AttackCategory::Probe: return "PROBE";
        case AttackCategory::R2L: return "R2L";
        case AttackCategory::U2R: return "U2R";
        case AttackCategory::Unknown: return "UNKNOWN";
    }
    return "UNKNOWN";
}

struct Label {
    bool is_attack = false;
    AttackCategory category = AttackCategory::Normal;
    std::string raw_name;
};

/// Maps an attack name onto the KDD99 four-category taxonomy. Names outside
/// the taxonomy are still attacks, filed as Unknown.
inline Label categorize_attack(std::string_view raw_name) {
    if (!raw_name.empty() && raw_name.back() == '.') raw_name.remove_suffix(1);

    static const std::map<std::string_view, AttackCategory> taxonomy = {
        {"back", AttackCategory::Dos},
        {"land", AttackCategory::Dos},
        {"neptune", AttackCategory::Dos},
        {"pod", AttackCategory::Dos},
        {"smurf", AttackCategory::Dos},
        {"teardrop", AttackCategory::Dos},
        {"satan", AttackCategory::Probe},
        {"ipsweep", AttackCategory::Probe},
        {"nmap", AttackCategory::Probe},
        {"portsweep", AttackCategory::Probe},
        {"guess_passwd", AttackCategory::R2L},
        {"ftp_write", AttackCategory::R2L},
        {"imap", AttackCategory::R2L},
        {"phf", AttackCategory::R2L},
        {"multihop", AttackCategory::R2L},
        {"warezmaster", AttackCategory::R2L},
        {"warezclient", AttackCategory::R2L},
        {"spy", AttackCategory::R2L},
        {"buffer_overflow", AttackCategory::U2R},
        {"loadmodule", AttackCategory::U2R},
        {"rootkit", AttackCategory::U2R},
        {"perl", AttackCategory::U2R},
    };

    Label label;
    label.raw_name = std::string(raw_name);
    if (raw_name == "normal") return label;

    label.is_attack = true;
    auto it = taxonomy.find(raw_name);
    label.category = it == taxonomy.end() ? AttackCategory::Unknown : it->second;
    return label;
}

struct ConnectionRecord {
    /// Fields exactly as they appeared in the input.
    std::array<std::string, kRawFeatureCount> raw;
    /// Parsed values for numeric positions; NaN for the symbolic ones.
    std::array<double, kRawFeatureCount> value{};
    std::optional<Label> label;
    std::optional<int> difficulty;

    /// 1-based access, matching the feature numbering used by profiles.
    const std::string& token(std::size_t pos) const { return raw.at(pos - 1); }
    double number(std::size_t pos) const { return value.at(pos - 1); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> parse_decimal(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    if (!std::isfinite(v) || v < 0.0) return std::nullopt;
    return v;
}

}  // namespace detail

/// Parses one comma-separated NSL-KDD row: 41 features, a label and an optional
/// difficulty. With `allow_unlabeled`, a bare 41-field row is accepted too.
inline ConnectionRecord parse_record(std::string_view line, std::size_t line_no = 0,
                                     bool allow_unlabeled = false) {
    auto fields = detail::split_commas(detail::trim(line));
    const std::size_t n = fields.size();
    const bool count_ok = n == kRawFeatureCount + 1 || n == kRawFeatureCount + 2 ||
                          (allow_unlabeled && n == kRawFeatureCount);
    if (!count_ok) {
        throw MalformedRow(line_no, "expected 42 or 43 fields, got " + std::to_string(n));
    }

    ConnectionRecord rec;
    for (std::size_t i = 0; i < kRawFeatureCount; ++i) {
        const std::size_t pos = i + 1;
        rec.raw[i] = std::string(fields[i]);
        if (is_symbolic_position(pos)) {
            if (fields[i].empty()) {
                throw MalformedRow(line_no, "empty token for " + std::string(kFeatureNames[i]));
            }
            rec.value[i] = std::nan("");
            continue;
        }
        auto v = detail::parse_decimal(fields[i]);
        if (!v) {
            throw MalformedRow(line_no, "bad numeric value '" + std::string(fields[i]) +
                                            "' for " + std::string(kFeatureNames[i]));
        }
        rec.value[i] = *v;
    }

    if (n > kRawFeatureCount) {
        auto name = fields[kRawFeatureCount];
        if (name.empty()) throw MalformedRow(line_no, "empty label");
        rec.label = categorize_attack(name);
    }
    if (n == kRawFeatureCount + 2) {
        auto s = fields[kRawFeatureCount + 1];
        int d = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw MalformedRow(line_no, "bad difficulty '" + std::string(s) + "'");
        }
        rec.difficulty = d;
    }
    return rec;
}

/// The 41 feature fields joined back into their original comma form.
inline std::string serialize_features(const ConnectionRecord& rec) {
    std::string out;
    for (std::size_t i = 0; i < kRawFeatureCount; ++i) {
        if (i) out.push_back(',');
        out += rec.raw[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Feature profiles

enum class ProfileName { Basic6, Traffic10 };

struct FeatureProfile {
    ProfileName name = ProfileName::Basic6;
    std::vector<std::size_t> indices;              // 1-based, strictly increasing
    std::vector<std::size_t> categorical_indices;  // subset of indices

    std::size_t dimension() const { return indices.size(); }

    static FeatureProfile basic6() {
        return {ProfileName::Basic6, {1, 2, 3, 4, 5, 6}, {2, 3, 4}};
    }
    static FeatureProfile traffic10() {
        return {ProfileName::Traffic10, {1, 2, 3, 4, 5, 6, 23, 24, 32, 33}, {2, 3, 4}};
    }

    friend bool operator==(const FeatureProfile&, const FeatureProfile&) = default;
};

inline std::string_view profile_name(ProfileName n) {
    return n == ProfileName::Basic6 ? "basic6" : "traffic10";
}

inline std::optional<FeatureProfile> profile_from_name(std::string_view name) {
    if (name == "basic6") return FeatureProfile::basic6();
    if (name == "traffic10") return FeatureProfile::traffic10();
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Dataset

struct DatasetSummary {
    std::size_t total = 0;
    std::size_t normal = 0;
    std::size_t dos = 0;
    std::size_t probe = 0;
    std::size_t r2l = 0;
    std::size_t u2r = 0;
    std::size_t unknown = 0;
    std::size_t malformed = 0;

    std::size_t attacks() const { return dos + probe + r2l + u2r + unknown; }

    std::size_t count(AttackCategory c) const {
        switch (c) {
            case AttackCategory::Normal: return normal;
            case AttackCategory::Dos: return dos;
            case AttackCategory::Probe: return probe;
            case AttackCategory::R2L: return r2l;
            case AttackCategory::U2R: return u2r;
            case AttackCategory::Unknown: return unknown;
        }
        return 0;
    }

    void add(const Label& label) {
        ++total;
        switch (label.category) {
            case AttackCategory::Normal: ++normal; break;
            case AttackCategory::Dos: ++dos; break;
            case AttackCategory::Probe: ++probe; break;
            case AttackCategory::R2L: ++r2l; break;
            case AttackCategory::U2R: ++u2r; break;
            case AttackCategory::Unknown: ++unknown; break;
        }
    }
};

struct Dataset {
    FeatureProfile profile;
    std::vector<ConnectionRecord> records;  // input order, all labelled
    std::vector<MalformedRow> malformed;
    DatasetSummary summary;
    std::string source;

    std::size_t size() const { return records.size(); }
};

/// Parses labelled records from a stream. Malformed rows are skipped and
/// counted; blank lines are ignored.
inline Dataset read_dataset(std::istream& in, const FeatureProfile& profile,
                            std::string source = "<stream>") {
    Dataset ds;
    ds.profile = profile;
    ds.source = std::move(source);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        try {
            auto rec = parse_record(line, line_no);
            ds.summary.add(*rec.label);
            ds.records.push_back(std::move(rec));
        } catch (const MalformedRow& e) {
            ds.malformed.push_back(e);
        }
    }
    ds.summary.malformed = ds.malformed.size();
    if (ds.records.empty()) throw EmptyDataset("no valid records in " + ds.source);
    return ds;
}

inline Dataset load_dataset(const std::string& path, const FeatureProfile& profile) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_dataset(in, profile, path);
}

// ---------------------------------------------------------------------------
// Categorical encoding

/// Per categorical feature, a sorted token -> dense code table. Tokens not
/// seen at build time encode to K, one past the largest code.
class CategoricalEncoder {
public:
    using Table = std::map<std::string, int>;

    CategoricalEncoder() = default;

    /// Builds from explicit token sets; codes follow sorted token order.
    static CategoricalEncoder from_tokens(const std::map<std::size_t, std::vector<std::string>>& tokens) {
        CategoricalEncoder enc;
        for (const auto& [pos, list] : tokens) {
            Table& t = enc.tables_[pos];
            std::vector<std::string> sorted(list);
            std::sort(sorted.begin(), sorted.end());
            sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
            int code = 0;
            for (auto& tok : sorted) t.emplace(tok, code++);
        }
        return enc;
    }

    bool has_feature(std::size_t pos) const { return tables_.count(pos) != 0; }
    const Table& table(std::size_t pos) const { return tables_.at(pos); }
    const std::map<std::size_t, Table>& tables() const { return tables_; }

    /// Code for `token` at 1-based position `pos`, or nullopt if unseen.
    std::optional<int> code(std::size_t pos, const std::string& token) const {
        const Table& t = tables_.at(pos);
        auto it = t.find(token);
        if (it == t.end()) return std::nullopt;
        return it->second;
    }

    int overflow_code(std::size_t pos) const { return static_cast<int>(tables_.at(pos).size()); }

    friend bool operator==(const CategoricalEncoder&, const CategoricalEncoder&) = default;

private:
    std::map<std::size_t, Table> tables_;
};

inline CategoricalEncoder build_encoder(const std::vector<ConnectionRecord>& records,
                                        const FeatureProfile& profile) {
    if (records.empty()) throw EmptyDataset("cannot build an encoder from zero records");
    std::map<std::size_t, std::vector<std::string>> tokens;
    for (auto pos : profile.categorical_indices) {
        auto& list = tokens[pos];
        for (const auto& rec : records) list.push_back(rec.token(pos));
    }
    return CategoricalEncoder::from_tokens(tokens);
}

inline CategoricalEncoder build_encoder(const Dataset& dataset, const FeatureProfile& profile) {
    return build_encoder(dataset.records, profile);
}

struct FeatureVector {
    std::vector<double> values;
    bool unknown_token = false;
};

inline FeatureVector extract_features(const ConnectionRecord& rec, const FeatureProfile& profile,
                                      const CategoricalEncoder& encoder) {
    FeatureVector fv;
    fv.values.reserve(profile.dimension());
    for (auto pos : profile.indices) {
        if (is_symbolic_position(pos)) {
            auto c = encoder.code(pos, rec.token(pos));
            if (!c) {
                fv.unknown_token = true;
                c = encoder.overflow_code(pos);
            }
            fv.values.push_back(static_cast<double>(*c));
        } else {
            fv.values.push_back(rec.number(pos));
        }
    }
    return fv;
}

}  // namespace pca_ids
