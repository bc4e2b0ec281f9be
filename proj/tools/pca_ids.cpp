// pca-ids: train, evaluate, classify, sweep and inspect PCA anomaly models
// over NSL-KDD connection records.
//
// Exit codes: 0 success, 1 runtime/data error, 2 usage error.

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pca_ids/pca_ids.hpp"

namespace {

using namespace pca_ids;

constexpr int kOk = 0;
constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string utc_timestamp() {
    std::time_t t = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::atoll(epoch));
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t steps = 1;
};

GridSpec parse_grid(const std::string& spec, const char* flag) {
    auto fail = [&] {
        return UsageError(fmt::format("{}: expected lo:hi:steps with lo <= hi and steps >= 1, got '{}'", flag, spec));
    };
    auto a = spec.find(':');
    auto b = a == std::string::npos ? a : spec.find(':', a + 1);
    if (b == std::string::npos) throw fail();
    auto num = [&](std::string_view s, auto& out) {
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec != std::errc{} || ptr != s.data() + s.size()) throw fail();
    };
    GridSpec g;
    std::string_view sv(spec);
    num(sv.substr(0, a), g.lo);
    num(sv.substr(a + 1, b - a - 1), g.hi);
    num(sv.substr(b + 1), g.steps);
    if (g.steps < 1 || g.lo > g.hi || !std::isfinite(g.lo) || !std::isfinite(g.hi)) throw fail();
    return g;
}

void write_output(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
}

std::string summary_text(const DatasetSummary& s) {
    return fmt::format("records={} normal={} DOS={} PROBE={} R2L={} U2R={} UNKNOWN={} malformed={}\n", s.total,
                       s.normal, s.dos, s.probe, s.r2l, s.u2r, s.unknown, s.malformed);
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string data;
    std::string profile;
    std::string out;
    std::string preset;
    std::string encoder_scope = "all";
    TrainerConfig config;
    std::optional<int> q;
    std::optional<int> r;
};

int run_train(const TrainArgs& a) {
    TrainerConfig cfg = a.config;
    std::optional<FeatureProfile> profile;
    if (!a.profile.empty()) {
        profile = profile_from_name(a.profile);
        if (!profile) throw UsageError("--profile must be basic6 or traffic10");
    }
    if (!a.preset.empty()) {
        auto preset = preset_from_name(a.preset);
        if (!preset) throw UsageError("--preset must be step1 or step2");
        auto pre_profile = *profile_from_name(profile_name(preset->profile));
        if (profile && *profile != pre_profile)
            throw UsageError(fmt::format("--preset {} uses profile {}", a.preset, profile_name(preset->profile)));
        profile = pre_profile;
        cfg.q_override = preset->q;
        cfg.r_override = preset->r;
    }
    if (!profile) throw UsageError("one of --profile or --preset is required");
    if (a.q) cfg.q_override = a.q;
    if (a.r) cfg.r_override = a.r;
    if (a.encoder_scope == "normal") cfg.encoder_scope = EncoderScope::NormalsOnly;
    else if (a.encoder_scope != "all") throw UsageError("--encoder-scope must be all or normal");
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }

    auto data = load_dataset(a.data, *profile);
    std::cerr << "loaded " << summary_text(data.summary);
    auto model = fit(data, *profile, cfg);
    model.provenance.created = utc_timestamp();
    for (const auto& w : model.warnings) std::cerr << "warning: " << w << "\n";
    save_model(model, a.out);

    const auto& lambda = model.eigen.values;
    std::cout << fmt::format("profile: {}\nnormals used: {} of {}\n", profile_name(model.profile.name),
                             model.provenance.normals_used, model.provenance.training_records);
    std::cout << "eigenvalues:";
    for (double l : lambda) std::cout << ' ' << format_real(l);
    std::cout << fmt::format("\nautomatic q: {}  automatic r: {}\n", select_major(lambda, cfg.variance_target),
                             select_minor(lambda, cfg.minor_cutoff));
    std::cout << fmt::format("q: {}  r: {}\nt_M: {}  t_m: {}\nmodel written to {}\n", model.q, model.r,
                             format_real(model.t_major), model.t_minor ? format_real(*model.t_minor) : "none",
                             a.out);
    return kOk;
}

// ---------------------------------------------------------------------------

nlohmann::ordered_json model_summary_json(const PcaModel& m) {
    return {{"profile", std::string(profile_name(m.profile.name))},
            {"q", m.q},
            {"r", m.r},
            {"automatic_q", select_major(m.eigen.values, m.config.variance_target)},
            {"automatic_r", select_minor(m.eigen.values, m.config.minor_cutoff)}};
}

std::string model_summary_text(const PcaModel& m) {
    return fmt::format("Model: profile {}  q = {}  r = {}  (automatic rule: q = {}, r = {})\n",
                       profile_name(m.profile.name), m.q, m.r, select_major(m.eigen.values, m.config.variance_target),
                       select_minor(m.eigen.values, m.config.minor_cutoff));
}

int run_evaluate(const std::string& model_path, const std::string& data_path, const std::string& report_path,
                 const std::string& format) {
    if (format != "text" && format != "machine") throw UsageError("--format must be text or machine");
    auto model = load_model(model_path);
    auto data = load_dataset(data_path, model.profile);
    auto sd = score_dataset(model, data);
    auto rep = evaluate_scored(sd, model.t_major, model.r > 0 ? model.t_minor : std::nullopt);

    std::string out;
    if (format == "machine") {
        auto j = report_json(rep);
        j["model"] = model_summary_json(model);
        j["records"] = data.summary.total;
        j["malformed_rows"] = data.summary.malformed;
        j["unknown_token_records"] = sd.unknown_token_records;
        out = j.dump(2) + "\n";
    } else {
        out = model_summary_text(model);
        out += "Dataset: " + summary_text(data.summary);
        out += fmt::format("Records with unseen categorical tokens: {}\n\n", sd.unknown_token_records);
        out += report_text(rep);
    }
    write_output(out, report_path);
    return kOk;
}

// ---------------------------------------------------------------------------

int run_classify(const std::string& model_path, const std::string& input_path) {
    auto model = load_model(model_path);

    std::ifstream file;
    if (!input_path.empty()) {
        file.open(input_path);
        if (!file) throw IoError("cannot open " + input_path);
    }
    std::istream& in = input_path.empty() ? std::cin : file;

    std::size_t normal = 0, attack = 0, errors = 0, line_no = 0;
    const std::size_t batch_size = 8192;
    std::vector<std::string> batch;
    std::vector<std::size_t> numbers;
    auto flush = [&] {
        std::vector<StreamResult> results;
        std::vector<std::size_t> idx(batch.size());
        std::iota(idx.begin(), idx.end(), 0);
        parallel_transform(idx, results, [&](std::size_t i) -> StreamResult {
            try {
                return classify(model, parse_record(batch[i], numbers[i], true));
            } catch (const MalformedRow& e) {
                return e;
            }
        });
        for (const auto& r : results) {
            if (const auto* v = std::get_if<Verdict>(&r)) (v->is_attack ? attack : normal)++;
            else ++errors;
            std::cout << format_stream_result(r) << '\n';
        }
        batch.clear();
        numbers.clear();
    };

    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        batch.push_back(std::move(line));
        numbers.push_back(line_no);
        if (batch.size() == batch_size) flush();
    }
    flush();
    std::cout.flush();
    std::cerr << fmt::format("classified={} normal={} attack={} errors={}\n", normal + attack, normal, attack, errors);
    return kOk;
}

// ---------------------------------------------------------------------------

int run_sweep(const std::string& model_path, const std::string& data_path, const std::string& tm_grid,
              const std::string& tmm_grid, const std::string& format) {
    if (format != "text" && format != "machine") throw UsageError("--format must be text or machine");
    auto gM = parse_grid(tm_grid, "--tm-grid");
    std::optional<GridSpec> gm;
    if (!tmm_grid.empty()) gm = parse_grid(tmm_grid, "--tmm-grid");

    auto model = load_model(model_path);
    auto data = load_dataset(data_path, model.profile);
    const bool use_minor = model.r > 0;
    std::vector<double> minors;
    if (use_minor) minors = gm ? linear_grid(gm->lo, gm->hi, gm->steps) : std::vector<double>{*model.t_minor};
    auto grid = make_grid(linear_grid(gM.lo, gM.hi, gM.steps), minors, use_minor);
    auto result = sweep(model, data, grid);

    std::string out;
    if (format == "machine") {
        nlohmann::ordered_json j;
        j["model"] = model_summary_json(model);
        auto pts = nlohmann::ordered_json::array();
        for (const auto& p : result.points) pts.push_back(report_json(p));
        j["points"] = pts;
        j["best_index"] = result.best;
        out = j.dump(2) + "\n";
    } else {
        out = model_summary_text(model);
        out += fmt::format("{:>14} {:>14} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n", "t_M", "t_m", "TP", "FP",
                           "Recall", "FPR", "Prec", "Success");
        for (const auto& p : result.points) {
            out += fmt::format("{:>14} {:>14} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8.4f}\n", format_real(p.t_major),
                               p.t_minor ? format_real(*p.t_minor) : "none", p.cm.tp, p.cm.fp,
                               format_rate(p.metrics.anomaly.recall), format_rate(p.metrics.anomaly.fpr),
                               format_rate(p.metrics.anomaly.precision), p.metrics.overall_success);
        }
        out += "\nBest overall success\n";
        out += report_text(result.points[result.best]);
    }
    std::cout << out;
    return kOk;
}

// ---------------------------------------------------------------------------

int run_inspect(const std::string& model_path) {
    auto m = load_model(model_path, false);
    const auto& lambda = m.eigen.values;
    const std::size_t p = m.dimension();

    std::cout << fmt::format("format_version: {}\nprofile: {} (p = {})\n", kModelFormatVersion,
                             profile_name(m.profile.name), p);
    std::cout << fmt::format("trained on: {} ({} records, {} normals), created {}\n\n",
                             m.provenance.training_source, m.provenance.training_records, m.provenance.normals_used,
                             m.provenance.created);
    std::cout << fmt::format("{:>4} {:>24} {:>12} {:>10}\n", "i", "lambda", "cum. var.", "role");
    double cum = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        cum += lambda[i];
        std::string role = static_cast<int>(i) < m.q                            ? "major"
                           : static_cast<int>(i) >= static_cast<int>(p) - m.r ? "minor"
                                                                              : "";
        std::cout << fmt::format("{:>4} {:>24} {:>12.4f} {:>10}\n", i + 1, format_real(lambda[i]),
                                 cum / static_cast<double>(p), role);
    }
    std::cout << fmt::format("\nq = {}  r = {}\nt_M = {}  t_m = {}\n", m.q, m.r, format_real(m.t_major),
                             m.t_minor ? format_real(*m.t_minor) : "none");
    for (const auto& [pos, table] : m.encoder.tables())
        std::cout << fmt::format("encoder {}: {} tokens\n", kFeatureNames[pos - 1], table.size());

    auto rep = check_integrity(m);
    const bool trace_ok = rep.trace_ok(p);
    const bool ortho_ok = rep.orthonormal_ok();
    std::cout << fmt::format("\nsum(lambda) - p residual: {:.3e}  {}\n", rep.trace_residual,
                             trace_ok ? "PASS" : "FAIL");
    std::cout << fmt::format("orthonormality residual:  {:.3e}  {}\n", rep.orthonormality_residual,
                             ortho_ok ? "PASS" : "FAIL");
    if (!trace_ok || !ortho_ok) {
        std::cerr << "error: model integrity check FAIL\n";
        return kRuntimeError;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PCA anomaly-detection IDS over NSL-KDD connection records"};
    app.require_subcommand(1);

    TrainArgs train;
    auto* cmd_train = app.add_subcommand("train", "fit a model on the normal records of a training file");
    cmd_train->add_option("--data", train.data, "NSL-KDD training file")->required();
    cmd_train->add_option("--profile", train.profile, "feature profile: basic6 or traffic10");
    cmd_train->add_option("--out", train.out, "model output path")->required();
    cmd_train->add_option("--preset", train.preset, "step1 (basic6, q=3, r=0) or step2 (traffic10, q=3, r=2)");
    cmd_train->add_option("--variance-target", train.config.variance_target, "cumulative variance for q");
    cmd_train->add_option("--minor-cutoff", train.config.minor_cutoff, "eigenvalue ceiling for minor components");
    cmd_train->add_option("--alpha-major", train.config.alpha_major, "training false-alarm fraction for t_M");
    cmd_train->add_option("--alpha-minor", train.config.alpha_minor, "training false-alarm fraction for t_m");
    cmd_train->add_option("--q", train.q, "number of major components");
    cmd_train->add_option("--r", train.r, "number of minor components");
    cmd_train->add_option("--encoder-scope", train.encoder_scope,
                          "tokens for categorical codes: all (every training record) or normal");

    std::string model_path, data_path, report_path, format = "text", input_path, tm_grid, tmm_grid;

    auto* cmd_eval = app.add_subcommand("evaluate", "score a labelled file and report detection metrics");
    cmd_eval->add_option("--model", model_path)->required();
    cmd_eval->add_option("--data", data_path)->required();
    cmd_eval->add_option("--report", report_path, "write the report here instead of stdout");
    cmd_eval->add_option("--format", format, "text or machine");

    auto* cmd_classify = app.add_subcommand("classify", "emit one verdict line per input record");
    cmd_classify->add_option("--model", model_path)->required();
    cmd_classify->add_option("--input", input_path, "records file (default: standard input)");

    auto* cmd_sweep = app.add_subcommand("sweep", "evaluate a grid of thresholds");
    cmd_sweep->add_option("--model", model_path)->required();
    cmd_sweep->add_option("--data", data_path)->required();
    cmd_sweep->add_option("--tm-grid", tm_grid, "t_M grid lo:hi:steps")->required();
    cmd_sweep->add_option("--tmm-grid", tmm_grid, "t_m grid lo:hi:steps");
    cmd_sweep->add_option("--format", format, "text or machine");

    auto* cmd_inspect = app.add_subcommand("inspect", "print the spectrum and verify model integrity");
    cmd_inspect->add_option("--model", model_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (*cmd_train) return run_train(train);
        if (*cmd_eval) return run_evaluate(model_path, data_path, report_path, format);
        if (*cmd_classify) return run_classify(model_path, input_path);
        if (*cmd_sweep) return run_sweep(model_path, data_path, tm_grid, tmm_grid, format);
        if (*cmd_inspect) return run_inspect(model_path);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n" << app.help();
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kUsageError;
}
