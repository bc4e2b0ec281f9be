#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "pca_ids/detector.hpp"
#include "pca_ids/model_io.hpp"
#include "pca_ids/trainer.hpp"
#include "support/synthetic_kdd.hpp"

using namespace pca_ids;

namespace {

Dataset data(const FeatureProfile& profile) {
    synth::SyntheticKdd gen(23);
    std::istringstream in(gen.text({500, 200, 80, 20, 5}));
    return read_dataset(in, profile, "synthetic.txt");
}

PcaModel model(const FeatureProfile& profile, int q, int r) {
    TrainerConfig cfg;
    cfg.q_override = q;
    cfg.r_override = r;
    auto m = fit(data(profile), profile, cfg);
    m.provenance.created = "2026-01-01T00:00:00Z";
    return m;
}

}  // namespace

TEST(ModelFile, RoundTripIsBitStableAtVerdictLevel) {
    for (auto [profile, q, r] : {std::tuple{FeatureProfile::basic6(), 3, 0}, std::tuple{FeatureProfile::traffic10(), 3, 2}}) {
        auto m = model(profile, q, r);
        auto text = save_model_string(m);
        auto loaded = load_model_string(text);
        EXPECT_EQ(save_model_string(loaded), text);
        EXPECT_EQ(loaded.encoder, m.encoder);
        EXPECT_EQ(loaded.t_major, m.t_major);
        EXPECT_EQ(loaded.t_minor, m.t_minor);
        for (const auto& rec : data(profile).records) {
            auto a = classify(m, rec);
            auto b = classify(loaded, rec);
            EXPECT_EQ(a.majc_score, b.majc_score);
            EXPECT_EQ(a.minc_score, b.minc_score);
            EXPECT_EQ(a.is_attack, b.is_attack);
        }
    }
}

TEST(ModelFile, FileRoundTrip) {
    auto m = model(FeatureProfile::basic6(), 3, 0);
    auto path = (std::filesystem::temp_directory_path() / "pca_ids_model_io_test.model").string();
    save_model(m, path);
    auto loaded = load_model(path);
    EXPECT_EQ(save_model_string(loaded), save_model_string(m));
    std::filesystem::remove(path);
    EXPECT_THROW(load_model(path), IoError);
}

TEST(ModelFile, VersionMismatchIsFatal) {
    auto j = model_to_json(model(FeatureProfile::basic6(), 3, 0));
    j["format_version"] = 99;
    try {
        load_model_string(j.dump());
        FAIL();
    } catch (const ModelFormatError& e) {
        EXPECT_NE(std::string(e.what()).find("format_version 99"), std::string::npos);
    }
}

TEST(ModelFile, TamperedEigenvectorsFailIntegrity) {
    auto j = model_to_json(model(FeatureProfile::basic6(), 3, 0));
    j["eigen"]["vectors"][0][0] = j["eigen"]["vectors"][0][0].get<double>() + 0.01;
    EXPECT_THROW(load_model_string(j.dump()), ModelFormatError);
    auto unchecked = load_model_string(j.dump(), false);
    EXPECT_FALSE(check_integrity(unchecked).orthonormal_ok());
}

TEST(ModelFile, TamperedSpectrumFailsIntegrity) {
    auto j = model_to_json(model(FeatureProfile::basic6(), 3, 0));
    j["eigen"]["lambda"][0] = j["eigen"]["lambda"][0].get<double>() + 0.5;
    EXPECT_THROW(load_model_string(j.dump()), ModelFormatError);
}

TEST(ModelFile, StructuralErrors) {
    EXPECT_THROW(load_model_string("not json"), ModelFormatError);
    EXPECT_THROW(load_model_string("{}"), ModelFormatError);
    auto j = model_to_json(model(FeatureProfile::traffic10(), 3, 2));
    auto no_minor = j;
    no_minor["thresholds"]["t_minor"] = nullptr;
    EXPECT_THROW(load_model_string(no_minor.dump()), ModelFormatError);
    auto bad_q = j;
    bad_q["selection"]["q"] = 11;
    EXPECT_THROW(load_model_string(bad_q.dump()), ModelFormatError);
    auto bad_codes = j;
    bad_codes["encoder"]["2"]["tcp"] = 0;
    bad_codes["encoder"]["2"]["icmp"] = 1;
    EXPECT_THROW(load_model_string(bad_codes.dump()), ModelFormatError);
}

TEST(ModelFile, R0StoresNullMinorThreshold) {
    auto j = model_to_json(model(FeatureProfile::basic6(), 3, 0));
    EXPECT_TRUE(j["thresholds"]["t_minor"].is_null());
    EXPECT_EQ(j["format_version"], kModelFormatVersion);
    EXPECT_EQ(j["profile"]["name"], "basic6");
}
