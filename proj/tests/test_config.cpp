#include "czreach/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace czreach;

namespace
{

const std::filesystem::path kSource = CZREACH_SOURCE_DIR;

Json load(const std::filesystem::path& rel)
{
    return Json::parse(std::ifstream(kSource / rel));
}

std::string validation_field(const Json& j)
{
    try
    {
        parse_config(j);
    }
    catch (const ValidationError& e)
    {
        return e.field();
    }
    return "";
}

} // namespace

TEST(Config, BundledLtiDemoParses)
{
    const ExperimentConfig cfg = parse_config_file(kSource / "configs/lti-demo.json");
    EXPECT_EQ(cfg.experiment, Experiment::LtiDemo);
    EXPECT_DOUBLE_EQ(cfg.Phi(0, 0), 0.9323);
    EXPECT_EQ(cfg.Phi.rows(), 5);
    EXPECT_EQ(cfg.Gamma.cols(), 1);
    ASSERT_TRUE(cfg.noise_set.has_value());
    EXPECT_EQ(cfg.noise_set->G, 0.005 * Matrix::Identity(5, 5));
}

TEST(Config, MissingNoiseSetNamesField)
{
    Json j = load("configs/lti-demo.json");
    j.erase("noise_set");
    EXPECT_EQ(validation_field(j), "noise_set");
    EXPECT_THROW(parse_config_file(kSource / "tests/data/missing_noise.json"), ValidationError);
}

TEST(Config, RejectsBadEntries)
{
    Json j = load("configs/lti-demo.json");
    j["experiment"] = "nope";
    EXPECT_EQ(validation_field(j), "experiment");
    j = load("configs/lti-demo.json");
    j["schema_version"] = 2;
    EXPECT_EQ(validation_field(j), "schema_version");
    j = load("configs/lti-demo.json");
    j["system"]["Gamma"] = Json::parse("[[1.0], [2.0]]");
    EXPECT_FALSE(validation_field(j).empty());
    EXPECT_THROW(parse_config_file(kSource / "no/such/file.json"), ParseError);
}

TEST(Config, RoundTripIsIdentity)
{
    for (Experiment e : {Experiment::LtiDemo, Experiment::PolyModelDemo, Experiment::PolyDataDemo,
                         Experiment::Verify})
    {
        const ExperimentConfig cfg = default_config(e);
        const Json j = config_to_json(cfg);
        const ExperimentConfig back = parse_config(Json::parse(j.dump()));
        EXPECT_TRUE(back == cfg) << to_string(e);
        EXPECT_EQ(config_to_json(back), j);
    }
}

TEST(Config, BundledFilesMatchDefaults)
{
    EXPECT_TRUE(parse_config_file(kSource / "configs/lti-demo.json") == default_config(Experiment::LtiDemo));
    EXPECT_TRUE(parse_config_file(kSource / "configs/poly-model-demo.json") ==
                default_config(Experiment::PolyModelDemo));
    EXPECT_TRUE(parse_config_file(kSource / "configs/poly-data-demo.json") ==
                default_config(Experiment::PolyDataDemo));
    EXPECT_TRUE(parse_config_file(kSource / "configs/verify.json") == default_config(Experiment::Verify));
}

TEST(Config, VariantsParse)
{
    for (const char* name : {"poly-model-demo-nonconvex", "poly-data-large-noise"})
    {
        EXPECT_NO_THROW(parse_config_file(kSource / "configs" / (std::string(name) + ".json"))) << name;
    }
}

TEST(Config, DefaultsWhenOmitted)
{
    const Json j = Json::parse(R"({"schema_version": 1, "experiment": "verify"})");
    const ExperimentConfig cfg = parse_config(j);
    EXPECT_EQ(cfg.seed, 0u);
    EXPECT_EQ(cfg.output_dir, "out");
    EXPECT_FALSE(cfg.reduction_order.has_value());
    EXPECT_EQ(cfg.restructure_above, std::optional<Index>(50));
    Json off = j;
    off["restructure_above"] = nullptr;
    EXPECT_FALSE(parse_config(off).restructure_above.has_value());
}

TEST(Config, ExperimentNames)
{
    for (Experiment e : {Experiment::LtiDemo, Experiment::PolyModelDemo, Experiment::PolyDataDemo,
                         Experiment::Verify})
    {
        EXPECT_EQ(experiment_from_string(to_string(e)), e);
    }
    EXPECT_EQ(to_string(Experiment::LtiDemo), "lti-demo");
    EXPECT_THROW(experiment_from_string("lti"), ValidationError);
}

TEST(Config, SetSpecBuildsFreshIds)
{
    const ExperimentConfig cfg = default_config(Experiment::LtiDemo);
    const CPZ a = cfg.initial_set->build();
    const CPZ b = cfg.initial_set->build();
    EXPECT_EQ(a.generators(), b.generators());
    EXPECT_NE(a.ids(), b.ids());
}
