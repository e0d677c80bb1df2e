#include "czreach/experiment.hpp"
#include "czreach/verify.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace czreach;

TEST(Experiment, LtiDemoIsDeterministic)
{
    const ExperimentConfig cfg = default_config(Experiment::LtiDemo);
    const std::string a = sets_json_text(cfg, run_demo(cfg));
    const std::string b = sets_json_text(cfg, run_demo(cfg));
    EXPECT_EQ(a, b);
    const Json j = Json::parse(a);
    EXPECT_EQ(j["experiment"], "lti-demo");
    EXPECT_EQ(j["sets"].size(), static_cast<std::size_t>(cfg.horizon + 1));
}

TEST(Experiment, PolyDataDemoArtifacts)
{
    const ExperimentConfig cfg = default_config(Experiment::PolyDataDemo);
    const Artifacts art = run_experiment(cfg);
    EXPECT_EQ(art.exit_code, 0);
    const std::string& stats = art.file("stats.csv");
    EXPECT_EQ(stats.substr(0, stats.find('\n')), "step,generators,constraints,factors,millis");
    std::istringstream rows(stats);
    std::string line;
    int count = 0;
    while (std::getline(rows, line))
    {
        ++count;
    }
    // Header plus one row per propagated step.
    EXPECT_EQ(count, cfg.horizon + 1);
    EXPECT_NO_THROW(art.file("sets.json"));
    EXPECT_NO_THROW(art.file("model_history.json"));
    EXPECT_NO_THROW(art.file("data/trajectories.csv"));
    EXPECT_NO_THROW(art.file("data/noise.csv"));
    EXPECT_NO_THROW(art.file("projections/dims_1_2.csv"));
    EXPECT_NE(art.file("projections/dims_1_2.svg").find("<svg"), std::string::npos);
    EXPECT_NE(art.file("report.txt").find("area"), std::string::npos);
    EXPECT_THROW(art.file("missing.txt"), std::out_of_range);
}

TEST(Experiment, RankDeficientDataThrows)
{
    const ExperimentConfig cfg =
        parse_config_file(std::filesystem::path(CZREACH_SOURCE_DIR) / "tests/data/rank_deficient.json");
    EXPECT_THROW(run_experiment(cfg), RankDeficient);
}

TEST(Experiment, WriteArtifactsCreatesDirectories)
{
    Artifacts art;
    art.files.emplace_back("a/b/c.txt", "hello\n");
    const auto dir = std::filesystem::temp_directory_path() / "czreach_write_test";
    std::filesystem::remove_all(dir);
    write_artifacts(art, dir);
    std::ifstream in(dir / "a/b/c.txt");
    std::string content;
    std::getline(in, content);
    EXPECT_EQ(content, "hello");
    std::filesystem::remove_all(dir);
}

TEST(Projection, CsvAndSvg)
{
    ProjectionCloud cloud;
    cloud.d1 = 0;
    cloud.d2 = 2;
    cloud.steps = {0, 1};
    cloud.points = {{{0, 0}, {1, 0}, {0, 1}}, {{2, 2}}};
    const std::string csv = projection_csv(cloud);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,x1,x3");
    const std::string svg = projection_svg(cloud, "demo");
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Verify, MergeCriterionPasses)
{
    const CriterionResult r = run_criterion(3, 0);
    EXPECT_TRUE(r.passed) << r.detail;
    EXPECT_EQ(format_result_line(r).substr(0, 4), "PASS");
}

TEST(Verify, RandomSetsAreFeasibleAtSigma)
{
    Rng rng(9);
    for (int t = 0; t < 50; ++t)
    {
        const IdMix mix = random_id_mix(rng);
        const CPZ S = random_cpz(rng, 2, mix.first, mix.sigma);
        EXPECT_LE(constraint_residual(S, mix.sigma), 1e-10);
    }
}
