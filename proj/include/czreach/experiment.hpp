#ifndef CZREACH_EXPERIMENT_HPP
#define CZREACH_EXPERIMENT_HPP

#include "czreach/config.hpp"
#include "czreach/reach.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace czreach
{

// Files produced by one experiment, as (relative path, content) pairs.
struct Artifacts
{
    std::vector<std::pair<std::string, std::string>> files;
    std::string summary;
    int exit_code = 0;

    // Content of the file at path; throws std::out_of_range when absent.
    const std::string& file(const std::string& path) const;
};

struct RunOptions
{
    // Worker threads for the verification suite and projection sampling;
    // 0 reads CZREACH_THREADS.
    unsigned threads = 0;
};

// Positive value of CZREACH_THREADS, otherwise the hardware concurrency
// (at least 1).
unsigned worker_threads_from_env();

// Reach computation of a demo experiment, with the data it was learned from.
struct DemoRun
{
    ReachResult result;
    std::vector<Trajectory> trajectories;
    std::vector<NoiseRecord> noise;
};

DemoRun run_demo(const ExperimentConfig& cfg);

// Canonical sets.json text of a demo run.
std::string sets_json_text(const ExperimentConfig& cfg, const DemoRun& run);

// Runs cfg.experiment. Demos write sets.json, model_history.json,
// stats.csv, projections/*.csv and *.svg, data/*.csv and report.txt;
// verify writes report.txt and sets exit_code 3 when a criterion fails.
// Errors propagate as exceptions.
Artifacts run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {});

void write_artifacts(const Artifacts& artifacts, const std::filesystem::path& dir);

// Point cloud of one 2-D projection over several steps.
struct ProjectionCloud
{
    Index d1 = 0;
    Index d2 = 1;
    std::vector<Index> steps;
    std::vector<std::vector<Eigen::Vector2d>> points;
};

// RFC 4180 CSV with header step,x<d1+1>,x<d2+1>.
std::string projection_csv(const ProjectionCloud& cloud);

// Static SVG 1.1 scatter plot with the convex hull of every step.
std::string projection_svg(const ProjectionCloud& cloud, const std::string& title);

} // namespace czreach

#endif
