#ifndef CZREACH_CONFIG_HPP
#define CZREACH_CONFIG_HPP

#include "czreach/learning.hpp"
#include "czreach/serialize.hpp"
#include "czreach/sets.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace czreach
{

inline constexpr int kSchemaVersion = 1;

enum class Experiment
{
    LtiDemo,
    PolyModelDemo,
    PolyDataDemo,
    Verify
};

std::string to_string(Experiment e);
// Throws ValidationError("experiment") for unknown names.
Experiment experiment_from_string(const std::string& name);

// A set given by its matrices; every factor gets a fresh id when built.
// E defaults to the identity pattern (a zonotope), constraints to none.
struct SetSpec
{
    Vector c;
    Matrix G;
    Eigen::MatrixXi E;
    Matrix A;
    Vector b;
    Eigen::MatrixXi R;

    CPZ build() const;
};

// Trajectories are simulated from the initial set; the first `offline`
// trajectories form the offline batch and the next `online` ones arrive
// before step `online_step`.
struct DataSpec
{
    Index trajectories = 0;
    Index transitions = 0;
    Index offline = 0;
    Index online = 0;
    Index online_step = 0;
};

struct ExperimentConfig
{
    int schema_version = kSchemaVersion;
    Experiment experiment = Experiment::Verify;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    Index horizon = 1;
    Index batch_length = 0;
    std::optional<Index> reduction_order;
    std::optional<Index> restructure_above = 50;

    // LTI system x+ = Phi x + Gamma u + w.
    Matrix Phi;
    Matrix Gamma;
    // Polynomial system x+ = Theta h(x, u) + w.
    Matrix Theta;
    std::optional<MonomialBasis> system_basis;
    // Basis used for learning; defaults to system_basis.
    std::optional<MonomialBasis> model_basis;

    std::optional<SetSpec> initial_set;
    std::optional<SetSpec> input_set;
    std::optional<SetSpec> noise_set;
    std::optional<DataSpec> data;

    int projection_samples = 1000;
};

// Throws ParseError for malformed JSON and ValidationError naming the field
// for missing or inconsistent entries.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

// Checks the fields required by cfg.experiment and their dimensions.
void validate(const ExperimentConfig& cfg);

// Inverse of parse_config; defaults are written explicitly.
Json config_to_json(const ExperimentConfig& cfg);

// Built-in configuration for each experiment.
ExperimentConfig default_config(Experiment e);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

} // namespace czreach

#endif
