#include "czreach/config.hpp"
#include "czreach/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace
{

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 4;

int fail(int code, const std::string& kind, const std::string& message, const std::string& field = "")
{
    czreach::Json err{{"kind", kind}, {"message", message}, {"exit_code", code}};
    if (!field.empty())
    {
        err["field"] = field;
    }
    std::cerr << czreach::Json{{"error", err}}.dump() << std::endl;
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact data-driven reachability with constrained polynomial zonotopes"};
    std::string config_path;
    std::string experiment;
    std::optional<std::uint64_t> seed;
    std::optional<long> reduce;
    std::string out_dir;
    app.add_option("--config", config_path, "experiment configuration (JSON, schema_version 1)");
    app.add_option("--experiment", experiment,
                   "lti-demo, poly-model-demo, poly-data-demo or verify; overrides the config");
    app.add_option("--seed", seed, "random seed (default 0)");
    app.add_option("--reduce", reduce, "reduction order: at most K generators per state dimension");
    app.add_option("--out", out_dir, "output directory");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        return fail(kExitConfig, "UsageError", e.what());
    }

    try
    {
        czreach::ExperimentConfig cfg;
        if (!config_path.empty())
        {
            cfg = czreach::parse_config_file(config_path);
        }
        else if (!experiment.empty())
        {
            cfg = czreach::default_config(czreach::experiment_from_string(experiment));
        }
        else
        {
            return fail(kExitConfig, "UsageError", "either --config or --experiment is required");
        }
        if (!experiment.empty())
        {
            cfg.experiment = czreach::experiment_from_string(experiment);
        }
        if (seed)
        {
            cfg.seed = *seed;
        }
        if (reduce)
        {
            if (*reduce < 1)
            {
                throw czreach::ValidationError("reduction_order", "--reduce must be at least 1");
            }
            cfg.reduction_order = static_cast<czreach::Index>(*reduce);
        }
        if (!out_dir.empty())
        {
            cfg.output_dir = out_dir;
        }
        czreach::validate(cfg);

        czreach::Artifacts artifacts = czreach::run_experiment(cfg);
        artifacts.files.emplace_back("config.json", czreach::config_to_json(cfg).dump(2) + "\n");
        czreach::write_artifacts(artifacts, cfg.output_dir);
        std::cout << artifacts.summary;
        std::cout << "artifacts written to " << cfg.output_dir << std::endl;
        return artifacts.exit_code;
    }
    catch (const czreach::ValidationError& e)
    {
        return fail(kExitConfig, "ValidationError", e.what(), e.field());
    }
    catch (const czreach::ParseError& e)
    {
        return fail(kExitConfig, "ParseError", e.what());
    }
    catch (const czreach::RankDeficient& e)
    {
        return fail(kExitNumerical, "RankDeficient", e.what());
    }
    catch (const czreach::Error& e)
    {
        return fail(kExitNumerical, "NumericalError", e.what());
    }
    catch (const std::exception& e)
    {
        return fail(kExitNumerical, "NumericalError", e.what());
    }
}
