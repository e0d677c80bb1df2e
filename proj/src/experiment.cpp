#include "czreach/experiment.hpp"

#include "czreach/oracle.hpp"
#include "czreach/verify.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace czreach
{

namespace
{

ReachConfig reach_config(const ExperimentConfig& cfg, const CPZ& X0, const CPZ& U, const CPZ& W)
{
    ReachConfig rc;
    rc.horizon = cfg.horizon;
    rc.batch_length = cfg.batch_length;
    rc.reduction_order = cfg.reduction_order;
    rc.restructure_above = cfg.restructure_above;
    rc.seed = cfg.seed;
    rc.noise_set = W;
    rc.input_sets = {U};
    rc.initial_set = X0;
    return rc;
}

std::vector<std::pair<Index, Index>> projection_dims(const ExperimentConfig& cfg)
{
    if (cfg.experiment == Experiment::LtiDemo && cfg.initial_set->c.size() >= 5)
    {
        return {{0, 1}, {2, 3}, {3, 4}};
    }
    return {{0, 1}};
}

std::string stats_csv(const ReachResult& result)
{
    std::ostringstream out;
    out << "step,generators,constraints,factors,millis\n";
    for (const auto& s : result.stats)
    {
        out << s.step << ',' << s.generators << ',' << s.constraints << ',' << s.factors << ','
            << format_number(s.millis) << '\n';
    }
    return out.str();
}

std::string fixed(double v, int digits)
{
    std::ostringstream out;
    out << std::setprecision(digits) << v;
    return out.str();
}

// Feasible points of every reachable set, projected onto each pair of dims.
// Every step samples from its own stream, so the result does not depend on
// the number of threads.
std::vector<ProjectionCloud> sample_projections(const ExperimentConfig& cfg,
                                                const ReachResult& result, unsigned threads)
{
    const std::size_t steps = result.sets.size();
    std::vector<std::vector<Vector>> pts(steps);
    const Rng base(cfg.seed);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < steps; k = next++)
        {
            Rng rng = base.split(1000 + k);
            const CPZ& S = result.sets[k];
            for (int i = 0; i < cfg.projection_samples; ++i)
            {
                if (auto sigma = sample_feasible(S, rng))
                {
                    pts[k].push_back(eval_point(S, *sigma));
                }
            }
        }
    };
    const unsigned n = std::clamp<unsigned>(threads, 1u, static_cast<unsigned>(std::max<std::size_t>(steps, 1)));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t)
    {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool)
    {
        th.join();
    }

    std::vector<ProjectionCloud> clouds;
    for (const auto& [d1, d2] : projection_dims(cfg))
    {
        ProjectionCloud c;
        c.d1 = d1;
        c.d2 = d2;
        for (std::size_t k = 0; k < steps; ++k)
        {
            c.steps.push_back(static_cast<Index>(k));
            std::vector<Eigen::Vector2d> proj;
            proj.reserve(pts[k].size());
            for (const auto& x : pts[k])
            {
                proj.emplace_back(x(c.d1), x(c.d2));
            }
            c.points.push_back(std::move(proj));
        }
        clouds.push_back(std::move(c));
    }
    return clouds;
}

std::string demo_report(const ExperimentConfig& cfg, const DemoRun& run,
                        const std::vector<ProjectionCloud>& clouds)
{
    std::ostringstream out;
    out << "experiment " << to_string(cfg.experiment) << "\n";
    out << "seed " << cfg.seed << "\n";
    out << "horizon " << cfg.horizon << "\n";
    out << "models " << run.result.model_history.size() << "\n";
    out << "projections are sampled point clouds (approximate, not used for soundness)\n";
    for (const auto& s : run.result.stats)
    {
        out << "step " << s.step << ": generators " << s.generators << ", constraint rows "
            << s.constraints << ", factors " << s.factors << ", time " << fixed(s.millis, 4)
            << " ms\n";
    }
    for (const auto& c : clouds)
    {
        for (std::size_t k = 0; k < c.steps.size(); ++k)
        {
            out << "hull area dims (" << c.d1 + 1 << "," << c.d2 + 1 << ") step " << c.steps[k]
                << ": " << fixed(polygon_area(convex_hull(c.points[k])), 8) << " from "
                << c.points[k].size() << " points\n";
        }
    }
    if (cfg.experiment == Experiment::PolyDataDemo && run.result.sets.size() > 1 &&
        !clouds.empty())
    {
        // Interval-arithmetic yardstick for the first step.
        const auto& M = run.result.model_history[static_cast<std::size_t>(
            run.result.model_at_step[0])];
        const auto& basis = cfg.model_basis ? *cfg.model_basis : *cfg.system_basis;
        const CPZ Z = cartesian_exact(run.result.sets[0], run.result.inputs_used[0]);
        const auto box = interval_baseline_poly(interval_hull(M.set), to_intervals(interval_hull(Z)),
                                                basis, to_intervals(interval_hull(run.result.noise_used[0])));
        const double box_area = box[0].width() * box[1].width();
        const double area = polygon_area(convex_hull(clouds[0].points[1]));
        out << "interval baseline area step 1: " << fixed(box_area, 8) << "\n";
        out << "exact / baseline area ratio step 1: " << fixed(area / box_area, 6) << "\n";
    }
    return out.str();
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

} // namespace

const std::string& Artifacts::file(const std::string& path) const
{
    for (const auto& [p, content] : files)
    {
        if (p == path)
        {
            return content;
        }
    }
    throw std::out_of_range("no artifact " + path);
}

unsigned worker_threads_from_env()
{
    if (const char* env = std::getenv("CZREACH_THREADS"))
    {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
        {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

DemoRun run_demo(const ExperimentConfig& cfg)
{
    validate(cfg);
    if (cfg.experiment == Experiment::Verify)
    {
        throw std::invalid_argument("run_demo: verify is not a demo experiment");
    }
    Rng rng(cfg.seed);
    const CPZ X0 = cfg.initial_set->build();
    const CPZ U = cfg.input_set->build();
    const CPZ W = cfg.noise_set->build();
    const ReachConfig rc = reach_config(cfg, X0, U, W);

    DemoRun run;
    if (cfg.experiment == Experiment::PolyModelDemo)
    {
        run.result = run_poly_model(rc, cfg.Theta, *cfg.system_basis);
        return run;
    }

    const auto& d = *cfg.data;
    SimulatedData data;
    if (cfg.experiment == Experiment::LtiDemo)
    {
        data = simulate_dataset_lti(cfg.Phi, cfg.Gamma, X0, U, W, d.trajectories, d.transitions, rng);
    }
    else
    {
        data = simulate_dataset_poly(cfg.Theta, *cfg.system_basis, X0, U, W, d.trajectories,
                                     d.transitions, rng);
    }
    const auto first = static_cast<std::size_t>(d.offline);
    const auto last = static_cast<std::size_t>(d.offline + d.online);
    const LabeledBatch offline = data.batch(0, first);
    const SampleStream stream = data.stream(first, last, d.online_step);
    if (cfg.experiment == Experiment::LtiDemo)
    {
        run.result = run_lti(rc, offline, stream);
    }
    else
    {
        const auto& basis = cfg.model_basis ? *cfg.model_basis : *cfg.system_basis;
        run.result = run_poly_data(rc, offline, stream, basis);
    }
    run.trajectories = data.trajectories;
    run.noise = data.noise_records();
    return run;
}

std::string sets_json_text(const ExperimentConfig& cfg, const DemoRun& run)
{
    const IdCanon canon = canonical_ids(run.result);
    Json j = reach_result_to_json(run.result, canon);
    j["experiment"] = to_string(cfg.experiment);
    j["seed"] = cfg.seed;
    return j.dump() + "\n";
}

Artifacts run_experiment(const ExperimentConfig& cfg, const RunOptions& opt)
{
    Artifacts out;
    if (cfg.experiment == Experiment::Verify)
    {
        VerifyOptions vo;
        vo.seed = cfg.seed;
        vo.threads = opt.threads > 0 ? opt.threads : worker_threads_from_env();
        const auto results = run_acceptance(vo);
        std::ostringstream report;
        bool all = true;
        for (const auto& r : results)
        {
            report << format_result_line(r) << "\n";
            all = all && r.passed;
        }
        report << (all ? "all criteria passed" : "some criteria failed") << "\n";
        out.files.emplace_back("report.txt", report.str());
        out.summary = report.str();
        out.exit_code = all ? 0 : 3;
        return out;
    }

    const DemoRun run = run_demo(cfg);
    const IdCanon canon = canonical_ids(run.result);
    out.files.emplace_back("sets.json", sets_json_text(cfg, run));
    out.files.emplace_back("model_history.json",
                           model_history_to_json(run.result, canon).dump() + "\n");
    out.files.emplace_back("stats.csv", stats_csv(run.result));
    if (!run.trajectories.empty())
    {
        std::ostringstream traj;
        write_trajectories_csv(traj, run.trajectories);
        out.files.emplace_back("data/trajectories.csv", traj.str());
        std::ostringstream noise;
        write_noise_csv(noise, run.noise);
        out.files.emplace_back("data/noise.csv", noise.str());
    }
    const unsigned threads = opt.threads > 0 ? opt.threads : worker_threads_from_env();
    const auto clouds = sample_projections(cfg, run.result, threads);
    for (const auto& c : clouds)
    {
        const std::string stem = "projections/dims_" + std::to_string(c.d1 + 1) + "_" +
                                 std::to_string(c.d2 + 1);
        out.files.emplace_back(stem + ".csv", projection_csv(c));
        out.files.emplace_back(stem + ".svg",
                               projection_svg(c, to_string(cfg.experiment) + " reachable sets"));
    }
    const std::string report = demo_report(cfg, run, clouds);
    out.files.emplace_back("report.txt", report);
    out.summary = report;
    return out;
}

void write_artifacts(const Artifacts& artifacts, const std::filesystem::path& dir)
{
    for (const auto& [rel, content] : artifacts.files)
    {
        const auto path = dir / rel;
        std::filesystem::create_directories(path.parent_path());
        std::ofstream f(path, std::ios::binary);
        if (!f)
        {
            throw std::runtime_error("cannot write " + path.string());
        }
        f << content;
    }
}

std::string projection_csv(const ProjectionCloud& cloud)
{
    std::ostringstream out;
    out << "step,x" << cloud.d1 + 1 << ",x" << cloud.d2 + 1 << "\n";
    for (std::size_t k = 0; k < cloud.steps.size(); ++k)
    {
        for (const auto& p : cloud.points[k])
        {
            out << cloud.steps[k] << ',' << format_number(p.x()) << ',' << format_number(p.y())
                << '\n';
        }
    }
    return out.str();
}

std::string projection_svg(const ProjectionCloud& cloud, const std::string& title)
{
    constexpr double W = 560.0;
    constexpr double H = 480.0;
    constexpr double left = 70.0;
    constexpr double right = 110.0;
    constexpr double top = 40.0;
    constexpr double bottom = 50.0;

    double x0 = 0.0;
    double x1 = 0.0;
    double y0 = 0.0;
    double y1 = 0.0;
    bool any = false;
    for (const auto& pts : cloud.points)
    {
        for (const auto& p : pts)
        {
            if (!any)
            {
                x0 = x1 = p.x();
                y0 = y1 = p.y();
                any = true;
            }
            x0 = std::min(x0, p.x());
            x1 = std::max(x1, p.x());
            y0 = std::min(y0, p.y());
            y1 = std::max(y1, p.y());
        }
    }
    const double padx = std::max(1e-12, 0.05 * (x1 - x0));
    const double pady = std::max(1e-12, 0.05 * (y1 - y0));
    x0 -= padx;
    x1 += padx;
    y0 -= pady;
    y1 += pady;
    const double pw = W - left - right;
    const double ph = H - top - bottom;
    auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto sy = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };
    auto num = [](double v) { return fixed(v, 6); };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W
        << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
        << "<title>" << title << "</title>\n"
        << "<desc>Sampled feasible points of each reachable set projected onto x" << cloud.d1 + 1
        << " and x" << cloud.d2 + 1
        << "; outlines are convex hulls of the samples. Point clouds approximate the sets and "
           "are not used for any soundness claim.</desc>\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
        << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">"
        << title << "</text>\n";
    for (int t = 0; t <= 4; ++t)
    {
        const double fx = x0 + (x1 - x0) * t / 4.0;
        const double fy = y0 + (y1 - y0) * t / 4.0;
        out << "<text x=\"" << num(sx(fx)) << "\" y=\"" << H - bottom + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << num(fx)
            << "</text>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << num(sy(fy) + 3)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << num(fy)
            << "</text>\n";
    }
    out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">x" << cloud.d1 + 1
        << "</text>\n";
    out << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " << top + ph / 2
        << ")\">x" << cloud.d2 + 1 << "</text>\n";

    for (std::size_t k = 0; k < cloud.steps.size(); ++k)
    {
        const char* color = kPalette[k % std::size(kPalette)];
        out << "<g fill=\"" << color << "\" fill-opacity=\"0.35\">\n";
        for (const auto& p : cloud.points[k])
        {
            out << "<circle cx=\"" << num(sx(p.x())) << "\" cy=\"" << num(sy(p.y()))
                << "\" r=\"1.2\"/>\n";
        }
        out << "</g>\n";
        const auto hull = convex_hull(cloud.points[k]);
        if (hull.size() >= 2)
        {
            out << "<polygon fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
            for (const auto& p : hull)
            {
                out << num(sx(p.x())) << ',' << num(sy(p.y())) << ' ';
            }
            out << "\"/>\n";
        }
        const double ly = top + 14.0 + 16.0 * static_cast<double>(k);
        out << "<rect x=\"" << W - right + 12 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" "
            << "fill=\"" << color << "\"/>\n"
            << "<text x=\"" << W - right + 28 << "\" y=\"" << ly
            << "\" font-family=\"sans-serif\" font-size=\"11\">step " << cloud.steps[k] << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace czreach
