#include "czreach/config.hpp"

#include "czreach/scenarios.hpp"

#include <fstream>
#include <sstream>

namespace czreach
{

namespace
{

const Json& require(const Json& j, const std::string& key, const std::string& path)
{
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null())
    {
        throw ValidationError(path, "required field is missing");
    }
    return j.at(key);
}

std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

// Converts ParseError from the matrix readers into a ValidationError that
// carries the field path.
template<class F>
auto field(const std::string& path, F&& f)
{
    try
    {
        return f();
    }
    catch (const ValidationError&)
    {
        throw;
    }
    catch (const Error& e)
    {
        throw ValidationError(path, e.what());
    }
    catch (const Json::exception& e)
    {
        throw ValidationError(path, e.what());
    }
}

Index read_index(const Json& j, const std::string& path, Index min)
{
    return field(path, [&] {
        if (!j.is_number_integer())
        {
            throw ValidationError(path, "expected an integer");
        }
        const auto v = j.get<std::int64_t>();
        if (v < min)
        {
            throw ValidationError(path, "must be at least " + std::to_string(min));
        }
        return static_cast<Index>(v);
    });
}

std::optional<Index> read_optional_index(const Json& j, const std::string& key,
                                         const std::string& path, Index min,
                                         std::optional<Index> fallback)
{
    if (!j.contains(key))
    {
        return fallback;
    }
    if (j.at(key).is_null())
    {
        return std::nullopt;
    }
    return read_index(j.at(key), join(path, key), min);
}

Json optional_index_json(const std::optional<Index>& v)
{
    return v ? Json(*v) : Json(nullptr);
}

SetSpec read_set(const Json& j, const std::string& path)
{
    if (!j.is_object())
    {
        throw ValidationError(path, "expected an object with keys c, G and optionally E, A, b, R");
    }
    SetSpec s;
    s.c = field(join(path, "c"), [&] { return vector_from_json(require(j, "c", join(path, "c")), "c"); });
    const Index n = s.c.size();
    if (j.contains("G"))
    {
        s.G = field(join(path, "G"), [&] { return matrix_from_json(j.at("G"), "G"); });
        if (s.G.size() == 0)
        {
            s.G.resize(n, 0);
        }
    }
    else
    {
        s.G.resize(n, 0);
    }
    if (s.G.rows() != n)
    {
        throw ValidationError(join(path, "G"), "row count differs from the length of c");
    }
    if (j.contains("E"))
    {
        s.E = field(join(path, "E"), [&] { return int_matrix_from_json(j.at("E"), "E"); });
    }
    else
    {
        s.E = Eigen::MatrixXi::Identity(s.G.cols(), s.G.cols());
    }
    if (s.E.cols() != s.G.cols() && !(s.E.size() == 0 && s.G.cols() == 0))
    {
        throw ValidationError(join(path, "E"), "column count differs from G");
    }
    const Index p = s.E.rows();
    if (j.contains("A"))
    {
        s.A = field(join(path, "A"), [&] { return matrix_from_json(j.at("A"), "A"); });
        s.b = field(join(path, "b"), [&] { return vector_from_json(require(j, "b", join(path, "b")), "b"); });
        s.R = field(join(path, "R"), [&] { return int_matrix_from_json(require(j, "R", join(path, "R")), "R"); });
        if (s.A.rows() != s.b.size())
        {
            throw ValidationError(join(path, "b"), "length differs from the rows of A");
        }
        if (s.R.cols() != s.A.cols() || s.R.rows() != p)
        {
            throw ValidationError(join(path, "R"), "shape must be (rows of E) x (columns of A)");
        }
    }
    else
    {
        s.A.resize(0, 0);
        s.b.resize(0);
        s.R.resize(p, 0);
    }
    field(path, [&] { return s.build(); });
    return s;
}

Json set_json(const SetSpec& s)
{
    Json j{{"c", to_json(s.c)}, {"G", to_json(s.G)}, {"E", Json::array()}};
    for (Index i = 0; i < s.E.rows(); ++i)
    {
        Json row = Json::array();
        for (Index k = 0; k < s.E.cols(); ++k)
        {
            row.push_back(s.E(i, k));
        }
        j["E"].push_back(std::move(row));
    }
    if (s.A.rows() > 0)
    {
        j["A"] = to_json(s.A);
        j["b"] = to_json(s.b);
        Json R = Json::array();
        for (Index i = 0; i < s.R.rows(); ++i)
        {
            Json row = Json::array();
            for (Index k = 0; k < s.R.cols(); ++k)
            {
                row.push_back(s.R(i, k));
            }
            R.push_back(std::move(row));
        }
        j["R"] = std::move(R);
    }
    return j;
}

MonomialBasis read_basis(const Json& j, const std::string& path, Index num_vars)
{
    return field(path, [&] {
        if (j.is_object())
        {
            const int d = static_cast<int>(read_index(require(j, "degree_bound", join(path, "degree_bound")),
                                                      join(path, "degree_bound"), 0));
            return monomial_basis(num_vars, d);
        }
        return monomial_basis_custom(j.get<std::vector<std::vector<int>>>());
    });
}

Json basis_json(const MonomialBasis& basis)
{
    Json out = Json::array();
    for (const auto& e : basis.exponents)
    {
        Json row = Json::array();
        for (Index i = 0; i < e.size(); ++i)
        {
            row.push_back(e(i));
        }
        out.push_back(std::move(row));
    }
    return out;
}

SetSpec zonotope_spec(const Vector& c, const Matrix& G)
{
    SetSpec s;
    s.c = c;
    s.G = G;
    s.E = Eigen::MatrixXi::Identity(G.cols(), G.cols());
    s.A.resize(0, 0);
    s.b.resize(0);
    s.R.resize(G.cols(), 0);
    return s;
}

Index set_dim(const std::optional<SetSpec>& s)
{
    return s ? s->c.size() : 0;
}

void require_set(const std::optional<SetSpec>& s, const std::string& name, Index dim)
{
    if (!s)
    {
        throw ValidationError(name, "required field is missing");
    }
    if (s->c.size() != dim)
    {
        throw ValidationError(name, "dimension " + std::to_string(s->c.size()) + " but " +
                                        std::to_string(dim) + " expected");
    }
}

} // namespace

std::string to_string(Experiment e)
{
    switch (e)
    {
        case Experiment::LtiDemo:
            return "lti-demo";
        case Experiment::PolyModelDemo:
            return "poly-model-demo";
        case Experiment::PolyDataDemo:
            return "poly-data-demo";
        case Experiment::Verify:
            return "verify";
    }
    return "verify";
}

Experiment experiment_from_string(const std::string& name)
{
    for (auto e : {Experiment::LtiDemo, Experiment::PolyModelDemo, Experiment::PolyDataDemo,
                   Experiment::Verify})
    {
        if (to_string(e) == name)
        {
            return e;
        }
    }
    throw ValidationError("experiment", "unknown experiment '" + name + "'");
}

CPZ SetSpec::build() const
{
    if (A.rows() == 0)
    {
        return CPZ::polynomial(c, G, E, fresh_ids(static_cast<std::size_t>(E.rows())));
    }
    return CPZ::from_dense(c, G, E, A, b, R, fresh_ids(static_cast<std::size_t>(E.rows())));
}

ExperimentConfig parse_config(const Json& j)
{
    if (!j.is_object())
    {
        throw ValidationError("", "configuration must be a JSON object");
    }
    ExperimentConfig cfg;
    cfg.schema_version = static_cast<int>(read_index(require(j, "schema_version", "schema_version"),
                                                     "schema_version", 1));
    if (cfg.schema_version != kSchemaVersion)
    {
        throw ValidationError("schema_version", "unsupported version " +
                                                    std::to_string(cfg.schema_version));
    }
    cfg.experiment = field("experiment", [&] {
        return experiment_from_string(require(j, "experiment", "experiment").get<std::string>());
    });
    if (j.contains("seed"))
    {
        cfg.seed = field("seed", [&] { return j.at("seed").get<std::uint64_t>(); });
    }
    if (j.contains("output_dir"))
    {
        cfg.output_dir = field("output_dir", [&] { return j.at("output_dir").get<std::string>(); });
    }
    if (j.contains("horizon"))
    {
        cfg.horizon = read_index(j.at("horizon"), "horizon", 1);
    }
    if (j.contains("batch_length"))
    {
        cfg.batch_length = read_index(j.at("batch_length"), "batch_length", 0);
    }
    cfg.reduction_order = read_optional_index(j, "reduction_order", "", 1, std::nullopt);
    cfg.restructure_above = read_optional_index(j, "restructure_above", "", 1, cfg.restructure_above);
    if (j.contains("projection_samples"))
    {
        cfg.projection_samples =
            static_cast<int>(read_index(j.at("projection_samples"), "projection_samples", 100));
    }

    if (j.contains("system"))
    {
        const Json& sys = j.at("system");
        if (sys.contains("Phi"))
        {
            cfg.Phi = field("system.Phi", [&] { return matrix_from_json(sys.at("Phi"), "Phi"); });
        }
        if (sys.contains("Gamma"))
        {
            cfg.Gamma = field("system.Gamma", [&] { return matrix_from_json(sys.at("Gamma"), "Gamma"); });
        }
        if (sys.contains("Theta"))
        {
            cfg.Theta = field("system.Theta", [&] { return matrix_from_json(sys.at("Theta"), "Theta"); });
        }
    }
    if (j.contains("initial_set"))
    {
        cfg.initial_set = read_set(j.at("initial_set"), "initial_set");
    }
    if (j.contains("input_set"))
    {
        cfg.input_set = read_set(j.at("input_set"), "input_set");
    }
    if (j.contains("noise_set"))
    {
        cfg.noise_set = read_set(j.at("noise_set"), "noise_set");
    }
    const Index n_z = set_dim(cfg.initial_set) + set_dim(cfg.input_set);
    if (j.contains("system") && j.at("system").contains("basis"))
    {
        cfg.system_basis = read_basis(j.at("system").at("basis"), "system.basis", n_z);
    }
    if (j.contains("model_basis") && !j.at("model_basis").is_null())
    {
        cfg.model_basis = read_basis(j.at("model_basis"), "model_basis", n_z);
    }
    if (j.contains("data") && !j.at("data").is_null())
    {
        const Json& d = j.at("data");
        DataSpec ds;
        ds.trajectories = read_index(require(d, "trajectories", "data.trajectories"), "data.trajectories", 1);
        ds.transitions = read_index(require(d, "transitions", "data.transitions"), "data.transitions", 1);
        ds.offline = read_index(require(d, "offline", "data.offline"), "data.offline", 1);
        ds.online = d.contains("online") ? read_index(d.at("online"), "data.online", 0) : 0;
        ds.online_step = d.contains("online_step") ? read_index(d.at("online_step"), "data.online_step", 0) : 0;
        cfg.data = ds;
    }
    validate(cfg);
    return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ParseError("cannot open configuration file " + path.string());
    }
    Json j;
    try
    {
        j = Json::parse(in);
    }
    catch (const Json::parse_error& e)
    {
        throw ParseError(path.string() + ": " + e.what());
    }
    return parse_config(j);
}

void validate(const ExperimentConfig& cfg)
{
    if (cfg.experiment == Experiment::Verify)
    {
        return;
    }
    if (cfg.horizon < 1)
    {
        throw ValidationError("horizon", "must be at least 1");
    }
    if (!cfg.initial_set)
    {
        throw ValidationError("initial_set", "required field is missing");
    }
    if (!cfg.input_set)
    {
        throw ValidationError("input_set", "required field is missing");
    }
    if (!cfg.noise_set)
    {
        throw ValidationError("noise_set", "required field is missing");
    }
    const Index nx = cfg.initial_set->c.size();
    const Index nu = cfg.input_set->c.size();
    require_set(cfg.noise_set, "noise_set", nx);
    if (cfg.reduction_order && *cfg.reduction_order < 1)
    {
        throw ValidationError("reduction_order", "must be at least 1");
    }

    Index min_batch = 0;
    if (cfg.experiment == Experiment::LtiDemo)
    {
        if (cfg.Phi.rows() != nx || cfg.Phi.cols() != nx)
        {
            throw ValidationError("system.Phi", "must be square with the state dimension " +
                                                    std::to_string(nx));
        }
        if (cfg.Gamma.rows() != nx || cfg.Gamma.cols() != nu)
        {
            throw ValidationError("system.Gamma", "shape must be (state dim) x (input dim)");
        }
        min_batch = nx + nu;
    }
    else
    {
        if (!cfg.system_basis)
        {
            throw ValidationError("system.basis", "required field is missing");
        }
        if (cfg.system_basis->num_vars != nx + nu)
        {
            throw ValidationError("system.basis", "monomials must have state dim + input dim entries");
        }
        if (cfg.Theta.rows() != nx || cfg.Theta.cols() != cfg.system_basis->size())
        {
            throw ValidationError("system.Theta", "shape must be (state dim) x (basis size)");
        }
        if (cfg.model_basis && cfg.model_basis->num_vars != nx + nu)
        {
            throw ValidationError("model_basis", "monomials must have state dim + input dim entries");
        }
        const auto& learn = cfg.model_basis ? *cfg.model_basis : *cfg.system_basis;
        min_batch = learn.size();
    }

    if (cfg.experiment == Experiment::PolyModelDemo)
    {
        return;
    }
    if (!cfg.data)
    {
        throw ValidationError("data", "required field is missing");
    }
    const auto& d = *cfg.data;
    if (d.offline + d.online > d.trajectories)
    {
        throw ValidationError("data.online", "offline + online exceeds the number of trajectories");
    }
    if (d.offline * d.transitions < min_batch)
    {
        throw ValidationError("data.offline", "offline batch has fewer than " +
                                                  std::to_string(min_batch) + " samples");
    }
    if (d.online_step >= cfg.horizon)
    {
        throw ValidationError("data.online_step", "must be below the horizon");
    }
    if (cfg.batch_length < min_batch)
    {
        throw ValidationError("batch_length", "must be at least " + std::to_string(min_batch));
    }
}

Json config_to_json(const ExperimentConfig& cfg)
{
    Json j;
    j["schema_version"] = cfg.schema_version;
    j["experiment"] = to_string(cfg.experiment);
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    j["horizon"] = cfg.horizon;
    j["batch_length"] = cfg.batch_length;
    j["reduction_order"] = optional_index_json(cfg.reduction_order);
    j["restructure_above"] = optional_index_json(cfg.restructure_above);
    j["projection_samples"] = cfg.projection_samples;
    Json sys = Json::object();
    if (cfg.Phi.size() > 0)
    {
        sys["Phi"] = to_json(cfg.Phi);
    }
    if (cfg.Gamma.size() > 0)
    {
        sys["Gamma"] = to_json(cfg.Gamma);
    }
    if (cfg.Theta.size() > 0)
    {
        sys["Theta"] = to_json(cfg.Theta);
    }
    if (cfg.system_basis)
    {
        sys["basis"] = basis_json(*cfg.system_basis);
    }
    if (!sys.empty())
    {
        j["system"] = std::move(sys);
    }
    if (cfg.model_basis)
    {
        j["model_basis"] = basis_json(*cfg.model_basis);
    }
    if (cfg.initial_set)
    {
        j["initial_set"] = set_json(*cfg.initial_set);
    }
    if (cfg.input_set)
    {
        j["input_set"] = set_json(*cfg.input_set);
    }
    if (cfg.noise_set)
    {
        j["noise_set"] = set_json(*cfg.noise_set);
    }
    if (cfg.data)
    {
        j["data"] = {{"trajectories", cfg.data->trajectories},
                     {"transitions", cfg.data->transitions},
                     {"offline", cfg.data->offline},
                     {"online", cfg.data->online},
                     {"online_step", cfg.data->online_step}};
    }
    return j;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b)
{
    return config_to_json(a) == config_to_json(b);
}

ExperimentConfig default_config(Experiment e)
{
    ExperimentConfig cfg;
    cfg.experiment = e;
    cfg.output_dir = "out/" + to_string(e);
    if (e == Experiment::Verify)
    {
        return cfg;
    }
    if (e == Experiment::LtiDemo)
    {
        const LtiScenario s = lti_scenario();
        cfg.Phi = s.Phi;
        cfg.Gamma = s.Gamma;
        Eigen::MatrixXi E0(5, 5);
        E0 << 2, 1, 0, 0, 0,
              1, 2, 0, 0, 0,
              0, 0, 2, 1, 0,
              0, 0, 1, 2, 1,
              0, 0, 0, 1, 2;
        cfg.initial_set = zonotope_spec(Vector::Ones(5), 0.1 * Matrix::Identity(5, 5));
        cfg.initial_set->E = E0;
        cfg.input_set = zonotope_spec(Vector::Constant(1, 10.0), Matrix::Constant(1, 1, 0.25));
        cfg.noise_set = zonotope_spec(Vector::Zero(5), 0.005 * Matrix::Identity(5, 5));
        cfg.horizon = 5;
        cfg.batch_length = 100;
        cfg.data = DataSpec{20, 10, 10, 10, 0};
        return cfg;
    }

    const PolyScenario s = poly_scenario(0.7e-4);
    cfg.Theta = s.Theta;
    cfg.system_basis = s.basis;
    Vector c0(2);
    c0 << 1.0, 1.6;
    cfg.initial_set = zonotope_spec(c0, Vector(Eigen::Vector2d(0.1, 0.2)).asDiagonal());
    Vector cu(2);
    cu << 0.2, 0.3;
    cfg.input_set = zonotope_spec(cu, Vector(Eigen::Vector2d(0.01, 0.02)).asDiagonal());
    cfg.horizon = 3;
    if (e == Experiment::PolyModelDemo)
    {
        cfg.noise_set = zonotope_spec(Vector::Zero(2), 0.7e-4 * Matrix::Identity(2, 2));
        return cfg;
    }
    cfg.noise_set = zonotope_spec(Vector::Zero(2), 0.7e-5 * Matrix::Identity(2, 2));
    cfg.batch_length = 5;
    cfg.data = DataSpec{20, 7, 10, 10, 0};
    return cfg;
}

} // namespace czreach
