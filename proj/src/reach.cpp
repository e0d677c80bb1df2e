#include "czreach/reach.hpp"

#include <algorithm>
#include <chrono>
#include <set>

namespace czreach
{

namespace
{

using Clock = std::chrono::steady_clock;

const CPZ& input_template(const ReachConfig& cfg, Index k)
{
    if (cfg.input_sets.empty())
    {
        throw ShapeMismatch("reach: no input set given");
    }
    if (cfg.input_sets.size() == 1)
    {
        return cfg.input_sets.front();
    }
    if (k >= static_cast<Index>(cfg.input_sets.size()))
    {
        throw ShapeMismatch("reach: no input set for step " + std::to_string(k));
    }
    return cfg.input_sets[static_cast<std::size_t>(k)];
}

CPZ input_for_step(const ReachConfig& cfg, Index k)
{
    const CPZ& U = input_template(cfg, k);
    return cfg.constant_input ? U : with_fresh_ids(U);
}

void check_config(const ReachConfig& cfg)
{
    if (cfg.horizon < 1)
    {
        throw std::invalid_argument("reach: horizon must be at least 1");
    }
    if (cfg.noise_set.dim() != cfg.initial_set.dim())
    {
        throw ShapeMismatch("reach: noise set dimension " + std::to_string(cfg.noise_set.dim()) +
                            " differs from state dimension " +
                            std::to_string(cfg.initial_set.dim()));
    }
}

// Applies the optional reduction and restructuring to a freshly computed set.
CPZ post_process(const ReachConfig& cfg, CPZ S, ReachResult& result)
{
    if (cfg.reduction_order)
    {
        S = reduce(S, *cfg.reduction_order * S.dim());
    }
    if (cfg.restructure_above && S.num_generators() > *cfg.restructure_above)
    {
        Restructured r = restructure(S);
        S = r.set;
        result.restructures.push_back(std::move(r));
    }
    return S;
}

void record(ReachResult& result, Index step, const CPZ& S, Clock::time_point start)
{
    const double ms =
        std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    result.stats.push_back(
        StepStats{step, S.num_generators(), S.num_constraints(), S.num_factors(), ms});
}

// Online batch accumulation shared by the data-driven algorithms.
class BatchBuffer
{
    public:
        void append(const std::vector<StreamSample>& samples)
        {
            buffer_.insert(buffer_.end(), samples.begin(), samples.end());
        }

        Index size() const { return static_cast<Index>(buffer_.size()); }

        DataBatch batch() const
        {
            const auto T = size();
            const StreamSample& s0 = buffer_.front();
            DataBatch b{Matrix(s0.x_next.size(), T), Matrix(s0.x_prev.size(), T),
                        Matrix(s0.u_prev.size(), T)};
            for (Index t = 0; t < T; ++t)
            {
                const StreamSample& s = buffer_[static_cast<std::size_t>(t)];
                b.Xplus.col(t) = s.x_next;
                b.Xminus.col(t) = s.x_prev;
                b.Uminus.col(t) = s.u_prev;
            }
            return b;
        }

        CPMZ noise(const CPZ& noise_set) const
        {
            const bool recorded = std::all_of(buffer_.begin(), buffer_.end(),
                                              [](const StreamSample& s) { return s.noise.has_value(); });
            if (!recorded)
            {
                return concat_noise(noise_set, size());
            }
            std::vector<CPZ> cols;
            cols.reserve(buffer_.size());
            for (const auto& s : buffer_)
            {
                cols.push_back(*s.noise);
            }
            return concat_noise(cols);
        }

        void clear() { buffer_.clear(); }

    private:
        std::vector<StreamSample> buffer_;
};

CPMZ offline_noise(const LabeledBatch& offline, const CPZ& noise_set)
{
    return offline.noise ? *offline.noise : concat_noise(noise_set, offline.data.size());
}

// Tries to refine the current model from the buffered samples.
template<class Learn>
void maybe_refine(const ReachConfig& cfg, BatchBuffer& buffer, ReachResult& result,
                  Index step, Learn learn)
{
    if (buffer.size() < cfg.batch_length || buffer.size() == 0)
    {
        return;
    }
    const DataBatch b = buffer.batch();
    std::optional<ModelSet> incoming;
    try
    {
        incoming = learn(b, buffer.noise(cfg.noise_set), "online@" + std::to_string(step));
    }
    catch (const RankDeficient&)
    {
        return; // keep accumulating
    }
    result.model_history.push_back(refine(result.model_history.back(), *incoming));
    buffer.clear();
}

template<class Learn, class Propagate>
ReachResult run_data_driven(const ReachConfig& cfg, const LabeledBatch& offline,
                            const SampleStream& stream, Learn learn, Propagate propagate)
{
    check_config(cfg);
    ReachResult result;
    result.model_history.push_back(
        learn(offline.data, offline_noise(offline, cfg.noise_set), "offline"));
    result.sets.push_back(cfg.initial_set);

    BatchBuffer buffer;
    for (Index k = 0; k < cfg.horizon; ++k)
    {
        const auto start = Clock::now();
        if (k < static_cast<Index>(stream.size()))
        {
            buffer.append(stream[static_cast<std::size_t>(k)]);
        }
        maybe_refine(cfg, buffer, result, k, learn);

        CPZ U = input_for_step(cfg, k);
        CPZ W = with_fresh_ids(cfg.noise_set);
        const ModelSet& M = result.model_history.back();
        CPZ next = propagate(M, result.sets.back(), U, W);
        next = post_process(cfg, std::move(next), result);

        result.model_at_step.push_back(static_cast<Index>(result.model_history.size()) - 1);
        result.inputs_used.push_back(std::move(U));
        result.noise_used.push_back(std::move(W));
        result.sets.push_back(std::move(next));
        record(result, k + 1, result.sets.back(), start);
    }
    return result;
}

} // namespace

CPZ step_lti(const ModelSet& M, const CPZ& Rk, const CPZ& Uk, const CPZ& Zw_fresh)
{
    return add_exact(mul_cpmz_cpz(M.set, cartesian_exact(Rk, Uk)), Zw_fresh);
}

ReachResult run_lti(const ReachConfig& cfg, const LabeledBatch& offline,
                    const SampleStream& stream)
{
    auto learn = [](const DataBatch& b, const CPMZ& Mw, std::string label) {
        return model_set_lti(b, Mw, std::move(label));
    };
    auto propagate = [](const ModelSet& M, const CPZ& R, const CPZ& U, const CPZ& W) {
        return step_lti(M, R, U, W);
    };
    return run_data_driven(cfg, offline, stream, learn, propagate);
}

CPZ monomial_image(const CPZ& Z, const MonomialBasis& basis)
{
    if (Z.dim() != basis.num_vars)
    {
        throw ShapeMismatch("monomial_image: basis over " + std::to_string(basis.num_vars) +
                            " variables, set has dimension " + std::to_string(Z.dim()));
    }
    std::vector<CPZ> coords;
    coords.reserve(static_cast<std::size_t>(Z.dim()));
    for (Index l = 0; l < Z.dim(); ++l)
    {
        coords.push_back(project(Z, {l}));
    }
    std::optional<CPZ> image;
    for (const auto& alpha : basis.exponents)
    {
        CPZ Mj(Vector::Ones(1));
        for (Index l = 0; l < Z.dim(); ++l)
        {
            if (alpha(l) > 0)
            {
                Mj = compact(hadamard_exact(Mj, pow_exact(coords[static_cast<std::size_t>(l)],
                                                          alpha(l))));
            }
        }
        image = image ? compact(cartesian_exact(*image, Mj)) : Mj;
    }
    return image ? *image : CPZ(Vector(0));
}

ReachResult run_poly_model(const ReachConfig& cfg, const Matrix& Theta,
                           const MonomialBasis& basis)
{
    check_config(cfg);
    if (Theta.rows() != cfg.initial_set.dim() || Theta.cols() != basis.size())
    {
        throw ShapeMismatch("run_poly_model: coefficient matrix is " +
                            std::to_string(Theta.rows()) + "x" + std::to_string(Theta.cols()));
    }
    ReachResult result;
    result.model_history.push_back(ModelSet{CPMZ(Theta), {"given"}});
    result.sets.push_back(cfg.initial_set);
    for (Index k = 0; k < cfg.horizon; ++k)
    {
        const auto start = Clock::now();
        CPZ U = input_for_step(cfg, k);
        CPZ W = with_fresh_ids(cfg.noise_set);
        const CPZ H = monomial_image(cartesian_exact(result.sets.back(), U), basis);
        CPZ next = post_process(cfg, add_exact(map_linear(Theta, H), W), result);

        result.model_at_step.push_back(0);
        result.inputs_used.push_back(std::move(U));
        result.noise_used.push_back(std::move(W));
        result.sets.push_back(std::move(next));
        record(result, k + 1, result.sets.back(), start);
    }
    return result;
}

ReachResult run_poly_data(const ReachConfig& cfg, const LabeledBatch& offline,
                          const SampleStream& stream, const MonomialBasis& basis)
{
    auto learn = [&basis](const DataBatch& b, const CPMZ& Mw, std::string label) {
        return model_set_poly(b, basis, Mw, std::move(label));
    };
    auto propagate = [&basis](const ModelSet& M, const CPZ& R, const CPZ& U, const CPZ& W) {
        return add_exact(mul_cpmz_cpz(M.set, monomial_image(cartesian_exact(R, U), basis)), W);
    };
    return run_data_driven(cfg, offline, stream, learn, propagate);
}

FactorAssignment complete_assignment(const ReachResult& result, const FactorAssignment& sigma)
{
    FactorAssignment out = sigma;
    for (const auto& r : result.restructures)
    {
        out.merge(complete_restructure(r, out));
    }
    return out;
}

std::vector<std::string> audit_ids(const ReachResult& result)
{
    std::vector<std::string> problems;
    auto overlap = [](const std::vector<FactorId>& a, const std::vector<FactorId>& b) {
        return !shared_ids(a, b).empty();
    };
    std::set<FactorId> seen_noise;
    for (std::size_t k = 0; k < result.inputs_used.size(); ++k)
    {
        const auto& U = result.inputs_used[k].ids();
        const auto& W = result.noise_used[k].ids();
        const auto& R = result.sets[k].ids();
        const auto& M =
            result.model_history[static_cast<std::size_t>(result.model_at_step[k])].set.ids();
        const std::string step = "step " + std::to_string(k) + ": ";
        if (overlap(U, W))
        {
            problems.push_back(step + "input and noise share factors");
        }
        if (overlap(W, R))
        {
            problems.push_back(step + "noise shares factors with the current set");
        }
        if (overlap(W, M))
        {
            problems.push_back(step + "noise shares factors with the model set");
        }
        if (overlap(U, M))
        {
            problems.push_back(step + "input shares factors with the model set");
        }
        if (overlap(M, R) && k == 0)
        {
            problems.push_back(step + "model set shares factors with the initial set");
        }
        for (auto id : W)
        {
            if (!seen_noise.insert(id).second)
            {
                problems.push_back(step + "noise factor reused from an earlier step");
                break;
            }
        }
    }
    return problems;
}

FactorId IdCanon::map(FactorId id) const
{
    auto it = std::lower_bound(original.begin(), original.end(), id);
    if (it == original.end() || *it != id)
    {
        throw MissingFactor("canonical ids: unknown factor " + std::to_string(id.value));
    }
    return FactorId{static_cast<std::uint64_t>(it - original.begin()) + 1};
}

CPZ IdCanon::apply(const CPZ& S) const
{
    std::vector<FactorId> ids;
    ids.reserve(S.ids().size());
    for (auto id : S.ids())
    {
        ids.push_back(map(id));
    }
    return CPZ(S.center(), S.generators(), S.exponents(), S.constraint_matrix(),
               S.constraint_offset(), S.constraint_exponents(), std::move(ids));
}

CPMZ IdCanon::apply(const CPMZ& S) const
{
    std::vector<FactorId> ids;
    ids.reserve(S.ids().size());
    for (auto id : S.ids())
    {
        ids.push_back(map(id));
    }
    return CPMZ(S.center(), S.generators(), S.exponents(), S.constraint_matrix(),
                S.constraint_offset(), S.constraint_rows(), S.constraint_cols(),
                S.constraint_exponents(), std::move(ids));
}

IdCanon canonical_ids(const ReachResult& result)
{
    std::set<FactorId> all;
    auto add = [&all](const std::vector<FactorId>& ids) { all.insert(ids.begin(), ids.end()); };
    for (const auto& S : result.sets)
    {
        add(S.ids());
    }
    for (const auto& S : result.inputs_used)
    {
        add(S.ids());
    }
    for (const auto& S : result.noise_used)
    {
        add(S.ids());
    }
    for (const auto& M : result.model_history)
    {
        add(M.set.ids());
    }
    return IdCanon{std::vector<FactorId>(all.begin(), all.end())};
}

Json reach_result_to_json(const ReachResult& result, const IdCanon& canon)
{
    Json sets = Json::array();
    for (const auto& S : result.sets)
    {
        sets.push_back(to_json(canon.apply(S)));
    }
    Json stats = Json::array();
    for (const auto& s : result.stats)
    {
        stats.push_back({{"step", s.step},
                         {"generators", s.generators},
                         {"constraints", s.constraints},
                         {"factors", s.factors}});
    }
    return Json{{"sets", std::move(sets)}, {"stats", std::move(stats)}};
}

Json model_history_to_json(const ReachResult& result, const IdCanon& canon)
{
    Json out = Json::array();
    for (std::size_t i = 0; i < result.model_history.size(); ++i)
    {
        Json entry;
        entry["provenance"] = result.model_history[i].provenance;
        entry["set"] = to_json(canon.apply(result.model_history[i].set));
        Json steps = Json::array();
        for (std::size_t k = 0; k < result.model_at_step.size(); ++k)
        {
            if (result.model_at_step[k] == static_cast<Index>(i))
            {
                steps.push_back(k);
            }
        }
        entry["used_at_steps"] = std::move(steps);
        out.push_back(std::move(entry));
    }
    return out;
}

} // namespace czreach
