#ifndef CZREACH_REACH_HPP
#define CZREACH_REACH_HPP

#include "czreach/algebra.hpp"
#include "czreach/learning.hpp"
#include "czreach/serialize.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace czreach
{

struct ReachConfig
{
    Index horizon = 1;
    Index batch_length = 0;
    // Maximum generators per state dimension; absent means exact mode.
    std::optional<Index> reduction_order;
    // Exact restructuring of R_k whenever it has more generators than this.
    std::optional<Index> restructure_above;
    std::uint64_t seed = 0;
    CPZ noise_set;
    // One set per step, or a single set reused for every step.
    std::vector<CPZ> input_sets;
    CPZ initial_set;
    // Reuse the factors of the input set at every step instead of fresh ones.
    bool constant_input = false;
};

// One transition observed online.
struct StreamSample
{
    Vector x_prev;
    Vector u_prev;
    Vector x_next;
    // Noise set of this transition with recorded factor ids, if known.
    std::optional<CPZ> noise;
};

// Samples arriving before step k are in stream[k].
using SampleStream = std::vector<std::vector<StreamSample>>;

// Offline data; when noise is absent concat_noise(noise_set, T) is used.
struct LabeledBatch
{
    DataBatch data;
    std::optional<CPMZ> noise;
};

struct StepStats
{
    Index step = 0;
    Index generators = 0;
    Index constraints = 0;
    Index factors = 0;
    double millis = 0.0;
};

struct ReachResult
{
    std::vector<CPZ> sets;
    std::vector<CPZ> inputs_used;
    std::vector<CPZ> noise_used;
    std::vector<ModelSet> model_history;
    // Index into model_history of the model used for step k.
    std::vector<Index> model_at_step;
    std::vector<Restructured> restructures;
    std::vector<StepStats> stats;
};

// R_{k+1} = M (R_k x U_k) + W.
CPZ step_lti(const ModelSet& M, const CPZ& Rk, const CPZ& Uk, const CPZ& Zw_fresh);

// Data-driven LTI reachability with online refinement.
ReachResult run_lti(const ReachConfig& cfg, const LabeledBatch& offline,
                    const SampleStream& stream);

// {h(z) : z in Z} with every factor shared with Z.
CPZ monomial_image(const CPZ& Z, const MonomialBasis& basis);

// Model-based polynomial reachability R_{k+1} = Theta h(R_k x U_k) + W.
ReachResult run_poly_model(const ReachConfig& cfg, const Matrix& Theta,
                           const MonomialBasis& basis);

// Data-driven polynomial reachability with online refinement.
ReachResult run_poly_data(const ReachConfig& cfg, const LabeledBatch& offline,
                          const SampleStream& stream, const MonomialBasis& basis);

// Extends sigma with the factors introduced by exact restructuring, in order.
FactorAssignment complete_assignment(const ReachResult& result, const FactorAssignment& sigma);

// Lists factor-id discipline violations: inputs and noise of step k must be
// disjoint from each other, from R_k and from the model used at step k.
std::vector<std::string> audit_ids(const ReachResult& result);

// Every id occurring in the result, renumbered 1.. in ascending order, so
// that two runs with the same inputs produce identical text.
struct IdCanon
{
    std::vector<FactorId> original;

    FactorId map(FactorId id) const;
    CPZ apply(const CPZ& S) const;
    CPMZ apply(const CPMZ& S) const;
};

IdCanon canonical_ids(const ReachResult& result);

// {"sets": [...], "stats": [...]}; ids renumbered with canon.
Json reach_result_to_json(const ReachResult& result, const IdCanon& canon);
Json model_history_to_json(const ReachResult& result, const IdCanon& canon);

} // namespace czreach

#endif
