#ifndef CZREACH_VERIFY_HPP
#define CZREACH_VERIFY_HPP

#include "czreach/oracle.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace czreach
{

struct CriterionResult
{
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

inline constexpr int kNumCriteria = 10;

struct VerifyOptions
{
    std::uint64_t seed = 0;
    unsigned threads = 1;
    // Criteria to run (1-based); empty runs all.
    std::vector<int> only;
};

// Runs one acceptance criterion. Exceptions are reported as failures.
CriterionResult run_criterion(int id, std::uint64_t seed);

// Runs the selected criteria on at most opt.threads workers; results are
// ordered by id.
std::vector<CriterionResult> run_acceptance(const VerifyOptions& opt);

// "PASS  3 merge_id fidelity (detail) [0.01 s]"
std::string format_result_line(const CriterionResult& r);

// Random sets for property tests. Constraints are built so that sigma
// (which must cover ids) is feasible.
struct RandomSetOptions
{
    Index max_generators = 6;
    Index max_constraints = 3;
    Index max_terms = 4;
    int max_exponent = 2;
};

CPZ random_cpz(Rng& rng, Index dim, const std::vector<FactorId>& ids,
               const FactorAssignment& sigma, const RandomSetOptions& opt = {});
CPMZ random_cpmz(Rng& rng, Index rows, Index cols, const std::vector<FactorId>& ids,
                 const FactorAssignment& sigma, const RandomSetOptions& opt = {});

// Factor ids of two operands drawn from a common pool: identical, partly
// overlapping or disjoint lists, chosen at random.
struct IdMix
{
    std::vector<FactorId> first;
    std::vector<FactorId> second;
    FactorAssignment sigma;
};

IdMix random_id_mix(Rng& rng, Index max_factors = 4);

} // namespace czreach

#endif
