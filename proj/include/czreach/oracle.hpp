#ifndef CZREACH_ORACLE_HPP
#define CZREACH_ORACLE_HPP

#include "czreach/learning.hpp"
#include "czreach/reach.hpp"
#include "czreach/sets.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace czreach
{

// Seedable generator with a platform-independent double conversion.
class Rng
{
    public:
        explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

        // Uniform on [0, 1) from the top 53 bits.
        double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
        double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
        // Uniform factor value on [-1, 1].
        double factor() { return uniform(-1.0, 1.0); }

        std::uint64_t seed() const { return seed_; }

        // Independent stream derived from this seed and an index.
        Rng split(std::uint64_t stream) const;

    private:
        std::mt19937_64 engine_;
        std::uint64_t seed_;
};

struct SamplerOptions
{
    int restarts = 1000;
    int iterations = 200;
    double shrink = 0.5;
    double tol = kFeasibilityTol;
};

// Uniform factors for unconstrained sets; otherwise uniform starts refined by
// bound-respecting Gauss-Newton steps on the constraint residual. Returns
// nullopt when the restart budget is exhausted (inconclusive for emptiness).
std::optional<FactorAssignment> sample_feasible(const CPZ& S, Rng& rng,
                                                const SamplerOptions& opt = {});
std::optional<FactorAssignment> sample_feasible(const CPMZ& S, Rng& rng,
                                                const SamplerOptions& opt = {});

// Uniform values for ids, ignoring any constraints.
FactorAssignment sample_uniform(const std::vector<FactorId>& ids, Rng& rng);

// Simulated trajectory with the factor values that produced it.
struct WitnessTrace
{
    std::vector<Vector> states;
    std::vector<Vector> inputs;
    FactorAssignment initial;
    std::vector<FactorAssignment> input_factors;
    std::vector<FactorAssignment> noise_factors;
    FactorAssignment noise_matrix_factors;
    std::uint64_t seed = 0;

    // Union of all fragments.
    FactorAssignment all() const;
};

// x0 from X0, u_k from inputs[k], w_k from noise[k], each drawn by sampling
// feasible factors of that set. x_{k+1} = Phi x_k + Gamma u_k + w_k.
// Throws std::runtime_error if a set cannot be sampled.
WitnessTrace simulate_lti(const Matrix& Phi, const Matrix& Gamma, const CPZ& X0,
                          const std::vector<CPZ>& inputs, const std::vector<CPZ>& noise,
                          Rng& rng);

// x_{k+1} = Theta h([x_k; u_k]) + w_k.
WitnessTrace simulate_poly(const Matrix& Theta, const MonomialBasis& basis, const CPZ& X0,
                           const std::vector<CPZ>& inputs, const std::vector<CPZ>& noise,
                           Rng& rng);

// Recomputes the states from the recorded factors.
std::vector<Vector> replay_lti(const Matrix& Phi, const Matrix& Gamma, const CPZ& X0,
                               const std::vector<CPZ>& inputs, const std::vector<CPZ>& noise,
                               const WitnessTrace& trace);
std::vector<Vector> replay_poly(const Matrix& Theta, const MonomialBasis& basis, const CPZ& X0,
                                const std::vector<CPZ>& inputs, const std::vector<CPZ>& noise,
                                const WitnessTrace& trace);

// Input-state data from several trajectories with the noise of every
// transition recorded.
struct SimulatedData
{
    std::vector<Trajectory> trajectories;
    // noise[i][k] produced state k + 1 of trajectory i.
    std::vector<std::vector<CPZ>> noise;
    FactorAssignment noise_witness;
    std::uint64_t seed = 0;

    // Transitions of trajectories [first, last) as one batch whose noise
    // matrix set is built from the recorded per-transition sets.
    LabeledBatch batch(std::size_t first, std::size_t last) const;
    // Transitions of trajectories [first, last), all arriving at step at_step.
    SampleStream stream(std::size_t first, std::size_t last, Index at_step = 0) const;
    std::vector<NoiseRecord> noise_records() const;
};

// Each trajectory starts from a sampled point of X0 and applies inputs
// sampled from U; noise sets are fresh copies of Zw.
SimulatedData simulate_dataset_lti(const Matrix& Phi, const Matrix& Gamma, const CPZ& X0,
                                   const CPZ& U, const CPZ& Zw, Index trajectories,
                                   Index transitions, Rng& rng);
SimulatedData simulate_dataset_poly(const Matrix& Theta, const MonomialBasis& basis,
                                    const CPZ& X0, const CPZ& U, const CPZ& Zw,
                                    Index trajectories, Index transitions, Rng& rng);

// Dense grid search over [-1, 1]^p (n <= 2, p <= 4). Throws BudgetExceeded
// for larger problems.
bool membership_bruteforce(const CPZ& S, const Vector& point, double tol, int grid = 201);

struct Interval
{
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
};

Interval operator+(Interval a, Interval b);
Interval operator*(Interval a, Interval b);
Interval operator*(double s, Interval a);
Interval pow(Interval a, int e);

using IntervalVector = std::vector<Interval>;

struct IntervalMatrix
{
    Matrix lo;
    Matrix hi;
};

IntervalVector to_intervals(const Box& box);
// Entrywise hull of a matrix set, constraints ignored.
IntervalMatrix interval_hull(const CPMZ& Y);

// One step Theta h(Z) + W in interval arithmetic.
IntervalVector interval_baseline_poly(const IntervalMatrix& Theta, const IntervalVector& Z,
                                      const MonomialBasis& basis, const IntervalVector& Zw);

// Sampled feasible points of S projected onto dims (0-based).
std::vector<Eigen::Vector2d> boundary_cloud(const CPZ& S, Index d1, Index d2, int samples,
                                            Rng& rng, const SamplerOptions& opt = {});

// Counter-clockwise convex hull (monotone chain) and its area.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> points);
double polygon_area(const std::vector<Eigen::Vector2d>& polygon);

Json to_json(const WitnessTrace& trace);

} // namespace czreach

#endif
