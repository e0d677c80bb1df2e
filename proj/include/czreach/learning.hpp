#ifndef CZREACH_LEARNING_HPP
#define CZREACH_LEARNING_HPP

#include "czreach/sets.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace czreach
{

// Input-state data arranged column-wise: Xplus(:,t) is the successor of
// (Xminus(:,t), Uminus(:,t)).
struct DataBatch
{
    Matrix Xplus;
    Matrix Xminus;
    Matrix Uminus;

    Index size() const { return Xplus.cols(); }
};

// states: n_x x (T + 1), inputs: n_u x T (extra input columns are ignored).
// Throws TooShort for fewer than two states, ShapeMismatch for too few inputs.
DataBatch build_batch(const Matrix& states, const Matrix& inputs);

// Column concatenation of batches in order.
DataBatch concat_batches(const std::vector<DataBatch>& batches);

// Matrix set {[w_1 ... w_T]} with every w_t drawn independently from Zw:
// each column gets its own copy of Zw with fresh factor ids. Generator
// T*i + j carries generator i of Zw in column j.
CPMZ concat_noise(const CPZ& Zw, Index T);

// Same construction from explicit per-column sets (structurally equal, with
// pairwise disjoint ids), used when the factor values of every column are
// recorded.
CPMZ concat_noise(const std::vector<CPZ>& columns);

// SVD based rank and Moore-Penrose inverse; singular values below
// max(rows, cols) * eps * sigma_max count as zero.
Index numerical_rank(const Matrix& M);
Matrix pinv(const Matrix& M);

// Ordered list of exponent vectors defining h(z).
struct MonomialBasis
{
    std::vector<Eigen::VectorXi> exponents;
    int degree_bound = 0;
    Index num_vars = 0;

    Index size() const { return static_cast<Index>(exponents.size()); }
    Vector eval(const Vector& z) const;
};

// All monomials of total degree <= d in graded order: by degree, then with
// earlier variables at higher powers first (1, z1, z2, z1^2, z1 z2, z2^2).
MonomialBasis monomial_basis(Index n_z, int d);

// Caller-defined order. Throws DuplicateMonomial, ShapeMismatch or
// NegativeExponent.
MonomialBasis monomial_basis_custom(const std::vector<std::vector<int>>& exponents);

// Column t is h([Xminus(:,t); Uminus(:,t)]).
Matrix regressor_matrix(const DataBatch& batch, const MonomialBasis& basis);

struct ModelSet
{
    CPMZ set;
    std::vector<std::string> provenance;
};

// (Xplus - Mw) [Xminus; Uminus]^+. Throws RankDeficient, ShapeMismatch.
ModelSet model_set_lti(const DataBatch& batch, const CPMZ& Mw, std::string label = "batch");

// (Xplus - Mw) Omega^+. Throws RankDeficient, ShapeMismatch.
ModelSet model_set_poly(const DataBatch& batch, const MonomialBasis& basis, const CPMZ& Mw,
                        std::string label = "batch");

// incoming intersected with current.
ModelSet refine(const ModelSet& current, const ModelSet& incoming);

// One recorded trajectory: states n_x x (K + 1), inputs n_u x K.
struct Trajectory
{
    Matrix states;
    Matrix inputs;
};

// CSV with header traj,k,x1..xn,u1..um; input fields of the final state of
// each trajectory are left empty.
void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& trajs);
std::vector<Trajectory> read_trajectories_csv(std::istream& in);

// Recorded noise factors: row (traj, k) holds the factor values of the noise
// that produced state k (k >= 1), in the factor order of the noise set.
struct NoiseRecord
{
    Index traj = 0;
    Index k = 0;
    Vector sigma;
};

void write_noise_csv(std::ostream& out, const std::vector<NoiseRecord>& rows);
std::vector<NoiseRecord> read_noise_csv(std::istream& in);

} // namespace czreach

#endif
