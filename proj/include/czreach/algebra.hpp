#ifndef CZREACH_ALGEBRA_HPP
#define CZREACH_ALGEBRA_HPP

#include "czreach/sets.hpp"

#include <vector>

namespace czreach
{

// Two sets rewritten over a common factor list. Evaluating either member at
// any assignment over shared_id gives the same point as the original set at
// the restriction of that assignment.
template<class First, class Second>
struct MergedPair
{
    First first;
    Second second;
    std::vector<FactorId> shared_id;
};

MergedPair<CPZ, CPZ> merge_id(const CPZ& S1, const CPZ& S2);
MergedPair<CPMZ, CPZ> merge_id(const CPMZ& S1, const CPZ& S2);
MergedPair<CPMZ, CPMZ> merge_id(const CPMZ& S1, const CPMZ& S2);

// Exact image {Y p : Y in Y, p in P} with shared factors kept dependent.
// Generators: [G_i c_P | C G_P | G_i G_P(:,j)] with column index h_P*i + j
// for the last block. Constraints of Y (vectorized) stacked over those of P.
CPZ mul_cpmz_cpz(const CPMZ& Y, const CPZ& P);

// Exact dependent sum {p1 + p2}.
CPZ add_exact(const CPZ& P1, const CPZ& P2);

// Exact dependent Cartesian product {[p1; p2]}.
CPZ cartesian_exact(const CPZ& P1, const CPZ& P2);

// Exact elementwise product {p1 .* p2}.
CPZ hadamard_exact(const CPZ& P1, const CPZ& P2);

// Elementwise power with all factors shared; e = 0 gives the ones singleton.
CPZ pow_exact(const CPZ& P, int e);

// Intersection of two matrix sets of equal shape. Factors of Y2 that also
// occur in Y1 are renamed to fresh ids first, so the operands are treated as
// independent. The output keeps the center and generators of Y1 and stores
// all constraints vectorized (n_a = 1):
//
//   [ A1  0   0    0  ]       [ vec B1    ]
//   [ 0   A2  0    0  ] m  =  [ vec B2    ]
//   [ 0   0   G1  -G2 ]       [ vec(C2-C1)]
//
// with R = [[R1, 0, E1, 0], [0, R2, 0, E2]].
CPMZ intersect_cpmz(const CPMZ& Y1, const CPMZ& Y2);

// Rows I (0-based) of the set. Throws IndexOutOfRange.
CPZ project(const CPZ& S, const std::vector<Index>& I);

// {M s : s in S}.
CPZ map_linear(const Matrix& M, const CPZ& S);

// {(K - Y) L : Y in Y}.
CPMZ affine_cpmz(const Matrix& K, const CPMZ& Y, const Matrix& L);

// Over-approximating generator reduction. Generators are ranked by Euclidean
// norm (ascending, ties by lower column index); the smallest ones are boxed
// into at most n new independent generators so that at most max_generators
// remain. Constraints are kept unchanged, so the result contains the input.
// Throws std::invalid_argument when max_generators < dim.
CPZ reduce(const CPZ& S, Index max_generators);

// Exact change of variables that replaces the generator part of S by an
// axis-aligned parallelotope over fresh factors xi, tied to the original
// factors through equality constraints:
//
//   { mid + diag(rad) xi | G m(alpha) - diag(rad) xi = mid - c, A m_R(alpha) = b }
//
// where [mid - rad, mid + rad] is interval_hull(S). Rows with rad = 0 carry
// no xi. The represented set is unchanged.
struct Restructured
{
    CPZ set;
    CPZ source;
    std::vector<FactorId> xi;
    std::vector<Index> rows; // row of mid / rad driven by each xi
    Vector mid;
    Vector rad;
};

Restructured restructure(const CPZ& S);

// Values of the xi factors that reproduce eval_point(source, sigma).
FactorAssignment complete_restructure(const Restructured& r, const FactorAssignment& sigma);

} // namespace czreach

#endif
