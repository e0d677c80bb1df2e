#include "czreach/algebra.hpp"
#include "czreach/learning.hpp"
#include "czreach/oracle.hpp"
#include "czreach/scenarios.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace czreach;
using czreach::test::assign;
using czreach::test::constrained_p1;
using czreach::test::constrained_p2;
using czreach::test::grid_range;
using czreach::test::interval_set;

namespace
{

double eval1(const CPZ& S, const Vector& a)
{
    return eval_point(S, assign(S.ids(), a))(0);
}

} // namespace

TEST(MergeId, InsertsZeroRowsForMissingFactors)
{
    const auto m = merge_id(constrained_p1(), constrained_p2());
    EXPECT_EQ(m.shared_id, make_ids({1, 2, 3}));
    Eigen::MatrixXi E1(3, 2), R1(3, 2), E2(3, 2), R2(3, 2);
    E1 << 4, 1, 0, 2, 0, 0;
    R1 << 4, 2, 0, 2, 0, 0;
    E2 << 3, 2, 0, 0, 3, 0;
    R2 << 2, 0, 0, 0, 2, 3;
    EXPECT_EQ(exp_to_dense(m.first.exponents()), E1);
    EXPECT_EQ(exp_to_dense(m.first.constraint_exponents()), R1);
    EXPECT_EQ(exp_to_dense(m.second.exponents()), E2);
    EXPECT_EQ(exp_to_dense(m.second.constraint_exponents()), R2);
}

TEST(MergeId, IdenticalIdsUnchanged)
{
    const CPZ P = constrained_p1();
    const auto m = merge_id(P, P);
    EXPECT_EQ(m.shared_id, P.ids());
    EXPECT_EQ(exp_to_dense(m.first.exponents()), exp_to_dense(P.exponents()));
    EXPECT_EQ(exp_to_dense(m.second.constraint_exponents()), exp_to_dense(P.constraint_exponents()));
}

TEST(MergeId, DisjointIdsStackRows)
{
    const CPZ P1 = lift(Zonotope{Vector::Zero(1), Matrix::Ones(1, 2)}, make_ids({1, 2}));
    const CPZ P2 = lift(Zonotope{Vector::Zero(1), Matrix::Ones(1, 3)}, make_ids({3, 4, 5}));
    const auto m = merge_id(P1, P2);
    EXPECT_EQ(m.shared_id.size(), 5u);
    const Eigen::MatrixXi E1 = exp_to_dense(m.first.exponents());
    const Eigen::MatrixXi E2 = exp_to_dense(m.second.exponents());
    EXPECT_EQ(E1.topRows(2), Eigen::MatrixXi::Identity(2, 2));
    EXPECT_EQ(E1.bottomRows(3), Eigen::MatrixXi::Zero(3, 2));
    EXPECT_EQ(E2.topRows(2), Eigen::MatrixXi::Zero(2, 3));
    EXPECT_EQ(E2.bottomRows(3), Eigen::MatrixXi::Identity(3, 3));
}

TEST(MulCpmzCpz, DeterministicMatrixIsLinearMap)
{
    const LtiScenario s = lti_scenario();
    Matrix M(5, 6);
    M << s.Phi, s.Gamma;
    const CPZ P = cartesian_exact(s.initial_nonconvex, s.input);
    const CPZ out = mul_cpmz_cpz(CPMZ(M), P);
    EXPECT_TRUE(out.center().isApprox(M * P.center()));
    EXPECT_TRUE(out.generators().isApprox(M * P.generators()));
    EXPECT_EQ(out.num_constraints(), P.num_constraints());
}

TEST(MulCpmzCpz, ScalarIntervalProduct)
{
    const FactorId beta{1};
    const FactorId alpha{2};
    const CPMZ Y = lift(MatrixZonotope{Matrix::Constant(1, 1, 2.0), {Matrix::Ones(1, 1)}}, {beta});
    const CPZ P = interval_set(0.0, 1.0, alpha);
    const CPZ out = mul_cpmz_cpz(Y, P);
    EXPECT_DOUBLE_EQ(out.center()(0), 0.0);
    ASSERT_EQ(out.num_generators(), 3);
    Matrix G(1, 3);
    G << 0, 2, 1;
    EXPECT_EQ(out.generators(), G);
    const auto r = grid_range(2, [&](const Vector& a) { return eval1(out, a); });
    EXPECT_NEAR(r.lo, -3.0, 1e-12);
    EXPECT_NEAR(r.hi, 3.0, 1e-12);
}

TEST(MulCpmzCpz, PointwiseIdentityOnRandomFactors)
{
    Rng rng(7);
    Eigen::MatrixXi E(2, 3);
    E << 1, 0, 2, 0, 1, 1;
    const auto ids = make_ids({1, 2});
    const CPMZ Y = CPMZ::from_lists(Matrix::Random(2, 3), {Matrix::Random(2, 3), Matrix::Random(2, 3),
                                                           Matrix::Random(2, 3)},
                                    E, {}, Matrix::Zero(0, 0), Eigen::MatrixXi::Zero(2, 0), ids);
    Eigen::MatrixXi EP(3, 2);
    EP << 1, 0, 1, 2, 0, 1;
    const CPZ P = CPZ::polynomial(Vector::Random(3), Matrix::Random(3, 2), EP, make_ids({2, 3, 4}));
    const CPZ out = mul_cpmz_cpz(Y, P);
    for (int t = 0; t < 200; ++t)
    {
        const FactorAssignment s = sample_uniform(make_ids({1, 2, 3, 4}), rng);
        const Vector expected = eval_matrix(Y, s) * eval_point(P, s);
        EXPECT_LT((eval_point(out, s) - expected).norm(), 1e-10);
    }
}

TEST(AddExact, IdentityAndCancellation)
{
    const CPZ P = constrained_p1();
    const CPZ zero(Vector::Zero(3));
    const CPZ neg = map_linear(-Matrix::Identity(3, 3), P);
    const CPZ sum = add_exact(P, zero);
    const CPZ diff = add_exact(P, neg);
    Rng rng(1);
    for (int t = 0; t < 50; ++t)
    {
        const FactorAssignment s = sample_uniform(P.ids(), rng);
        EXPECT_LT((eval_point(sum, s) - eval_point(P, s)).norm(), 1e-12);
        EXPECT_LT(eval_point(diff, s).norm(), 1e-12);
    }
}

TEST(AddExact, IndependentIntervals)
{
    const CPZ out = add_exact(interval_set(0, 1, FactorId{1}), interval_set(0, 2, FactorId{2}));
    const auto r = grid_range(2, [&](const Vector& a) { return eval1(out, a); });
    EXPECT_NEAR(r.lo, -3.0, 1e-12);
    EXPECT_NEAR(r.hi, 3.0, 1e-12);
}

TEST(CartesianExact, IndependentAndShared)
{
    const CPZ sq = cartesian_exact(interval_set(0, 1, FactorId{1}), interval_set(0, 1, FactorId{2}));
    EXPECT_EQ(sq.num_factors(), 2);
    const Box b = interval_hull(sq);
    EXPECT_EQ(b.lo, Vector::Constant(2, -1.0));
    EXPECT_EQ(b.hi, Vector::Constant(2, 1.0));

    const CPZ P = interval_set(0.5, 1, FactorId{1});
    const CPZ diag = cartesian_exact(P, P);
    EXPECT_EQ(diag.num_factors(), 1);
    for (double a : {-1.0, -0.3, 0.8})
    {
        const Vector v = eval_point(diag, assign(diag.ids(), Vector::Constant(1, a)));
        EXPECT_DOUBLE_EQ(v(0), v(1));
    }
}

TEST(CartesianExact, StateAndInputStack)
{
    const LtiScenario s = lti_scenario();
    const CPZ RU = cartesian_exact(s.initial_nonconvex, with_fresh_ids(s.input));
    EXPECT_EQ(RU.dim(), 6);
    EXPECT_EQ(RU.num_factors(), s.initial_nonconvex.num_factors() + s.input.num_factors());
}

TEST(HadamardExact, OnesIsIdentity)
{
    const CPZ P = constrained_p1();
    const CPZ out = hadamard_exact(CPZ(Vector::Ones(3)), P);
    Rng rng(2);
    for (int t = 0; t < 20; ++t)
    {
        const FactorAssignment s = sample_uniform(P.ids(), rng);
        EXPECT_LT((eval_point(out, s) - eval_point(P, s)).norm(), 1e-12);
    }
}

TEST(HadamardExact, SharedVersusDisjointFactors)
{
    const CPZ a = interval_set(0, 1, FactorId{1});
    const CPZ shared = hadamard_exact(a, a);
    const auto rs = grid_range(1, [&](const Vector& x) { return eval1(shared, x); });
    EXPECT_NEAR(rs.lo, 0.0, 1e-12);
    EXPECT_NEAR(rs.hi, 1.0, 1e-12);

    const CPZ disjoint = hadamard_exact(a, interval_set(0, 1, FactorId{2}));
    const auto rd = grid_range(2, [&](const Vector& x) { return eval1(disjoint, x); });
    EXPECT_NEAR(rd.lo, -1.0, 1e-12);
    EXPECT_NEAR(rd.hi, 1.0, 1e-12);
}

TEST(PowExact, PowersOfInterval)
{
    const CPZ a = interval_set(0, 1, FactorId{1});
    const CPZ p0 = pow_exact(a, 0);
    EXPECT_EQ(p0.num_generators(), 0);
    EXPECT_EQ(p0.center(), Vector::Ones(1));
    EXPECT_DOUBLE_EQ(eval1(pow_exact(a, 1), Vector::Constant(1, 0.3)), 0.3);
    const CPZ sq = pow_exact(a, 2);
    const auto r = grid_range(1, [&](const Vector& x) { return eval1(sq, x); });
    EXPECT_NEAR(r.lo, 0.0, 1e-12);
    EXPECT_NEAR(r.hi, 1.0, 1e-12);
    EXPECT_NEAR(eval1(pow_exact(a, 3), Vector::Constant(1, 0.5)), 0.125, 1e-15);
    EXPECT_THROW(pow_exact(a, -1), NegativeExponent);
}

TEST(IntersectCpmz, OverlappingIntervals)
{
    const CPMZ Y1 = lift(MatrixZonotope{Matrix::Constant(1, 1, 1.0), {Matrix::Ones(1, 1)}});
    const CPMZ Y2 = lift(MatrixZonotope{Matrix::Constant(1, 1, 2.0), {Matrix::Ones(1, 1)}});
    const CPZ I = to_cpz(intersect_cpmz(Y1, Y2));
    EXPECT_TRUE(membership_bruteforce(I, Vector::Constant(1, 1.0), 1e-6));
    EXPECT_TRUE(membership_bruteforce(I, Vector::Constant(1, 2.0), 1e-6));
    EXPECT_TRUE(membership_bruteforce(I, Vector::Constant(1, 1.5), 1e-6));
    EXPECT_FALSE(membership_bruteforce(I, Vector::Constant(1, 0.5), 1e-6));
    EXPECT_FALSE(membership_bruteforce(I, Vector::Constant(1, 2.5), 1e-6));
}

TEST(IntersectCpmz, SelfIntersectionKeepsEveryPoint)
{
    const CPMZ Y = lift(MatrixZonotope{Matrix::Random(2, 2), {Matrix::Random(2, 2), Matrix::Random(2, 2)}});
    const CPMZ I = intersect_cpmz(Y, Y);
    EXPECT_EQ(I.num_factors(), 2 * Y.num_factors());
    Rng rng(3);
    for (int t = 0; t < 20; ++t)
    {
        const Vector a = sample_uniform(Y.ids(), rng).gather(Y.ids());
        FactorAssignment s;
        for (Index k = 0; k < I.num_factors(); ++k)
        {
            s.set(I.ids()[static_cast<std::size_t>(k)], a(k % a.size()));
        }
        EXPECT_LT(constraint_residual(I, s), 1e-12);
        EXPECT_LT((eval_matrix(I, s) - eval_matrix(Y, assign(Y.ids(), a))).norm(), 1e-12);
    }
}

TEST(IntersectCpmz, DisjointIntervalsInfeasible)
{
    const CPMZ Y1 = lift(MatrixZonotope{Matrix::Constant(1, 1, 0.5), {Matrix::Constant(1, 1, 0.5)}});
    const CPMZ Y2 = lift(MatrixZonotope{Matrix::Constant(1, 1, 2.5), {Matrix::Constant(1, 1, 0.5)}});
    const CPMZ I = intersect_cpmz(Y1, Y2);
    ASSERT_EQ(I.num_factors(), 2);
    const auto r = grid_range(2, [&](const Vector& a) { return constraint_residual(I, assign(I.ids(), a)); });
    EXPECT_GT(r.lo, 0.1);
}

TEST(Project, SlicesRows)
{
    const CPZ P = constrained_p1();
    const CPZ full = project(P, {0, 1, 2});
    EXPECT_EQ(full.center(), P.center());
    EXPECT_EQ(full.generators(), P.generators());
    const CPZ row = project(P, {1});
    EXPECT_EQ(row.dim(), 1);
    EXPECT_DOUBLE_EQ(row.center()(0), 2.0);
    Matrix G(1, 2);
    G << 3, 2;
    EXPECT_EQ(row.generators(), G);
    EXPECT_EQ(exp_to_dense(row.exponents()), exp_to_dense(P.exponents()));
    EXPECT_EQ(row.num_constraints(), P.num_constraints());
    EXPECT_EQ(row.ids(), P.ids());
    EXPECT_THROW(project(P, {3}), IndexOutOfRange);
}

TEST(Project, InvertsCartesian)
{
    const CPZ P = constrained_p1();
    const CPZ Q = constrained_p2();
    const CPZ back = project(cartesian_exact(P, Q), {0, 1, 2});
    Rng rng(4);
    for (int t = 0; t < 20; ++t)
    {
        const FactorAssignment s = sample_uniform(make_ids({1, 2, 3}), rng);
        EXPECT_LT((eval_point(back, s) - eval_point(P, s)).norm(), 1e-12);
    }
}

TEST(MapLinear, IdentityZeroAndSum)
{
    const CPZ P = constrained_p1();
    const CPZ same = map_linear(Matrix::Identity(3, 3), P);
    EXPECT_EQ(same.generators(), P.generators());
    const CPZ zero = map_linear(Matrix::Zero(2, 3), P);
    EXPECT_EQ(interval_hull(zero).hi, Vector::Zero(2));
    EXPECT_EQ(interval_hull(zero).lo, Vector::Zero(2));
    const CPZ sq = lift(Zonotope{Vector::Zero(2), Matrix::Identity(2, 2)});
    const CPZ s = map_linear(Matrix::Ones(1, 2), sq);
    const auto r = grid_range(2, [&](const Vector& a) { return eval1(s, a); });
    EXPECT_NEAR(r.lo, -2.0, 1e-12);
    EXPECT_NEAR(r.hi, 2.0, 1e-12);
}

TEST(AffineCpmz, SingletonAndNegation)
{
    Matrix K = Matrix::Random(2, 3);
    Matrix L = Matrix::Random(3, 2);
    const CPMZ single = affine_cpmz(K, CPMZ(Matrix::Zero(2, 3)), L);
    EXPECT_TRUE(eval_matrix(single, {}).isApprox(K * L));

    const CPMZ Y = lift(MatrixZonotope{Matrix::Random(2, 3), {Matrix::Random(2, 3)}});
    const CPMZ neg = affine_cpmz(Matrix::Zero(2, 3), Y, Matrix::Identity(3, 3));
    const FactorAssignment s = assign(Y.ids(), Vector::Constant(1, 0.4));
    EXPECT_TRUE(eval_matrix(neg, s).isApprox(-eval_matrix(Y, s)));
}

TEST(Reduce, NoOpWhenWithinBudget)
{
    const CPZ P = constrained_p1();
    const CPZ r = reduce(P, 5);
    EXPECT_EQ(r.generators(), P.generators());
    EXPECT_THROW(reduce(P, 2), std::invalid_argument);
}

TEST(Reduce, BoxesSmallestGenerators)
{
    Matrix G(1, 3);
    G << 2, 0.1, 0.1;
    const CPZ Z = lift(Zonotope{Vector::Zero(1), G});
    const CPZ r = reduce(Z, 2);
    EXPECT_EQ(r.num_generators(), 2);
    const Box b = interval_hull(r);
    EXPECT_NEAR(b.lo(0), -2.2, 1e-12);
    EXPECT_NEAR(b.hi(0), 2.2, 1e-12);
}

TEST(Reduce, EnclosesSampledPoints)
{
    const LtiScenario s = lti_scenario();
    Matrix M(5, 6);
    M << s.Phi, s.Gamma;
    const CPZ R1 = add_exact(mul_cpmz_cpz(CPMZ(M), cartesian_exact(s.initial_nonconvex, s.input)),
                             with_fresh_ids(s.noise));
    const CPZ r = reduce(R1, 6);
    EXPECT_LE(r.num_generators(), 6);
    const Box b = interval_hull(r);
    Rng rng(5);
    for (int t = 0; t < 2000; ++t)
    {
        EXPECT_TRUE(b.contains(eval_point(R1, sample_uniform(R1.ids(), rng)), 1e-12));
    }
}

TEST(Restructure, ExactReparameterization)
{
    const CPZ P = constrained_p2();
    const Restructured r = restructure(P);
    EXPECT_EQ(r.set.dim(), P.dim());
    Rng rng(6);
    for (int t = 0; t < 50; ++t)
    {
        const FactorAssignment s = sample_uniform(P.ids(), rng);
        FactorAssignment full = complete_restructure(r, s);
        full.merge(s);
        EXPECT_LT((eval_point(r.set, full) - eval_point(P, s)).norm(), 1e-10);
        EXPECT_NEAR(constraint_residual(r.set, full), constraint_residual(P, s), 1e-9);
    }
}
