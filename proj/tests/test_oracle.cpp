#include "czreach/oracle.hpp"
#include "czreach/scenarios.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace czreach;
using czreach::test::constrained_p1;
using czreach::test::interval_set;

TEST(Rng, DeterministicAndSplit)
{
    Rng a(5);
    Rng b(5);
    for (int i = 0; i < 10; ++i)
    {
        const double x = a.uniform();
        EXPECT_EQ(x, b.uniform());
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 1.0);
    }
    Rng s1 = Rng(5).split(1);
    Rng s2 = Rng(5).split(2);
    EXPECT_NE(s1.uniform(), s2.uniform());
}

TEST(SampleFeasible, UnconstrainedAcceptsAnything)
{
    const CPZ Z = lift(Zonotope{Vector::Zero(2), Matrix::Identity(2, 2)});
    Rng rng(1);
    const auto s = sample_feasible(Z, rng);
    ASSERT_TRUE(s.has_value());
    EXPECT_EQ(constraint_residual(Z, *s), 0.0);
}

TEST(SampleFeasible, PinnedFactor)
{
    const CPZ S = CPZ::from_dense(Vector::Zero(1), Matrix::Ones(1, 1), Eigen::MatrixXi::Ones(1, 1),
                                  Matrix::Ones(1, 1), Vector::Ones(1), Eigen::MatrixXi::Ones(1, 1),
                                  make_ids({1}));
    Rng rng(2);
    const auto s = sample_feasible(S, rng);
    ASSERT_TRUE(s.has_value());
    EXPECT_NEAR(s->at(FactorId{1}), 1.0, kFeasibilityTol);
}

namespace
{

// alpha1^2 + alpha2^3 = 0.5 and alpha1 alpha2 = -0.25 have solutions in the box.
CPZ feasible_polynomial_set()
{
    Eigen::MatrixXi R(2, 3);
    R << 2, 0, 1,
         0, 3, 1;
    Matrix A(2, 3);
    A << 1, 1, 0,
         0, 0, 1;
    Vector b(2);
    b << 0.5, -0.25;
    return CPZ::from_dense(Vector::Zero(2), Matrix::Identity(2, 2), Eigen::MatrixXi::Identity(2, 2),
                           A, b, R, make_ids({1, 2}));
}

} // namespace

TEST(SampleFeasible, PolynomialConstraints)
{
    const CPZ S = feasible_polynomial_set();
    Rng rng(3);
    for (int t = 0; t < 10; ++t)
    {
        const auto s = sample_feasible(S, rng);
        ASSERT_TRUE(s.has_value());
        EXPECT_LE(constraint_residual(S, *s), kFeasibilityTol);
    }
}

TEST(SampleFeasible, EmptyPolynomialSetHasNoWitness)
{
    // Rows 1 and 3 of the constraints force alpha1^2 alpha2^2 = 2.
    const CPZ P = constrained_p1();
    const auto r = czreach::test::grid_range(
        2, [&](const Vector& a) { return constraint_residual(P, czreach::test::assign(P.ids(), a)); });
    EXPECT_GT(r.lo, 0.1);
    Rng rng(3);
    SamplerOptions opt;
    opt.restarts = 20;
    EXPECT_FALSE(sample_feasible(P, rng, opt).has_value());
}

TEST(SimulateLti, NoiseFreeCentersMatchRollout)
{
    const LtiScenario s = lti_scenario();
    const CPZ x0(Vector::Ones(5));
    const std::vector<CPZ> inputs(3, CPZ(Vector::Constant(1, 10.0)));
    const std::vector<CPZ> noise(3, CPZ(Vector::Zero(5)));
    Rng rng(4);
    const WitnessTrace tr = simulate_lti(s.Phi, s.Gamma, x0, inputs, noise, rng);
    ASSERT_EQ(tr.states.size(), 4u);
    Vector x = Vector::Ones(5);
    for (std::size_t k = 0; k < tr.states.size(); ++k)
    {
        EXPECT_LT((tr.states[k] - x).norm(), 1e-12);
        x = s.Phi * x + s.Gamma * Vector::Constant(1, 10.0);
    }
}

TEST(SimulateLti, ReplayIsExact)
{
    const LtiScenario s = lti_scenario();
    std::vector<CPZ> inputs;
    std::vector<CPZ> noise;
    for (int k = 0; k < 4; ++k)
    {
        inputs.push_back(with_fresh_ids(s.input));
        noise.push_back(with_fresh_ids(s.noise));
    }
    Rng rng(5);
    const WitnessTrace tr = simulate_lti(s.Phi, s.Gamma, s.initial_nonconvex, inputs, noise, rng);
    const auto replay = replay_lti(s.Phi, s.Gamma, s.initial_nonconvex, inputs, noise, tr);
    ASSERT_EQ(replay.size(), tr.states.size());
    for (std::size_t k = 0; k < replay.size(); ++k)
    {
        EXPECT_EQ(replay[k], tr.states[k]);
    }
}

TEST(SimulatePoly, MatchesFormula)
{
    const PolyScenario s = poly_scenario(0.0);
    Vector x0(2);
    x0 << 1.0, 1.6;
    Vector u(2);
    u << 0.2, 0.3;
    Rng rng(6);
    const std::vector<CPZ> inputs{CPZ(u), CPZ(u)};
    const std::vector<CPZ> noise(2, CPZ(Vector::Zero(2)));
    const WitnessTrace tr = simulate_poly(s.Theta, s.basis, CPZ(x0), inputs, noise, rng);
    Vector x = x0;
    for (std::size_t k = 0; k < tr.states.size(); ++k)
    {
        EXPECT_LT((tr.states[k] - x).norm(), 1e-14);
        Vector next(2);
        next << 0.7 * x(0) + u(0) + 0.32 * x(0) * x(0),
                0.09 * x(0) + 0.32 * u(1) * x(0) + 0.4 * x(1) * x(1);
        x = next;
    }
    const auto replay = replay_poly(s.Theta, s.basis, CPZ(x0), inputs, noise, tr);
    EXPECT_EQ(replay.back(), tr.states.back());
}

TEST(MembershipBruteforce, BasicCases)
{
    const CPZ I = interval_set(0.0, 1.0, FactorId{1});
    EXPECT_TRUE(membership_bruteforce(I, Vector::Zero(1), 1e-6));
    EXPECT_FALSE(membership_bruteforce(I, Vector::Constant(1, 2.0), 1e-3));
    const CPZ big = lift(Zonotope{Vector::Zero(1), Matrix::Ones(1, 5)});
    EXPECT_THROW(membership_bruteforce(big, Vector::Zero(1), 1e-6), BudgetExceeded);
}

TEST(IntervalArithmetic, PowersAndProducts)
{
    const Interval a{-1.0, 1.0};
    const Interval sq = pow(a, 2);
    EXPECT_EQ(sq.lo, 0.0);
    EXPECT_EQ(sq.hi, 1.0);
    const Interval prod = a * a;
    EXPECT_EQ(prod.lo, -1.0);
    EXPECT_EQ(prod.hi, 1.0);
    const Interval sum = a + Interval{2.0, 3.0};
    EXPECT_EQ(sum.lo, 1.0);
    EXPECT_EQ(sum.hi, 4.0);
}

TEST(IntervalBaseline, SquareAndProduct)
{
    IntervalMatrix Theta{Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
    const IntervalVector Z{{-1.0, 1.0}, {-1.0, 1.0}};
    const IntervalVector W{{0.0, 0.0}, {0.0, 0.0}};
    const IntervalVector out =
        interval_baseline_poly(Theta, Z, monomial_basis_custom({{2, 0}, {1, 1}}), W);
    EXPECT_EQ(out[0].lo, 0.0);
    EXPECT_EQ(out[0].hi, 1.0);
    EXPECT_EQ(out[1].lo, -1.0);
    EXPECT_EQ(out[1].hi, 1.0);
}

TEST(BoundaryCloud, SingletonAndSquare)
{
    Rng rng(7);
    const auto single = boundary_cloud(CPZ(Vector::Constant(2, 0.5)), 0, 1, 20, rng);
    ASSERT_FALSE(single.empty());
    for (const auto& p : single)
    {
        EXPECT_EQ(p, Eigen::Vector2d(0.5, 0.5));
    }
    const CPZ sq = lift(Zonotope{Vector::Zero(2), Matrix::Identity(2, 2)});
    const auto cloud = boundary_cloud(sq, 0, 1, 400, rng);
    for (const auto& p : cloud)
    {
        EXPECT_LE(p.cwiseAbs().maxCoeff(), 1.0);
    }
    EXPECT_GT(polygon_area(convex_hull(cloud)), 3.0);
}

TEST(BoundaryCloud, ConstrainedPointsAreFeasible)
{
    // The generators are the identity, so every cloud point is the factor
    // vector itself and must satisfy the constraints.
    const CPZ S = feasible_polynomial_set();
    Rng rng(8);
    const auto cloud = boundary_cloud(S, 0, 1, 50, rng);
    ASSERT_FALSE(cloud.empty());
    for (const auto& p : cloud)
    {
        EXPECT_LE(constraint_residual(S, czreach::test::assign(S.ids(), Vector(p))), kFeasibilityTol);
    }
}

TEST(ConvexHull, UnitSquareArea)
{
    std::vector<Eigen::Vector2d> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
    const auto hull = convex_hull(pts);
    EXPECT_EQ(hull.size(), 4u);
    EXPECT_NEAR(polygon_area(hull), 1.0, 1e-15);
}
