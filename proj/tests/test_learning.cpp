#include "czreach/learning.hpp"
#include "czreach/oracle.hpp"
#include "czreach/scenarios.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace czreach;
using czreach::test::assign;

namespace
{

Matrix lti_truth(const LtiScenario& s)
{
    Matrix M(s.Phi.rows(), s.Phi.cols() + s.Gamma.cols());
    M << s.Phi, s.Gamma;
    return M;
}

} // namespace

TEST(BuildBatch, SlicesStates)
{
    Matrix X(1, 3);
    X << 1, 2, 3;
    Matrix U(1, 2);
    U << 5, 6;
    const DataBatch b = build_batch(X, U);
    EXPECT_EQ(b.size(), 2);
    EXPECT_EQ(b.Xplus, X.rightCols(2));
    EXPECT_EQ(b.Xminus, X.leftCols(2));
    EXPECT_EQ(b.Uminus, U);
    EXPECT_THROW(build_batch(Matrix::Zero(1, 1), Matrix::Zero(1, 0)), TooShort);
    EXPECT_THROW(build_batch(X, Matrix::Zero(1, 1)), ShapeMismatch);
}

TEST(BuildBatch, ConcatenatesTrajectories)
{
    std::vector<DataBatch> parts;
    for (int i = 0; i < 20; ++i)
    {
        parts.push_back(build_batch(Matrix::Random(2, 7), Matrix::Random(1, 6)));
    }
    EXPECT_EQ(concat_batches(parts).size(), 120);
}

TEST(ConcatNoise, ScalarNoiseGivesSquare)
{
    const CPZ Zw = lift(Zonotope{Vector::Zero(1), Matrix::Constant(1, 1, 0.005)});
    const CPMZ M = concat_noise(Zw, 2);
    ASSERT_EQ(M.num_generators(), 2);
    Matrix g0(1, 2), g1(1, 2);
    g0 << 0.005, 0;
    g1 << 0, 0.005;
    EXPECT_EQ(M.generators()[0], g0);
    EXPECT_EQ(M.generators()[1], g1);
    EXPECT_EQ(M.num_factors(), 2);
}

TEST(ConcatNoise, SingletonAndBenchmarkNoise)
{
    const CPMZ zero = concat_noise(CPZ(Vector::Zero(3)), 4);
    EXPECT_EQ(zero.num_generators(), 0);
    EXPECT_EQ(zero.center(), Matrix::Zero(3, 4));
    const CPMZ big = concat_noise(box_noise(5, 0.005), 100);
    EXPECT_EQ(big.num_generators(), 500);
    EXPECT_EQ(big.center(), Matrix::Zero(5, 100));
}

TEST(Pinv, RankAndInverse)
{
    Matrix M(2, 3);
    M << 1, 0, 0, 0, 1, 0;
    EXPECT_EQ(numerical_rank(M), 2);
    EXPECT_TRUE((M * pinv(M)).isApprox(Matrix::Identity(2, 2)));
    EXPECT_EQ(numerical_rank(Matrix::Ones(3, 3)), 1);
}

TEST(ModelSetLti, NoiseFreeRecoversSystem)
{
    const LtiScenario s = lti_scenario();
    Rng rng(11);
    const SimulatedData d = simulate_dataset_lti(s.Phi, s.Gamma, s.initial_convex, s.input,
                                                 box_noise(5, 0.0), 10, 10, rng);
    const LabeledBatch lb = d.batch(0, 10);
    const ModelSet M = model_set_lti(lb.data, concat_noise(CPZ(Vector::Zero(5)), lb.data.size()));
    EXPECT_EQ(M.set.num_generators(), 0);
    EXPECT_LT((M.set.center() - lti_truth(s)).norm(), 1e-8);
}

TEST(ModelSetLti, RecordedNoiseIsWitness)
{
    const LtiScenario s = lti_scenario();
    Rng rng(12);
    const SimulatedData d = simulate_dataset_lti(s.Phi, s.Gamma, s.initial_convex, s.input,
                                                 s.noise, 10, 10, rng);
    const LabeledBatch lb = d.batch(0, 10);
    ASSERT_TRUE(lb.noise.has_value());
    const ModelSet M = model_set_lti(lb.data, *lb.noise);
    EXPECT_LT((eval_matrix(M.set, d.noise_witness) - lti_truth(s)).norm(), 1e-8);
}

TEST(ModelSetLti, TooFewColumns)
{
    const DataBatch b = build_batch(Matrix::Random(5, 4), Matrix::Random(1, 3));
    EXPECT_THROW(model_set_lti(b, concat_noise(CPZ(Vector::Zero(5)), 3)), RankDeficient);
}

TEST(MonomialBasis, GradedOrder)
{
    const MonomialBasis b = monomial_basis(2, 2);
    ASSERT_EQ(b.size(), 6);
    const std::vector<std::vector<int>> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    for (std::size_t i = 0; i < expected.size(); ++i)
    {
        EXPECT_EQ(b.exponents[i](0), expected[i][0]);
        EXPECT_EQ(b.exponents[i](1), expected[i][1]);
    }
    EXPECT_EQ(monomial_basis(3, 0).size(), 1);
}

TEST(MonomialBasis, CustomBenchmarkBasis)
{
    const PolyScenario s = poly_scenario(0.0);
    EXPECT_EQ(s.basis.size(), 5);
    EXPECT_EQ(s.basis.num_vars, 4);
    EXPECT_THROW(monomial_basis_custom({{1, 0}, {1, 0}}), DuplicateMonomial);
    EXPECT_THROW(monomial_basis_custom({{1, 0}, {1}}), ShapeMismatch);
    EXPECT_THROW(monomial_basis_custom({{-1, 0}}), NegativeExponent);
}

TEST(RegressorMatrix, Evaluation)
{
    Matrix X(1, 3);
    X << 1, 2, 3;
    const DataBatch b = build_batch(X, Matrix::Zero(0, 2));
    const Matrix ones = regressor_matrix(b, monomial_basis(1, 0));
    EXPECT_EQ(ones, Matrix::Ones(1, 2));
    const Matrix lin = regressor_matrix(b, monomial_basis_custom({{1}}));
    Matrix expected(1, 2);
    expected << 1, 2;
    EXPECT_EQ(lin, expected);
    const Vector h = monomial_basis(1, 2).eval(Vector::Constant(1, 2.0));
    EXPECT_EQ(h, Vector::LinSpaced(3, 0, 2).unaryExpr([](double k) { return std::pow(2.0, k); }));
}

TEST(ModelSetPoly, NoiseFreeRecoversCoefficients)
{
    const PolyScenario s = poly_scenario(0.0);
    Rng rng(13);
    const SimulatedData d = simulate_dataset_poly(s.Theta, s.basis, s.initial_convex, s.input,
                                                  box_noise(2, 0.0), 20, 7, rng);
    const LabeledBatch lb = d.batch(0, 20);
    const ModelSet M = model_set_poly(lb.data, s.basis, concat_noise(CPZ(Vector::Zero(2)), lb.data.size()));
    Matrix Theta(2, 5);
    Theta << 0.7, 1, 0.32, 0, 0,
             0.09, 0, 0, 0.4, 0.32;
    EXPECT_LT((M.set.center() - Theta).norm(), 1e-8);
    EXPECT_EQ(M.set.num_generators(), 0);
}

TEST(ModelSetPoly, RecordedNoiseIsWitness)
{
    const PolyScenario s = poly_scenario(7e-3);
    Rng rng(14);
    const SimulatedData d = simulate_dataset_poly(s.Theta, s.basis, s.initial_convex, s.input,
                                                  s.noise, 20, 7, rng);
    const LabeledBatch lb = d.batch(0, 20);
    const ModelSet M = model_set_poly(lb.data, s.basis, *lb.noise);
    EXPECT_LT((eval_matrix(M.set, d.noise_witness) - s.Theta).norm(), 1e-8);
}

TEST(ModelSetPoly, BasisLargerThanData)
{
    const DataBatch b = build_batch(Matrix::Random(2, 4), Matrix::Random(2, 3));
    EXPECT_THROW(model_set_poly(b, monomial_basis(4, 2), concat_noise(CPZ(Vector::Zero(2)), 3)),
                 RankDeficient);
}

TEST(Refine, IntervalModels)
{
    const ModelSet A{lift(MatrixZonotope{Matrix::Constant(1, 1, 1.0), {Matrix::Ones(1, 1)}}), {"a"}};
    const ModelSet B{lift(MatrixZonotope{Matrix::Constant(1, 1, 2.0), {Matrix::Ones(1, 1)}}), {"b"}};
    const ModelSet R = refine(A, B);
    const CPZ S = to_cpz(R.set);
    EXPECT_TRUE(membership_bruteforce(S, Vector::Constant(1, 1.0), 1e-6));
    EXPECT_TRUE(membership_bruteforce(S, Vector::Constant(1, 2.0), 1e-6));
    EXPECT_FALSE(membership_bruteforce(S, Vector::Constant(1, 0.5), 1e-6));
    EXPECT_FALSE(membership_bruteforce(S, Vector::Constant(1, 2.5), 1e-6));
    EXPECT_EQ(R.provenance.size(), 2u);
}

TEST(Refine, TrueModelStaysFeasible)
{
    const LtiScenario s = lti_scenario();
    Rng rng(15);
    const SimulatedData d = simulate_dataset_lti(s.Phi, s.Gamma, s.initial_convex, s.input,
                                                 s.noise, 20, 10, rng);
    const LabeledBatch b1 = d.batch(0, 10);
    const LabeledBatch b2 = d.batch(10, 20);
    const ModelSet M = refine(model_set_lti(b1.data, *b1.noise), model_set_lti(b2.data, *b2.noise));
    EXPECT_LT(constraint_residual(M.set, d.noise_witness), 1e-8);
    EXPECT_LT((eval_matrix(M.set, d.noise_witness) - lti_truth(s)).norm(), 1e-8);
}

TEST(TrajectoryCsv, RoundTrip)
{
    Trajectory t{Matrix::Random(2, 4), Matrix::Random(1, 3)};
    std::stringstream ss;
    write_trajectories_csv(ss, {t, t});
    EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "traj,k,x1,x2,u1");
    const auto back = read_trajectories_csv(ss);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].states, t.states);
    EXPECT_EQ(back[1].inputs, t.inputs);
}

TEST(NoiseCsv, RoundTrip)
{
    std::vector<NoiseRecord> rows{{0, 1, Vector::Random(3)}, {1, 2, Vector::Random(3)}};
    std::stringstream ss;
    write_noise_csv(ss, rows);
    const auto back = read_noise_csv(ss);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].traj, 1);
    EXPECT_EQ(back[1].k, 2);
    EXPECT_EQ(back[1].sigma, rows[1].sigma);
}
