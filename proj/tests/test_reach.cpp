#include "czreach/oracle.hpp"
#include "czreach/reach.hpp"
#include "czreach/scenarios.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace czreach;
using czreach::test::assign;
using czreach::test::interval_set;

namespace
{

Matrix lti_truth(const LtiScenario& s)
{
    Matrix M(s.Phi.rows(), s.Phi.cols() + s.Gamma.cols());
    M << s.Phi, s.Gamma;
    return M;
}

double max_witness_error(const ReachResult& res, const WitnessTrace& tr, const FactorAssignment& data)
{
    FactorAssignment sigma = tr.all();
    sigma.merge(data);
    sigma = complete_assignment(res, sigma);
    double worst = 0.0;
    for (std::size_t k = 0; k < res.sets.size(); ++k)
    {
        worst = std::max(worst, (eval_point(res.sets[k], sigma) - tr.states[k]).cwiseAbs().maxCoeff());
        worst = std::max(worst, constraint_residual(res.sets[k], sigma));
    }
    return worst;
}

} // namespace

TEST(StepLti, DegenerateSetsGiveSingleton)
{
    const LtiScenario s = lti_scenario();
    const ModelSet M{CPMZ(lti_truth(s)), {"truth"}};
    const Vector x = Vector::LinSpaced(5, 0.5, 1.5);
    const Vector u = Vector::Constant(1, 10.0);
    const CPZ out = step_lti(M, CPZ(x), CPZ(u), CPZ(Vector::Zero(5)));
    EXPECT_EQ(out.num_generators(), 0);
    EXPECT_LT((out.center() - (s.Phi * x + s.Gamma * u)).norm(), 1e-12);
}

TEST(StepLti, WitnessIdentityAndGeneratorCount)
{
    Rng rng(21);
    const CPMZ Y = lift(MatrixZonotope{Matrix::Random(2, 3), {Matrix::Random(2, 3), Matrix::Random(2, 3)}});
    const ModelSet M{Y, {"m"}};
    const CPZ R = lift(Zonotope{Vector::Random(2), Matrix::Random(2, 3)});
    const CPZ U = lift(Zonotope{Vector::Random(1), Matrix::Random(1, 1)});
    const CPZ W = lift(Zonotope{Vector::Zero(2), 0.01 * Matrix::Identity(2, 2)});
    const CPZ out = step_lti(M, R, U, W);
    const Index h_ru = R.num_generators() + U.num_generators();
    const Index gamma = Y.num_generators();
    EXPECT_EQ(out.num_generators(), gamma + h_ru + gamma * h_ru + W.num_generators());
    for (int t = 0; t < 100; ++t)
    {
        FactorAssignment s = sample_uniform(Y.ids(), rng);
        s.merge(sample_uniform(R.ids(), rng));
        s.merge(sample_uniform(U.ids(), rng));
        s.merge(sample_uniform(W.ids(), rng));
        Vector ru(3);
        ru << eval_point(R, s), eval_point(U, s);
        const Vector expected = eval_matrix(Y, s) * ru + eval_point(W, s);
        EXPECT_LT((eval_point(out, s) - expected).norm(), 1e-10);
    }
}

TEST(RunLti, NoiseFreeSingletonFollowsTrajectory)
{
    const LtiScenario s = lti_scenario();
    Rng rng(22);
    const CPZ zero = box_noise(5, 0.0);
    const SimulatedData data =
        simulate_dataset_lti(s.Phi, s.Gamma, s.initial_convex, s.input, zero, 10, 10, rng);
    ReachConfig cfg;
    cfg.horizon = 4;
    cfg.noise_set = zero;
    cfg.input_sets = {CPZ(Vector::Constant(1, 10.0))};
    cfg.initial_set = CPZ(Vector::Ones(5));
    const ReachResult res = run_lti(cfg, data.batch(0, 10), {});
    ASSERT_EQ(res.sets.size(), 5u);
    Vector x = Vector::Ones(5);
    for (std::size_t k = 0; k < res.sets.size(); ++k)
    {
        EXPECT_EQ(res.sets[k].num_generators(), 0);
        EXPECT_LT((res.sets[k].center() - x).norm(), 1e-7);
        x = s.Phi * x + s.Gamma * Vector::Constant(1, 10.0);
    }
}

TEST(RunLti, WitnessTrajectoriesAreReproduced)
{
    const LtiScenario s = lti_scenario();
    Rng rng(23);
    const SimulatedData data =
        simulate_dataset_lti(s.Phi, s.Gamma, s.initial_convex, s.input, s.noise, 20, 10, rng);
    ReachConfig cfg;
    cfg.horizon = 3;
    cfg.batch_length = 100;
    cfg.restructure_above = 50;
    cfg.noise_set = s.noise;
    cfg.input_sets = {s.input};
    cfg.initial_set = s.initial_nonconvex;
    const ReachResult res = run_lti(cfg, data.batch(0, 10), data.stream(10, 20, 0));
    EXPECT_TRUE(audit_ids(res).empty());
    EXPECT_EQ(res.model_history.size(), 2u);
    for (int t = 0; t < 20; ++t)
    {
        const WitnessTrace tr =
            simulate_lti(s.Phi, s.Gamma, cfg.initial_set, res.inputs_used, res.noise_used, rng);
        EXPECT_LT(max_witness_error(res, tr, data.noise_witness), 1e-8);
    }
}

TEST(RunLti, ReductionBoundsGenerators)
{
    const LtiScenario s = lti_scenario();
    Rng rng(24);
    const SimulatedData data =
        simulate_dataset_lti(s.Phi, s.Gamma, s.initial_convex, s.input, s.noise, 10, 10, rng);
    ReachConfig cfg;
    cfg.horizon = 3;
    cfg.reduction_order = 4;
    cfg.noise_set = s.noise;
    cfg.input_sets = {s.input};
    cfg.initial_set = s.initial_convex;
    const ReachResult res = run_lti(cfg, data.batch(0, 10), {});
    for (std::size_t k = 1; k < res.sets.size(); ++k)
    {
        EXPECT_LE(res.sets[k].num_generators(), 20);
    }
}

TEST(MonomialImage, Parabola)
{
    const CPZ Z = interval_set(0.0, 1.0, FactorId{1});
    const CPZ H = monomial_image(Z, monomial_basis_custom({{1}, {2}}));
    EXPECT_EQ(H.dim(), 2);
    for (double a : {-1.0, -0.4, 0.0, 0.7, 1.0})
    {
        const Vector v = eval_point(H, assign(H.ids(), Vector::Constant(1, a)));
        EXPECT_NEAR(v(0), a, 1e-15);
        EXPECT_NEAR(v(1), v(0) * v(0), 1e-12);
    }
    const Box b = interval_hull(H);
    EXPECT_NEAR(b.lo(1), 0.0, 1e-12);
    EXPECT_NEAR(b.hi(1), 1.0, 1e-12);
}

TEST(MonomialImage, ConstantBasisAndSingleton)
{
    const CPZ Z = interval_set(0.0, 1.0, FactorId{1});
    const CPZ one = monomial_image(Z, monomial_basis(1, 0));
    EXPECT_EQ(one.num_generators(), 0);
    EXPECT_EQ(one.center(), Vector::Ones(1));
    Vector z(2);
    z << 2, 3;
    const MonomialBasis basis = monomial_basis(2, 2);
    const CPZ img = monomial_image(CPZ(z), basis);
    EXPECT_EQ(img.num_generators(), 0);
    EXPECT_TRUE(img.center().isApprox(basis.eval(z)));
}

TEST(RunPolyModel, ZeroDynamicsGiveNoise)
{
    const PolyScenario s = poly_scenario(0.7e-4);
    ReachConfig cfg;
    cfg.horizon = 3;
    cfg.noise_set = s.noise;
    cfg.input_sets = {s.input};
    cfg.initial_set = s.initial_convex;
    const ReachResult res = run_poly_model(cfg, Matrix::Zero(2, 5), s.basis);
    for (std::size_t k = 1; k < res.sets.size(); ++k)
    {
        const Box b = interval_hull(res.sets[k]);
        EXPECT_NEAR(b.lo.minCoeff(), -0.7e-4, 1e-15);
        EXPECT_NEAR(b.hi.maxCoeff(), 0.7e-4, 1e-15);
    }
}

TEST(RunPolyModel, NonconvexWitness)
{
    const PolyScenario s = poly_scenario(0.7e-4);
    ReachConfig cfg;
    cfg.horizon = 3;
    cfg.restructure_above = 50;
    cfg.noise_set = s.noise;
    cfg.input_sets = {s.input};
    cfg.initial_set = s.initial_nonconvex;
    const ReachResult res = run_poly_model(cfg, s.Theta, s.basis);
    EXPECT_TRUE(audit_ids(res).empty());
    Rng rng(25);
    for (int t = 0; t < 50; ++t)
    {
        const WitnessTrace tr =
            simulate_poly(s.Theta, s.basis, cfg.initial_set, res.inputs_used, res.noise_used, rng);
        EXPECT_LT(max_witness_error(res, tr, {}), 1e-8);
    }
}

TEST(RunPolyData, NoiseFreeMatchesModelBased)
{
    const PolyScenario s = poly_scenario(0.0);
    Rng rng(26);
    const CPZ zero = box_noise(2, 0.0);
    const SimulatedData data =
        simulate_dataset_poly(s.Theta, s.basis, s.initial_convex, s.input, zero, 20, 7, rng);
    ReachConfig cfg;
    cfg.horizon = 2;
    cfg.noise_set = zero;
    cfg.input_sets = {s.input};
    cfg.initial_set = s.initial_convex;
    cfg.constant_input = true;
    const ReachResult learned = run_poly_data(cfg, data.batch(0, 20), {}, s.basis);
    const ReachResult model = run_poly_model(cfg, s.Theta, s.basis);
    ASSERT_EQ(learned.model_history.front().set.num_generators(), 0);
    for (int t = 0; t < 50; ++t)
    {
        FactorAssignment sigma = sample_uniform(s.initial_convex.ids(), rng);
        sigma.merge(sample_uniform(s.input.ids(), rng));
        const FactorAssignment a = complete_assignment(learned, sigma);
        const FactorAssignment b = complete_assignment(model, sigma);
        for (std::size_t k = 0; k < learned.sets.size(); ++k)
        {
            EXPECT_LT((eval_point(learned.sets[k], a) - eval_point(model.sets[k], b)).norm(), 1e-8);
        }
    }
}

TEST(CanonicalIds, RenumbersFromOne)
{
    const PolyScenario s = poly_scenario(0.7e-4);
    ReachConfig cfg;
    cfg.horizon = 1;
    cfg.noise_set = s.noise;
    cfg.input_sets = {s.input};
    cfg.initial_set = s.initial_convex;
    const ReachResult res = run_poly_model(cfg, s.Theta, s.basis);
    const IdCanon canon = canonical_ids(res);
    ASSERT_FALSE(canon.original.empty());
    EXPECT_EQ(canon.map(canon.original.front()).value, 1u);
    const CPZ mapped = canon.apply(res.sets.back());
    for (const FactorId& id : mapped.ids())
    {
        EXPECT_LE(id.value, canon.original.size());
    }
    const Json j = reach_result_to_json(res, canon);
    EXPECT_EQ(j["sets"].size(), res.sets.size());
}
