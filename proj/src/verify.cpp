#include "czreach/verify.hpp"

#include "czreach/algebra.hpp"
#include "czreach/experiment.hpp"
#include "czreach/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

namespace czreach
{

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Index randint(Rng& rng, Index lo, Index hi)
{
    const auto span = static_cast<double>(hi - lo + 1);
    return std::min(hi, lo + static_cast<Index>(rng.uniform() * span));
}

Matrix random_matrix(Rng& rng, Index rows, Index cols)
{
    Matrix M(rows, cols);
    for (Index j = 0; j < cols; ++j)
    {
        for (Index i = 0; i < rows; ++i)
        {
            M(i, j) = rng.factor();
        }
    }
    return M;
}

Eigen::MatrixXi random_exponents(Rng& rng, Index rows, Index cols, int max_exponent)
{
    Eigen::MatrixXi E = Eigen::MatrixXi::Zero(rows, cols);
    for (Index j = 0; j < cols; ++j)
    {
        for (Index i = 0; i < rows; ++i)
        {
            if (rng.uniform() < 0.5)
            {
                E(i, j) = static_cast<int>(randint(rng, 1, max_exponent));
            }
        }
    }
    return E;
}

Vector values_of(const FactorAssignment& sigma, const std::vector<FactorId>& ids)
{
    return sigma.gather(ids);
}

double max_abs(const Matrix& M)
{
    return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

std::string fmt(double v)
{
    std::ostringstream out;
    out << std::setprecision(3) << v;
    return out.str();
}

// Feasible assignment of S: sampled when possible, otherwise the constructed
// witness sigma0 (which is feasible by construction).
FactorAssignment pick_sigma(const CPZ& S, const FactorAssignment& sigma0, Rng& rng, int& sampled)
{
    SamplerOptions opt;
    opt.restarts = 20;
    if (auto s = sample_feasible(S, rng, opt))
    {
        ++sampled;
        FactorAssignment out = sigma0;
        out.merge(*s);
        return out;
    }
    return sigma0;
}

struct ExactnessTally
{
    int cases = 0;
    int failures = 0;
    int sampled = 0;
    double worst = 0.0;

    void check(double err, double residual_gap)
    {
        ++cases;
        worst = std::max(worst, err);
        if (!(err <= 1e-10) || !(residual_gap <= 1e-10))
        {
            ++failures;
        }
    }
};

// Residual of the composed constraint system equals the stacked residuals
// of the operands.
double residual_gap(double out, double r1, double r2)
{
    return std::abs(out - std::hypot(r1, r2));
}

CriterionResult criterion_exactness(std::uint64_t seed)
{
    constexpr int kCases = 1000;
    Rng rng = Rng(seed).split(1);
    std::vector<std::pair<std::string, ExactnessTally>> ops = {
        {"mul", {}}, {"add", {}}, {"cartesian", {}}, {"hadamard", {}},
        {"pow", {}}, {"project", {}}, {"map_linear", {}}};

    for (int t = 0; t < kCases; ++t)
    {
        {
            auto& tally = ops[0].second;
            const IdMix mix = random_id_mix(rng);
            const Index nx = randint(rng, 1, 5);
            const Index n = randint(rng, 1, 5);
            const CPMZ Y = random_cpmz(rng, nx, n, mix.first, mix.sigma);
            const CPZ P = random_cpz(rng, n, mix.second, mix.sigma);
            const CPZ out = mul_cpmz_cpz(Y, P);
            const FactorAssignment s = pick_sigma(out, mix.sigma, rng, tally.sampled);
            const Vector want = eval_matrix(Y, s) * eval_point(P, s);
            tally.check(max_abs(eval_point(out, s) - want),
                        residual_gap(constraint_residual(out, s), constraint_residual(Y, s),
                                     constraint_residual(P, s)));
        }
        for (int k = 1; k <= 3; ++k)
        {
            auto& tally = ops[static_cast<std::size_t>(k)].second;
            const IdMix mix = random_id_mix(rng);
            const Index n = randint(rng, 1, 5);
            const Index w = k == 2 ? randint(rng, 1, 5) : n;
            const CPZ P1 = random_cpz(rng, n, mix.first, mix.sigma);
            const CPZ P2 = random_cpz(rng, w, mix.second, mix.sigma);
            const CPZ out = k == 1 ? add_exact(P1, P2)
                          : k == 2 ? cartesian_exact(P1, P2)
                                   : hadamard_exact(P1, P2);
            const FactorAssignment s = pick_sigma(out, mix.sigma, rng, tally.sampled);
            const Vector x1 = eval_point(P1, s);
            const Vector x2 = eval_point(P2, s);
            Vector want;
            if (k == 1)
            {
                want = x1 + x2;
            }
            else if (k == 2)
            {
                want.resize(n + w);
                want << x1, x2;
            }
            else
            {
                want = x1.cwiseProduct(x2);
            }
            tally.check(max_abs(eval_point(out, s) - want),
                        residual_gap(constraint_residual(out, s), constraint_residual(P1, s),
                                     constraint_residual(P2, s)));
        }
        {
            auto& tally = ops[4].second;
            const IdMix mix = random_id_mix(rng);
            const Index n = randint(rng, 1, 5);
            const int e = static_cast<int>(randint(rng, 0, 4));
            const CPZ P = random_cpz(rng, n, mix.first, mix.sigma);
            const CPZ out = pow_exact(P, e);
            const FactorAssignment s = pick_sigma(out, mix.sigma, rng, tally.sampled);
            const Vector x = eval_point(P, s);
            Vector want(n);
            for (Index i = 0; i < n; ++i)
            {
                want(i) = std::pow(x(i), e);
            }
            // The e-fold product repeats the constraints of P e times; a zero
            // power has none.
            const double gap = std::abs(constraint_residual(out, s) -
                                        std::sqrt(static_cast<double>(e)) * constraint_residual(P, s));
            tally.check(max_abs(eval_point(out, s) - want), gap);
        }
        {
            auto& tally = ops[5].second;
            const IdMix mix = random_id_mix(rng);
            const Index n = randint(rng, 1, 5);
            const CPZ P = random_cpz(rng, n, mix.first, mix.sigma);
            std::vector<Index> idx(static_cast<std::size_t>(n));
            for (Index i = 0; i < n; ++i)
            {
                idx[static_cast<std::size_t>(i)] = i;
            }
            for (std::size_t i = idx.size(); i > 1; --i)
            {
                std::swap(idx[i - 1], idx[static_cast<std::size_t>(randint(rng, 0, static_cast<Index>(i) - 1))]);
            }
            idx.resize(static_cast<std::size_t>(randint(rng, 1, n)));
            const CPZ out = project(P, idx);
            const FactorAssignment s = pick_sigma(out, mix.sigma, rng, tally.sampled);
            const Vector x = eval_point(P, s);
            Vector want(static_cast<Index>(idx.size()));
            for (std::size_t i = 0; i < idx.size(); ++i)
            {
                want(static_cast<Index>(i)) = x(idx[i]);
            }
            tally.check(max_abs(eval_point(out, s) - want),
                        std::abs(constraint_residual(out, s) - constraint_residual(P, s)));
        }
        {
            auto& tally = ops[6].second;
            const IdMix mix = random_id_mix(rng);
            const Index n = randint(rng, 1, 5);
            const Index m = randint(rng, 1, 5);
            const CPZ P = random_cpz(rng, n, mix.first, mix.sigma);
            const Matrix M = random_matrix(rng, m, n);
            const CPZ out = map_linear(M, P);
            const FactorAssignment s = pick_sigma(out, mix.sigma, rng, tally.sampled);
            tally.check(max_abs(eval_point(out, s) - M * eval_point(P, s)),
                        std::abs(constraint_residual(out, s) - constraint_residual(P, s)));
        }
    }

    CriterionResult r;
    r.passed = true;
    std::ostringstream detail;
    for (const auto& [name, tally] : ops)
    {
        r.passed = r.passed && tally.failures == 0;
        detail << name << " " << tally.failures << "/" << tally.cases << " failed (worst "
               << fmt(tally.worst) << ", sampled " << tally.sampled << "); ";
    }
    r.detail = detail.str();
    return r;
}

// Dense columns of an exponent matrix, for block comparisons.
Eigen::MatrixXi dense(const ExpMatrix& E)
{
    return exp_to_dense(E);
}

CriterionResult criterion_accounting(std::uint64_t seed)
{
    constexpr int kCases = 200;
    Rng rng = Rng(seed).split(2);
    int deviations = 0;
    std::string first;
    auto deviation = [&](const std::string& what) {
        if (deviations++ == 0)
        {
            first = what;
        }
    };

    for (int t = 0; t < kCases; ++t)
    {
        // Y (x) P: gamma + h_P + gamma h_P generators with the block layout
        // [E_Y | E_P | E_Y(:,i) + E_P(:,j)], constraints of Y over those of P.
        {
            const IdMix mix = random_id_mix(rng);
            const Index nx = randint(rng, 1, 5);
            const Index n = randint(rng, 1, 5);
            const CPMZ Y = random_cpmz(rng, nx, n, mix.first, mix.sigma);
            const CPZ P = random_cpz(rng, n, mix.second, mix.sigma);
            const CPZ out = mul_cpmz_cpz(Y, P);
            const Index g = Y.num_generators();
            const Index h = P.num_generators();
            const auto merged = merge_id(Y, P);
            const Eigen::MatrixXi EY = dense(merged.first.exponents());
            const Eigen::MatrixXi EP = dense(merged.second.exponents());
            const Eigen::MatrixXi E = dense(out.exponents());
            if (out.num_generators() != g + h + g * h)
            {
                deviation("mul generator count");
            }
            else if (E.rows() != static_cast<Index>(merged.shared_id.size()) ||
                     (g > 0 && E.leftCols(g) != EY) || (h > 0 && E.middleCols(g, h) != EP))
            {
                deviation("mul exponent blocks");
            }
            else
            {
                for (Index i = 0; i < g; ++i)
                {
                    for (Index j = 0; j < h; ++j)
                    {
                        if (E.col(g + h + h * i + j) != EY.col(i) + EP.col(j))
                        {
                            deviation("mul product exponent column");
                        }
                    }
                }
            }
            if (out.num_constraints() != Y.num_constraints() + P.num_constraints() ||
                out.num_constraint_terms() != Y.num_constraint_terms() + P.num_constraint_terms())
            {
                deviation("mul constraint counts");
            }
        }
        // P1 (.) P2: h1 + h2 + h1 h2 generators.
        {
            const IdMix mix = random_id_mix(rng);
            const Index n = randint(rng, 1, 5);
            const CPZ P1 = random_cpz(rng, n, mix.first, mix.sigma);
            const CPZ P2 = random_cpz(rng, n, mix.second, mix.sigma);
            const CPZ out = hadamard_exact(P1, P2);
            const Index h1 = P1.num_generators();
            const Index h2 = P2.num_generators();
            const auto merged = merge_id(P1, P2);
            const Eigen::MatrixXi E1 = dense(merged.first.exponents());
            const Eigen::MatrixXi E2 = dense(merged.second.exponents());
            const Eigen::MatrixXi E = dense(out.exponents());
            if (out.num_generators() != h1 + h2 + h1 * h2)
            {
                deviation("hadamard generator count");
            }
            else if ((h1 > 0 && E.leftCols(h1) != E1) || (h2 > 0 && E.middleCols(h1, h2) != E2))
            {
                deviation("hadamard exponent blocks");
            }
            else
            {
                for (Index i = 0; i < h1; ++i)
                {
                    for (Index j = 0; j < h2; ++j)
                    {
                        if (E.col(h1 + h2 + h2 * i + j) != E1.col(i) + E2.col(j))
                        {
                            deviation("hadamard product exponent column");
                        }
                    }
                }
            }
            if (out.num_constraints() != P1.num_constraints() + P2.num_constraints() ||
                out.num_constraint_terms() != P1.num_constraint_terms() + P2.num_constraint_terms())
            {
                deviation("hadamard constraint counts");
            }
            const CPZ sum = add_exact(P1, P2);
            const CPZ cart = cartesian_exact(P1, P2);
            for (const CPZ* S : {&sum, &cart})
            {
                const Eigen::MatrixXi Es = dense(S->exponents());
                if (S->num_generators() != h1 + h2 ||
                    S->num_constraints() != P1.num_constraints() + P2.num_constraints() ||
                    S->num_constraint_terms() != P1.num_constraint_terms() + P2.num_constraint_terms() ||
                    (h1 > 0 && Es.leftCols(h1) != E1) || (h2 > 0 && Es.rightCols(h2) != E2))
                {
                    deviation(S == &sum ? "add block sizes" : "cartesian block sizes");
                }
            }
        }
        // Y1 n Y2: gamma_1 generators, m1 + m2 + rows*cols constraint rows,
        // q1 + q2 + gamma_1 + gamma_2 constraint terms.
        {
            const IdMix mix = random_id_mix(rng);
            const Index rows = randint(rng, 1, 3);
            const Index cols = randint(rng, 1, 3);
            const CPMZ Y1 = random_cpmz(rng, rows, cols, mix.first, mix.sigma);
            const CPMZ Y2 = random_cpmz(rng, rows, cols, mix.second, mix.sigma);
            const CPMZ out = intersect_cpmz(Y1, Y2);
            if (out.num_generators() != Y1.num_generators() ||
                out.num_constraints() != Y1.num_constraints() + Y2.num_constraints() + rows * cols ||
                out.num_constraint_terms() != Y1.num_constraint_terms() + Y2.num_constraint_terms() +
                                                  Y1.num_generators() + Y2.num_generators() ||
                out.constraint_cols() != 1 ||
                out.num_factors() != Y1.num_factors() + Y2.num_factors())
            {
                deviation("intersection block sizes");
            }
        }
    }
    CriterionResult r;
    r.passed = deviations == 0;
    r.detail = std::to_string(deviations) + " deviations over " + std::to_string(kCases) +
               " cases per operation" + (first.empty() ? "" : " (first: " + first + ")");
    return r;
}

CPZ constrained_p1()
{
    Vector c(3);
    c << 0, 2, 1;
    Matrix G(3, 2);
    G << 0, 1, 3, 2, 1, 5;
    Eigen::MatrixXi E(2, 2);
    E << 4, 1, 0, 2;
    Matrix A(3, 2);
    A << 1, 2, 0, 0, 3, 4;
    Vector b(3);
    b << 2, 0, 2;
    Eigen::MatrixXi R(2, 2);
    R << 4, 2, 0, 2;
    return CPZ::from_dense(c, G, E, A, b, R, make_ids({1, 2}));
}

CPZ constrained_p2()
{
    Vector c(3);
    c << 3, 3, 4;
    Matrix G(3, 2);
    G << 2, 2, 3, 0, 1, 4;
    Eigen::MatrixXi E(2, 2);
    E << 3, 2, 3, 0;
    Matrix A(2, 2);
    A << 1, 3, 2, 4;
    Vector b(2);
    b << 2, 5;
    Eigen::MatrixXi R(2, 2);
    R << 2, 0, 2, 3;
    return CPZ::from_dense(c, G, E, A, b, R, make_ids({1, 3}));
}

CriterionResult criterion_merge(std::uint64_t)
{
    const CPZ P1 = constrained_p1();
    const CPZ P2 = constrained_p2();
    const auto m = merge_id(P1, P2);
    Eigen::MatrixXi E1(3, 2), R1(3, 2), E2(3, 2), R2(3, 2);
    E1 << 4, 1, 0, 2, 0, 0;
    R1 << 4, 2, 0, 2, 0, 0;
    E2 << 3, 2, 0, 0, 3, 0;
    R2 << 2, 0, 0, 0, 2, 3;
    std::vector<std::string> bad;
    if (m.shared_id != make_ids({1, 2, 3}) || m.first.ids() != m.shared_id ||
        m.second.ids() != m.shared_id)
    {
        bad.push_back("id");
    }
    if (dense(m.first.exponents()) != E1)
    {
        bad.push_back("E1");
    }
    if (dense(m.first.constraint_exponents()) != R1)
    {
        bad.push_back("R1");
    }
    if (dense(m.second.exponents()) != E2)
    {
        bad.push_back("E2");
    }
    if (dense(m.second.constraint_exponents()) != R2)
    {
        bad.push_back("R2");
    }
    if (m.first.center() != P1.center() || m.first.generators() != P1.generators() ||
        m.second.center() != P2.center() || m.second.generators() != P2.generators() ||
        Matrix(m.first.constraint_matrix()) != Matrix(P1.constraint_matrix()) ||
        Matrix(m.second.constraint_matrix()) != Matrix(P2.constraint_matrix()))
    {
        bad.push_back("c/G/A changed");
    }
    CriterionResult r;
    r.passed = bad.empty();
    if (r.passed)
    {
        r.detail = "merged id [1,2,3]; E1, R1, E2, R2 match entry for entry";
    }
    else
    {
        r.detail = "mismatch in";
        for (const auto& b : bad)
        {
            r.detail += " " + b;
        }
    }
    return r;
}

Matrix lti_truth(const LtiScenario& s)
{
    Matrix AB(s.Phi.rows(), s.Phi.cols() + s.Gamma.cols());
    AB << s.Phi, s.Gamma;
    return AB;
}

CriterionResult criterion_lti_witness(std::uint64_t seed)
{
    const auto t0 = Clock::now();
    const LtiScenario s = lti_scenario();
    const Matrix truth = lti_truth(s);
    int failures = 0;
    double worst = 0.0;
    for (int i = 0; i < 50; ++i)
    {
        Rng rng = Rng(seed).split(400 + static_cast<std::uint64_t>(i));
        const SimulatedData data =
            simulate_dataset_lti(s.Phi, s.Gamma, s.initial_convex, s.input, s.noise, 10, 10, rng);
        const LabeledBatch batch = data.batch(0, 10);
        const ModelSet M = model_set_lti(batch.data, *batch.noise);
        const double err = max_abs(eval_matrix(M.set, data.noise_witness) - truth);
        worst = std::max(worst, err);
        if (!(err <= 1e-8) || batch.data.size() != 100)
        {
            ++failures;
        }
    }
    const double secs = seconds_since(t0);
    CriterionResult r;
    r.passed = failures == 0 && secs < 5.0;
    r.detail = std::to_string(failures) + "/50 realizations failed, worst error " + fmt(worst) +
               ", " + fmt(secs) + " s (limit 5 s)";
    return r;
}

CriterionResult criterion_poly_witness(std::uint64_t seed)
{
    int failures = 0;
    double worst = 0.0;
    std::ostringstream detail;
    for (double radius : {7e-3, 0.7e-4, 0.7e-5})
    {
        const PolyScenario s = poly_scenario(radius);
        Rng rng = Rng(seed).split(500 + static_cast<std::uint64_t>(radius * 1e7));
        const SimulatedData data = simulate_dataset_poly(s.Theta, s.basis, s.initial_convex,
                                                         s.input, s.noise, 20, 7, rng);
        const LabeledBatch batch = data.batch(0, 20);
        const ModelSet M = model_set_poly(batch.data, s.basis, *batch.noise);
        const double err = max_abs(eval_matrix(M.set, data.noise_witness) - s.Theta);
        worst = std::max(worst, err);
        if (!(err <= 1e-8) || batch.data.size() != 140)
        {
            ++failures;
        }
    }
    detail << "noisy witness (3 noise levels, 140 samples): " << failures << " failures, worst "
           << fmt(worst) << "; ";

    // Noise-free data give a singleton at the true coefficients.
    const PolyScenario s = poly_scenario(0.0);
    const CPZ zero(Vector::Zero(2));
    Rng rng = Rng(seed).split(599);
    const SimulatedData data = simulate_dataset_poly(s.Theta, s.basis, s.initial_convex, s.input,
                                                     zero, 20, 7, rng);
    const LabeledBatch batch = data.batch(0, 20);
    const ModelSet M = model_set_poly(batch.data, s.basis, *batch.noise);
    const double err = max_abs(M.set.center() - s.Theta);
    const bool singleton = M.set.num_generators() == 0;
    detail << "noise-free: " << (singleton ? "singleton" : "not a singleton") << ", error " << fmt(err);

    CriterionResult r;
    r.passed = failures == 0 && singleton && err <= 1e-8;
    r.detail = detail.str();
    return r;
}

CPMZ interval_mz(double lo, double hi)
{
    return lift(MatrixZonotope{Matrix::Constant(1, 1, 0.5 * (lo + hi)),
                               {Matrix::Constant(1, 1, 0.5 * (hi - lo))}});
}

// Entry-wise check that sampled feasible points of inner lie in the interval
// hull of outer.
struct NestingCheck
{
    int points = 0;
    int outside = 0;
    int sampled_failures = 0;
};

NestingCheck nested_in_hull(const CPZ& inner, const std::vector<Box>& outers, int samples, Rng& rng)
{
    NestingCheck c;
    for (int i = 0; i < samples; ++i)
    {
        auto sigma = sample_feasible(inner, rng);
        if (!sigma)
        {
            ++c.sampled_failures;
            continue;
        }
        const Vector x = eval_point(inner, *sigma);
        ++c.points;
        for (const auto& box : outers)
        {
            if (!box.contains(x, 1e-6))
            {
                ++c.outside;
                break;
            }
        }
    }
    return c;
}

CriterionResult criterion_intersection(std::uint64_t seed)
{
    std::ostringstream detail;
    bool ok = true;

    // [0,2] n [1,3] = [1,2] by brute-force membership.
    const CPZ I = to_cpz(intersect_cpmz(interval_mz(0, 2), interval_mz(1, 3)));
    int wrong = 0;
    for (int i = 0; i <= 20; ++i)
    {
        const double x = 1.0 + 0.05 * i;
        wrong += membership_bruteforce(I, Vector::Constant(1, x), 1e-6) ? 0 : 1;
    }
    for (double x : {-0.5, 0.0, 0.5, 0.9, 1.0 - 2e-6, 2.0 + 2e-6, 2.1, 2.5, 3.0})
    {
        wrong += membership_bruteforce(I, Vector::Constant(1, x), 1e-6) ? 1 : 0;
    }
    // [0,1] n [2,3] is empty: the residual stays away from zero on the grid.
    const CPZ D = to_cpz(intersect_cpmz(interval_mz(0, 1), interval_mz(2, 3)));
    double min_res = std::numeric_limits<double>::infinity();
    const auto& ids = D.ids();
    for (int a = 0; a <= 200; ++a)
    {
        for (int b = 0; b <= 200; ++b)
        {
            FactorAssignment s;
            s.set(ids[0], -1.0 + 0.01 * a);
            s.set(ids[1], -1.0 + 0.01 * b);
            min_res = std::min(min_res, constraint_residual(D, s));
        }
    }
    ok = ok && wrong == 0 && min_res > 0.1;
    detail << "interval [0,2]n[1,3]: " << wrong << " wrong memberships; empty case min residual "
           << fmt(min_res) << "; ";

    // Two-batch refinement nesting, LTI.
    {
        const LtiScenario s = lti_scenario();
        Rng rng = Rng(seed).split(601);
        const SimulatedData data =
            simulate_dataset_lti(s.Phi, s.Gamma, s.initial_convex, s.input, s.noise, 20, 10, rng);
        const LabeledBatch b1 = data.batch(0, 10);
        const LabeledBatch b2 = data.batch(10, 20);
        const ModelSet M1 = model_set_lti(b1.data, *b1.noise);
        const ModelSet M2 = model_set_lti(b2.data, *b2.noise);
        const ModelSet Mr = refine(M1, M2);
        const auto model = nested_in_hull(to_cpz(Mr.set),
                                          {interval_hull(to_cpz(M1.set)), interval_hull(to_cpz(M2.set))},
                                          200, rng);
        ReachConfig cfg;
        cfg.horizon = 1;
        cfg.batch_length = 100;
        cfg.restructure_above = 50;
        cfg.noise_set = s.noise;
        cfg.input_sets = {s.input};
        cfg.initial_set = s.initial_nonconvex;
        const ReachResult pre = run_lti(cfg, b1, {});
        const ReachResult post = run_lti(cfg, b1, data.stream(10, 20, 0));
        const auto reach = nested_in_hull(post.sets[1], {interval_hull(pre.sets[1])}, 200, rng);
        const bool pass = model.outside == 0 && model.points > 0 && reach.outside == 0 &&
                          reach.points > 0 && post.model_history.size() == 2;
        ok = ok && pass;
        detail << "LTI refined model " << model.outside << "/" << model.points
               << " outside, refined R1 " << reach.outside << "/" << reach.points << " outside; ";
    }

    // Two-batch refinement nesting, polynomial (large noise, nonconvex start).
    {
        const PolyScenario s = poly_scenario(7e-3);
        Rng rng = Rng(seed).split(602);
        const SimulatedData data = simulate_dataset_poly(s.Theta, s.basis, s.initial_convex,
                                                         s.input, s.noise, 20, 7, rng);
        const LabeledBatch b1 = data.batch(0, 10);
        const LabeledBatch b2 = data.batch(10, 20);
        const ModelSet M1 = model_set_poly(b1.data, s.basis, *b1.noise);
        const ModelSet M2 = model_set_poly(b2.data, s.basis, *b2.noise);
        const ModelSet Mr = refine(M1, M2);
        const auto model = nested_in_hull(to_cpz(Mr.set),
                                          {interval_hull(to_cpz(M1.set)), interval_hull(to_cpz(M2.set))},
                                          200, rng);
        ReachConfig cfg;
        cfg.horizon = 1;
        cfg.batch_length = 5;
        cfg.restructure_above = 50;
        cfg.noise_set = s.noise;
        cfg.input_sets = {s.input};
        cfg.initial_set = s.initial_nonconvex;
        const ReachResult pre = run_poly_data(cfg, b1, {}, s.basis);
        const ReachResult post = run_poly_data(cfg, b1, data.stream(10, 20, 0), s.basis);
        const auto reach = nested_in_hull(post.sets[1], {interval_hull(pre.sets[1])}, 200, rng);
        const bool pass = model.outside == 0 && model.points > 0 && reach.outside == 0 &&
                          reach.points > 0 && post.model_history.size() == 2;
        ok = ok && pass;
        detail << "polynomial refined model " << model.outside << "/" << model.points
               << " outside, refined R1 " << reach.outside << "/" << reach.points << " outside";
    }

    CriterionResult r;
    r.passed = ok;
    r.detail = detail.str();
    return r;
}

struct WitnessTally
{
    int trajectories = 0;
    int failures = 0;
    double worst = 0.0;
    double worst_residual = 0.0;
};

template<class Simulate>
void check_witnesses(const ReachResult& res, const FactorAssignment& data_witness, int count,
                     Simulate simulate, WitnessTally& tally)
{
    for (int i = 0; i < count; ++i)
    {
        const WitnessTrace tr = simulate();
        FactorAssignment sigma = tr.all();
        sigma.merge(data_witness);
        sigma = complete_assignment(res, sigma);
        bool ok = true;
        for (std::size_t k = 0; k < res.sets.size(); ++k)
        {
            const double err = max_abs(eval_point(res.sets[k], sigma) - tr.states[k]);
            const double resid = constraint_residual(res.sets[k], sigma);
            tally.worst = std::max(tally.worst, err);
            tally.worst_residual = std::max(tally.worst_residual, resid);
            ok = ok && err <= 1e-8 && resid <= kFeasibilityTol;
        }
        ++tally.trajectories;
        tally.failures += ok ? 0 : 1;
    }
}

CriterionResult criterion_witness_propagation(std::uint64_t seed)
{
    constexpr int kTraces = 500;
    const auto t0 = Clock::now();
    std::ostringstream detail;
    bool ok = true;
    auto report = [&](const std::string& name, const WitnessTally& t, const ReachResult& res) {
        const auto audit = audit_ids(res);
        ok = ok && t.failures == 0 && audit.empty();
        detail << name << " " << t.failures << "/" << t.trajectories << " failed (worst "
               << fmt(t.worst) << ", residual " << fmt(t.worst_residual) << ", id audit "
               << audit.size() << "); ";
    };

    {
        const LtiScenario s = lti_scenario();
        Rng rng = Rng(seed).split(701);
        const SimulatedData data =
            simulate_dataset_lti(s.Phi, s.Gamma, s.initial_convex, s.input, s.noise, 20, 10, rng);
        ReachConfig cfg;
        cfg.horizon = 5;
        cfg.batch_length = 100;
        cfg.restructure_above = 50;
        cfg.noise_set = s.noise;
        cfg.input_sets = {s.input};
        cfg.initial_set = s.initial_nonconvex;
        const ReachResult res = run_lti(cfg, data.batch(0, 10), data.stream(10, 20, 0));
        WitnessTally t;
        check_witnesses(res, data.noise_witness, kTraces, [&] {
            return simulate_lti(s.Phi, s.Gamma, cfg.initial_set, res.inputs_used, res.noise_used, rng);
        }, t);
        report("LTI data nonconvex", t, res);
    }

    for (bool nonconvex : {false, true})
    {
        const PolyScenario s = poly_scenario(0.7e-4);
        Rng rng = Rng(seed).split(nonconvex ? 703 : 702);
        ReachConfig cfg;
        cfg.horizon = 3;
        cfg.restructure_above = 50;
        cfg.noise_set = s.noise;
        cfg.input_sets = {s.input};
        cfg.initial_set = nonconvex ? s.initial_nonconvex : s.initial_convex;
        const ReachResult res = run_poly_model(cfg, s.Theta, s.basis);
        WitnessTally t;
        check_witnesses(res, FactorAssignment{}, kTraces, [&] {
            return simulate_poly(s.Theta, s.basis, cfg.initial_set, res.inputs_used, res.noise_used, rng);
        }, t);
        report(std::string("poly model ") + (nonconvex ? "nonconvex" : "convex"), t, res);
    }

    for (bool nonconvex : {false, true})
    {
        for (double radius : {0.7e-5, 7e-3})
        {
            const PolyScenario s = poly_scenario(radius);
            Rng rng = Rng(seed).split((nonconvex ? 710 : 720) + (radius > 1e-3 ? 1 : 0));
            const SimulatedData data = simulate_dataset_poly(s.Theta, s.basis, s.initial_convex,
                                                             s.input, s.noise, 20, 7, rng);
            ReachConfig cfg;
            cfg.horizon = 3;
            cfg.batch_length = 5;
            cfg.restructure_above = 50;
            cfg.noise_set = s.noise;
            cfg.input_sets = {s.input};
            cfg.initial_set = nonconvex ? s.initial_nonconvex : s.initial_convex;
            const ReachResult res =
                run_poly_data(cfg, data.batch(0, 10), data.stream(10, 20, 0), s.basis);
            WitnessTally t;
            check_witnesses(res, data.noise_witness, kTraces, [&] {
                return simulate_poly(s.Theta, s.basis, cfg.initial_set, res.inputs_used,
                                     res.noise_used, rng);
            }, t);
            report(std::string("poly data ") + (nonconvex ? "nonconvex" : "convex") + " noise " +
                       fmt(radius), t, res);
        }
    }
    const double secs = seconds_since(t0);
    CriterionResult r;
    r.passed = ok && secs <= 120.0;
    detail << fmt(secs) << " s (limit 120 s)";
    r.detail = detail.str();
    return r;
}

CriterionResult criterion_conservatism(std::uint64_t seed)
{
    const PolyScenario s = poly_scenario(0.7e-5);
    Rng rng = Rng(seed).split(801);
    const SimulatedData data = simulate_dataset_poly(s.Theta, s.basis, s.initial_convex, s.input,
                                                     s.noise, 20, 7, rng);
    ReachConfig cfg;
    cfg.horizon = 1;
    cfg.batch_length = 5;
    cfg.restructure_above = 50;
    cfg.noise_set = s.noise;
    cfg.input_sets = {s.input};
    cfg.initial_set = s.initial_convex;
    const ReachResult res = run_poly_data(cfg, data.batch(0, 10), data.stream(10, 20, 0), s.basis);

    const ModelSet& M = res.model_history[static_cast<std::size_t>(res.model_at_step[0])];
    const CPZ Z = cartesian_exact(res.sets[0], res.inputs_used[0]);
    const IntervalVector box = interval_baseline_poly(interval_hull(M.set), to_intervals(interval_hull(Z)),
                                                      s.basis, to_intervals(interval_hull(res.noise_used[0])));
    const double box_area = box[0].width() * box[1].width();

    const auto cloud = boundary_cloud(res.sets[1], 0, 1, 2000, rng);
    const double area = polygon_area(convex_hull(cloud));
    int outside = 0;
    for (const auto& p : cloud)
    {
        outside += box[0].contains(p.x(), 1e-12) && box[1].contains(p.y(), 1e-12) ? 0 : 1;
    }
    CriterionResult r;
    const double ratio = area / box_area;
    r.passed = cloud.size() >= 1000 && outside == 0 && ratio <= 0.95;
    r.detail = "sampled hull area " + fmt(area) + " vs interval baseline " + fmt(box_area) +
               " (ratio " + fmt(ratio) + ", " + std::to_string(cloud.size()) + " points, " +
               std::to_string(outside) + " outside the baseline)";
    return r;
}

CriterionResult criterion_reduction(std::uint64_t seed)
{
    constexpr int kPoints = 10000;
    std::ostringstream detail;
    bool ok = true;

    // Model-based polynomial R_2 without restructuring (unconstrained,
    // polynomial dependencies).
    {
        const PolyScenario s = poly_scenario(0.7e-4);
        Rng rng = Rng(seed).split(901);
        ReachConfig cfg;
        cfg.horizon = 2;
        cfg.noise_set = s.noise;
        cfg.input_sets = {s.input};
        cfg.initial_set = s.initial_nonconvex;
        const ReachResult res = run_poly_model(cfg, s.Theta, s.basis);
        const CPZ& S = res.sets[2];
        const Index h = S.num_generators();
        const Index keep = std::max(S.dim(), h / 2);
        const CPZ Rd = reduce(S, keep);
        const Box hull = interval_hull(Rd);
        int outside = 0;
        for (int i = 0; i < kPoints; ++i)
        {
            const WitnessTrace tr =
                simulate_poly(s.Theta, s.basis, cfg.initial_set, res.inputs_used, res.noise_used, rng);
            outside += hull.contains(tr.states[2], 1e-9) ? 0 : 1;
        }
        const bool pass = outside == 0 && Rd.num_generators() <= keep && h - keep >= h / 2;
        ok = ok && pass;
        detail << "polynomial R2 " << h << " -> " << Rd.num_generators() << " generators, "
               << outside << "/" << kPoints << " witnesses outside; ";
    }

    // LTI R_1 with a refined (constrained) model, no restructuring.
    {
        const LtiScenario s = lti_scenario();
        Rng rng = Rng(seed).split(902);
        const SimulatedData data =
            simulate_dataset_lti(s.Phi, s.Gamma, s.initial_convex, s.input, s.noise, 20, 10, rng);
        ReachConfig cfg;
        cfg.horizon = 1;
        cfg.batch_length = 100;
        cfg.noise_set = s.noise;
        cfg.input_sets = {s.input};
        cfg.initial_set = s.initial_nonconvex;
        const ReachResult res = run_lti(cfg, data.batch(0, 10), data.stream(10, 20, 0));
        const CPZ& S = res.sets[1];
        const Index h = S.num_generators();
        const Index keep = std::max(S.dim(), h / 2);
        const CPZ Rd = reduce(S, keep);
        const Box hull = interval_hull(Rd);
        int outside = 0;
        int bad_witness = 0;
        for (int i = 0; i < kPoints; ++i)
        {
            const WitnessTrace tr =
                simulate_lti(s.Phi, s.Gamma, cfg.initial_set, res.inputs_used, res.noise_used, rng);
            outside += hull.contains(tr.states[1], 1e-9) ? 0 : 1;
            if (i < 100)
            {
                FactorAssignment sigma = tr.all();
                sigma.merge(data.noise_witness);
                bad_witness += max_abs(eval_point(S, sigma) - tr.states[1]) <= 1e-8 ? 0 : 1;
            }
        }
        const bool pass = outside == 0 && bad_witness == 0 && Rd.num_generators() <= keep &&
                          S.is_constrained();
        ok = ok && pass;
        detail << "LTI R1 (constrained) " << h << " -> " << Rd.num_generators() << " generators, "
               << outside << "/" << kPoints << " witnesses outside";
    }
    CriterionResult r;
    r.passed = ok;
    r.detail = detail.str();
    return r;
}

CriterionResult criterion_determinism(std::uint64_t seed)
{
    std::vector<std::string> parts;
    bool ok = true;
    for (Experiment e : {Experiment::LtiDemo, Experiment::PolyDataDemo})
    {
        ExperimentConfig cfg = default_config(e);
        cfg.seed = seed;
        const std::string a = sets_json_text(cfg, run_demo(cfg));
        const std::string b = sets_json_text(cfg, run_demo(cfg));
        const bool same = a == b;
        ok = ok && same;
        parts.push_back(to_string(e) + ": " + (same ? "identical" : "different") + " (" +
                        std::to_string(a.size()) + " bytes)");
    }
    CriterionResult r;
    r.passed = ok;
    for (std::size_t i = 0; i < parts.size(); ++i)
    {
        r.detail += (i > 0 ? "; " : "") + parts[i];
    }
    return r;
}

const char* criterion_name(int id)
{
    static const char* names[] = {"algebraic exactness",
                                  "generator and constraint accounting",
                                  "merge_id fidelity",
                                  "LTI model-set witness",
                                  "polynomial model-set witness",
                                  "intersection and refinement",
                                  "end-to-end witness propagation",
                                  "conservatism against interval baseline",
                                  "reduction soundness",
                                  "determinism"};
    return id >= 1 && id <= kNumCriteria ? names[id - 1] : "unknown";
}

} // namespace

CPZ random_cpz(Rng& rng, Index dim, const std::vector<FactorId>& ids,
               const FactorAssignment& sigma, const RandomSetOptions& opt)
{
    const auto p = static_cast<Index>(ids.size());
    const Index h = randint(rng, 0, opt.max_generators);
    const Vector c = random_matrix(rng, dim, 1).col(0);
    const Matrix G = random_matrix(rng, dim, h);
    const Eigen::MatrixXi E = random_exponents(rng, p, h, opt.max_exponent);
    const Index nc = p > 0 ? randint(rng, 0, opt.max_constraints) : 0;
    const Index q = nc > 0 ? randint(rng, 1, opt.max_terms) : 0;
    const Matrix A = random_matrix(rng, nc, q);
    const Eigen::MatrixXi R = random_exponents(rng, p, q, opt.max_exponent);
    const Vector b = q > 0 ? Vector(A * monomials(exp_from_dense(R), values_of(sigma, ids)))
                           : Vector(Vector::Zero(nc));
    return CPZ::from_dense(c, G, E, A, b, R, ids);
}

CPMZ random_cpmz(Rng& rng, Index rows, Index cols, const std::vector<FactorId>& ids,
                 const FactorAssignment& sigma, const RandomSetOptions& opt)
{
    const auto p = static_cast<Index>(ids.size());
    const Index g = randint(rng, 0, opt.max_generators);
    const Matrix C = random_matrix(rng, rows, cols);
    std::vector<Matrix> G;
    for (Index i = 0; i < g; ++i)
    {
        G.push_back(random_matrix(rng, rows, cols));
    }
    const Eigen::MatrixXi E = random_exponents(rng, p, g, opt.max_exponent);
    const Index nc = p > 0 ? randint(rng, 0, opt.max_constraints) : 0;
    const Index na = nc > 0 ? randint(rng, 1, 2) : 0;
    const Index q = nc > 0 ? randint(rng, 1, opt.max_terms) : 0;
    const Eigen::MatrixXi R = random_exponents(rng, p, q, opt.max_exponent);
    std::vector<Matrix> A;
    Matrix B = Matrix::Zero(nc, na);
    const Vector m = q > 0 ? monomials(exp_from_dense(R), values_of(sigma, ids)) : Vector();
    for (Index j = 0; j < q; ++j)
    {
        A.push_back(random_matrix(rng, nc, na));
        B += m(j) * A.back();
    }
    return CPMZ::from_lists(C, std::move(G), E, A, B, R, ids);
}

IdMix random_id_mix(Rng& rng, Index max_factors)
{
    const Index k = randint(rng, 1, max_factors);
    const std::vector<FactorId> pool = fresh_ids(static_cast<std::size_t>(k));
    IdMix mix;
    for (auto id : pool)
    {
        mix.sigma.set(id, rng.factor());
    }
    const Index mode = randint(rng, 0, 2);
    for (auto id : pool)
    {
        if (mode == 0)
        {
            mix.first.push_back(id);
            mix.second.push_back(id);
        }
        else if (mode == 1)
        {
            (rng.uniform() < 0.5 ? mix.first : mix.second).push_back(id);
        }
        else
        {
            const double u = rng.uniform();
            if (u < 0.7)
            {
                mix.first.push_back(id);
            }
            if (u > 0.3)
            {
                mix.second.push_back(id);
            }
        }
    }
    return mix;
}

CriterionResult run_criterion(int id, std::uint64_t seed)
{
    static const std::function<CriterionResult(std::uint64_t)> fns[] = {
        criterion_exactness, criterion_accounting, criterion_merge,
        criterion_lti_witness, criterion_poly_witness, criterion_intersection,
        criterion_witness_propagation, criterion_conservatism, criterion_reduction,
        criterion_determinism};
    const auto t0 = Clock::now();
    CriterionResult r;
    if (id < 1 || id > kNumCriteria)
    {
        r.detail = "no such criterion";
    }
    else
    {
        try
        {
            r = fns[id - 1](seed);
        }
        catch (const std::exception& e)
        {
            r.passed = false;
            r.detail = std::string("exception: ") + e.what();
        }
    }
    r.id = id;
    r.name = criterion_name(id);
    r.seconds = seconds_since(t0);
    return r;
}

std::vector<CriterionResult> run_acceptance(const VerifyOptions& opt)
{
    std::vector<int> ids = opt.only;
    if (ids.empty())
    {
        for (int i = 1; i <= kNumCriteria; ++i)
        {
            ids.push_back(i);
        }
    }
    std::vector<CriterionResult> results(ids.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < ids.size(); i = next++)
        {
            results[i] = run_criterion(ids[i], opt.seed);
        }
    };
    const unsigned n = std::clamp<unsigned>(opt.threads, 1u, static_cast<unsigned>(ids.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t)
    {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool)
    {
        th.join();
    }
    std::sort(results.begin(), results.end(),
              [](const CriterionResult& a, const CriterionResult& b) { return a.id < b.id; });
    return results;
}

std::string format_result_line(const CriterionResult& r)
{
    std::ostringstream out;
    out << (r.passed ? "PASS" : "FAIL") << " " << std::setw(2) << r.id << " " << r.name << ": "
        << r.detail << " [" << std::fixed << std::setprecision(2) << r.seconds << " s]";
    return out.str();
}

} // namespace czreach
