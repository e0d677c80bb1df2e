#include "czreach/oracle.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace czreach
{

namespace
{

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct ConstraintSystem
{
    const SparseMatrix& A;
    const Vector& b;
    const ExpMatrix& R;
    const std::vector<FactorId>& ids;
};

double ipow(double x, int e)
{
    double r = 1.0;
    for (int i = 0; i < e; ++i)
    {
        r *= x;
    }
    return r;
}

class Sampler
{
    public:
        Sampler(const ConstraintSystem& sys, const SamplerOptions& opt) : sys_(sys), opt_(opt)
        {
            const auto p = static_cast<Index>(sys.ids.size());
            std::vector<Index> slot(static_cast<std::size_t>(p), -1);
            for (Index j = 0; j < sys.R.outerSize(); ++j)
            {
                for (ExpMatrix::InnerIterator it(sys.R, j); it; ++it)
                {
                    if (slot[static_cast<std::size_t>(it.row())] < 0)
                    {
                        slot[static_cast<std::size_t>(it.row())] =
                            static_cast<Index>(active_.size());
                        active_.push_back(it.row());
                    }
                }
            }
            // Rows are equilibrated for the Newton steps so that constraints
            // of very different magnitude are resolved to the same accuracy.
            weights_ = Vector::Zero(sys.A.rows());
            for (Index j = 0; j < sys.A.outerSize(); ++j)
            {
                for (SparseMatrix::InnerIterator it(sys.A, j); it; ++it)
                {
                    weights_(it.row()) += it.value() * it.value();
                }
            }
            for (Index i = 0; i < weights_.size(); ++i)
            {
                weights_(i) = weights_(i) > 0.0 ? 1.0 / std::sqrt(weights_(i)) : 1.0;
            }
            terms_.resize(static_cast<std::size_t>(sys.R.cols()));
            for (Index j = 0; j < sys.R.outerSize(); ++j)
            {
                for (ExpMatrix::InnerIterator it(sys.R, j); it; ++it)
                {
                    terms_[static_cast<std::size_t>(j)].emplace_back(
                        slot[static_cast<std::size_t>(it.row())], it.value());
                }
            }
        }

        std::optional<FactorAssignment> run(Rng& rng) const
        {
            const auto p = static_cast<Index>(sys_.ids.size());
            for (int attempt = 0; attempt < opt_.restarts; ++attempt)
            {
                Vector all(p);
                for (Index k = 0; k < p; ++k)
                {
                    all(k) = rng.factor();
                }
                Vector x(static_cast<Index>(active_.size()));
                for (std::size_t a = 0; a < active_.size(); ++a)
                {
                    x(static_cast<Index>(a)) = all(active_[a]);
                }
                if (refine(x))
                {
                    for (std::size_t a = 0; a < active_.size(); ++a)
                    {
                        all(active_[a]) = x(static_cast<Index>(a));
                    }
                    FactorAssignment out;
                    for (Index k = 0; k < p; ++k)
                    {
                        out.set(sys_.ids[static_cast<std::size_t>(k)], all(k));
                    }
                    return out;
                }
            }
            return std::nullopt;
        }

    private:
        Vector residual(const Vector& x) const
        {
            Vector m(static_cast<Index>(terms_.size()));
            for (std::size_t j = 0; j < terms_.size(); ++j)
            {
                double v = 1.0;
                for (const auto& [a, e] : terms_[j])
                {
                    v *= ipow(x(a), e);
                }
                m(static_cast<Index>(j)) = v;
            }
            return sys_.A * m - sys_.b;
        }

        Matrix jacobian(const Vector& x) const
        {
            Matrix J = Matrix::Zero(sys_.A.rows(), x.size());
            for (std::size_t j = 0; j < terms_.size(); ++j)
            {
                const auto& term = terms_[j];
                for (std::size_t k = 0; k < term.size(); ++k)
                {
                    double d = term[k].second * ipow(x(term[k].first), term[k].second - 1);
                    for (std::size_t l = 0; l < term.size(); ++l)
                    {
                        if (l != k)
                        {
                            d *= ipow(x(term[l].first), term[l].second);
                        }
                    }
                    if (d == 0.0)
                    {
                        continue;
                    }
                    for (SparseMatrix::InnerIterator it(sys_.A, static_cast<Index>(j)); it; ++it)
                    {
                        J(it.row(), term[k].first) += it.value() * d;
                    }
                }
            }
            return J;
        }

        // Minimum-norm Gauss-Newton step restricted to free variables.
        static Vector step(const Matrix& J, const Vector& r, const std::vector<bool>& free)
        {
            Matrix Jf = J;
            for (Index k = 0; k < J.cols(); ++k)
            {
                if (!free[static_cast<std::size_t>(k)])
                {
                    Jf.col(k).setZero();
                }
            }
            Matrix JJ = Jf * Jf.transpose();
            // Regularize relative to the Jacobian scale: model sets built from
            // small noise have constraint rows far below unit magnitude.
            const double scale = JJ.diagonal().maxCoeff();
            if (!(scale > 0.0))
            {
                return Vector::Zero(J.cols());
            }
            JJ.diagonal().array() += 1e-13 * scale;
            return -(Jf.transpose() * JJ.ldlt().solve(r));
        }

        bool refine(Vector& x) const
        {
            Vector r = residual(x);
            double sn = weights_.cwiseProduct(r).norm();
            for (int it = 0; it < opt_.iterations; ++it)
            {
                if (r.norm() <= 0.5 * opt_.tol)
                {
                    return true;
                }
                const Matrix J = weights_.asDiagonal() * jacobian(x);
                const Vector sr = weights_.cwiseProduct(r);
                std::vector<bool> free(static_cast<std::size_t>(x.size()), true);
                Vector d = step(J, sr, free);
                bool any_fixed = false;
                for (Index k = 0; k < x.size(); ++k)
                {
                    if ((x(k) >= 1.0 && d(k) > 0.0) || (x(k) <= -1.0 && d(k) < 0.0))
                    {
                        free[static_cast<std::size_t>(k)] = false;
                        any_fixed = true;
                    }
                }
                if (any_fixed)
                {
                    d = step(J, sr, free);
                }
                double t = 1.0;
                bool improved = false;
                for (int ls = 0; ls < 40; ++ls)
                {
                    Vector xn = (x + t * d).cwiseMax(-1.0).cwiseMin(1.0);
                    Vector rn = residual(xn);
                    const double nn = weights_.cwiseProduct(rn).norm();
                    if (nn < sn)
                    {
                        x = std::move(xn);
                        r = std::move(rn);
                        sn = nn;
                        improved = true;
                        break;
                    }
                    t *= opt_.shrink;
                }
                if (!improved)
                {
                    break;
                }
            }
            return r.norm() <= opt_.tol;
        }

        const ConstraintSystem& sys_;
        const SamplerOptions& opt_;
        std::vector<Index> active_;
        Vector weights_;
        std::vector<std::vector<std::pair<Index, int>>> terms_;
};

std::optional<FactorAssignment> sample_system(const ConstraintSystem& sys, Rng& rng,
                                              const SamplerOptions& opt)
{
    if (sys.A.rows() == 0)
    {
        return sample_uniform(sys.ids, rng);
    }
    return Sampler(sys, opt).run(rng);
}

FactorAssignment require_sample(const CPZ& S, Rng& rng, const char* what)
{
    auto sigma = sample_feasible(S, rng);
    if (!sigma)
    {
        throw std::runtime_error(std::string("could not sample a feasible point of the ") + what);
    }
    return *sigma;
}

template<class Dynamics>
WitnessTrace simulate(const CPZ& X0, const std::vector<CPZ>& inputs,
                      const std::vector<CPZ>& noise, Rng& rng, Dynamics f)
{
    if (inputs.size() != noise.size())
    {
        throw ShapeMismatch("simulate: inputs and noise differ in length");
    }
    WitnessTrace trace;
    trace.seed = rng.seed();
    trace.initial = require_sample(X0, rng, "initial set");
    trace.states.push_back(eval_point(X0, trace.initial));
    for (std::size_t k = 0; k < inputs.size(); ++k)
    {
        FactorAssignment su = require_sample(inputs[k], rng, "input set");
        FactorAssignment sw = require_sample(noise[k], rng, "noise set");
        const Vector u = eval_point(inputs[k], su);
        const Vector w = eval_point(noise[k], sw);
        trace.states.push_back(f(trace.states.back(), u, w));
        trace.inputs.push_back(u);
        trace.input_factors.push_back(std::move(su));
        trace.noise_factors.push_back(std::move(sw));
    }
    return trace;
}

template<class Dynamics>
std::vector<Vector> replay(const CPZ& X0, const std::vector<CPZ>& inputs,
                           const std::vector<CPZ>& noise, const WitnessTrace& trace, Dynamics f)
{
    std::vector<Vector> states{eval_point(X0, trace.initial)};
    for (std::size_t k = 0; k < inputs.size(); ++k)
    {
        const Vector u = eval_point(inputs[k], trace.input_factors[k]);
        const Vector w = eval_point(noise[k], trace.noise_factors[k]);
        states.push_back(f(states.back(), u, w));
    }
    return states;
}

auto lti_dynamics(const Matrix& Phi, const Matrix& Gamma)
{
    return [&Phi, &Gamma](const Vector& x, const Vector& u, const Vector& w) -> Vector {
        return Phi * x + Gamma * u + w;
    };
}

auto poly_dynamics(const Matrix& Theta, const MonomialBasis& basis)
{
    return [&Theta, &basis](const Vector& x, const Vector& u, const Vector& w) -> Vector {
        Vector z(x.size() + u.size());
        z << x, u;
        return Theta * basis.eval(z) + w;
    };
}

template<class Dynamics>
SimulatedData simulate_dataset(const CPZ& X0, const CPZ& U, const CPZ& Zw, Index trajectories,
                               Index transitions, Rng& rng, Dynamics f)
{
    SimulatedData data;
    data.seed = rng.seed();
    for (Index i = 0; i < trajectories; ++i)
    {
        std::vector<CPZ> inputs;
        std::vector<CPZ> noise;
        for (Index k = 0; k < transitions; ++k)
        {
            inputs.push_back(with_fresh_ids(U));
            noise.push_back(with_fresh_ids(Zw));
        }
        WitnessTrace trace = simulate(X0, inputs, noise, rng, f);
        Trajectory t{Matrix(X0.dim(), transitions + 1), Matrix(U.dim(), transitions)};
        for (Index k = 0; k <= transitions; ++k)
        {
            t.states.col(k) = trace.states[static_cast<std::size_t>(k)];
        }
        for (Index k = 0; k < transitions; ++k)
        {
            t.inputs.col(k) = trace.inputs[static_cast<std::size_t>(k)];
            data.noise_witness.merge(trace.noise_factors[static_cast<std::size_t>(k)]);
        }
        data.trajectories.push_back(std::move(t));
        data.noise.push_back(std::move(noise));
    }
    return data;
}

} // namespace

Rng Rng::split(std::uint64_t stream) const
{
    return Rng(splitmix64(seed_ ^ splitmix64(stream + 1)));
}

FactorAssignment sample_uniform(const std::vector<FactorId>& ids, Rng& rng)
{
    FactorAssignment out;
    for (auto id : ids)
    {
        out.set(id, rng.factor());
    }
    return out;
}

std::optional<FactorAssignment> sample_feasible(const CPZ& S, Rng& rng,
                                                const SamplerOptions& opt)
{
    ConstraintSystem sys{S.constraint_matrix(), S.constraint_offset(), S.constraint_exponents(),
                         S.ids()};
    return sample_system(sys, rng, opt);
}

std::optional<FactorAssignment> sample_feasible(const CPMZ& S, Rng& rng,
                                                const SamplerOptions& opt)
{
    ConstraintSystem sys{S.constraint_matrix(), S.constraint_offset(), S.constraint_exponents(),
                         S.ids()};
    return sample_system(sys, rng, opt);
}

FactorAssignment WitnessTrace::all() const
{
    FactorAssignment out = initial;
    for (const auto& f : input_factors)
    {
        out.merge(f);
    }
    for (const auto& f : noise_factors)
    {
        out.merge(f);
    }
    out.merge(noise_matrix_factors);
    return out;
}

WitnessTrace simulate_lti(const Matrix& Phi, const Matrix& Gamma, const CPZ& X0,
                          const std::vector<CPZ>& inputs, const std::vector<CPZ>& noise,
                          Rng& rng)
{
    return simulate(X0, inputs, noise, rng, lti_dynamics(Phi, Gamma));
}

WitnessTrace simulate_poly(const Matrix& Theta, const MonomialBasis& basis, const CPZ& X0,
                           const std::vector<CPZ>& inputs, const std::vector<CPZ>& noise,
                           Rng& rng)
{
    return simulate(X0, inputs, noise, rng, poly_dynamics(Theta, basis));
}

std::vector<Vector> replay_lti(const Matrix& Phi, const Matrix& Gamma, const CPZ& X0,
                               const std::vector<CPZ>& inputs, const std::vector<CPZ>& noise,
                               const WitnessTrace& trace)
{
    return replay(X0, inputs, noise, trace, lti_dynamics(Phi, Gamma));
}

std::vector<Vector> replay_poly(const Matrix& Theta, const MonomialBasis& basis, const CPZ& X0,
                                const std::vector<CPZ>& inputs, const std::vector<CPZ>& noise,
                                const WitnessTrace& trace)
{
    return replay(X0, inputs, noise, trace, poly_dynamics(Theta, basis));
}

LabeledBatch SimulatedData::batch(std::size_t first, std::size_t last) const
{
    std::vector<DataBatch> parts;
    std::vector<CPZ> cols;
    for (std::size_t i = first; i < last; ++i)
    {
        parts.push_back(build_batch(trajectories[i].states, trajectories[i].inputs));
        cols.insert(cols.end(), noise[i].begin(), noise[i].end());
    }
    return LabeledBatch{concat_batches(parts), concat_noise(cols)};
}

SampleStream SimulatedData::stream(std::size_t first, std::size_t last, Index at_step) const
{
    SampleStream out(static_cast<std::size_t>(at_step) + 1);
    auto& bucket = out.back();
    for (std::size_t i = first; i < last; ++i)
    {
        const Trajectory& t = trajectories[i];
        for (Index k = 0; k < t.inputs.cols(); ++k)
        {
            bucket.push_back(StreamSample{t.states.col(k), t.inputs.col(k), t.states.col(k + 1),
                                          noise[i][static_cast<std::size_t>(k)]});
        }
    }
    return out;
}

std::vector<NoiseRecord> SimulatedData::noise_records() const
{
    std::vector<NoiseRecord> rows;
    for (std::size_t i = 0; i < noise.size(); ++i)
    {
        for (std::size_t k = 0; k < noise[i].size(); ++k)
        {
            rows.push_back(NoiseRecord{static_cast<Index>(i), static_cast<Index>(k) + 1,
                                       noise_witness.gather(noise[i][k].ids())});
        }
    }
    return rows;
}

SimulatedData simulate_dataset_lti(const Matrix& Phi, const Matrix& Gamma, const CPZ& X0,
                                   const CPZ& U, const CPZ& Zw, Index trajectories,
                                   Index transitions, Rng& rng)
{
    return simulate_dataset(X0, U, Zw, trajectories, transitions, rng, lti_dynamics(Phi, Gamma));
}

SimulatedData simulate_dataset_poly(const Matrix& Theta, const MonomialBasis& basis,
                                    const CPZ& X0, const CPZ& U, const CPZ& Zw,
                                    Index trajectories, Index transitions, Rng& rng)
{
    return simulate_dataset(X0, U, Zw, trajectories, transitions, rng,
                            poly_dynamics(Theta, basis));
}

bool membership_bruteforce(const CPZ& S, const Vector& point, double tol, int grid)
{
    const Index p = S.num_factors();
    if (p > 4 || S.dim() > 2)
    {
        throw BudgetExceeded("membership_bruteforce: supports n <= 2 and p <= 4, got n=" +
                             std::to_string(S.dim()) + ", p=" + std::to_string(p));
    }
    if (point.size() != S.dim())
    {
        throw ShapeMismatch("membership_bruteforce: point dimension differs from set");
    }
    if (grid < 2)
    {
        throw std::invalid_argument("membership_bruteforce: grid needs at least two points");
    }
    std::vector<int> idx(static_cast<std::size_t>(p), 0);
    Vector a(p);
    while (true)
    {
        for (Index k = 0; k < p; ++k)
        {
            a(k) = -1.0 + 2.0 * idx[static_cast<std::size_t>(k)] / (grid - 1);
        }
        const Vector m = monomials(S.exponents(), a);
        const Vector x = S.center() + S.generators() * m;
        if ((x - point).norm() <= tol)
        {
            const double res =
                S.num_constraints() == 0
                    ? 0.0
                    : (S.constraint_matrix() * monomials(S.constraint_exponents(), a) -
                       S.constraint_offset())
                          .norm();
            if (res <= kFeasibilityTol)
            {
                return true;
            }
        }
        Index k = 0;
        while (k < p && ++idx[static_cast<std::size_t>(k)] == grid)
        {
            idx[static_cast<std::size_t>(k)] = 0;
            ++k;
        }
        if (k == p)
        {
            return false;
        }
    }
}

Interval operator+(Interval a, Interval b)
{
    return {a.lo + b.lo, a.hi + b.hi};
}

Interval operator*(Interval a, Interval b)
{
    const double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

Interval operator*(double s, Interval a)
{
    return s >= 0.0 ? Interval{s * a.lo, s * a.hi} : Interval{s * a.hi, s * a.lo};
}

Interval pow(Interval a, int e)
{
    if (e < 0)
    {
        throw NegativeExponent("interval pow: negative exponent");
    }
    if (e == 0)
    {
        return {1.0, 1.0};
    }
    const double l = ipow(a.lo, e);
    const double h = ipow(a.hi, e);
    if (e % 2 == 1 || a.lo >= 0.0)
    {
        return {std::min(l, h), std::max(l, h)};
    }
    if (a.hi <= 0.0)
    {
        return {h, l};
    }
    return {0.0, std::max(l, h)};
}

IntervalVector to_intervals(const Box& box)
{
    IntervalVector out;
    for (Index i = 0; i < box.lo.size(); ++i)
    {
        out.push_back({box.lo(i), box.hi(i)});
    }
    return out;
}

IntervalMatrix interval_hull(const CPMZ& Y)
{
    const Box box = interval_hull(to_cpz(Y));
    return {reshape_convert(box.lo, Y.rows()), reshape_convert(box.hi, Y.rows())};
}

IntervalVector interval_baseline_poly(const IntervalMatrix& Theta, const IntervalVector& Z,
                                      const MonomialBasis& basis, const IntervalVector& Zw)
{
    if (static_cast<Index>(Z.size()) != basis.num_vars || Theta.lo.cols() != basis.size() ||
        static_cast<Index>(Zw.size()) != Theta.lo.rows())
    {
        throw ShapeMismatch("interval_baseline_poly: inconsistent dimensions");
    }
    IntervalVector h;
    for (const auto& alpha : basis.exponents)
    {
        Interval m{1.0, 1.0};
        for (Index l = 0; l < basis.num_vars; ++l)
        {
            m = m * pow(Z[static_cast<std::size_t>(l)], alpha(l));
        }
        h.push_back(m);
    }
    IntervalVector out;
    for (Index i = 0; i < Theta.lo.rows(); ++i)
    {
        Interval acc = Zw[static_cast<std::size_t>(i)];
        for (Index j = 0; j < basis.size(); ++j)
        {
            acc = acc + Interval{Theta.lo(i, j), Theta.hi(i, j)} * h[static_cast<std::size_t>(j)];
        }
        out.push_back(acc);
    }
    return out;
}

std::vector<Eigen::Vector2d> boundary_cloud(const CPZ& S, Index d1, Index d2, int samples,
                                            Rng& rng, const SamplerOptions& opt)
{
    if (d1 < 0 || d2 < 0 || d1 >= S.dim() || d2 >= S.dim())
    {
        throw IndexOutOfRange("boundary_cloud: projection dims outside the set");
    }
    std::vector<Eigen::Vector2d> out;
    out.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i)
    {
        auto sigma = sample_feasible(S, rng, opt);
        if (!sigma)
        {
            continue;
        }
        const Vector x = eval_point(S, *sigma);
        out.emplace_back(x(d1), x(d2));
    }
    return out;
}

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts)
{
    std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3)
    {
        return pts;
    }
    auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::vector<Eigen::Vector2d> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts)
    {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0)
        {
            --k;
        }
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;)
    {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0)
        {
            --k;
        }
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double polygon_area(const std::vector<Eigen::Vector2d>& poly)
{
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i)
    {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % poly.size()];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * std::abs(a);
}

Json to_json(const WitnessTrace& trace)
{
    Json states = Json::array();
    for (const auto& x : trace.states)
    {
        states.push_back(to_json(x));
    }
    Json inputs = Json::array();
    for (const auto& u : trace.inputs)
    {
        inputs.push_back(to_json(u));
    }
    Json in_f = Json::array();
    for (const auto& f : trace.input_factors)
    {
        in_f.push_back(to_json(f));
    }
    Json noise_f = Json::array();
    for (const auto& f : trace.noise_factors)
    {
        noise_f.push_back(to_json(f));
    }
    return Json{{"states", std::move(states)},
                {"inputs", std::move(inputs)},
                {"factors",
                 {{"initial", to_json(trace.initial)},
                  {"input", std::move(in_f)},
                  {"noise", std::move(noise_f)},
                  {"noise_matrix", to_json(trace.noise_matrix_factors)}}},
                {"seed", trace.seed}};
}

} // namespace czreach
