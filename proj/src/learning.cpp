#include "czreach/learning.hpp"

#include "czreach/algebra.hpp"
#include "czreach/serialize.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <charconv>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace czreach
{

namespace
{

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ','))
    {
        if (!field.empty() && field.back() == '\r')
        {
            field.pop_back();
        }
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',')
    {
        out.emplace_back();
    }
    return out;
}

double parse_double(const std::string& s, Index line)
{
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    {
        throw ParseError("line " + std::to_string(line) + ": bad number '" + s + "'");
    }
    return v;
}

Index parse_index(const std::string& s, Index line)
{
    long long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    {
        throw ParseError("line " + std::to_string(line) + ": bad integer '" + s + "'");
    }
    return static_cast<Index>(v);
}

// Counts header columns named prefix1, prefix2, ... starting at position from.
Index count_prefixed(const std::vector<std::string>& header, std::size_t from, char prefix)
{
    Index n = 0;
    for (std::size_t i = from; i < header.size(); ++i)
    {
        if (header[i].size() < 2 || header[i][0] != prefix)
        {
            break;
        }
        ++n;
    }
    return n;
}

Eigen::JacobiSVD<Matrix> svd_of(const Matrix& M)
{
    return Eigen::JacobiSVD<Matrix>(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

double rank_threshold(const Matrix& M, const Vector& sv)
{
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    return static_cast<double>(std::max(M.rows(), M.cols())) *
           std::numeric_limits<double>::epsilon() * smax;
}

} // namespace

DataBatch build_batch(const Matrix& states, const Matrix& inputs)
{
    const Index T = states.cols() - 1;
    if (T < 1)
    {
        throw TooShort("build_batch: need at least two states, got " +
                       std::to_string(states.cols()));
    }
    if (inputs.cols() < T)
    {
        throw ShapeMismatch("build_batch: " + std::to_string(T) + " transitions but " +
                            std::to_string(inputs.cols()) + " inputs");
    }
    return DataBatch{states.rightCols(T), states.leftCols(T), inputs.leftCols(T)};
}

DataBatch concat_batches(const std::vector<DataBatch>& batches)
{
    if (batches.empty())
    {
        return {};
    }
    Index T = 0;
    for (const auto& b : batches)
    {
        if (b.Xplus.rows() != batches[0].Xplus.rows() ||
            b.Uminus.rows() != batches[0].Uminus.rows())
        {
            throw ShapeMismatch("concat_batches: inconsistent dimensions");
        }
        T += b.size();
    }
    DataBatch out{Matrix(batches[0].Xplus.rows(), T), Matrix(batches[0].Xminus.rows(), T),
                  Matrix(batches[0].Uminus.rows(), T)};
    Index t = 0;
    for (const auto& b : batches)
    {
        out.Xplus.middleCols(t, b.size()) = b.Xplus;
        out.Xminus.middleCols(t, b.size()) = b.Xminus;
        out.Uminus.middleCols(t, b.size()) = b.Uminus;
        t += b.size();
    }
    return out;
}

CPMZ concat_noise(const CPZ& Zw, Index T)
{
    if (T < 1)
    {
        throw ShapeMismatch("concat_noise: T must be positive");
    }
    std::vector<CPZ> columns;
    columns.reserve(static_cast<std::size_t>(T));
    for (Index t = 0; t < T; ++t)
    {
        columns.push_back(with_fresh_ids(Zw));
    }
    return concat_noise(columns);
}

CPMZ concat_noise(const std::vector<CPZ>& columns)
{
    if (columns.empty())
    {
        throw ShapeMismatch("concat_noise: no columns");
    }
    const auto T = static_cast<Index>(columns.size());
    const CPZ& first = columns.front();
    const Index n = first.dim();
    const Index h = first.num_generators();
    const Index q = first.num_constraint_terms();
    const Index nc = first.num_constraints();

    std::vector<FactorId> ids;
    for (const auto& col : columns)
    {
        if (col.dim() != n || col.num_generators() != h || col.num_constraint_terms() != q ||
            col.num_constraints() != nc)
        {
            throw ShapeMismatch("concat_noise: columns differ in structure");
        }
        ids.insert(ids.end(), col.ids().begin(), col.ids().end());
    }
    std::vector<FactorId> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    {
        throw DuplicateId("concat_noise: columns share factors");
    }
    const auto p = static_cast<Index>(sorted.size());
    auto row_in = [&](FactorId id) {
        return static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), id) -
                                sorted.begin());
    };

    Matrix C(n, T);
    std::vector<Matrix> G;
    G.reserve(static_cast<std::size_t>(h * T));
    std::vector<Eigen::Triplet<int>> etrip;
    for (Index t = 0; t < T; ++t)
    {
        C.col(t) = columns[static_cast<std::size_t>(t)].center();
    }
    for (Index i = 0; i < h; ++i)
    {
        for (Index t = 0; t < T; ++t)
        {
            const CPZ& col = columns[static_cast<std::size_t>(t)];
            Matrix Gi = Matrix::Zero(n, T);
            Gi.col(t) = col.generators().col(i);
            G.push_back(std::move(Gi));
            for (ExpMatrix::InnerIterator it(col.exponents(), i); it; ++it)
            {
                etrip.emplace_back(row_in(col.ids()[static_cast<std::size_t>(it.row())]),
                                   static_cast<int>(T * i + t), it.value());
            }
        }
    }
    ExpMatrix E(p, h * T);
    E.setFromTriplets(etrip.begin(), etrip.end());

    // Constraint term (k, t) is A_w(:,k) placed in column t of an nc x T matrix.
    std::vector<Eigen::Triplet<double>> atrip;
    std::vector<Eigen::Triplet<int>> rtrip;
    Vector b(nc * T);
    for (Index t = 0; t < T; ++t)
    {
        b.segment(nc * t, nc) = columns[static_cast<std::size_t>(t)].constraint_offset();
    }
    for (Index k = 0; k < q; ++k)
    {
        for (Index t = 0; t < T; ++t)
        {
            const CPZ& col = columns[static_cast<std::size_t>(t)];
            const auto term = static_cast<int>(T * k + t);
            for (SparseMatrix::InnerIterator it(col.constraint_matrix(), k); it; ++it)
            {
                atrip.emplace_back(static_cast<int>(nc * t + it.row()), term, it.value());
            }
            for (ExpMatrix::InnerIterator it(col.constraint_exponents(), k); it; ++it)
            {
                rtrip.emplace_back(row_in(col.ids()[static_cast<std::size_t>(it.row())]), term,
                                   it.value());
            }
        }
    }
    SparseMatrix A(nc * T, q * T);
    A.setFromTriplets(atrip.begin(), atrip.end());
    ExpMatrix R(p, q * T);
    R.setFromTriplets(rtrip.begin(), rtrip.end());

    return CPMZ(std::move(C), std::move(G), std::move(E), std::move(A), std::move(b),
                nc > 0 ? nc : 0, nc > 0 ? T : 0, std::move(R), std::move(sorted));
}

Index numerical_rank(const Matrix& M)
{
    if (M.size() == 0)
    {
        return 0;
    }
    const auto svd = svd_of(M);
    const Vector& sv = svd.singularValues();
    const double tol = rank_threshold(M, sv);
    return (sv.array() > tol).count();
}

Matrix pinv(const Matrix& M)
{
    if (M.size() == 0)
    {
        return Matrix::Zero(M.cols(), M.rows());
    }
    const auto svd = svd_of(M);
    const Vector& sv = svd.singularValues();
    const double tol = rank_threshold(M, sv);
    Vector inv = Vector::Zero(sv.size());
    for (Index i = 0; i < sv.size(); ++i)
    {
        if (sv(i) > tol)
        {
            inv(i) = 1.0 / sv(i);
        }
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Vector MonomialBasis::eval(const Vector& z) const
{
    if (z.size() != num_vars)
    {
        throw ShapeMismatch("monomial basis over " + std::to_string(num_vars) +
                            " variables evaluated at length " + std::to_string(z.size()));
    }
    Vector out(size());
    for (Index j = 0; j < size(); ++j)
    {
        double v = 1.0;
        const Eigen::VectorXi& a = exponents[static_cast<std::size_t>(j)];
        for (Index i = 0; i < num_vars; ++i)
        {
            for (int e = 0; e < a(i); ++e)
            {
                v *= z(i);
            }
        }
        out(j) = v;
    }
    return out;
}

MonomialBasis monomial_basis(Index n_z, int d)
{
    if (d < 0 || n_z < 0)
    {
        throw std::invalid_argument("monomial_basis: negative degree or variable count");
    }
    MonomialBasis basis;
    basis.degree_bound = d;
    basis.num_vars = n_z;
    Eigen::VectorXi current = Eigen::VectorXi::Zero(n_z);
    // Enumerate vectors of total degree deg with earlier variables taking
    // the larger powers first.
    auto emit = [&](auto&& self, Index var, int remaining) -> void {
        if (var == n_z - 1)
        {
            current(var) = remaining;
            basis.exponents.push_back(current);
            current(var) = 0;
            return;
        }
        for (int e = remaining; e >= 0; --e)
        {
            current(var) = e;
            self(self, var + 1, remaining - e);
        }
        current(var) = 0;
    };
    for (int deg = 0; deg <= d; ++deg)
    {
        if (n_z == 0)
        {
            if (deg == 0)
            {
                basis.exponents.push_back(current);
            }
            continue;
        }
        emit(emit, 0, deg);
    }
    return basis;
}

MonomialBasis monomial_basis_custom(const std::vector<std::vector<int>>& exponents)
{
    MonomialBasis basis;
    if (exponents.empty())
    {
        return basis;
    }
    basis.num_vars = static_cast<Index>(exponents.front().size());
    std::set<std::vector<int>> seen;
    for (const auto& a : exponents)
    {
        if (static_cast<Index>(a.size()) != basis.num_vars)
        {
            throw ShapeMismatch("monomial_basis_custom: exponent vectors differ in length");
        }
        if (std::any_of(a.begin(), a.end(), [](int e) { return e < 0; }))
        {
            throw NegativeExponent("monomial_basis_custom: negative exponent");
        }
        if (!seen.insert(a).second)
        {
            throw DuplicateMonomial("monomial_basis_custom: repeated exponent vector");
        }
        Eigen::VectorXi v(basis.num_vars);
        for (Index i = 0; i < basis.num_vars; ++i)
        {
            v(i) = a[static_cast<std::size_t>(i)];
        }
        basis.degree_bound = std::max(basis.degree_bound, v.sum());
        basis.exponents.push_back(std::move(v));
    }
    return basis;
}

Matrix regressor_matrix(const DataBatch& batch, const MonomialBasis& basis)
{
    const Index nx = batch.Xminus.rows();
    const Index nu = batch.Uminus.rows();
    if (nx + nu != basis.num_vars)
    {
        throw ShapeMismatch("regressor_matrix: basis has " + std::to_string(basis.num_vars) +
                            " variables, data has " + std::to_string(nx + nu));
    }
    Matrix Omega(basis.size(), batch.size());
    Vector z(nx + nu);
    for (Index t = 0; t < batch.size(); ++t)
    {
        z << batch.Xminus.col(t), batch.Uminus.col(t);
        Omega.col(t) = basis.eval(z);
    }
    return Omega;
}

namespace
{

ModelSet model_from_regressor(const DataBatch& batch, const Matrix& D, const CPMZ& Mw,
                              std::string label)
{
    if (Mw.rows() != batch.Xplus.rows() || Mw.cols() != batch.size())
    {
        throw ShapeMismatch("model set: noise matrix set is " + std::to_string(Mw.rows()) + "x" +
                            std::to_string(Mw.cols()) + ", data is " +
                            std::to_string(batch.Xplus.rows()) + "x" +
                            std::to_string(batch.size()));
    }
    const Index rank = numerical_rank(D);
    if (rank < D.rows())
    {
        throw RankDeficient("regressor has rank " + std::to_string(rank) + ", need " +
                            std::to_string(D.rows()));
    }
    return ModelSet{affine_cpmz(batch.Xplus, Mw, pinv(D)), {std::move(label)}};
}

} // namespace

ModelSet model_set_lti(const DataBatch& batch, const CPMZ& Mw, std::string label)
{
    Matrix D(batch.Xminus.rows() + batch.Uminus.rows(), batch.size());
    D << batch.Xminus, batch.Uminus;
    return model_from_regressor(batch, D, Mw, std::move(label));
}

ModelSet model_set_poly(const DataBatch& batch, const MonomialBasis& basis, const CPMZ& Mw,
                        std::string label)
{
    return model_from_regressor(batch, regressor_matrix(batch, basis), Mw, std::move(label));
}

ModelSet refine(const ModelSet& current, const ModelSet& incoming)
{
    ModelSet out{intersect_cpmz(incoming.set, current.set), current.provenance};
    out.provenance.insert(out.provenance.end(), incoming.provenance.begin(),
                          incoming.provenance.end());
    return out;
}

void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& trajs)
{
    const Index nx = trajs.empty() ? 0 : trajs.front().states.rows();
    const Index nu = trajs.empty() ? 0 : trajs.front().inputs.rows();
    out << "traj,k";
    for (Index i = 1; i <= nx; ++i)
    {
        out << ",x" << i;
    }
    for (Index i = 1; i <= nu; ++i)
    {
        out << ",u" << i;
    }
    out << "\n";
    for (std::size_t tr = 0; tr < trajs.size(); ++tr)
    {
        const Trajectory& t = trajs[tr];
        for (Index k = 0; k < t.states.cols(); ++k)
        {
            out << tr << "," << k;
            for (Index i = 0; i < nx; ++i)
            {
                out << "," << format_number(t.states(i, k));
            }
            for (Index i = 0; i < nu; ++i)
            {
                out << ",";
                if (k < t.inputs.cols())
                {
                    out << format_number(t.inputs(i, k));
                }
            }
            out << "\n";
        }
    }
}

std::vector<Trajectory> read_trajectories_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
    {
        throw ParseError("trajectory CSV: empty input");
    }
    const auto header = split_csv(line);
    if (header.size() < 3 || header[0] != "traj" || header[1] != "k")
    {
        throw ParseError("trajectory CSV: header must start with traj,k");
    }
    const Index nx = count_prefixed(header, 2, 'x');
    const Index nu = count_prefixed(header, 2 + static_cast<std::size_t>(nx), 'u');
    if (nx == 0 || static_cast<Index>(header.size()) != 2 + nx + nu)
    {
        throw ParseError("trajectory CSV: header must be traj,k,x1..xn,u1..um");
    }

    std::map<Index, std::vector<std::pair<Vector, std::optional<Vector>>>> rows;
    Index lineno = 1;
    std::map<Index, Index> last_k;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.empty() || line == "\r")
        {
            continue;
        }
        const auto f = split_csv(line);
        if (static_cast<Index>(f.size()) != 2 + nx + nu)
        {
            throw ParseError("line " + std::to_string(lineno) + ": expected " +
                             std::to_string(2 + nx + nu) + " fields");
        }
        const Index tr = parse_index(f[0], lineno);
        const Index k = parse_index(f[1], lineno);
        const Index expected = last_k.contains(tr) ? last_k[tr] + 1 : 0;
        if (k != expected)
        {
            throw ParseError("line " + std::to_string(lineno) + ": k must ascend from 0");
        }
        last_k[tr] = k;
        Vector x(nx);
        for (Index i = 0; i < nx; ++i)
        {
            x(i) = parse_double(f[static_cast<std::size_t>(2 + i)], lineno);
        }
        std::optional<Vector> u;
        if (nu > 0 && !f[static_cast<std::size_t>(2 + nx)].empty())
        {
            u = Vector(nu);
            for (Index i = 0; i < nu; ++i)
            {
                (*u)(i) = parse_double(f[static_cast<std::size_t>(2 + nx + i)], lineno);
            }
        }
        rows[tr].emplace_back(std::move(x), std::move(u));
    }

    std::vector<Trajectory> out;
    for (auto& [tr, samples] : rows)
    {
        const auto K = static_cast<Index>(samples.size());
        Trajectory t{Matrix(nx, K), Matrix(nu, K - 1)};
        for (Index k = 0; k < K; ++k)
        {
            t.states.col(k) = samples[static_cast<std::size_t>(k)].first;
            if (k + 1 < K && nu > 0)
            {
                if (!samples[static_cast<std::size_t>(k)].second)
                {
                    throw ParseError("trajectory " + std::to_string(tr) + ": missing input at k=" +
                                     std::to_string(k));
                }
                t.inputs.col(k) = *samples[static_cast<std::size_t>(k)].second;
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

void write_noise_csv(std::ostream& out, const std::vector<NoiseRecord>& rows)
{
    const Index p = rows.empty() ? 0 : rows.front().sigma.size();
    out << "traj,k";
    for (Index i = 1; i <= p; ++i)
    {
        out << ",sigma" << i;
    }
    out << "\n";
    for (const auto& r : rows)
    {
        out << r.traj << "," << r.k;
        for (Index i = 0; i < r.sigma.size(); ++i)
        {
            out << "," << format_number(r.sigma(i));
        }
        out << "\n";
    }
}

std::vector<NoiseRecord> read_noise_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
    {
        throw ParseError("noise CSV: empty input");
    }
    const auto header = split_csv(line);
    if (header.size() < 2 || header[0] != "traj" || header[1] != "k")
    {
        throw ParseError("noise CSV: header must start with traj,k");
    }
    const auto p = static_cast<Index>(header.size()) - 2;
    std::vector<NoiseRecord> out;
    Index lineno = 1;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.empty() || line == "\r")
        {
            continue;
        }
        const auto f = split_csv(line);
        if (static_cast<Index>(f.size()) != 2 + p)
        {
            throw ParseError("line " + std::to_string(lineno) + ": expected " +
                             std::to_string(2 + p) + " fields");
        }
        NoiseRecord r{parse_index(f[0], lineno), parse_index(f[1], lineno), Vector(p)};
        for (Index i = 0; i < p; ++i)
        {
            r.sigma(i) = parse_double(f[static_cast<std::size_t>(2 + i)], lineno);
        }
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace czreach
