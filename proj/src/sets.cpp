#include "czreach/sets.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <string>
#include <unordered_map>

namespace czreach
{

namespace
{

std::string shape(Index r, Index c)
{
    return std::to_string(r) + "x" + std::to_string(c);
}

ExpMatrix remap_rows(const ExpMatrix& E, const std::vector<Index>& row_of, Index new_rows)
{
    std::vector<Eigen::Triplet<int>> trip;
    trip.reserve(static_cast<std::size_t>(E.nonZeros()));
    for (Index j = 0; j < E.outerSize(); ++j)
    {
        for (ExpMatrix::InnerIterator it(E, j); it; ++it)
        {
            trip.emplace_back(static_cast<int>(row_of[static_cast<std::size_t>(it.row())]),
                              static_cast<int>(j), it.value());
        }
    }
    ExpMatrix out(new_rows, E.cols());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

void check_exponents(ExpMatrix& E, const char* name)
{
    E.prune(0);
    for (Index j = 0; j < E.outerSize(); ++j)
    {
        for (ExpMatrix::InnerIterator it(E, j); it; ++it)
        {
            if (it.value() < 0)
            {
                throw NegativeExponent(std::string(name) + " has negative entry at (" +
                                       std::to_string(it.row()) + "," + std::to_string(j) + ")");
            }
        }
    }
}

// Sorts ids ascending and permutes exponent rows to match.
void canonicalize_ids(std::vector<FactorId>& id, ExpMatrix& E, ExpMatrix& R)
{
    std::vector<FactorId> sorted = id;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    {
        throw DuplicateId("factor id list contains duplicates");
    }
    if (sorted == id)
    {
        return;
    }
    std::vector<Index> row_of(id.size());
    for (std::size_t k = 0; k < id.size(); ++k)
    {
        row_of[k] = std::lower_bound(sorted.begin(), sorted.end(), id[k]) - sorted.begin();
    }
    E = remap_rows(E, row_of, E.rows());
    R = remap_rows(R, row_of, R.rows());
    id = std::move(sorted);
}

void fit_empty(ExpMatrix& M, Index rows, Index cols)
{
    // Zero-sized exponent blocks may be passed without a row count.
    if (M.cols() == 0 && cols == 0 && M.rows() != rows)
    {
        M.resize(rows, 0);
    }
}

double ipow(double x, int e)
{
    double r = 1.0;
    for (int i = 0; i < e; ++i)
    {
        r *= x;
    }
    return r;
}

struct ColumnKey
{
    std::vector<std::pair<Index, int>> entries;
    bool operator==(const ColumnKey&) const = default;
};

struct ColumnKeyHash
{
    std::size_t operator()(const ColumnKey& k) const noexcept
    {
        std::size_t h = k.entries.size();
        for (const auto& [r, v] : k.entries)
        {
            h ^= std::hash<long long>{}(static_cast<long long>(r) * 131 + v) + 0x9e3779b97f4a7c15ULL +
                 (h << 6) + (h >> 2);
        }
        return h;
    }
};

ColumnKey column_key(const ExpMatrix& E, Index j)
{
    ColumnKey key;
    for (ExpMatrix::InnerIterator it(E, j); it; ++it)
    {
        key.entries.emplace_back(it.row(), it.value());
    }
    return key;
}

struct RowKey
{
    std::vector<std::pair<Index, std::uint64_t>> entries;
    std::uint64_t rhs = 0;
    bool operator==(const RowKey&) const = default;
};

struct RowKeyHash
{
    std::size_t operator()(const RowKey& k) const noexcept
    {
        std::size_t h = std::hash<std::uint64_t>{}(k.rhs);
        for (const auto& [c, v] : k.entries)
        {
            h ^= std::hash<std::uint64_t>{}(v ^ static_cast<std::uint64_t>(c)) +
                 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }
};

std::uint64_t bits(double v)
{
    if (v == 0.0)
    {
        v = 0.0; // fold -0
    }
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof u);
    return u;
}

} // namespace

ExpMatrix exp_from_dense(const Eigen::MatrixXi& E)
{
    std::vector<Eigen::Triplet<int>> trip;
    for (Index j = 0; j < E.cols(); ++j)
    {
        for (Index i = 0; i < E.rows(); ++i)
        {
            if (E(i, j) != 0)
            {
                trip.emplace_back(static_cast<int>(i), static_cast<int>(j), E(i, j));
            }
        }
    }
    ExpMatrix out(E.rows(), E.cols());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

Eigen::MatrixXi exp_to_dense(const ExpMatrix& E)
{
    return Eigen::MatrixXi(E);
}

SparseMatrix sparse_from_dense(const Matrix& A)
{
    return A.sparseView(0.0, 0.0);
}

ExpMatrix identity_exponents(Index n)
{
    ExpMatrix I(n, n);
    I.setIdentity();
    return I;
}

// --- CPZ -------------------------------------------------------------------

CPZ::CPZ(Vector c)
    : c_(std::move(c)), G_(c_.size(), 0), E_(0, 0), A_(0, 0), b_(0), R_(0, 0)
{
}

CPZ::CPZ(Vector c, Matrix G, ExpMatrix E, SparseMatrix A, Vector b, ExpMatrix R,
         std::vector<FactorId> id)
    : c_(std::move(c)), G_(std::move(G)), E_(std::move(E)), A_(std::move(A)), b_(std::move(b)),
      R_(std::move(R)), id_(std::move(id))
{
    const Index p = static_cast<Index>(id_.size());
    if (G_.cols() == 0 && G_.rows() != c_.size())
    {
        G_.resize(c_.size(), 0);
    }
    fit_empty(E_, p, G_.cols());
    fit_empty(R_, p, A_.cols());
    if (A_.rows() == 0 && A_.cols() == 0 && b_.size() > 0)
    {
        throw ShapeMismatch("CPZ: b has entries but A is empty");
    }

    if (G_.rows() != c_.size())
    {
        throw ShapeMismatch("CPZ: G is " + shape(G_.rows(), G_.cols()) + " but c has length " +
                            std::to_string(c_.size()));
    }
    if (E_.cols() != G_.cols())
    {
        throw ShapeMismatch("CPZ: G has " + std::to_string(G_.cols()) + " columns, E has " +
                            std::to_string(E_.cols()));
    }
    if (A_.cols() != R_.cols())
    {
        throw ShapeMismatch("CPZ: A has " + std::to_string(A_.cols()) + " columns, R has " +
                            std::to_string(R_.cols()));
    }
    if (A_.rows() != b_.size())
    {
        throw ShapeMismatch("CPZ: A has " + std::to_string(A_.rows()) + " rows, b has length " +
                            std::to_string(b_.size()));
    }
    if (E_.rows() != p || R_.rows() != p)
    {
        throw ShapeMismatch("CPZ: exponent rows (" + std::to_string(E_.rows()) + ", " +
                            std::to_string(R_.rows()) + ") differ from id length " +
                            std::to_string(p));
    }
    check_exponents(E_, "E");
    check_exponents(R_, "R");
    A_.makeCompressed();
    canonicalize_ids(id_, E_, R_);
}

CPZ CPZ::from_dense(const Vector& c, const Matrix& G, const Eigen::MatrixXi& E, const Matrix& A,
                    const Vector& b, const Eigen::MatrixXi& R, std::vector<FactorId> id)
{
    return CPZ(c, G, exp_from_dense(E), sparse_from_dense(A), b, exp_from_dense(R),
               std::move(id));
}

CPZ CPZ::polynomial(const Vector& c, const Matrix& G, const Eigen::MatrixXi& E,
                    std::vector<FactorId> id)
{
    const Index p = static_cast<Index>(id.size());
    return CPZ(c, G, exp_from_dense(E), SparseMatrix(0, 0), Vector(0), ExpMatrix(p, 0),
               std::move(id));
}

CPZ CPZ::embed(const std::vector<FactorId>& ids, const std::vector<Index>& row_of) const
{
    const Index p = static_cast<Index>(ids.size());
    return CPZ(c_, G_, remap_rows(E_, row_of, p), A_, b_, remap_rows(R_, row_of, p), ids);
}

// --- CPMZ ------------------------------------------------------------------

CPMZ::CPMZ(Matrix C) : C_(std::move(C)), E_(0, 0), A_(0, 0), b_(0), R_(0, 0) {}

CPMZ::CPMZ(Matrix C, std::vector<Matrix> G, ExpMatrix E, SparseMatrix A, Vector b,
           Index constraint_rows, Index constraint_cols, ExpMatrix R, std::vector<FactorId> id)
    : C_(std::move(C)), G_(std::move(G)), E_(std::move(E)), A_(std::move(A)), b_(std::move(b)),
      nc_(constraint_rows), na_(constraint_cols), R_(std::move(R)), id_(std::move(id))
{
    const Index p = static_cast<Index>(id_.size());
    const Index gamma = static_cast<Index>(G_.size());
    fit_empty(E_, p, gamma);
    fit_empty(R_, p, A_.cols());

    for (std::size_t i = 0; i < G_.size(); ++i)
    {
        if (G_[i].rows() != C_.rows() || G_[i].cols() != C_.cols())
        {
            throw ShapeMismatch("CPMZ: generator " + std::to_string(i) + " is " +
                                shape(G_[i].rows(), G_[i].cols()) + ", center is " +
                                shape(C_.rows(), C_.cols()));
        }
    }
    if (E_.cols() != gamma)
    {
        throw ShapeMismatch("CPMZ: " + std::to_string(gamma) + " generators but E has " +
                            std::to_string(E_.cols()) + " columns");
    }
    if (A_.cols() != R_.cols())
    {
        throw ShapeMismatch("CPMZ: A has " + std::to_string(A_.cols()) + " terms, R has " +
                            std::to_string(R_.cols()));
    }
    if (nc_ * na_ != A_.rows() || b_.size() != A_.rows())
    {
        throw ShapeMismatch("CPMZ: constraint shape " + shape(nc_, na_) + " does not match " +
                            std::to_string(A_.rows()) + " vectorized rows / " +
                            std::to_string(b_.size()) + " rhs entries");
    }
    if (E_.rows() != p || R_.rows() != p)
    {
        throw ShapeMismatch("CPMZ: exponent rows differ from id length " + std::to_string(p));
    }
    check_exponents(E_, "E");
    check_exponents(R_, "R");
    A_.makeCompressed();
    canonicalize_ids(id_, E_, R_);
}

CPMZ CPMZ::from_lists(const Matrix& C, std::vector<Matrix> G, const Eigen::MatrixXi& E,
                      const std::vector<Matrix>& A, const Matrix& B, const Eigen::MatrixXi& R,
                      std::vector<FactorId> id)
{
    const Index nc = B.rows();
    const Index na = B.cols();
    Matrix Avec(nc * na, static_cast<Index>(A.size()));
    for (std::size_t j = 0; j < A.size(); ++j)
    {
        if (A[j].rows() != nc || A[j].cols() != na)
        {
            throw ShapeMismatch("CPMZ: constraint matrix " + std::to_string(j) + " is " +
                                shape(A[j].rows(), A[j].cols()) + ", B is " + shape(nc, na));
        }
        Avec.col(static_cast<Index>(j)) = vec(A[j]);
    }
    const Index p = static_cast<Index>(id.size());
    ExpMatrix Rs = exp_from_dense(R);
    if (A.empty() && R.size() == 0)
    {
        Rs.resize(p, 0);
    }
    ExpMatrix Es = exp_from_dense(E);
    if (G.empty() && E.size() == 0)
    {
        Es.resize(p, 0);
    }
    return CPMZ(C, std::move(G), std::move(Es), sparse_from_dense(Avec), vec(B), nc, na,
                std::move(Rs), std::move(id));
}

Matrix CPMZ::constraint_term(Index j) const
{
    return reshape_convert(Vector(A_.col(j)), nc_);
}

Matrix CPMZ::constraint_rhs() const
{
    if (nc_ == 0)
    {
        return Matrix(0, na_);
    }
    return reshape_convert(b_, nc_);
}

CPMZ CPMZ::embed(const std::vector<FactorId>& ids, const std::vector<Index>& row_of) const
{
    const Index p = static_cast<Index>(ids.size());
    return CPMZ(C_, G_, remap_rows(E_, row_of, p), A_, b_, nc_, na_, remap_rows(R_, row_of, p),
                ids);
}

// --- lift ------------------------------------------------------------------

CPZ lift(const Zonotope& z, std::vector<FactorId> ids)
{
    const Index h = z.G.cols();
    if (ids.empty())
    {
        ids = fresh_ids(static_cast<std::size_t>(h));
    }
    if (static_cast<Index>(ids.size()) != h)
    {
        throw ShapeMismatch("lift: need one id per generator");
    }
    return CPZ(z.c, z.G, identity_exponents(h), SparseMatrix(0, 0), Vector(0), ExpMatrix(h, 0),
               std::move(ids));
}

CPZ lift(const ConstrainedZonotope& z, std::vector<FactorId> ids)
{
    const Index h = z.G.cols();
    if (ids.empty())
    {
        ids = fresh_ids(static_cast<std::size_t>(h));
    }
    if (static_cast<Index>(ids.size()) != h)
    {
        throw ShapeMismatch("lift: need one id per generator");
    }
    if (z.A.rows() > 0 && z.A.cols() != h)
    {
        throw ShapeMismatch("lift: constrained zonotope A must have one column per generator");
    }
    if (z.A.rows() == 0)
    {
        return lift(Zonotope{z.c, z.G}, std::move(ids));
    }
    return CPZ(z.c, z.G, identity_exponents(h), sparse_from_dense(z.A), z.b, identity_exponents(h),
               std::move(ids));
}

CPMZ lift(const MatrixZonotope& z, std::vector<FactorId> ids)
{
    const Index gamma = static_cast<Index>(z.G.size());
    if (ids.empty())
    {
        ids = fresh_ids(static_cast<std::size_t>(gamma));
    }
    if (static_cast<Index>(ids.size()) != gamma)
    {
        throw ShapeMismatch("lift: need one id per generator");
    }
    return CPMZ(z.C, z.G, identity_exponents(gamma), SparseMatrix(0, 0), Vector(0), 0, 0,
                ExpMatrix(gamma, 0), std::move(ids));
}

CPMZ lift(const ConstrainedMatrixZonotope& z, std::vector<FactorId> ids)
{
    const Index gamma = static_cast<Index>(z.G.size());
    if (ids.empty())
    {
        ids = fresh_ids(static_cast<std::size_t>(gamma));
    }
    if (static_cast<Index>(ids.size()) != gamma)
    {
        throw ShapeMismatch("lift: need one id per generator");
    }
    if (z.A.empty())
    {
        return lift(MatrixZonotope{z.C, z.G}, std::move(ids));
    }
    if (static_cast<Index>(z.A.size()) != gamma)
    {
        throw ShapeMismatch("lift: CMZ needs one constraint matrix per generator");
    }
    return CPMZ::from_lists(z.C, z.G, Eigen::MatrixXi::Identity(gamma, gamma), z.A, z.B,
                            Eigen::MatrixXi::Identity(gamma, gamma), std::move(ids));
}

// --- evaluation ------------------------------------------------------------

Vector monomials(const ExpMatrix& exp, const Vector& x)
{
    Vector out = Vector::Ones(exp.cols());
    for (Index j = 0; j < exp.outerSize(); ++j)
    {
        double prod = 1.0;
        for (ExpMatrix::InnerIterator it(exp, j); it; ++it)
        {
            prod *= ipow(x(it.row()), it.value());
        }
        out(j) = prod;
    }
    return out;
}

Vector eval_point(const CPZ& S, const FactorAssignment& sigma)
{
    const Vector x = sigma.gather(S.ids());
    return S.center() + S.generators() * monomials(S.exponents(), x);
}

Matrix eval_matrix(const CPMZ& S, const FactorAssignment& sigma)
{
    const Vector x = sigma.gather(S.ids());
    const Vector m = monomials(S.exponents(), x);
    Matrix out = S.center();
    for (Index i = 0; i < S.num_generators(); ++i)
    {
        out += m(i) * S.generators()[static_cast<std::size_t>(i)];
    }
    return out;
}

double constraint_residual(const CPZ& S, const FactorAssignment& sigma)
{
    if (S.num_constraints() == 0)
    {
        return 0.0;
    }
    const Vector x = sigma.gather(S.ids());
    return (S.constraint_matrix() * monomials(S.constraint_exponents(), x) -
            S.constraint_offset())
        .norm();
}

double constraint_residual(const CPMZ& S, const FactorAssignment& sigma)
{
    if (S.num_constraints() == 0)
    {
        return 0.0;
    }
    const Vector x = sigma.gather(S.ids());
    return (S.constraint_matrix() * monomials(S.constraint_exponents(), x) -
            S.constraint_offset())
        .norm();
}

// --- reshaping -------------------------------------------------------------

Vector vec(const Matrix& M)
{
    return Eigen::Map<const Vector>(M.data(), M.size());
}

Matrix reshape_convert(const Vector& v, Index rows)
{
    if (rows <= 0 || v.size() % rows != 0)
    {
        throw NotDivisible("cannot reshape length " + std::to_string(v.size()) + " into " +
                           std::to_string(rows) + " rows");
    }
    return Eigen::Map<const Matrix>(v.data(), rows, v.size() / rows);
}

CPZ to_cpz(const CPMZ& Y)
{
    Matrix G(Y.rows() * Y.cols(), Y.num_generators());
    for (Index i = 0; i < Y.num_generators(); ++i)
    {
        G.col(i) = vec(Y.generators()[static_cast<std::size_t>(i)]);
    }
    return CPZ(vec(Y.center()), std::move(G), Y.exponents(), Y.constraint_matrix(),
               Y.constraint_offset(), Y.constraint_exponents(), Y.ids());
}

CPZ with_fresh_ids(const CPZ& S)
{
    return CPZ(S.center(), S.generators(), S.exponents(), S.constraint_matrix(),
               S.constraint_offset(), S.constraint_exponents(),
               fresh_ids(static_cast<std::size_t>(S.num_factors())));
}

CPMZ with_fresh_ids(const CPMZ& S)
{
    return CPMZ(S.center(), S.generators(), S.exponents(), S.constraint_matrix(),
                S.constraint_offset(), S.constraint_rows(), S.constraint_cols(),
                S.constraint_exponents(), fresh_ids(static_cast<std::size_t>(S.num_factors())));
}

// --- compaction ------------------------------------------------------------

CPZ compact(const CPZ& S)
{
    const Index n = S.dim();
    const Index p = S.num_factors();

    // Generators: merge equal exponent columns, fold constants into c.
    Vector c = S.center();
    std::unordered_map<ColumnKey, Index, ColumnKeyHash> gen_slot;
    std::vector<ColumnKey> gen_keys;
    std::vector<Vector> gen_cols;
    for (Index j = 0; j < S.num_generators(); ++j)
    {
        ColumnKey key = column_key(S.exponents(), j);
        if (key.entries.empty())
        {
            c += S.generators().col(j);
            continue;
        }
        auto [it, inserted] = gen_slot.try_emplace(key, static_cast<Index>(gen_cols.size()));
        if (inserted)
        {
            gen_keys.push_back(std::move(key));
            gen_cols.emplace_back(S.generators().col(j));
        }
        else
        {
            gen_cols[static_cast<std::size_t>(it->second)] += S.generators().col(j);
        }
    }

    // Constraint terms: merge equal exponent columns, fold constants into b.
    Vector b = S.constraint_offset();
    const Index nc = S.num_constraints();
    std::unordered_map<ColumnKey, Index, ColumnKeyHash> con_slot;
    std::vector<ColumnKey> con_keys;
    std::vector<Vector> con_cols;
    for (Index j = 0; j < S.num_constraint_terms(); ++j)
    {
        Vector col = Vector(S.constraint_matrix().col(j));
        ColumnKey key = column_key(S.constraint_exponents(), j);
        if (key.entries.empty())
        {
            b -= col;
            continue;
        }
        auto [it, inserted] = con_slot.try_emplace(key, static_cast<Index>(con_cols.size()));
        if (inserted)
        {
            con_keys.push_back(std::move(key));
            con_cols.push_back(std::move(col));
        }
        else
        {
            con_cols[static_cast<std::size_t>(it->second)] += col;
        }
    }

    std::vector<std::size_t> keep_gen;
    for (std::size_t j = 0; j < gen_cols.size(); ++j)
    {
        if (!gen_cols[j].isZero(0.0))
        {
            keep_gen.push_back(j);
        }
    }
    std::vector<std::size_t> keep_con;
    for (std::size_t j = 0; j < con_cols.size(); ++j)
    {
        if (!con_cols[j].isZero(0.0))
        {
            keep_con.push_back(j);
        }
    }

    // Constraint rows: drop duplicates and trivial 0 = 0 rows.
    std::vector<Index> keep_row;
    {
        std::vector<RowKey> rows(static_cast<std::size_t>(nc));
        for (std::size_t jj = 0; jj < keep_con.size(); ++jj)
        {
            const Vector& col = con_cols[keep_con[jj]];
            for (Index r = 0; r < nc; ++r)
            {
                if (col(r) != 0.0)
                {
                    rows[static_cast<std::size_t>(r)].entries.emplace_back(
                        static_cast<Index>(jj), bits(col(r)));
                }
            }
        }
        std::unordered_map<RowKey, Index, RowKeyHash> seen;
        for (Index r = 0; r < nc; ++r)
        {
            RowKey& key = rows[static_cast<std::size_t>(r)];
            key.rhs = bits(b(r));
            if (key.entries.empty() && b(r) == 0.0)
            {
                continue;
            }
            if (seen.try_emplace(key, r).second)
            {
                keep_row.push_back(r);
            }
        }
    }

    // Factors still referenced.
    std::vector<bool> used(static_cast<std::size_t>(p), false);
    for (auto j : keep_gen)
    {
        for (const auto& [r, v] : gen_keys[j].entries)
        {
            used[static_cast<std::size_t>(r)] = true;
        }
    }
    if (!keep_row.empty())
    {
        for (auto j : keep_con)
        {
            for (const auto& [r, v] : con_keys[j].entries)
            {
                used[static_cast<std::size_t>(r)] = true;
            }
        }
    }
    std::vector<Index> new_row(static_cast<std::size_t>(p), -1);
    std::vector<FactorId> ids;
    for (Index k = 0; k < p; ++k)
    {
        if (used[static_cast<std::size_t>(k)])
        {
            new_row[static_cast<std::size_t>(k)] = static_cast<Index>(ids.size());
            ids.push_back(S.ids()[static_cast<std::size_t>(k)]);
        }
    }
    const Index p_new = static_cast<Index>(ids.size());

    Matrix G(n, static_cast<Index>(keep_gen.size()));
    std::vector<Eigen::Triplet<int>> etrip;
    for (std::size_t jj = 0; jj < keep_gen.size(); ++jj)
    {
        G.col(static_cast<Index>(jj)) = gen_cols[keep_gen[jj]];
        for (const auto& [r, v] : gen_keys[keep_gen[jj]].entries)
        {
            etrip.emplace_back(static_cast<int>(new_row[static_cast<std::size_t>(r)]),
                               static_cast<int>(jj), v);
        }
    }
    ExpMatrix E(p_new, static_cast<Index>(keep_gen.size()));
    E.setFromTriplets(etrip.begin(), etrip.end());

    if (keep_row.empty())
    {
        return CPZ(c, std::move(G), std::move(E), SparseMatrix(0, 0), Vector(0),
                   ExpMatrix(p_new, 0), std::move(ids));
    }

    std::vector<Index> row_slot(static_cast<std::size_t>(nc), -1);
    for (std::size_t r = 0; r < keep_row.size(); ++r)
    {
        row_slot[static_cast<std::size_t>(keep_row[r])] = static_cast<Index>(r);
    }
    std::vector<Eigen::Triplet<double>> atrip;
    std::vector<Eigen::Triplet<int>> rtrip;
    for (std::size_t jj = 0; jj < keep_con.size(); ++jj)
    {
        const Vector& col = con_cols[keep_con[jj]];
        for (Index r = 0; r < nc; ++r)
        {
            const Index slot = row_slot[static_cast<std::size_t>(r)];
            if (slot >= 0 && col(r) != 0.0)
            {
                atrip.emplace_back(static_cast<int>(slot), static_cast<int>(jj), col(r));
            }
        }
        for (const auto& [r, v] : con_keys[keep_con[jj]].entries)
        {
            rtrip.emplace_back(static_cast<int>(new_row[static_cast<std::size_t>(r)]),
                               static_cast<int>(jj), v);
        }
    }
    SparseMatrix A(static_cast<Index>(keep_row.size()), static_cast<Index>(keep_con.size()));
    A.setFromTriplets(atrip.begin(), atrip.end());
    ExpMatrix R(p_new, static_cast<Index>(keep_con.size()));
    R.setFromTriplets(rtrip.begin(), rtrip.end());
    Vector bk(static_cast<Index>(keep_row.size()));
    for (std::size_t r = 0; r < keep_row.size(); ++r)
    {
        bk(static_cast<Index>(r)) = b(keep_row[r]);
    }
    return CPZ(c, std::move(G), std::move(E), std::move(A), std::move(bk), std::move(R),
               std::move(ids));
}

// --- enclosures ------------------------------------------------------------

bool Box::contains(const Vector& x, double tol) const
{
    return x.size() == lo.size() && ((x.array() >= lo.array() - tol).all()) &&
           ((x.array() <= hi.array() + tol).all());
}

Box interval_hull(const CPZ& S)
{
    Vector lo = S.center();
    Vector hi = S.center();
    const auto& E = S.exponents();
    for (Index j = 0; j < S.num_generators(); ++j)
    {
        double mlo = 1.0;
        double mhi = 1.0;
        bool any = false;
        bool odd = false;
        for (ExpMatrix::InnerIterator it(E, j); it; ++it)
        {
            any = true;
            odd = odd || (it.value() % 2 == 1);
        }
        if (any)
        {
            mlo = odd ? -1.0 : 0.0;
        }
        for (Index r = 0; r < S.dim(); ++r)
        {
            const double g = S.generators()(r, j);
            if (g >= 0.0)
            {
                lo(r) += g * mlo;
                hi(r) += g * mhi;
            }
            else
            {
                lo(r) += g * mhi;
                hi(r) += g * mlo;
            }
        }
    }
    return Box{lo, hi};
}

std::vector<FactorId> shared_ids(const std::vector<FactorId>& a, const std::vector<FactorId>& b)
{
    std::vector<FactorId> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

} // namespace czreach
