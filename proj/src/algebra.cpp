#include "czreach/algebra.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace czreach
{

namespace
{

struct Layout
{
    std::vector<FactorId> ids;
    std::vector<Index> row_of1;
    std::vector<Index> row_of2;
};

Layout merge_layout(const std::vector<FactorId>& id1, const std::vector<FactorId>& id2)
{
    Layout out;
    std::set_union(id1.begin(), id1.end(), id2.begin(), id2.end(), std::back_inserter(out.ids));
    auto locate = [&](const std::vector<FactorId>& ids, std::vector<Index>& row_of) {
        row_of.resize(ids.size());
        for (std::size_t k = 0; k < ids.size(); ++k)
        {
            row_of[k] = std::lower_bound(out.ids.begin(), out.ids.end(), ids[k]) - out.ids.begin();
        }
    };
    locate(id1, out.row_of1);
    locate(id2, out.row_of2);
    return out;
}

template<class T>
void append_columns(std::vector<Eigen::Triplet<T>>& trip, const Eigen::SparseMatrix<T>& M,
                    Index row_offset, Index col_offset)
{
    for (Index j = 0; j < M.outerSize(); ++j)
    {
        for (typename Eigen::SparseMatrix<T>::InnerIterator it(M, j); it; ++it)
        {
            trip.emplace_back(static_cast<int>(it.row() + row_offset),
                              static_cast<int>(j + col_offset), it.value());
        }
    }
}

SparseMatrix blkdiag(const SparseMatrix& A1, const SparseMatrix& A2)
{
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(A1.nonZeros() + A2.nonZeros()));
    append_columns(trip, A1, 0, 0);
    append_columns(trip, A2, A1.rows(), A1.cols());
    SparseMatrix out(A1.rows() + A2.rows(), A1.cols() + A2.cols());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

ExpMatrix hcat(const ExpMatrix& E1, const ExpMatrix& E2)
{
    std::vector<Eigen::Triplet<int>> trip;
    trip.reserve(static_cast<std::size_t>(E1.nonZeros() + E2.nonZeros()));
    append_columns(trip, E1, 0, 0);
    append_columns(trip, E2, 0, E1.cols());
    ExpMatrix out(E1.rows(), E1.cols() + E2.cols());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

Vector vcat(const Vector& a, const Vector& b)
{
    Vector out(a.size() + b.size());
    out << a, b;
    return out;
}

// [E1, E2, E1(:,i) + E2(:,j)] with the pairwise block ordered h2*i + j.
ExpMatrix product_exponents(const ExpMatrix& E1, const ExpMatrix& E2)
{
    const Index h1 = E1.cols();
    const Index h2 = E2.cols();
    std::vector<Eigen::Triplet<int>> trip;
    append_columns(trip, E1, 0, 0);
    append_columns(trip, E2, 0, h1);
    for (Index i = 0; i < h1; ++i)
    {
        for (Index j = 0; j < h2; ++j)
        {
            const auto col = static_cast<int>(h1 + h2 + h2 * i + j);
            for (ExpMatrix::InnerIterator it(E1, i); it; ++it)
            {
                trip.emplace_back(static_cast<int>(it.row()), col, it.value());
            }
            for (ExpMatrix::InnerIterator it(E2, j); it; ++it)
            {
                trip.emplace_back(static_cast<int>(it.row()), col, it.value());
            }
        }
    }
    ExpMatrix out(E1.rows(), h1 + h2 + h1 * h2);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

void require_same_dim(const CPZ& P1, const CPZ& P2, const char* op)
{
    if (P1.dim() != P2.dim())
    {
        throw ShapeMismatch(std::string(op) + ": dimensions " + std::to_string(P1.dim()) +
                            " and " + std::to_string(P2.dim()) + " differ");
    }
}

} // namespace

MergedPair<CPZ, CPZ> merge_id(const CPZ& S1, const CPZ& S2)
{
    Layout l = merge_layout(S1.ids(), S2.ids());
    return {S1.embed(l.ids, l.row_of1), S2.embed(l.ids, l.row_of2), l.ids};
}

MergedPair<CPMZ, CPZ> merge_id(const CPMZ& S1, const CPZ& S2)
{
    Layout l = merge_layout(S1.ids(), S2.ids());
    return {S1.embed(l.ids, l.row_of1), S2.embed(l.ids, l.row_of2), l.ids};
}

MergedPair<CPMZ, CPMZ> merge_id(const CPMZ& S1, const CPMZ& S2)
{
    Layout l = merge_layout(S1.ids(), S2.ids());
    return {S1.embed(l.ids, l.row_of1), S2.embed(l.ids, l.row_of2), l.ids};
}

CPZ mul_cpmz_cpz(const CPMZ& Yin, const CPZ& Pin)
{
    if (Yin.cols() != Pin.dim())
    {
        throw ShapeMismatch("mul_cpmz_cpz: matrix has " + std::to_string(Yin.cols()) +
                            " columns, set has dimension " + std::to_string(Pin.dim()));
    }
    auto [Y, P, ids] = merge_id(Yin, Pin);
    const Index gamma = Y.num_generators();
    const Index hP = P.num_generators();
    const Index nx = Y.rows();
    const Vector& cP = P.center();
    const Matrix& GP = P.generators();

    Matrix G(nx, gamma + hP + gamma * hP);
    for (Index i = 0; i < gamma; ++i)
    {
        G.col(i) = Y.generators()[static_cast<std::size_t>(i)] * cP;
    }
    G.middleCols(gamma, hP) = Y.center() * GP;
    for (Index i = 0; i < gamma; ++i)
    {
        G.middleCols(gamma + hP + hP * i, hP) = Y.generators()[static_cast<std::size_t>(i)] * GP;
    }

    return CPZ(Y.center() * cP, std::move(G), product_exponents(Y.exponents(), P.exponents()),
               blkdiag(Y.constraint_matrix(), P.constraint_matrix()),
               vcat(Y.constraint_offset(), P.constraint_offset()),
               hcat(Y.constraint_exponents(), P.constraint_exponents()), ids);
}

CPZ add_exact(const CPZ& P1in, const CPZ& P2in)
{
    require_same_dim(P1in, P2in, "add_exact");
    auto [P1, P2, ids] = merge_id(P1in, P2in);
    Matrix G(P1.dim(), P1.num_generators() + P2.num_generators());
    G << P1.generators(), P2.generators();
    return CPZ(P1.center() + P2.center(), std::move(G), hcat(P1.exponents(), P2.exponents()),
               blkdiag(P1.constraint_matrix(), P2.constraint_matrix()),
               vcat(P1.constraint_offset(), P2.constraint_offset()),
               hcat(P1.constraint_exponents(), P2.constraint_exponents()), ids);
}

CPZ cartesian_exact(const CPZ& P1in, const CPZ& P2in)
{
    auto [P1, P2, ids] = merge_id(P1in, P2in);
    const Index n = P1.dim();
    const Index w = P2.dim();
    const Index h1 = P1.num_generators();
    const Index h2 = P2.num_generators();
    Matrix G = Matrix::Zero(n + w, h1 + h2);
    G.topLeftCorner(n, h1) = P1.generators();
    G.bottomRightCorner(w, h2) = P2.generators();
    return CPZ(vcat(P1.center(), P2.center()), std::move(G),
               hcat(P1.exponents(), P2.exponents()),
               blkdiag(P1.constraint_matrix(), P2.constraint_matrix()),
               vcat(P1.constraint_offset(), P2.constraint_offset()),
               hcat(P1.constraint_exponents(), P2.constraint_exponents()), ids);
}

CPZ hadamard_exact(const CPZ& P1in, const CPZ& P2in)
{
    require_same_dim(P1in, P2in, "hadamard_exact");
    auto [P1, P2, ids] = merge_id(P1in, P2in);
    const Index n = P1.dim();
    const Index h1 = P1.num_generators();
    const Index h2 = P2.num_generators();
    const Vector& c1 = P1.center();
    const Vector& c2 = P2.center();
    const Matrix& G1 = P1.generators();
    const Matrix& G2 = P2.generators();

    Matrix G(n, h1 + h2 + h1 * h2);
    G.leftCols(h1) = c2.asDiagonal() * G1;
    G.middleCols(h1, h2) = c1.asDiagonal() * G2;
    for (Index i = 0; i < h1; ++i)
    {
        G.middleCols(h1 + h2 + h2 * i, h2) = G1.col(i).asDiagonal() * G2;
    }
    return CPZ(c1.cwiseProduct(c2), std::move(G),
               product_exponents(P1.exponents(), P2.exponents()),
               blkdiag(P1.constraint_matrix(), P2.constraint_matrix()),
               vcat(P1.constraint_offset(), P2.constraint_offset()),
               hcat(P1.constraint_exponents(), P2.constraint_exponents()), ids);
}

CPZ pow_exact(const CPZ& P, int e)
{
    if (e < 0)
    {
        throw NegativeExponent("pow_exact: exponent " + std::to_string(e));
    }
    if (e == 0)
    {
        return CPZ(Vector::Ones(P.dim()));
    }
    CPZ acc = P;
    for (int k = 1; k < e; ++k)
    {
        acc = hadamard_exact(acc, P);
    }
    return acc;
}

CPMZ intersect_cpmz(const CPMZ& Y1, const CPMZ& Y2in)
{
    if (Y1.rows() != Y2in.rows() || Y1.cols() != Y2in.cols())
    {
        throw ShapeMismatch("intersect_cpmz: shapes " + std::to_string(Y1.rows()) + "x" +
                            std::to_string(Y1.cols()) + " and " + std::to_string(Y2in.rows()) +
                            "x" + std::to_string(Y2in.cols()) + " differ");
    }

    // Rename factors of Y2 that collide with Y1.
    CPMZ Y2 = Y2in;
    if (!shared_ids(Y1.ids(), Y2in.ids()).empty())
    {
        std::vector<FactorId> renamed = Y2in.ids();
        for (auto& id : renamed)
        {
            if (std::binary_search(Y1.ids().begin(), Y1.ids().end(), id))
            {
                id = fresh_id();
            }
        }
        Y2 = CPMZ(Y2in.center(), Y2in.generators(), Y2in.exponents(),
                  Y2in.constraint_matrix(), Y2in.constraint_offset(), Y2in.constraint_rows(),
                  Y2in.constraint_cols(), Y2in.constraint_exponents(), std::move(renamed));
    }
    auto [M1, M2, ids] = merge_id(Y1, Y2);

    const Index m = Y1.rows() * Y1.cols();
    const Index m1 = M1.num_constraints();
    const Index m2 = M2.num_constraints();
    const Index q1 = M1.num_constraint_terms();
    const Index q2 = M2.num_constraint_terms();
    const Index g1 = M1.num_generators();
    const Index g2 = M2.num_generators();

    std::vector<Eigen::Triplet<double>> trip;
    append_columns(trip, M1.constraint_matrix(), 0, 0);
    append_columns(trip, M2.constraint_matrix(), m1, q1);
    for (Index i = 0; i < g1; ++i)
    {
        const Matrix& Gi = M1.generators()[static_cast<std::size_t>(i)];
        for (Index r = 0; r < m; ++r)
        {
            if (Gi.data()[r] != 0.0)
            {
                trip.emplace_back(static_cast<int>(m1 + m2 + r), static_cast<int>(q1 + q2 + i),
                                  Gi.data()[r]);
            }
        }
    }
    for (Index i = 0; i < g2; ++i)
    {
        const Matrix& Gi = M2.generators()[static_cast<std::size_t>(i)];
        for (Index r = 0; r < m; ++r)
        {
            if (Gi.data()[r] != 0.0)
            {
                trip.emplace_back(static_cast<int>(m1 + m2 + r),
                                  static_cast<int>(q1 + q2 + g1 + i), -Gi.data()[r]);
            }
        }
    }
    SparseMatrix A(m1 + m2 + m, q1 + q2 + g1 + g2);
    A.setFromTriplets(trip.begin(), trip.end());

    Vector b(m1 + m2 + m);
    b << M1.constraint_offset(), M2.constraint_offset(), vec(M2.center() - M1.center());

    ExpMatrix R = hcat(hcat(M1.constraint_exponents(), M2.constraint_exponents()),
                       hcat(M1.exponents(), M2.exponents()));

    return CPMZ(M1.center(), M1.generators(), M1.exponents(), std::move(A), std::move(b),
                m1 + m2 + m, 1, std::move(R), ids);
}

CPZ project(const CPZ& S, const std::vector<Index>& I)
{
    std::vector<Index> seen(I);
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    {
        throw IndexOutOfRange("project: repeated index");
    }
    for (Index i : I)
    {
        if (i < 0 || i >= S.dim())
        {
            throw IndexOutOfRange("project: index " + std::to_string(i) + " outside 0.." +
                                  std::to_string(S.dim() - 1));
        }
    }
    const auto rows = static_cast<Index>(I.size());
    Vector c(rows);
    Matrix G(rows, S.num_generators());
    for (Index r = 0; r < rows; ++r)
    {
        c(r) = S.center()(I[static_cast<std::size_t>(r)]);
        G.row(r) = S.generators().row(I[static_cast<std::size_t>(r)]);
    }
    return CPZ(std::move(c), std::move(G), S.exponents(), S.constraint_matrix(),
               S.constraint_offset(), S.constraint_exponents(), S.ids());
}

CPZ map_linear(const Matrix& M, const CPZ& S)
{
    if (M.cols() != S.dim())
    {
        throw ShapeMismatch("map_linear: matrix has " + std::to_string(M.cols()) +
                            " columns, set has dimension " + std::to_string(S.dim()));
    }
    return CPZ(M * S.center(), M * S.generators(), S.exponents(), S.constraint_matrix(),
               S.constraint_offset(), S.constraint_exponents(), S.ids());
}

CPMZ affine_cpmz(const Matrix& K, const CPMZ& Y, const Matrix& L)
{
    if (K.rows() != Y.rows() || K.cols() != Y.cols())
    {
        throw ShapeMismatch("affine_cpmz: K is " + std::to_string(K.rows()) + "x" +
                            std::to_string(K.cols()) + ", set elements are " +
                            std::to_string(Y.rows()) + "x" + std::to_string(Y.cols()));
    }
    if (L.rows() != Y.cols())
    {
        throw ShapeMismatch("affine_cpmz: L has " + std::to_string(L.rows()) + " rows, expected " +
                            std::to_string(Y.cols()));
    }
    std::vector<Matrix> G;
    G.reserve(Y.generators().size());
    for (const auto& Gi : Y.generators())
    {
        G.push_back(-(Gi * L));
    }
    return CPMZ((K - Y.center()) * L, std::move(G), Y.exponents(), Y.constraint_matrix(),
                Y.constraint_offset(), Y.constraint_rows(), Y.constraint_cols(),
                Y.constraint_exponents(), Y.ids());
}

CPZ reduce(const CPZ& S, Index max_generators)
{
    const Index n = S.dim();
    const Index h = S.num_generators();
    if (max_generators < n)
    {
        throw std::invalid_argument("reduce: max_generators " + std::to_string(max_generators) +
                                    " below dimension " + std::to_string(n));
    }
    if (h <= max_generators)
    {
        return S;
    }

    std::vector<Index> order(static_cast<std::size_t>(h));
    std::iota(order.begin(), order.end(), Index{0});
    const Vector norms = S.generators().colwise().norm();
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return norms(a) < norms(b); });
    const Index keep = max_generators - n;
    std::vector<bool> boxed(static_cast<std::size_t>(h), false);
    for (Index k = 0; k < h - keep; ++k)
    {
        boxed[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = true;
    }

    // Interval enclosure of the boxed part.
    std::vector<Index> kept;
    std::vector<Index> dropped;
    for (Index j = 0; j < h; ++j)
    {
        (boxed[static_cast<std::size_t>(j)] ? dropped : kept).push_back(j);
    }
    Matrix Gd(n, static_cast<Index>(dropped.size()));
    std::vector<Eigen::Triplet<int>> dtrip;
    for (std::size_t jj = 0; jj < dropped.size(); ++jj)
    {
        Gd.col(static_cast<Index>(jj)) = S.generators().col(dropped[jj]);
        for (ExpMatrix::InnerIterator it(S.exponents(), dropped[jj]); it; ++it)
        {
            dtrip.emplace_back(static_cast<int>(it.row()), static_cast<int>(jj), it.value());
        }
    }
    ExpMatrix Ed(S.num_factors(), static_cast<Index>(dropped.size()));
    Ed.setFromTriplets(dtrip.begin(), dtrip.end());
    const Box box =
        interval_hull(CPZ(Vector::Zero(n), Gd, Ed, SparseMatrix(0, 0), Vector(0),
                          ExpMatrix(S.num_factors(), 0), S.ids()));

    std::vector<Index> box_rows;
    for (Index r = 0; r < n; ++r)
    {
        if (box.radius()(r) > 0.0)
        {
            box_rows.push_back(r);
        }
    }
    const auto nb = static_cast<Index>(box_rows.size());
    const auto nk = static_cast<Index>(kept.size());
    std::vector<FactorId> new_ids = fresh_ids(static_cast<std::size_t>(nb));

    std::vector<FactorId> ids = S.ids();
    ids.insert(ids.end(), new_ids.begin(), new_ids.end());
    const auto p = static_cast<Index>(ids.size());

    Matrix G = Matrix::Zero(n, nk + nb);
    std::vector<Eigen::Triplet<int>> etrip;
    for (Index jj = 0; jj < nk; ++jj)
    {
        G.col(jj) = S.generators().col(kept[static_cast<std::size_t>(jj)]);
        for (ExpMatrix::InnerIterator it(S.exponents(), kept[static_cast<std::size_t>(jj)]); it;
             ++it)
        {
            etrip.emplace_back(static_cast<int>(it.row()), static_cast<int>(jj), it.value());
        }
    }
    for (Index k = 0; k < nb; ++k)
    {
        G(box_rows[static_cast<std::size_t>(k)], nk + k) =
            box.radius()(box_rows[static_cast<std::size_t>(k)]);
        etrip.emplace_back(static_cast<int>(S.num_factors() + k), static_cast<int>(nk + k), 1);
    }
    ExpMatrix E(p, nk + nb);
    E.setFromTriplets(etrip.begin(), etrip.end());

    ExpMatrix R = S.constraint_exponents();
    R.conservativeResize(p, R.cols());

    return compact(CPZ(S.center() + box.center(), std::move(G), std::move(E),
                       S.constraint_matrix(), S.constraint_offset(), std::move(R),
                       std::move(ids)));
}

Restructured restructure(const CPZ& Sin)
{
    const CPZ S = compact(Sin);
    const Index n = S.dim();
    const Box box = interval_hull(S);
    const Vector mid = box.center();
    const Vector rad = box.radius();

    std::vector<Index> rows;
    for (Index r = 0; r < n; ++r)
    {
        if (rad(r) > 0.0)
        {
            rows.push_back(r);
        }
    }
    const auto nxi = static_cast<Index>(rows.size());
    std::vector<FactorId> xi = fresh_ids(static_cast<std::size_t>(nxi));

    const Index p0 = S.num_factors();
    std::vector<FactorId> ids = S.ids();
    ids.insert(ids.end(), xi.begin(), xi.end());
    const auto p = static_cast<Index>(ids.size());

    Matrix G = Matrix::Zero(n, nxi);
    std::vector<Eigen::Triplet<int>> etrip;
    for (Index k = 0; k < nxi; ++k)
    {
        G(rows[static_cast<std::size_t>(k)], k) = rad(rows[static_cast<std::size_t>(k)]);
        etrip.emplace_back(static_cast<int>(p0 + k), static_cast<int>(k), 1);
    }
    ExpMatrix E(p, nxi);
    E.setFromTriplets(etrip.begin(), etrip.end());

    // Constraint system: original rows, then one row per xi.
    const Index m0 = S.num_constraints();
    const Index q0 = S.num_constraint_terms();
    const Index h = S.num_generators();
    std::vector<Eigen::Triplet<double>> atrip;
    append_columns(atrip, S.constraint_matrix(), 0, 0);
    for (Index j = 0; j < h; ++j)
    {
        for (Index k = 0; k < nxi; ++k)
        {
            const double g = S.generators()(rows[static_cast<std::size_t>(k)], j);
            if (g != 0.0)
            {
                atrip.emplace_back(static_cast<int>(m0 + k), static_cast<int>(q0 + j), g);
            }
        }
    }
    for (Index k = 0; k < nxi; ++k)
    {
        atrip.emplace_back(static_cast<int>(m0 + k), static_cast<int>(q0 + h + k),
                           -rad(rows[static_cast<std::size_t>(k)]));
    }
    SparseMatrix A(m0 + nxi, q0 + h + nxi);
    A.setFromTriplets(atrip.begin(), atrip.end());

    Vector b(m0 + nxi);
    b.head(m0) = S.constraint_offset();
    for (Index k = 0; k < nxi; ++k)
    {
        const Index r = rows[static_cast<std::size_t>(k)];
        b(m0 + k) = mid(r) - S.center()(r);
    }

    std::vector<Eigen::Triplet<int>> rtrip;
    append_columns(rtrip, S.constraint_exponents(), 0, 0);
    append_columns(rtrip, S.exponents(), 0, q0);
    for (Index k = 0; k < nxi; ++k)
    {
        rtrip.emplace_back(static_cast<int>(p0 + k), static_cast<int>(q0 + h + k), 1);
    }
    ExpMatrix R(p, q0 + h + nxi);
    R.setFromTriplets(rtrip.begin(), rtrip.end());

    CPZ out(mid, std::move(G), std::move(E), std::move(A), std::move(b), std::move(R),
            std::move(ids));
    return Restructured{std::move(out), S, std::move(xi), std::move(rows), mid, rad};
}

FactorAssignment complete_restructure(const Restructured& r, const FactorAssignment& sigma)
{
    const Vector x = eval_point(r.source, sigma);
    FactorAssignment out;
    for (std::size_t k = 0; k < r.xi.size(); ++k)
    {
        const Index row = r.rows[k];
        const double v = (x(row) - r.mid(row)) / r.rad(row);
        out.set(r.xi[k], std::clamp(v, -1.0, 1.0));
    }
    return out;
}

} // namespace czreach
