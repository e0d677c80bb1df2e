#include "czreach/serialize.hpp"

#include <charconv>
#include <type_traits>

namespace czreach
{

namespace
{

const Json& require(const Json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key))
    {
        throw ParseError(std::string("missing key '") + key + "'");
    }
    return j.at(key);
}

Index shape_of(const Json& j, const char* key, Index fallback)
{
    if (j.contains("shape") && j.at("shape").contains(key))
    {
        return j.at("shape").at(key).get<Index>();
    }
    return fallback;
}

double number(const Json& v, const std::string& what)
{
    if (!v.is_number())
    {
        throw ParseError(what + ": expected a number");
    }
    return v.get<double>();
}

Matrix with_cols(Matrix M, Index cols)
{
    if (M.size() == 0)
    {
        M.resize(M.rows(), cols);
    }
    return M;
}

std::vector<FactorId> ids_from_json(const Json& j)
{
    std::vector<FactorId> ids;
    for (const auto& v : j)
    {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() > 0))
        {
            throw ParseError("id: expected positive integers");
        }
        ids.push_back(FactorId{v.get<std::uint64_t>()});
    }
    return ids;
}

Json ids_to_json(const std::vector<FactorId>& ids)
{
    Json out = Json::array();
    for (auto id : ids)
    {
        out.push_back(id.value);
    }
    return out;
}

// Above this many entries sparse blocks are written as triplet objects.
constexpr Index kDenseLimit = 250000;

template<class T>
Json sparse_to_json(const Eigen::SparseMatrix<T>& M)
{
    if (M.rows() * M.cols() <= kDenseLimit)
    {
        return to_json(Matrix(M.template cast<double>()));
    }
    Json trip = Json::array();
    for (Index j = 0; j < M.outerSize(); ++j)
    {
        for (typename Eigen::SparseMatrix<T>::InnerIterator it(M, j); it; ++it)
        {
            trip.push_back(Json::array({it.row(), j, it.value()}));
        }
    }
    return Json{{"rows", M.rows()}, {"cols", M.cols()}, {"triplets", std::move(trip)}};
}

// Accepts either nested rows or the triplet object form.
template<class T>
Eigen::SparseMatrix<T> sparse_from_json(const Json& j, const std::string& what, Index rows,
                                        Index cols)
{
    if (j.is_object() && j.contains("triplets"))
    {
        const auto r0 = require(j, "rows").get<Index>();
        const auto c0 = require(j, "cols").get<Index>();
        std::vector<Eigen::Triplet<T>> trip;
        for (const auto& t : j.at("triplets"))
        {
            if (!t.is_array() || t.size() != 3)
            {
                throw ParseError(what + ": malformed triplet");
            }
            const auto r = t[0].get<Index>();
            const auto c = t[1].get<Index>();
            if (r < 0 || r >= r0 || c < 0 || c >= c0)
            {
                throw ParseError(what + ": triplet outside matrix");
            }
            const double v = number(t[2], what);
            if constexpr (std::is_integral_v<T>)
            {
                if (v != static_cast<double>(static_cast<T>(v)))
                {
                    throw ParseError(what + ": expected integers");
                }
            }
            trip.emplace_back(static_cast<int>(r), static_cast<int>(c), static_cast<T>(v));
        }
        Eigen::SparseMatrix<T> out(r0, c0);
        out.setFromTriplets(trip.begin(), trip.end());
        return out;
    }
    if constexpr (std::is_integral_v<T>)
    {
        const Eigen::MatrixXi D = int_matrix_from_json(j, what);
        if (D.size() == 0)
        {
            return ExpMatrix(rows, cols);
        }
        return exp_from_dense(D);
    }
    else
    {
        const Matrix D = matrix_from_json(j, what);
        if (D.size() == 0)
        {
            return SparseMatrix(rows, cols);
        }
        return sparse_from_dense(D);
    }
}

} // namespace

Json to_json(const Matrix& M)
{
    Json out = Json::array();
    for (Index r = 0; r < M.rows(); ++r)
    {
        Json row = Json::array();
        for (Index c = 0; c < M.cols(); ++c)
        {
            row.push_back(M(r, c));
        }
        out.push_back(std::move(row));
    }
    return out;
}

Json to_json(const Vector& v)
{
    Json out = Json::array();
    for (Index i = 0; i < v.size(); ++i)
    {
        out.push_back(v(i));
    }
    return out;
}

Json to_json(const ExpMatrix& E)
{
    if (E.rows() * E.cols() > kDenseLimit)
    {
        return sparse_to_json(E);
    }
    const Eigen::MatrixXi D = exp_to_dense(E);
    Json out = Json::array();
    for (Index r = 0; r < D.rows(); ++r)
    {
        Json row = Json::array();
        for (Index c = 0; c < D.cols(); ++c)
        {
            row.push_back(D(r, c));
        }
        out.push_back(std::move(row));
    }
    return out;
}

Matrix matrix_from_json(const Json& j, const std::string& what)
{
    if (!j.is_array())
    {
        throw ParseError(what + ": expected an array of rows");
    }
    const auto rows = static_cast<Index>(j.size());
    if (rows == 0)
    {
        return Matrix(0, 0);
    }
    if (!j[0].is_array())
    {
        throw ParseError(what + ": expected nested arrays");
    }
    const auto cols = static_cast<Index>(j[0].size());
    Matrix M(rows, cols);
    for (Index r = 0; r < rows; ++r)
    {
        const Json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols)
        {
            throw ParseError(what + ": ragged row " + std::to_string(r));
        }
        for (Index c = 0; c < cols; ++c)
        {
            M(r, c) = number(row[static_cast<std::size_t>(c)], what);
        }
    }
    return M;
}

Vector vector_from_json(const Json& j, const std::string& what)
{
    if (j.is_number())
    {
        return Vector::Constant(1, j.get<double>());
    }
    if (!j.is_array())
    {
        throw ParseError(what + ": expected an array");
    }
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
    {
        v(static_cast<Index>(i)) = number(j[i], what);
    }
    return v;
}

Eigen::MatrixXi int_matrix_from_json(const Json& j, const std::string& what)
{
    const Matrix M = matrix_from_json(j, what);
    Eigen::MatrixXi out(M.rows(), M.cols());
    for (Index r = 0; r < M.rows(); ++r)
    {
        for (Index c = 0; c < M.cols(); ++c)
        {
            const double v = M(r, c);
            if (v != static_cast<double>(static_cast<int>(v)))
            {
                throw ParseError(what + ": expected integers");
            }
            out(r, c) = static_cast<int>(v);
        }
    }
    return out;
}

Json to_json(const CPZ& S)
{
    Json j;
    j["c"] = to_json(S.center());
    j["G"] = to_json(S.generators());
    j["E"] = to_json(S.exponents());
    j["A"] = sparse_to_json(S.constraint_matrix());
    j["b"] = to_json(S.constraint_offset());
    j["R"] = to_json(S.constraint_exponents());
    j["id"] = ids_to_json(S.ids());
    j["shape"] = {{"n", S.dim()},
                  {"h", S.num_generators()},
                  {"p", S.num_factors()},
                  {"nc", S.num_constraints()},
                  {"q", S.num_constraint_terms()}};
    return j;
}

CPZ cpz_from_json(const Json& j)
{
    const Vector c = vector_from_json(require(j, "c"), "c");
    const std::vector<FactorId> ids = ids_from_json(require(j, "id"));
    const auto p = static_cast<Index>(ids.size());
    const Index h = shape_of(j, "h", 0);
    const Index nc = shape_of(j, "nc", 0);
    const Index q = shape_of(j, "q", 0);

    Matrix G = j.contains("G") ? matrix_from_json(j.at("G"), "G") : Matrix(c.size(), 0);
    if (G.size() == 0)
    {
        G = Matrix(c.size(), h);
    }
    ExpMatrix E = j.contains("E") ? sparse_from_json<int>(j.at("E"), "E", p, G.cols())
                                  : ExpMatrix(p, G.cols());
    SparseMatrix A = j.contains("A") ? sparse_from_json<double>(j.at("A"), "A", nc, q)
                                     : SparseMatrix(nc, q);
    const Vector b = j.contains("b") ? vector_from_json(j.at("b"), "b") : Vector(0);
    ExpMatrix R = j.contains("R") ? sparse_from_json<int>(j.at("R"), "R", p, A.cols())
                                  : ExpMatrix(p, A.cols());

    return CPZ(c, G, std::move(E), std::move(A), b, std::move(R), ids);
}

Json to_json(const CPMZ& S)
{
    Json j;
    j["C"] = to_json(S.center());
    Json glist = Json::array();
    for (const auto& Gi : S.generators())
    {
        glist.push_back(to_json(Gi));
    }
    j["Glist"] = std::move(glist);
    j["E"] = to_json(S.exponents());
    Json alist = Json::array();
    for (Index k = 0; k < S.num_constraint_terms(); ++k)
    {
        alist.push_back(to_json(S.constraint_term(k)));
    }
    j["Alist"] = std::move(alist);
    j["B"] = to_json(S.constraint_rhs());
    j["R"] = to_json(S.constraint_exponents());
    j["id"] = ids_to_json(S.ids());
    j["shape"] = {{"rows", S.rows()},
                  {"cols", S.cols()},
                  {"gamma", S.num_generators()},
                  {"p", S.num_factors()},
                  {"nc", S.constraint_rows()},
                  {"na", S.constraint_cols()},
                  {"q", S.num_constraint_terms()}};
    return j;
}

CPMZ cpmz_from_json(const Json& j)
{
    const Index rows = shape_of(j, "rows", 0);
    const Index cols = shape_of(j, "cols", 0);
    Matrix C = matrix_from_json(require(j, "C"), "C");
    if (C.size() == 0)
    {
        C = Matrix(rows, cols);
    }
    const std::vector<FactorId> ids = ids_from_json(require(j, "id"));
    const auto p = static_cast<Index>(ids.size());

    std::vector<Matrix> G;
    if (j.contains("Glist"))
    {
        for (const auto& g : j.at("Glist"))
        {
            G.push_back(with_cols(matrix_from_json(g, "Glist"), C.cols()));
        }
    }
    const Index nc = shape_of(j, "nc", 0);
    const Index na = shape_of(j, "na", 0);
    Matrix B = j.contains("B") ? matrix_from_json(j.at("B"), "B") : Matrix(0, 0);
    if (B.size() == 0)
    {
        B = Matrix(nc, na);
    }
    std::vector<Matrix> A;
    if (j.contains("Alist"))
    {
        for (const auto& a : j.at("Alist"))
        {
            Matrix Ak = matrix_from_json(a, "Alist");
            if (Ak.size() == 0)
            {
                Ak = Matrix(B.rows(), B.cols());
            }
            A.push_back(std::move(Ak));
        }
    }
    const auto gamma = static_cast<Index>(G.size());
    ExpMatrix E = j.contains("E") ? sparse_from_json<int>(j.at("E"), "E", p, gamma)
                                  : ExpMatrix(p, gamma);
    ExpMatrix R = j.contains("R") ? sparse_from_json<int>(j.at("R"), "R", p,
                                                          static_cast<Index>(A.size()))
                                  : ExpMatrix(p, static_cast<Index>(A.size()));

    Matrix Avec(B.size(), static_cast<Index>(A.size()));
    for (std::size_t k = 0; k < A.size(); ++k)
    {
        if (A[k].rows() != B.rows() || A[k].cols() != B.cols())
        {
            throw ParseError("Alist: entry " + std::to_string(k) + " does not match B");
        }
        Avec.col(static_cast<Index>(k)) = vec(A[k]);
    }
    return CPMZ(C, std::move(G), std::move(E), sparse_from_dense(Avec), vec(B), B.rows(),
                B.cols(), std::move(R), ids);
}

std::string format_number(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Json to_json(const FactorAssignment& sigma)
{
    Json out = Json::array();
    for (const auto& [id, v] : sigma.sorted())
    {
        out.push_back(Json::array({id.value, v}));
    }
    return out;
}

FactorAssignment assignment_from_json(const Json& j)
{
    FactorAssignment out;
    if (!j.is_array())
    {
        throw ParseError("factor assignment: expected an array of [id, value] pairs");
    }
    for (const auto& e : j)
    {
        if (!e.is_array() || e.size() != 2)
        {
            throw ParseError("factor assignment: expected [id, value] pairs");
        }
        out.set(FactorId{e[0].get<std::uint64_t>()}, number(e[1], "factor value"));
    }
    return out;
}

} // namespace czreach
