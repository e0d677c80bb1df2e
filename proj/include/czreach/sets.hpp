#ifndef CZREACH_SETS_HPP
#define CZREACH_SETS_HPP

#include "czreach/factor.hpp"
#include "czreach/types.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace czreach
{

// Constrained polynomial zonotope
//
//   { c + sum_i (prod_k a_k^E(k,i)) G(:,i) |
//     sum_j (prod_k a_k^R(k,j)) A(:,j) = b,  a in [-1,1]^p }
//
// with factor a_k identified by id[k]. Values are immutable after
// construction; ids are kept sorted ascending so that structurally equal
// sets compare equal.
class CPZ
{
    public:
        CPZ() : CPZ(Vector::Zero(0)) {}

        // Singleton {c}.
        explicit CPZ(Vector c);

        // Throws ShapeMismatch, NegativeExponent or DuplicateId.
        CPZ(Vector c, Matrix G, ExpMatrix E, SparseMatrix A, Vector b, ExpMatrix R,
            std::vector<FactorId> id);

        // Dense-input convenience used by tests and parsers.
        static CPZ from_dense(const Vector& c, const Matrix& G, const Eigen::MatrixXi& E,
                              const Matrix& A, const Vector& b, const Eigen::MatrixXi& R,
                              std::vector<FactorId> id);

        // Unconstrained polynomial zonotope.
        static CPZ polynomial(const Vector& c, const Matrix& G, const Eigen::MatrixXi& E,
                              std::vector<FactorId> id);

        Index dim() const { return c_.size(); }
        Index num_generators() const { return G_.cols(); }
        Index num_factors() const { return static_cast<Index>(id_.size()); }
        Index num_constraints() const { return A_.rows(); }
        Index num_constraint_terms() const { return A_.cols(); }
        bool is_constrained() const { return A_.rows() > 0; }

        const Vector& center() const { return c_; }
        const Matrix& generators() const { return G_; }
        const ExpMatrix& exponents() const { return E_; }
        const SparseMatrix& constraint_matrix() const { return A_; }
        const Vector& constraint_offset() const { return b_; }
        const ExpMatrix& constraint_exponents() const { return R_; }
        const std::vector<FactorId>& ids() const { return id_; }

        // Same set, exponent rows re-indexed onto a superset of ids.
        // row_of[k] is the row in the new layout of this set's factor k.
        CPZ embed(const std::vector<FactorId>& ids, const std::vector<Index>& row_of) const;

    private:
        Vector c_;
        Matrix G_;
        ExpMatrix E_;
        SparseMatrix A_;
        Vector b_;
        ExpMatrix R_;
        std::vector<FactorId> id_;
};

// Constrained polynomial matrix zonotope
//
//   { C + sum_i (prod_k a_k^E(k,i)) G_i | sum_j (prod_k a_k^R(k,j)) A_j = B }
//
// The constraint matrices A_j (n_c x n_a each) and B are stored vectorized
// (column-major), so the number of constraint terms q is independent of the
// number of generators.
class CPMZ
{
    public:
        CPMZ() = default;

        // Singleton {C}.
        explicit CPMZ(Matrix C);

        // A has n_c * n_a rows (vec of each A_j as a column), b = vec(B).
        CPMZ(Matrix C, std::vector<Matrix> G, ExpMatrix E, SparseMatrix A, Vector b,
             Index constraint_rows, Index constraint_cols, ExpMatrix R,
             std::vector<FactorId> id);

        // Constraint matrices given as a list, as written in set notation.
        static CPMZ from_lists(const Matrix& C, std::vector<Matrix> G, const Eigen::MatrixXi& E,
                               const std::vector<Matrix>& A, const Matrix& B,
                               const Eigen::MatrixXi& R, std::vector<FactorId> id);

        Index rows() const { return C_.rows(); }
        Index cols() const { return C_.cols(); }
        Index num_generators() const { return static_cast<Index>(G_.size()); }
        Index num_factors() const { return static_cast<Index>(id_.size()); }
        Index num_constraint_terms() const { return A_.cols(); }
        // Rows of the vectorized constraint system, n_c * n_a.
        Index num_constraints() const { return A_.rows(); }
        Index constraint_rows() const { return nc_; }
        Index constraint_cols() const { return na_; }
        bool is_constrained() const { return A_.rows() > 0; }

        const Matrix& center() const { return C_; }
        const std::vector<Matrix>& generators() const { return G_; }
        const ExpMatrix& exponents() const { return E_; }
        const SparseMatrix& constraint_matrix() const { return A_; }
        const Vector& constraint_offset() const { return b_; }
        const ExpMatrix& constraint_exponents() const { return R_; }
        const std::vector<FactorId>& ids() const { return id_; }

        // Constraint term j reshaped to n_c x n_a.
        Matrix constraint_term(Index j) const;
        // B reshaped to n_c x n_a.
        Matrix constraint_rhs() const;

        CPMZ embed(const std::vector<FactorId>& ids, const std::vector<Index>& row_of) const;

    private:
        Matrix C_;
        std::vector<Matrix> G_;
        ExpMatrix E_;
        SparseMatrix A_;
        Vector b_;
        Index nc_ = 0;
        Index na_ = 0;
        ExpMatrix R_;
        std::vector<FactorId> id_;
};

// Classic representations that embed losslessly into CPZ / CPMZ.
struct Zonotope
{
    Vector c;
    Matrix G;
};

struct ConstrainedZonotope
{
    Vector c;
    Matrix G;
    Matrix A;
    Vector b;
};

struct MatrixZonotope
{
    Matrix C;
    std::vector<Matrix> G;
};

struct ConstrainedMatrixZonotope
{
    Matrix C;
    std::vector<Matrix> G;
    std::vector<Matrix> A;
    Matrix B;
};

// Identity exponent pattern; fresh ids when ids is empty.
CPZ lift(const Zonotope& z, std::vector<FactorId> ids = {});
CPZ lift(const ConstrainedZonotope& z, std::vector<FactorId> ids = {});
CPMZ lift(const MatrixZonotope& z, std::vector<FactorId> ids = {});
CPMZ lift(const ConstrainedMatrixZonotope& z, std::vector<FactorId> ids = {});

// Monomial values prod_k x_k^exp(k, i) for every column i.
Vector monomials(const ExpMatrix& exp, const Vector& factor_values);

// Point of S at sigma; constraints are not checked. Throws MissingFactor.
Vector eval_point(const CPZ& S, const FactorAssignment& sigma);
Matrix eval_matrix(const CPMZ& S, const FactorAssignment& sigma);

// Euclidean (Frobenius) norm of the constraint defect at sigma.
double constraint_residual(const CPZ& S, const FactorAssignment& sigma);
double constraint_residual(const CPMZ& S, const FactorAssignment& sigma);

// Column-major vectorization and its inverse. reshape_convert throws
// NotDivisible when rows does not divide the length.
Vector vec(const Matrix& M);
Matrix reshape_convert(const Vector& v, Index rows);

// The CPMZ viewed as a CPZ over vec(Y); same factors and constraints.
CPZ to_cpz(const CPMZ& Y);

// Same structure, every factor replaced by a fresh one.
CPZ with_fresh_ids(const CPZ& S);
CPMZ with_fresh_ids(const CPMZ& S);

// Exact simplification: merges generator / constraint columns with equal
// exponents, folds constant monomials into c and b, drops zero columns,
// duplicate constraint rows and unused factors. Represents the same set.
CPZ compact(const CPZ& S);

// Axis-aligned box containing the unconstrained polynomial map (constraints
// ignored, so the box also contains the constrained set).
struct Box
{
    Vector lo;
    Vector hi;

    Vector center() const { return 0.5 * (lo + hi); }
    Vector radius() const { return 0.5 * (hi - lo); }
    bool contains(const Vector& x, double tol = 0.0) const;
};

Box interval_hull(const CPZ& S);

// Ids present in both lists (both must be sorted).
std::vector<FactorId> shared_ids(const std::vector<FactorId>& a, const std::vector<FactorId>& b);

// Sparse helpers shared by the algebra.
ExpMatrix exp_from_dense(const Eigen::MatrixXi& E);
Eigen::MatrixXi exp_to_dense(const ExpMatrix& E);
SparseMatrix sparse_from_dense(const Matrix& A);
ExpMatrix identity_exponents(Index n);

} // namespace czreach

#endif
