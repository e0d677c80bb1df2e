#ifndef CZREACH_TYPES_HPP
#define CZREACH_TYPES_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace czreach
{

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Exponent matrices (E, R) are sparse: most factors do not appear in most
// monomials once sets from many sources are merged.
using ExpMatrix = Eigen::SparseMatrix<int>;
using Index = Eigen::Index;

// Base class for every error raised by the library.
class Error : public std::runtime_error
{
    public:
        using std::runtime_error::runtime_error;
};

#define CZREACH_DEFINE_ERROR(Name)                                   \
    class Name : public Error                                        \
    {                                                                \
        public:                                                      \
            explicit Name(const std::string& what) : Error(what) {}  \
    };

CZREACH_DEFINE_ERROR(ShapeMismatch)
CZREACH_DEFINE_ERROR(NegativeExponent)
CZREACH_DEFINE_ERROR(DuplicateId)
CZREACH_DEFINE_ERROR(MissingFactor)
CZREACH_DEFINE_ERROR(NotDivisible)
CZREACH_DEFINE_ERROR(IndexOutOfRange)
CZREACH_DEFINE_ERROR(RankDeficient)
CZREACH_DEFINE_ERROR(TooShort)
CZREACH_DEFINE_ERROR(DuplicateMonomial)
CZREACH_DEFINE_ERROR(BudgetExceeded)
CZREACH_DEFINE_ERROR(ParseError)

#undef CZREACH_DEFINE_ERROR

// Carries the JSON path of the offending field.
class ValidationError : public Error
{
    public:
        ValidationError(std::string field, const std::string& what)
            : Error(field + ": " + what), field_(std::move(field)) {}

        const std::string& field() const { return field_; }

    private:
        std::string field_;
};

// Absolute feasibility tolerance on the constraint residual norm.
inline constexpr double kFeasibilityTol = 1e-9;

} // namespace czreach

#endif
