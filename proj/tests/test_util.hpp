#ifndef CZREACH_TEST_UTIL_HPP
#define CZREACH_TEST_UTIL_HPP

#include "czreach/sets.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <utility>

namespace czreach::test
{

// Three-dimensional CPZ with two polynomial constraints over factors {1, 2}.
inline CPZ constrained_p1()
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

// Companion of constrained_p1 over factors {1, 3}.
inline CPZ constrained_p2()
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

// 1-D zonotope <center, radius> over the given factor.
inline CPZ interval_set(double center, double radius, FactorId id)
{
    return CPZ::polynomial(Vector::Constant(1, center), Matrix::Constant(1, 1, radius),
                           Eigen::MatrixXi::Ones(1, 1), {id});
}

inline Vector vec1(double v) { return Vector::Constant(1, v); }

struct Range
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
};

// Range of a scalar function over a dense grid of [-1, 1]^p (p <= 2).
inline Range grid_range(int p, const std::function<double(const Vector&)>& f, int n = 201)
{
    Range r;
    Vector a(p);
    const int total = p == 1 ? n : n * n;
    for (int t = 0; t < total; ++t)
    {
        a(0) = -1.0 + 2.0 * (t % n) / (n - 1);
        if (p == 2)
        {
            a(1) = -1.0 + 2.0 * (t / n) / (n - 1);
        }
        const double v = f(a);
        r.lo = std::min(r.lo, v);
        r.hi = std::max(r.hi, v);
    }
    return r;
}

inline FactorAssignment assign(const std::vector<FactorId>& ids, const Vector& values)
{
    FactorAssignment s;
    for (std::size_t k = 0; k < ids.size(); ++k)
    {
        s.set(ids[k], values(static_cast<Index>(k)));
    }
    return s;
}

} // namespace czreach::test

#endif
