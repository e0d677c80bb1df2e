#include "czreach/scenarios.hpp"

namespace czreach
{

CPZ box_noise(Index n, double radius)
{
    if (radius == 0.0)
    {
        return CPZ(Vector::Zero(n));
    }
    return lift(Zonotope{Vector::Zero(n), radius * Matrix::Identity(n, n)});
}

LtiScenario lti_scenario()
{
    LtiScenario s;
    s.Phi.resize(5, 5);
    s.Phi << 0.9323, -0.1890, 0, 0, 0,
             0.1890, 0.9323, 0, 0, 0,
             0, 0, 0.8596, 0.0430, 0,
             0, 0, -0.0430, 0.8596, 0,
             0, 0, 0, 0, 0.9048;
    s.Gamma.resize(5, 1);
    s.Gamma << 0.0436, 0.0533, 0.0475, 0.0453, 0.0476;

    Eigen::MatrixXi E0(5, 5);
    E0 << 2, 1, 0, 0, 0,
          1, 2, 0, 0, 0,
          0, 0, 2, 1, 0,
          0, 0, 1, 2, 1,
          0, 0, 0, 1, 2;
    s.initial_nonconvex =
        CPZ::polynomial(Vector::Ones(5), 0.1 * Matrix::Identity(5, 5), E0, fresh_ids(5));
    s.initial_convex = lift(Zonotope{Vector::Ones(5), 0.1 * Matrix::Identity(5, 5)});
    s.input = lift(Zonotope{Vector::Constant(1, 10.0), Matrix::Constant(1, 1, 0.25)});
    s.noise = box_noise(5, 0.005);
    return s;
}

PolyScenario poly_scenario(double noise_radius)
{
    PolyScenario s;
    s.Theta.resize(2, 5);
    s.Theta << 0.7, 1.0, 0.32, 0.0, 0.0,
               0.09, 0.0, 0.0, 0.4, 0.32;
    s.basis = monomial_basis_custom({{1, 0, 0, 0},
                                     {0, 0, 1, 0},
                                     {2, 0, 0, 0},
                                     {0, 2, 0, 0},
                                     {1, 0, 0, 1}});

    Vector c0(2);
    c0 << 1.0, 1.6;
    s.initial_convex = lift(Zonotope{c0, 2.0 * Vector(Eigen::Vector2d(0.05, 0.1)).asDiagonal()});

    Vector c1(2);
    c1 << 1.0, 2.2;
    Eigen::MatrixXi E(2, 2);
    E << 2, 1,
         1, 2;
    s.initial_nonconvex = CPZ::polynomial(c1, 0.1 * Matrix::Identity(2, 2), E, fresh_ids(2));

    Vector cu(2);
    cu << 0.2, 0.3;
    s.input = lift(Zonotope{cu, Vector(Eigen::Vector2d(0.01, 0.02)).asDiagonal()});
    s.noise = box_noise(2, noise_radius);
    return s;
}

} // namespace czreach
