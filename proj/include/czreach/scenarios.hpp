#ifndef CZREACH_SCENARIOS_HPP
#define CZREACH_SCENARIOS_HPP

#include "czreach/learning.hpp"
#include "czreach/sets.hpp"

namespace czreach
{

// Five-dimensional discrete-time LTI benchmark (sampling time 0.05 s).
struct LtiScenario
{
    Matrix Phi;
    Matrix Gamma;
    CPZ initial_nonconvex;
    CPZ initial_convex;
    CPZ input;
    CPZ noise;
};

LtiScenario lti_scenario();

// Two-dimensional polynomial benchmark
//   x1+ = 0.7 x1 + u1 + 0.32 x1^2
//   x2+ = 0.09 x1 + 0.32 u2 x1 + 0.4 x2^2
// over z = [x1, x2, u1, u2] with basis {x1, u1, x1^2, x2^2, u2 x1}.
struct PolyScenario
{
    Matrix Theta;
    MonomialBasis basis;
    CPZ initial_convex;
    CPZ initial_nonconvex;
    CPZ input;
    CPZ noise;
};

PolyScenario poly_scenario(double noise_radius);

// Box noise set {w : |w_i| <= radius}; the singleton {0} when radius is 0.
CPZ box_noise(Index n, double radius);

} // namespace czreach

#endif
