#pragma once

#include "minkper/planar.hpp"
#include "minkper/problem.hpp"
#include "minkper/shooting.hpp"

#include <functional>
#include <vector>

namespace minkper::spectral {

// Periodic Sturm-Liouville problem (p(t) w')' + (mu + q(t)) w = 0 with
// T-periodic coefficients, p essentially bounded away from zero.
struct SturmLiouville {
    double T = 0.0;
    std::function<double(double)> p;
    std::function<double(double)> q;
    std::vector<double> breakpoints; // coefficient jumps in [0, T); forced mesh
};

// Angular/radial state of the clockwise polar flow (w, pw') = ell (cos th, -sin th).
struct PrueferResult {
    double theta = 0.0; // continuous lift, no wrapping
    double ell = 0.0;   // radial coordinate, > 0
};

struct EigenvalueResult {
    double mu0 = 0.0;
    double bracket_lo = 0.0, bracket_hi = 0.0; // bisection bracket around mu0
    double theta0_star = 0.0;                  // minimizing start angle
    std::vector<double> t;                     // sample times in [0, T]
    std::vector<double> w;                     // eigenfunction, sup |w| = 1
    std::vector<double> pw;                    // p w'
    double residual = 0.0;                     // relative equation residual
    double periodicity_error = 0.0;            // max boundary mismatch of (w, pw')
};

struct EigenPair {
    int k = 0;
    double lower = 0.0; // zero of the max-rotation condition
    double upper = 0.0; // zero of the min-rotation condition, lower <= upper
};

// Angular flow over n_periods periods: th' = sin^2(th)/p + (mu+q) cos^2(th),
// with the radial log co-integrated as (log ell)' = ((mu+q) - 1/p) sin th cos th.
PrueferResult pruefer_flow(const SturmLiouville& sl, double mu, double theta0, int n_periods,
                           const ode::OdeOptions& opts = {});

// f(mu) = min over theta0 in [0, 2pi) of theta(T; theta0) - theta0, via a
// 256-point grid plus golden-section refinement; strictly increasing in mu.
double rotation_gap(const SturmLiouville& sl, double mu, const ode::OdeOptions& opts = {},
                    double* theta0_min = nullptr);

// Principal eigenvalue as the unique zero of f: outward-doubling bracket from
// mu = 0, bisection until the bracket collapses (|f| far below 1e-10), the
// eigenfunction recovered from the minimizing start angle (unit return radius).
EigenvalueResult principal_eigenvalue(const SturmLiouville& sl, const ode::OdeOptions& opts = {});

// Rotation-counting eigenvalues: pair k has total rotation 2 k pi over one
// period, bracketed by the max (lower) and min (upper) of the rotation gap.
std::vector<EigenPair> higher_eigenvalues(const SturmLiouville& sl, int k_max,
                                          const ode::OdeOptions& opts = {});

// Continuous-lift rotation of the mu = 0 angular flow over k periods.
double rotation_over(const SturmLiouville& sl, int k, double theta0,
                     const ode::OdeOptions& opts = {});

// Linearization of the curvature equation around a positive periodic orbit:
// p(t) = phi'(u'(t)) = (1 + x2(t)^2)^(3/2) >= 1, q(t) = lambda a(t) g'(u(t)),
// both through the orbit's dense output; breakpoints inherited from the weight
// (replicated over the orbit's periods).
SturmLiouville linearize_around(const model::Problem& prob, const solver::PeriodicOrbit& orbit);

} // namespace minkper::spectral
