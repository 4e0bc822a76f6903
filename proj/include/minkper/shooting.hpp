#pragma once

#include "minkper/planar.hpp"
#include "minkper/problem.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace minkper::solver {

enum class OrbitClass { Trivial, Small, Large };

const char* to_string(OrbitClass c);

struct SolverOptions {
    ode::OdeOptions ode;
    double newton_tol = 1e-10;
    int max_newton_iter = 30;
    double fd_step = 1e-7;          // relative step for finite-difference Jacobians
    double dedup_distance = 1e-6;   // orbits closer than this in sup norm are duplicates
    double r_min = 0.0;             // small-seed amplitude floor (0 = automatic)
    double r_max = 0.0;             // large-seed amplitude ceiling (0 = 0.6 * period)
    int small_seeds = 12;
    int large_seeds = 8;            // per positivity interval
    double cond_limit = 1e12;       // Newton matrix condition cutoff
    double divergence_radius = 1e3; // abort a seed whose iterates leave this box
    int threads = 1;
};

struct PeriodicOrbit {
    int k = 1;
    double period = 0.0; // k * T
    ode::Vec<2> x0{};
    ode::Trajectory<2> traj; // over [0, k*T]
    double sup_norm = 0.0;
    double min_u = 0.0;
    double max_abs_up = 0.0;
    OrbitClass cls = OrbitClass::Trivial;
    bool near_threshold = false; // sup norm within 5% of the classification radius
    double residual = 0.0;       // |Phi^k(x0) - x0|_inf on the stored trajectory

    double u(double t) const;  // dense, t folded into [0, period]
    double up(double t) const; // u' = phi_inv(x2)
    double x2(double t) const;
};

struct ShootResult {
    PeriodicOrbit orbit;
    int iterations = 0;
    double jac_det = std::numeric_limits<double>::quiet_NaN();  // det of the monodromy
    double jac_cond = std::numeric_limits<double>::quiet_NaN(); // cond of (monodromy - I)
    bool used_fd = false;
};

// Poincare-style return map over k periods with optional fundamental matrix.
ode::Vec<2> return_map(const model::Problem& prob, ode::Vec<2> x0, int k,
                       const ode::OdeOptions& opts);

// Damped Newton on the fixed-point equation of the k-period return map.
ShootResult newton_shoot(const model::Problem& prob, ode::Vec<2> guess, int k,
                         const SolverOptions& opts);

// The same fixed-point iteration anchored at the section time t0; the
// returned state lives at t0 and nothing is transported to t = 0.  The anchor
// matters on stiff orbits: where the orbit is tame the iteration stays
// conditioned even when the t = 0 return map is not.
struct SectionFixedPoint {
    ode::Vec<2> x{};
    int iterations = 0;
};
SectionFixedPoint solve_at_section(const model::Problem& prob, ode::Vec<2> guess, double t0,
                                   int k, const SolverOptions& opts);

// Axes t = tau about which the weight is even (empty when it has none).  The
// system is then reversible, and reflection-symmetric orbits cross every axis
// with u' = 0.
std::vector<double> reflection_axes(const model::Weight& a);

// Heights h in [h_lo, h_hi] (grid-bracketed, then bisected) from which the
// state (h, 0) launched at the axis arrives horizontally half a span (k*T/2)
// later: symmetric periodic-orbit candidates, to be polished by
// solve_at_section.
std::vector<double> symmetric_crossing_heights(const model::Problem& prob, double axis, int k,
                                               double h_lo, double h_hi, int grid,
                                               const SolverOptions& opts);

// Builds the orbit record (trajectory, norms, classification) from a converged
// initial state.
PeriodicOrbit make_orbit(const model::Problem& prob, ode::Vec<2> x0, int k,
                         const SolverOptions& opts, double rho_star);

struct VerificationCheck {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct VerificationRecord {
    std::vector<VerificationCheck> checks;
    bool all_pass = true;
};

// Independent a-posteriori checks on an orbit: the weighted balance
// integral(a g(u)) = 0, the curvature-weighted identity for -integral(a), strict
// positivity, |u'| < 1, small return residual, the pointwise second-derivative
// equation, unit monodromy determinant, and the localized amplitude bound on
// each positivity interval where its hypotheses apply.
VerificationRecord verify_orbit(const model::Problem& prob, const PeriodicOrbit& orbit,
                                const ShootResult* shoot = nullptr);

// Multi-start search for all distinct nontrivial positive k*T-periodic
// orbits: constant-state seeds below the classification radius, a raw state
// lattice above it, section solves anchored at positivity midpoints, a scalar
// symmetric search on every reflection axis, canonical dedup, sorted by sup
// norm.
std::vector<ShootResult> find_solutions(const model::Problem& prob, int k,
                                        const SolverOptions& opts);

struct ScanPoint {
    double lambda = 0.0;
    int count = 0;
    double small_sup = std::numeric_limits<double>::quiet_NaN();
    double large_sup = std::numeric_limits<double>::quiet_NaN();
};

struct ScanResult {
    std::vector<ScanPoint> points;
    double onset = std::numeric_limits<double>::quiet_NaN();         // first lambda with >= 2 orbits
    double largest_empty = std::numeric_limits<double>::quiet_NaN(); // last empty lambda below it
};

ScanResult scan_lambda(const model::Weight& a, const model::Nonlinearity& g, double lambda_lo,
                       double lambda_hi, int n, const SolverOptions& opts);

// Composite quadrature over [0, k*T] split at weight jumps (panels never
// straddle a discontinuity); used by the verification identities.
double periodic_quadrature(const model::Problem& prob, int k,
                           const std::function<double(double)>& f, int panels_per_period = 4096);

} // namespace minkper::solver
