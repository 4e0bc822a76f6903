#pragma once

#include "minkper/shooting.hpp"

#include <limits>
#include <string>
#include <vector>

namespace minkper::cont {

// One accepted point along a solution branch; the state lives on the t = 0
// section.
struct BranchPoint {
    double lambda = 0.0;
    ode::Vec<2> x0{};
    double sup_norm = 0.0;
    double min_u = 0.0;
    solver::OrbitClass cls = solver::OrbitClass::Trivial;
    bool fold = false; // a fold was crossed between the previous point and this one
};

// Turning point of lambda along the branch, located by bisection on the arc.
struct FoldPoint {
    double lambda = 0.0;
    ode::Vec<2> x0{};
};

struct StepControl {
    double ds0 = 0.05;  // initial arclength step in the scaled metric
    double ds_min = 1e-6;
    double ds_max = 0.5;
    int max_steps = 2000;
    int corrector_max_iter = 12;
    double corrector_tol = 1e-10;
    int direction = -1; // initial lambda direction: -1 toward lambda_lo, +1 toward lambda_hi
    solver::SolverOptions solver; // integration and re-verification settings
};

struct Branch {
    std::vector<BranchPoint> points;
    std::vector<FoldPoint> folds;
    std::vector<double> step_history; // accepted steps, one per point after the first
    std::string stop_reason;          // "lambda_range" | "max_steps" | "corrector_divergence"
};

// Pseudo-arclength continuation of the fixed-point curve of the period map
// starting from a converged section state at lambda_start.  Components and
// the parameter are weighted by 1/max(1, |value|), refrozen at each accepted
// point, so a unit of arclength means a unit of relative motion.  Folds are
// detected as sign changes of the tangent's lambda component and refined by
// bisection along the arc to 1e-6 relative in lambda; every tenth accepted
// nontrivial point is re-solved from scratch and passed through the
// a-posteriori verification battery.  The trace stops when a corrected point
// leaves [lambda_lo, lambda_hi] (the final point is then re-solved exactly on
// the bound), when max_steps points have been accepted, or when the corrector
// keeps failing at the minimal step.  A start that cannot be converged at
// lambda_start throws CorrectorDivergence.
Branch trace_branch(const model::Weight& a, const model::Nonlinearity& g, ode::Vec<2> x0,
                    double lambda_start, double lambda_lo, double lambda_hi,
                    const StepControl& ctl = {});

// One parameter value of an asymptotic sweep.
struct AsymptoticPoint {
    double lambda = 0.0;
    double sup_norm = 0.0;
    double min_u = 0.0;
    double scaled_norm = 0.0;     // lambda^{1/p} * sup_norm, p the growth exponent of g at 0
    double curvature_ratio = 0.0; // max |u''| / |a| over profile samples with a(t) != 0
    double band_frac_m1 = 0.0;    // fraction of samples with u' within `band` of -1
    double band_frac_0 = 0.0;     //   ... of 0
    double band_frac_p1 = 0.0;    //   ... of +1
    double band_frac_other = 1.0;
    double w11_distance = std::numeric_limits<double>::quiet_NaN(); // to the previous profile
    int newton_iterations = 0; // 0 when the scalar symmetric path supplied the orbit
};

// Maximal run of profile samples sharing a slope band; hi may exceed the
// period when the run wraps around the seam.
struct ProfileSegment {
    double lo = 0.0;
    double hi = 0.0;
    int band = 0;        // -1, 0, +1
    double height = 0.0; // mean of u over the run
};

struct AsymptoticReport {
    std::vector<AsymptoticPoint> points;
    // Small family: running sup of lambda^{1/p} * sup_norm over the schedule
    // (the max of scaled_norm over points); NaN for the large family.
    double s_p = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> limit_t;  // sample times of the final profile
    std::vector<double> limit_u;  // u at those times
    std::vector<double> limit_up; // u' at those times
    std::vector<ProfileSegment> limit_segments;
    double limit_coverage = 0.0; // banded fraction of the final profile
};

struct AsymptoticOptions {
    double band = 0.05;       // half-width of the slope bands around -1, 0, +1
    int profile_samples = 4096;
    double min_segment = 0.0; // minimal reported segment length; 0 = period / 100
    solver::SolverOptions solver;
};

// Follows the small family along a strictly increasing schedule spanning at
// least three decades.  The first point comes from the multi-start search
// (smallest positive orbit); each later point is solved by Newton from the
// previous state contracted by (lambda_prev / lambda)^{1/p}, the scaling
// under which the small family approaches a lambda-independent limit.  The
// family is lost (BranchLost) when the solve fails, when the sup norm stops
// decreasing, or when the scaled norm jumps away from its running value.
AsymptoticReport asymptotic_small(const model::Weight& a, const model::Nonlinearity& g,
                                  const std::vector<double>& schedule,
                                  const AsymptoticOptions& opts = {});

// Follows the large family along a strictly increasing schedule.  On a
// reversible weight (one with reflection axes) each point is produced by the
// scalar symmetric search on the axis with the largest local weight average:
// the crossing height is bracketed (widely at the first point, around the
// previous height after), bisected to machine width, opportunistically
// polished by the two-dimensional section solve where conditioning permits,
// and the profile is built from the half-period flow reflected about the
// axis — the stiff second half is never integrated.  Without axes the sweep
// warm-starts the plain period-map Newton from the previous state.  The
// family is lost (BranchLost) when no crossing height exists or the closure
// defect at the half period cannot be driven down.
AsymptoticReport asymptotic_large(const model::Weight& a, const model::Nonlinearity& g,
                                  const std::vector<double>& schedule,
                                  const AsymptoticOptions& opts = {});

} // namespace minkper::cont
