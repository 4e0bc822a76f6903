#include "doctest.h"

#include "minkper/continuation.hpp"
#include "minkper/shooting.hpp"
#include "oracle/collocation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace minkper;
using model::Nonlinearity;
using model::PiecewiseConstant;
using model::PowerLaw;
using model::Problem;
using model::TrigShifted;
using model::Weight;
using solver::OrbitClass;

namespace {

Weight smooth_weight() {
    return Weight(2.0 * M_PI, TrigShifted{1.0, M_PI / 4.0, -std::sqrt(2.0) / 2.0});
}

Nonlinearity cubic() { return Nonlinearity{PowerLaw{3.0}}; }

Weight plateau_weight() {
    return Weight(10.0, PiecewiseConstant{{0.0, 1.0, 2.0, 3.0}, {1.0, 0.0, 1.0, -2.0}});
}

Nonlinearity quadratic() { return Nonlinearity{PowerLaw{2.0}}; }

// Weighted distance between consecutive branch points in (x0, lambda) space,
// with the same relative metric the tracer uses (weights frozen at `from`).
double step_distance(const cont::BranchPoint& from, const cont::BranchPoint& to) {
    const double X[3] = {from.x0[0], from.x0[1], from.lambda};
    const double Y[3] = {to.x0[0], to.x0[1], to.lambda};
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
        double w = 1.0 / std::max(1.0, std::abs(X[i]));
        s += w * w * (Y[i] - X[i]) * (Y[i] - X[i]);
    }
    return std::sqrt(s);
}

double banded_fraction(const cont::AsymptoticPoint& p) {
    return p.band_frac_m1 + p.band_frac_0 + p.band_frac_p1;
}

} // namespace

TEST_CASE("trivial branch is a fold-free parameter line") {
    auto br = cont::trace_branch(smooth_weight(), cubic(), {0.0, 0.0}, 5.0, 1.0, 10.0);

    REQUIRE(br.points.size() >= 3);
    CHECK(br.stop_reason == "lambda_range");
    CHECK(br.folds.empty());
    CHECK(br.step_history.size() == br.points.size() - 1);

    CHECK(br.points.front().lambda == 5.0);
    CHECK(br.points.back().lambda == 1.0);
    for (size_t i = 0; i + 1 < br.points.size(); ++i)
        CHECK(br.points[i + 1].lambda < br.points[i].lambda);

    for (const auto& p : br.points) {
        CHECK(p.sup_norm == 0.0);
        CHECK(p.cls == OrbitClass::Trivial);
        CHECK_FALSE(p.fold);
        CHECK(std::abs(p.x0[0]) <= 1e-12);
        CHECK(std::abs(p.x0[1]) <= 1e-12);
    }

    cont::StepControl ctl;
    for (double ds : br.step_history) {
        CHECK(ds >= ctl.ds_min);
        CHECK(ds <= ctl.ds_max);
    }
}

TEST_CASE("branch through the fold joins the large and small families") {
    Weight a = smooth_weight();
    Nonlinearity g = cubic();
    solver::SolverOptions sopts;
    double rho = model::threshold_constants(a, g).rho_star;

    auto sols = solver::find_solutions(Problem(a, g, 2.0), 1, sopts);
    REQUIRE(sols.size() == 2);

    // Start from the larger orbit at lambda = 2, continue toward the fold,
    // come back up the lower family to lambda = 30.
    auto br = cont::trace_branch(a, g, sols[1].orbit.x0, 2.0, 0.5, 30.0);

    CHECK(br.stop_reason == "lambda_range");
    CHECK(br.step_history.size() == br.points.size() - 1);
    REQUIRE(br.points.size() >= 30);
    REQUIRE(br.folds.size() == 1);

    // Fold location, frozen; cross-checked against the outcome scan below.
    const auto& fold = br.folds[0];
    CHECK(fold.lambda == doctest::Approx(1.108515763).epsilon(1e-5));
    CHECK(fold.x0[0] == doctest::Approx(1.840292017).epsilon(5e-3));
    CHECK(fold.x0[1] == doctest::Approx(1.922604782).epsilon(5e-3));

    size_t flagged = 0;
    for (const auto& p : br.points) flagged += p.fold ? 1 : 0;
    CHECK(flagged == br.folds.size());

    // The trace ends exactly on the upper bound, on the small family.
    const auto& last = br.points.back();
    CHECK(last.lambda == 30.0);
    CHECK(last.sup_norm == doctest::Approx(0.3375223378).epsilon(1e-8));
    CHECK(last.cls == OrbitClass::Small);
    CHECK(last.sup_norm < rho);
    CHECK(last.sup_norm < br.points.front().sup_norm);

    // Lambda never leaves the requested range and dips just to the fold.
    double lam_min = 1e300;
    for (const auto& p : br.points) {
        CHECK(p.lambda >= 0.5);
        CHECK(p.lambda <= 30.0);
        lam_min = std::min(lam_min, p.lambda);
    }
    CHECK(lam_min >= fold.lambda - 1e-3);
    CHECK(lam_min <= fold.lambda + 0.05);

    // Classification is the sup-norm threshold test, and the branch switches
    // class exactly once along the arc.
    size_t flips = 0;
    for (size_t i = 0; i + 1 < br.points.size(); ++i)
        flips += (br.points[i].cls != br.points[i + 1].cls) ? 1 : 0;
    CHECK(flips == 1);
    for (const auto& p : br.points) {
        CHECK(p.cls == ((p.sup_norm < rho) ? OrbitClass::Small : OrbitClass::Large));
        CHECK(p.min_u > 0.0);
    }

    // Consecutive points stay within the arclength budget (relative metric).
    cont::StepControl ctl;
    for (size_t i = 0; i + 1 < br.points.size(); ++i)
        CHECK(step_distance(br.points[i], br.points[i + 1]) <= 2.0 * ctl.ds_max);

    // Independent bracket: the coarse outcome scan flips from no positive
    // orbits to two across the fold, and the refined fold lambda lies inside
    // the flip bracket.
    auto scan = solver::scan_lambda(a, g, 0.8, 1.3, 11, sopts);
    REQUIRE(std::isfinite(scan.onset));
    REQUIRE(std::isfinite(scan.largest_empty));
    CHECK(scan.largest_empty < fold.lambda);
    CHECK(fold.lambda < scan.onset);

    // Route independence: tracing the lower orbit upward from lambda = 2
    // reaches the same small-family endpoint.
    auto up = cont::trace_branch(a, g, sols[0].orbit.x0, 2.0, 1.0, 30.0,
                                 [] {
                                     cont::StepControl c;
                                     c.direction = +1;
                                     return c;
                                 }());
    CHECK(up.stop_reason == "lambda_range");
    CHECK(up.folds.empty());
    CHECK(up.points.back().lambda == 30.0);
    CHECK(up.points.back().sup_norm ==
          doctest::Approx(br.points.back().sup_norm).epsilon(1e-9));
    CHECK(std::abs(up.points.back().x0[0] - last.x0[0]) <= 1e-7);
    CHECK(std::abs(up.points.back().x0[1] - last.x0[1]) <= 1e-7);
}

TEST_CASE("small family sweep: decay, scaling band, and curvature bound") {
    Weight a = smooth_weight();
    Nonlinearity g = cubic();
    std::vector<double> schedule = {2.0, 10.0, 100.0, 1000.0, 10000.0};

    auto rep = cont::asymptotic_small(a, g, schedule);
    REQUIRE(rep.points.size() == schedule.size());

    // Frozen sup norms along the schedule.
    const double sup_frozen[5] = {1.41332943987, 0.589784686118, 0.184321297406,
                                  0.0582218159066, 0.0184092873205};
    // Frozen lambda^{1/3}-scaled norms; the band [c, C] below is the frozen
    // envelope of these values.
    const double scaled_frozen[5] = {1.78068351173, 1.27065258742, 0.855543675835,
                                     0.582218159066, 0.39661607222};
    const double band_lo = 0.35, band_hi = 1.90;

    for (size_t i = 0; i < rep.points.size(); ++i) {
        const auto& p = rep.points[i];
        CHECK(p.lambda == schedule[i]);
        CHECK(p.sup_norm == doctest::Approx(sup_frozen[i]).epsilon(1e-9));
        CHECK(p.scaled_norm == doctest::Approx(scaled_frozen[i]).epsilon(1e-9));
        CHECK(p.scaled_norm ==
              doctest::Approx(std::cbrt(p.lambda) * p.sup_norm).epsilon(1e-12));
        CHECK(p.scaled_norm > band_lo);
        CHECK(p.scaled_norm < band_hi);
        CHECK(p.min_u > 0.0);
        // Histogram fractions account for every sample.
        CHECK(p.band_frac_m1 + p.band_frac_0 + p.band_frac_p1 + p.band_frac_other ==
              doctest::Approx(1.0).epsilon(1e-12));
    }

    // Monotone decay, below 1e-1 at the top of the schedule.
    for (size_t i = 0; i + 1 < rep.points.size(); ++i)
        CHECK(rep.points[i + 1].sup_norm < rep.points[i].sup_norm);
    CHECK(rep.points.back().sup_norm < 0.1);

    // Running sup of the scaled norm: here the max sits at the first point.
    CHECK(rep.s_p == doctest::Approx(1.78068351173).epsilon(1e-9));
    double run = 0.0;
    for (const auto& p : rep.points) {
        run = std::max(run, p.scaled_norm);
        CHECK(run <= rep.s_p + 1e-15);
    }
    CHECK(run == doctest::Approx(rep.s_p).epsilon(1e-15));

    // max |u''| / |a| stays below a schedule-independent constant and relaxes
    // as the solution flattens.
    const double curvature_cap = 6.0;
    for (const auto& p : rep.points) {
        CHECK(p.curvature_ratio > 0.0);
        CHECK(p.curvature_ratio < curvature_cap);
    }
    CHECK(rep.points.front().curvature_ratio == doctest::Approx(5.64625).epsilon(1e-3));
    for (size_t i = 0; i + 1 < rep.points.size(); ++i)
        CHECK(rep.points[i + 1].curvature_ratio <= rep.points[i].curvature_ratio);

    // The profiles flatten: slopes collapse into the 0 band and successive
    // normalized distances shrink.
    CHECK(rep.points.back().band_frac_0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::isnan(rep.points.front().w11_distance));
    for (size_t i = 1; i < rep.points.size(); ++i) {
        CHECK(std::isfinite(rep.points[i].w11_distance));
        CHECK(rep.points[i].w11_distance > 0.0);
        if (i >= 2)
            CHECK(rep.points[i].w11_distance < rep.points[i - 1].w11_distance);
    }

    // Limit profile: a single near-constant positive segment covering the
    // whole period.
    REQUIRE(rep.limit_segments.size() == 1);
    CHECK(rep.limit_segments[0].band == 0);
    CHECK(rep.limit_segments[0].hi - rep.limit_segments[0].lo ==
          doctest::Approx(2.0 * M_PI).epsilon(1e-9));
    CHECK(rep.limit_segments[0].height == doctest::Approx(0.010188189).epsilon(1e-4));
    CHECK(rep.limit_coverage >= 0.999);
    REQUIRE(rep.limit_t.size() == rep.limit_u.size());
    REQUIRE(rep.limit_t.size() == rep.limit_up.size());

    // Independent discretization confirms the mid-schedule point: a spectral
    // deferred-correction collocation run at lambda = 100 reproduces the
    // profile the sweep reports.
    auto sols = solver::find_solutions(Problem(a, g, 100.0), 1, solver::SolverOptions{});
    REQUIRE(!sols.empty());
    const auto& small_orbit = sols.front().orbit;
    CHECK(small_orbit.sup_norm == doctest::Approx(rep.points[2].sup_norm).epsilon(1e-10));

    oracle::CollocationConfig cfg;
    cfg.span = 2.0 * M_PI;
    cfg.n = 1024;
    cfg.lambda = 100.0;
    cfg.weight_integral = [&](double lo, double hi) { return a.integrate(lo, hi); };
    cfg.g = [](double u) { return u * u * u; };
    cfg.dg = [](double u) { return 3.0 * u * u; };
    cfg.initial.resize(cfg.n);
    for (int i = 0; i < cfg.n; ++i)
        cfg.initial[i] = small_orbit.u((i + 0.5) * cfg.span / cfg.n);
    auto ex = oracle::solve_collocation_richardson(cfg);

    double dmax = 0.0, colmax = 0.0;
    for (int i = 0; i < ex.fine.n; ++i) {
        double t = ex.fine.nodes[i];
        double v = ex.eval(t);
        colmax = std::max(colmax, std::abs(v));
        dmax = std::max(dmax, std::abs(v - small_orbit.u(t)));
    }
    CHECK(dmax < 1e-6);
    CHECK(colmax == doctest::Approx(rep.points[2].sup_norm).epsilon(1e-6));
}

TEST_CASE("large family sweep on the smooth weight approaches a two-band limit") {
    Weight a = smooth_weight();
    Nonlinearity g = cubic();
    std::vector<double> schedule = {1.2, 1.5, 2.0, 3.0, 5.0,
                                    10.0, 25.0, 50.0, 100.0, 1000.0, 100000.0};

    auto rep = cont::asymptotic_large(a, g, schedule);
    REQUIRE(rep.points.size() == schedule.size());

    CHECK(rep.points.front().sup_norm == doctest::Approx(2.68961312277).epsilon(1e-8));
    CHECK(rep.points.back().sup_norm == doctest::Approx(3.25010545008).epsilon(1e-8));
    CHECK(std::isnan(rep.s_p));

    for (const auto& p : rep.points) {
        CHECK(p.min_u > 0.0);
        CHECK(p.band_frac_m1 + p.band_frac_0 + p.band_frac_p1 + p.band_frac_other ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    for (size_t i = 0; i + 1 < rep.points.size(); ++i)
        CHECK(rep.points[i + 1].sup_norm > rep.points[i].sup_norm);

    // Banded fraction grows monotonically along the schedule and ends above
    // the frozen 0.95 mark (measured 0.9966 at the top).
    for (size_t i = 0; i + 1 < rep.points.size(); ++i)
        CHECK(banded_fraction(rep.points[i + 1]) >= banded_fraction(rep.points[i]) - 1e-12);
    CHECK(banded_fraction(rep.points.back()) >= 0.95);
    CHECK(banded_fraction(rep.points.back()) == doctest::Approx(0.9966).epsilon(1e-2));
    CHECK(rep.limit_coverage >= 0.95);

    // Successive normalized W11 distances settle: the final gap is smaller
    // than the one before it even though the lambda ratio grows tenfold.
    CHECK(std::isnan(rep.points.front().w11_distance));
    for (size_t i = 1; i < rep.points.size(); ++i)
        CHECK(std::isfinite(rep.points[i].w11_distance));
    size_t n = rep.points.size();
    CHECK(rep.points[n - 1].w11_distance < rep.points[n - 2].w11_distance);

    // Limit profile: one falling and one rising span of equal height, and no
    // flat segment anywhere (the weight never vanishes on an interval).
    REQUIRE(rep.limit_segments.size() == 2);
    CHECK(rep.limit_segments[0].band == -1);
    CHECK(rep.limit_segments[1].band == +1);
    for (const auto& seg : rep.limit_segments)
        CHECK(seg.band != 0);
    CHECK(rep.limit_segments[0].height ==
          doctest::Approx(rep.limit_segments[1].height).epsilon(1e-6));
    CHECK(rep.limit_segments[0].height == doctest::Approx(1.684680486).epsilon(1e-6));
    double w0 = rep.limit_segments[0].hi - rep.limit_segments[0].lo;
    double w1 = rep.limit_segments[1].hi - rep.limit_segments[1].lo;
    CHECK(std::abs(w0 - w1) < 0.05);
    CHECK(w0 == doctest::Approx(M_PI).epsilon(2e-2));
}

TEST_CASE("large family sweep on the piecewise weight develops the plateau") {
    Weight a = plateau_weight();
    Nonlinearity g = quadratic();
    std::vector<double> schedule = {5.0, 20.0, 100.0, 1000.0, 10000.0};

    auto rep = cont::asymptotic_large(a, g, schedule);
    REQUIRE(rep.points.size() == schedule.size());

    CHECK(rep.points.front().sup_norm == doctest::Approx(3.19705333674).epsilon(1e-8));
    CHECK(rep.points.back().sup_norm == doctest::Approx(3.26113603139).epsilon(1e-8));
    for (size_t i = 0; i + 1 < rep.points.size(); ++i)
        CHECK(rep.points[i + 1].sup_norm > rep.points[i].sup_norm);
    for (const auto& p : rep.points) CHECK(p.min_u > 0.0);
    CHECK(rep.points.back().min_u < 1e-3); // the valley floor sinks toward zero

    // W11 distances are fully monotone on this schedule.
    for (size_t i = 2; i < rep.points.size(); ++i)
        CHECK(rep.points[i].w11_distance < rep.points[i - 1].w11_distance);

    CHECK(rep.limit_coverage >= 0.95);

    // Four bands around the circle: plateau, fall, valley, rise.
    REQUIRE(rep.limit_segments.size() == 4);
    const auto& plat = rep.limit_segments[0];
    const auto& fall = rep.limit_segments[1];
    const auto& valley = rep.limit_segments[2];
    const auto& rise = rep.limit_segments[3];
    double sup = rep.points.back().sup_norm;

    // Exactly one flat segment at positive height; it is the plateau.
    size_t positive_flats = 0;
    for (const auto& seg : rep.limit_segments)
        if (seg.band == 0 && seg.height > 0.05 * sup) ++positive_flats;
    CHECK(positive_flats == 1);

    CHECK(plat.band == 0);
    CHECK(plat.height == doctest::Approx(sup).epsilon(1e-6));
    // The plateau covers the interior interval where the weight vanishes.
    double overlap = std::min(plat.hi, 2.0) - std::max(plat.lo, 1.0);
    CHECK(overlap >= 0.8);

    CHECK(fall.band == -1);
    CHECK(rise.band == +1);
    CHECK(fall.height == doctest::Approx(1.663739735).epsilon(1e-5));
    CHECK(rise.height == doctest::Approx(1.664227869).epsilon(1e-5));

    CHECK(valley.band == 0);
    CHECK(valley.height < 0.01 * sup);
}

TEST_CASE("continuation rejects ill-posed requests") {
    Weight a = smooth_weight();
    Nonlinearity g = cubic();

    CHECK_THROWS_AS(cont::trace_branch(a, g, {0.0, 0.0}, 5.0, 0.0, 10.0), ValidationError);
    CHECK_THROWS_AS(cont::trace_branch(a, g, {0.0, 0.0}, 5.0, 10.0, 1.0), ValidationError);
    CHECK_THROWS_AS(cont::trace_branch(a, g, {0.0, 0.0}, 0.5, 1.0, 10.0), ValidationError);

    cont::StepControl bad_dir;
    bad_dir.direction = 0;
    CHECK_THROWS_AS(cont::trace_branch(a, g, {0.0, 0.0}, 5.0, 1.0, 10.0, bad_dir),
                    ValidationError);
    cont::StepControl bad_ds;
    bad_ds.ds0 = -0.1;
    CHECK_THROWS_AS(cont::trace_branch(a, g, {0.0, 0.0}, 5.0, 1.0, 10.0, bad_ds),
                    ValidationError);

    CHECK_THROWS_AS(cont::asymptotic_small(a, g, {}), ValidationError);
    CHECK_THROWS_AS(cont::asymptotic_small(a, g, {2.0, 10.0, 100.0}), ValidationError);
    CHECK_THROWS_AS(cont::asymptotic_small(a, g, {10.0, 2.0, 100000.0}), ValidationError);
    CHECK_THROWS_AS(cont::asymptotic_small(a, g, {-2.0, 10.0, 100000.0}), ValidationError);
    CHECK_THROWS_AS(cont::asymptotic_large(a, g, {}), ValidationError);
    CHECK_THROWS_AS(cont::asymptotic_large(a, g, {5.0, 5.0}), ValidationError);
}

TEST_CASE("lost branches and diverging correctors report the parameter") {
    Weight a = smooth_weight();
    Nonlinearity g = cubic();

    // Below the fold there is no positive orbit to start from.
    try {
        cont::asymptotic_large(a, g, {0.5, 5.0});
        FAIL("expected BranchLost");
    } catch (const BranchLost& e) {
        CHECK(e.lambda == 0.5);
    }
    try {
        cont::asymptotic_small(a, g, {0.5, 5.0, 50.0, 500.0, 5000.0});
        FAIL("expected BranchLost");
    } catch (const BranchLost& e) {
        CHECK(e.lambda == 0.5);
    }

    // A start state far from any orbit cannot be converged.
    try {
        cont::trace_branch(a, g, {5.0, 40.0}, 2.0, 1.0, 10.0);
        FAIL("expected CorrectorDivergence");
    } catch (const CorrectorDivergence& e) {
        CHECK(e.lambda == 2.0);
    }
}
