#include "minkper/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>

namespace minkper::solver {

using model::phi;
using model::phi_inv;
using model::Problem;
using ode::Mat2;
using ode::Vec;

const char* to_string(OrbitClass c) {
    switch (c) {
        case OrbitClass::Trivial: return "trivial";
        case OrbitClass::Small: return "small";
        default: return "large";
    }
}

double PeriodicOrbit::u(double t) const {
    double r = std::fmod(t, period);
    if (r < 0.0) r += period;
    return traj.state(r)[0];
}

double PeriodicOrbit::up(double t) const { return phi_inv(x2(t)); }

double PeriodicOrbit::x2(double t) const {
    double r = std::fmod(t, period);
    if (r < 0.0) r += period;
    return traj.state(r)[1];
}

ode::Vec<2> return_map(const Problem& prob, Vec<2> x0, int k, const ode::OdeOptions& opts) {
    return ode::flow(prob, x0, 0.0, k * prob.T(), opts).end_state;
}

namespace {

double norm_inf(const Vec<2>& v) { return std::max(std::abs(v[0]), std::abs(v[1])); }

Mat2 fd_monodromy(const Problem& prob, const Vec<2>& x, double t0, int k,
                  const SolverOptions& opts) {
    double span = k * prob.T();
    double h = opts.fd_step * std::max(1.0, norm_inf(x));
    Mat2 M;
    for (int col = 0; col < 2; ++col) {
        Vec<2> xp = x, xm = x;
        xp[col] += h;
        xm[col] -= h;
        Vec<2> fp = ode::flow(prob, xp, t0, t0 + span, opts.ode).end_state;
        Vec<2> fm = ode::flow(prob, xm, t0, t0 + span, opts.ode).end_state;
        double d0 = (fp[0] - fm[0]) / (2.0 * h);
        double d1 = (fp[1] - fm[1]) / (2.0 * h);
        if (col == 0) {
            M.a = d0;
            M.c = d1;
        } else {
            M.b = d0;
            M.d = d1;
        }
    }
    return M;
}

double rho_star_of(const Problem& prob) {
    return model::threshold_constants(prob.weight(), prob.nonlinearity()).rho_star;
}

struct SectionSolve {
    Vec<2> x{};
    int iterations = 0;
};

// Damped Newton on the fixed-point equation of the k-period return map
// anchored at the section time t0.  The residual always comes from the plain
// planar flow: the stored orbit is integrated the same way, so convergence
// here is convergence of the reported residual (the co-integrated variational
// system steps differently at the 1e-7 level on stiff orbits).
SectionSolve solve_section(const Problem& prob, Vec<2> guess, double t0, int k,
                           const SolverOptions& opts) {
    double span = k * prob.T();
    Vec<2> x = guess;

    auto residual_at = [&](const Vec<2>& p, Vec<2>& r) {
        Vec<2> e = ode::flow(prob, p, t0, t0 + span, opts.ode).end_state;
        r = {e[0] - p[0], e[1] - p[1]};
        return norm_inf(r);
    };

    Vec<2> r;
    double rn = residual_at(x, r);
    double best = rn;
    int stagnant = 0;

    for (int iter = 0; iter < opts.max_newton_iter; ++iter) {
        if (norm_inf(x) > opts.divergence_radius)
            throw NoConvergence(best, "newton_shoot: iterates diverged");
        if (rn <= opts.newton_tol) return {x, iter};

        auto fj = ode::flow_with_jacobian(prob, x, t0, t0 + span, opts.ode);
        Mat2 M = fj.jac;
        if (fj.crossed_zero) M = fd_monodromy(prob, x, t0, k, opts);
        Mat2 J{M.a - 1.0, M.b, M.c, M.d - 1.0};
        double cond = J.cond2();
        if (!(cond < opts.cond_limit))
            throw SingularJacobian(cond, "newton_shoot: return-map Jacobian is singular");
        Vec<2> dx = J.solve({-r[0], -r[1]});

        double alpha = 1.0;
        bool improved = false;
        for (int trial = 0; trial < 7; ++trial, alpha *= 0.5) {
            Vec<2> xt = {x[0] + alpha * dx[0], x[1] + alpha * dx[1]};
            if (norm_inf(xt) > opts.divergence_radius) continue;
            Vec<2> rt;
            double rtn = residual_at(xt, rt);
            if (rtn < rn) {
                x = xt;
                r = rt;
                rn = rtn;
                improved = true;
                break;
            }
        }
        if (!improved) {
            // A short damped probe instead of the full step: full steps fling
            // the iterate across the section and shrink every basin.
            if (++stagnant >= 3) throw NoConvergence(best, "newton_shoot: stalled");
            x = {x[0] + dx[0] / 64.0, x[1] + dx[1] / 64.0};
            rn = residual_at(x, r);
        } else {
            stagnant = 0;
        }
        best = std::min(best, rn);
    }
    if (rn <= opts.newton_tol) return {x, opts.max_newton_iter};
    throw NoConvergence(best, "newton_shoot: iteration limit reached");
}

} // namespace

PeriodicOrbit make_orbit(const Problem& prob, Vec<2> x0, int k, const SolverOptions& opts,
                         double rho_star) {
    PeriodicOrbit orb;
    orb.k = k;
    orb.period = k * prob.T();
    orb.x0 = x0;
    orb.traj = ode::flow(prob, x0, 0.0, orb.period, opts.ode);
    Vec<2> r = {orb.traj.end_state[0] - x0[0], orb.traj.end_state[1] - x0[1]};
    orb.residual = norm_inf(r);

    // Dense scan for the extrema; a parabolic refinement sharpens the sup.
    int n = 2048 * k;
    double umax = -1e300, umin = 1e300, upmax = 0.0;
    int imax = 0;
    for (int i = 0; i <= n; ++i) {
        double t = orb.period * i / n;
        Vec<2> s = orb.traj.state(t);
        if (s[0] > umax) {
            umax = s[0];
            imax = i;
        }
        umin = std::min(umin, s[0]);
        upmax = std::max(upmax, std::abs(phi_inv(s[1])));
    }
    if (imax > 0 && imax < n) {
        double h = orb.period / n;
        double tm = orb.period * imax / n;
        double ym = umax;
        double yl = orb.traj.state(tm - h)[0], yr = orb.traj.state(tm + h)[0];
        double denom = yl - 2.0 * ym + yr;
        if (denom < 0.0) {
            double dt = 0.5 * h * (yl - yr) / denom;
            if (std::abs(dt) <= h) umax = std::max(umax, orb.traj.state(tm + dt)[0]);
        }
    }
    orb.sup_norm = umax;
    orb.min_u = umin;
    orb.max_abs_up = upmax;
    if (umax < 1e-8) {
        orb.cls = OrbitClass::Trivial;
    } else if (umax < rho_star) {
        orb.cls = OrbitClass::Small;
    } else {
        orb.cls = OrbitClass::Large;
    }
    orb.near_threshold = std::abs(umax - rho_star) <= 0.05 * rho_star;
    return orb;
}

ShootResult newton_shoot(const Problem& prob, Vec<2> guess, int k, const SolverOptions& opts) {
    if (k < 1) throw ValidationError("newton_shoot: k must be >= 1");
    double span = k * prob.T();
    SectionSolve s = solve_section(prob, guess, 0.0, k, opts);

    auto fj = ode::flow_with_jacobian(prob, s.x, 0.0, span, opts.ode);
    ShootResult out;
    out.iterations = s.iterations;
    out.orbit = make_orbit(prob, s.x, k, opts, rho_star_of(prob));
    out.used_fd = fj.crossed_zero;
    if (!fj.crossed_zero) {
        out.jac_det = fj.jac.det();
        Mat2 J{fj.jac.a - 1.0, fj.jac.b, fj.jac.c, fj.jac.d - 1.0};
        out.jac_cond = J.cond2();
    }
    return out;
}

double periodic_quadrature(const Problem& prob, int k, const std::function<double(double)>& f,
                           int panels_per_period) {
    double T = prob.T();
    std::vector<double> cuts{0.0};
    for (int period = 0; period < k; ++period)
        for (double b : prob.weight().breakpoints()) {
            double t = period * T + b;
            if (t > 1e-12 && t < k * T - 1e-12) cuts.push_back(t);
        }
    cuts.push_back(k * T);
    std::sort(cuts.begin(), cuts.end());
    double target = T / panels_per_period;
    double acc = 0.0;
    // Gauss-Legendre 3-point panels: every node is interior, so a jump of the
    // integrand at a panel edge is never sampled from the wrong side.
    constexpr double gx = 0.7745966692414834; // sqrt(3/5)
    constexpr double w0 = 5.0 / 18.0, w1 = 8.0 / 18.0;
    for (size_t s = 0; s + 1 < cuts.size(); ++s) {
        double lo = cuts[s], hi = cuts[s + 1];
        if (hi - lo < 1e-14) continue;
        int n = std::max(1, (int)std::ceil((hi - lo) / target));
        double h = (hi - lo) / n;
        for (int i = 0; i < n; ++i) {
            double mid = lo + (i + 0.5) * h;
            acc += h * (w0 * f(mid - 0.5 * h * gx) + w1 * f(mid) + w0 * f(mid + 0.5 * h * gx));
        }
    }
    return acc;
}

VerificationRecord verify_orbit(const Problem& prob, const PeriodicOrbit& orbit,
                                const ShootResult* shoot) {
    VerificationRecord rec;
    auto push = [&](const std::string& name, double value, double bound, bool pass) {
        rec.checks.push_back({name, value, bound, pass});
        rec.all_pass = rec.all_pass && pass;
    };
    const auto& g = prob.nonlinearity();
    int k = orbit.k;

    // (1) integral of a(t) g(u(t)) over the orbit vanishes
    double wb = periodic_quadrature(
        prob, k, [&](double t) { return prob.weight()(t) * g.g(std::max(0.0, orbit.u(t))); });
    double wb_scale = periodic_quadrature(prob, k, [&](double t) {
        return std::abs(prob.weight()(t)) * g.g(std::max(0.0, orbit.u(t)));
    });
    push("weighted_balance", std::abs(wb), 1e-6 * std::max(wb_scale, 1e-12),
         std::abs(wb) <= 1e-6 * std::max(wb_scale, 1e-12));

    // (2) dividing the equation by g and integrating by parts:
    // integral phi(u') u' g'(u) / g(u)^2 = -lambda integral a
    double lhs = -prob.weight().integrate(0.0, k * prob.T()) * prob.lambda();
    double rhs = periodic_quadrature(prob, k, [&](double t) {
        double u = orbit.u(t);
        if (u <= 0.0) return 0.0;
        double upv = orbit.up(t);
        double gv = g.g(u);
        return upv * upv / (gv * gv) * g.dg(u) / std::sqrt(1.0 - upv * upv);
    });
    double scale2 = std::max({std::abs(lhs), std::abs(rhs), 1e-12});
    push("curvature_identity", std::abs(lhs - rhs), 1e-6 * scale2,
         std::abs(lhs - rhs) <= 1e-6 * scale2);

    // (3) strict positivity and (4) gradient bound
    push("positivity", orbit.min_u, 0.0, orbit.min_u > 0.0);
    push("gradient_bound", orbit.max_abs_up, 1.0, orbit.max_abs_up < 1.0);

    // (5) return residual
    push("return_residual", orbit.residual, 1e-8, orbit.residual <= 1e-8);

    // (6) pointwise second-derivative equation via dense-output differentiation
    double scale6 = 1.0;
    double res6 = ode::second_derivative_residual(prob, orbit.traj, &scale6);
    push("curvature_equation", res6, 1e-6 * scale6, res6 <= 1e-6 * scale6);

    // (7) unit determinant of the monodromy (area preservation)
    if (shoot && std::isfinite(shoot->jac_det))
        push("monodromy_det", std::abs(shoot->jac_det - 1.0), 1e-6,
             std::abs(shoot->jac_det - 1.0) <= 1e-6);

    // (8) localized amplitude bound on each positivity interval whose max is
    // at or below the classification radius
    if (prob.weight().analysis().sign_condition && orbit.min_u > 0.0) {
        auto th = model::threshold_constants(prob.weight(), prob.nonlinearity());
        const auto& pos = prob.weight().analysis().positive;
        for (size_t i = 0; i < pos.size(); ++i) {
            for (int copy = 0; copy < k; ++copy) {
                double lo = pos[i].lo + copy * prob.T();
                double hi = pos[i].hi + copy * prob.T();
                double ci = 0.0;
                int m = 256;
                for (int s = 0; s <= m; ++s)
                    ci = std::max(ci, orbit.u(lo + (hi - lo) * s / m));
                if (ci <= 0.0 || ci > th.rho_star) continue;
                double slack = model::amplitude_bound_slack(prob.weight(), prob.nonlinearity(),
                                                            prob.lambda(), i, ci, ci, th.rho_star);
                push("amplitude_bound_i" + std::to_string(i) + "_p" + std::to_string(copy), slack,
                     0.0, slack <= 1e-9);
            }
        }
    }
    return rec;
}

namespace {

struct Seed {
    Vec<2> x;
};

std::vector<Seed> build_seeds(const Problem& prob, double rho_star, const SolverOptions& opts) {
    std::vector<Seed> seeds;
    double T = prob.T();
    double rmin = opts.r_min > 0.0 ? opts.r_min : std::max(1e-3 * rho_star, 1e-4);
    double rsup = 0.98 * rho_star;
    for (int j = 0; j < opts.small_seeds; ++j) {
        double f = opts.small_seeds == 1 ? 0.0 : double(j) / (opts.small_seeds - 1);
        double hgt = rmin * std::pow(rsup / rmin, f);
        seeds.push_back({{hgt, 0.0}});
    }
    // Above the classification radius: a deterministic grid over starting
    // height and starting inclination.  Orbits beyond the small regime start
    // anywhere from a flat maximum to a near-unit climb at t = 0, so a grid is
    // far more reliable than profile-shaped guesses.  The x2 axis is sampled in
    // raw (unbounded) coordinates: moderate |x2| covers slopes from gentle to
    // steep without crowding the grid against |u'| = 1.
    double rmax = opts.r_max > 0.0 ? opts.r_max : 0.6 * T;
    double glo = std::max(0.25 * rho_star, 1e-3);
    static constexpr double kX2[] = {-2.5, -1.0, -0.4, 0.0, 0.4, 1.0, 2.5};
    for (int j = 0; j < opts.large_seeds; ++j) {
        double f = opts.large_seeds == 1 ? 0.0 : double(j) / (opts.large_seeds - 1);
        double u0 = glo * std::pow(rmax / glo, f);
        for (double s : kX2) seeds.push_back({{u0, s}});
    }
    return seeds;
}

} // namespace

// The candidates: the cosine's crest and trough for the smooth form;
// breakpoints and segment midpoints for the piecewise form (a reflection must
// map the jump set onto itself).  Each candidate is screened by sampling at
// an irrational-offset grid so mirrored jump pairs are never hit exactly
// (sampler values at a jump are one-sided and would disagree even for an
// even weight).
std::vector<double> reflection_axes(const model::Weight& a) {
    double T = a.period();
    std::vector<double> cand;
    if (a.is_trig()) {
        cand = {a.trig().phase, a.trig().phase + 0.5 * T};
    } else {
        const auto& bp = a.piecewise().breakpoints;
        for (size_t i = 0; i < bp.size(); ++i) {
            double next = i + 1 < bp.size() ? bp[i + 1] : bp[0] + T;
            cand.push_back(bp[i]);
            cand.push_back(0.5 * (bp[i] + next));
        }
    }
    double amax = ode::sup_abs(a);
    std::vector<double> axes;
    for (double c : cand) {
        double tau = c - T * std::floor(c / T);
        bool even = true;
        constexpr int kProbes = 509;
        constexpr double kOffset = 0.6180339887498949;
        for (int i = 0; i < kProbes && even; ++i) {
            double s = (i + kOffset) / kProbes * (0.5 * T);
            even = std::abs(a(tau + s) - a(tau - s)) <= 1e-10 * (1.0 + amax);
        }
        if (!even) continue;
        bool dup = false;
        for (double o : axes) dup = dup || std::abs(o - tau) < 1e-12 * T;
        if (!dup) axes.push_back(tau);
    }
    return axes;
}

SectionFixedPoint solve_at_section(const Problem& prob, Vec<2> guess, double t0, int k,
                                   const SolverOptions& opts) {
    if (k < 1) throw ValidationError("solve_at_section: k must be >= 1");
    SectionSolve s = solve_section(prob, guess, t0, k, opts);
    return {s.x, s.iterations};
}

std::vector<double> symmetric_crossing_heights(const Problem& prob, double axis, int k,
                                               double h_lo, double h_hi, int grid,
                                               const SolverOptions& opts) {
    if (k < 1 || !(h_lo > 0.0) || !(h_hi > h_lo) || grid < 2)
        throw ValidationError("symmetric_crossing_heights: need k >= 1, 0 < h_lo < h_hi, grid >= 2");
    double half = 0.5 * k * prob.T();
    auto arrival = [&](double h) {
        return ode::flow(prob, {h, 0.0}, axis, axis + half, opts.ode).end_state[1];
    };
    std::vector<double> hh(grid + 1), ww(grid + 1);
    for (int i = 0; i <= grid; ++i) {
        hh[i] = h_lo * std::pow(h_hi / h_lo, double(i) / grid);
        try {
            ww[i] = arrival(hh[i]);
        } catch (const NumericalError&) {
            ww[i] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    std::vector<double> roots;
    for (int i = 0; i < grid; ++i) {
        if (std::isnan(ww[i]) || std::isnan(ww[i + 1])) continue;
        if (ww[i] == 0.0) {
            roots.push_back(hh[i]);
        } else if (ww[i] * ww[i + 1] < 0.0) {
            double lo = hh[i], hi = hh[i + 1], wlo = ww[i];
            for (int it = 0; it < 60 && hi - lo > 1e-10 * hi; ++it) {
                double m = 0.5 * (lo + hi), wm;
                try {
                    wm = arrival(m);
                } catch (const NumericalError&) {
                    break;
                }
                if (wm == 0.0) {
                    lo = hi = m;
                } else if ((wm < 0.0) == (wlo < 0.0)) {
                    lo = m;
                    wlo = wm;
                } else {
                    hi = m;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
    }
    return roots;
}

std::vector<ShootResult> find_solutions(const Problem& prob, int k, const SolverOptions& opts) {
    auto th = model::threshold_constants(prob.weight(), prob.nonlinearity());
    auto seeds = build_seeds(prob, th.rho_star, opts);

    std::vector<std::optional<ShootResult>> raw(seeds.size());
    auto run_seed = [&](size_t i) {
        try {
            raw[i] = newton_shoot(prob, seeds[i].x, k, opts);
        } catch (const NumericalError&) {
            // a failed seed is not an error; other seeds may still converge
        }
    };
    int nthreads = std::max(1, opts.threads);
    if (nthreads == 1) {
        for (size_t i = 0; i < seeds.size(); ++i) run_seed(i);
    } else {
        for (size_t base = 0; base < seeds.size(); base += nthreads) {
            std::vector<std::future<void>> fut;
            for (size_t i = base; i < std::min(seeds.size(), base + nthreads); ++i)
                fut.push_back(std::async(std::launch::async, run_seed, i));
            for (auto& f : fut) f.get();
        }
    }

    // Section passes: at large lambda the big orbits hug |u'| = 1 and their
    // t = 0 states race off any fixed seed grid while the t = 0 return map
    // turns violently ill-conditioned.  Anchoring the fixed-point solve away
    // from t = 0 sees those orbits as a tame near-flat state (h, 0); the
    // converged section state is carried back to t = 0 along the orbit
    // itself, so no solve ever faces the ill-conditioned section.
    std::vector<ShootResult> sectioned;
    double rmax = opts.r_max > 0.0 ? opts.r_max : 0.6 * prob.T();
    double glo = std::max(0.25 * th.rho_star, 1e-3);
    double span = k * prob.T();
    auto height = [&](int j, int n) {
        double f = n == 1 ? 0.0 : double(j) / (n - 1);
        return glo * std::pow(rmax / glo, f);
    };
    auto adopt_section = [&](const SectionSolve& s, double t0) {
        Vec<2> x0 = ode::flow(prob, s.x, t0, 0.0, opts.ode).end_state;
        ShootResult out;
        out.iterations = s.iterations;
        out.orbit = make_orbit(prob, x0, k, opts, th.rho_star);
        // Carrying the state to t = 0 multiplies the section residual by the
        // transport Jacobian of the connecting arc, which can be enormous on
        // stiff orbits.  A final polish at t = 0 -- one or two steps from an
        // on-orbit guess -- restores the solver tolerance; an orbit that
        // still cannot be represented at t = 0 is not reported.
        if (out.orbit.residual > 10.0 * opts.newton_tol) {
            try {
                SectionSolve p = solve_section(prob, x0, 0.0, k, opts);
                out.iterations += p.iterations;
                x0 = p.x;
                out.orbit = make_orbit(prob, x0, k, opts, th.rho_star);
            } catch (const NumericalError&) {
                // fall through to the representability gate below
            }
            if (out.orbit.residual > 100.0 * opts.newton_tol) return;
        }
        auto fj = ode::flow_with_jacobian(prob, x0, 0.0, span, opts.ode);
        out.used_fd = fj.crossed_zero;
        if (!fj.crossed_zero) {
            out.jac_det = fj.jac.det();
            Mat2 J{fj.jac.a - 1.0, fj.jac.b, fj.jac.c, fj.jac.d - 1.0};
            out.jac_cond = J.cond2();
        }
        sectioned.push_back(std::move(out));
    };

    // (a) Newton from flat-top guesses anchored at positivity midpoints.
    for (const auto& iv : prob.weight().analysis().positive) {
        double mid = 0.5 * (iv.lo + iv.hi);
        if (mid <= 1e-12) continue;
        for (int j = 0; j < opts.large_seeds; ++j) {
            try {
                adopt_section(solve_section(prob, {height(j, opts.large_seeds), 0.0}, mid, k, opts),
                              mid);
            } catch (const NumericalError&) {
                // unreachable from this anchor height; others may still land
            }
        }
    }

    // (b) Symmetric pass.  When the weight is even about an axis the system
    // is reversible: an orbit leaving the axis horizontally and arriving
    // horizontally half a span later closes by reflection.  Bisecting sign
    // changes of that scalar arrival slope finds symmetric orbits globally,
    // immune to the shrinking Newton basins of the planar iteration; each
    // root is then polished by the full planar solve (no symmetry assumed).
    for (double axis : reflection_axes(prob.weight())) {
        for (double root : symmetric_crossing_heights(prob, axis, k, glo, rmax, 48, opts)) {
            try {
                adopt_section(solve_section(prob, {root, 0.0}, axis, k, opts), axis);
            } catch (const NumericalError&) {
                // degenerate root (e.g. at a fold); nothing to adopt
            }
        }
    }

    // Near u = 0 the return displacement is tiny in absolute terms, so Newton
    // accepts spurious fixed points there; a genuine orbit balances its forces
    // to Newton precision, spurious ones leave a residual comparable to the
    // total force they experience.
    double amax = ode::sup_abs(prob.weight());
    auto genuine = [&](const ShootResult& r) {
        double force_scale =
            prob.lambda() * amax * prob.nonlinearity().g(r.orbit.sup_norm) * r.orbit.period;
        return r.orbit.residual <= 1e-6 * force_scale;
    };

    auto keep = [&](const ShootResult& r) {
        return r.orbit.cls != OrbitClass::Trivial && r.orbit.min_u > 0.0 && genuine(r);
    };
    std::vector<ShootResult> found;
    for (auto& r : raw)
        if (r && keep(*r)) found.push_back(std::move(*r));
    for (auto& r : sectioned)
        if (keep(r)) found.push_back(std::move(r));
    std::sort(found.begin(), found.end(), [](const ShootResult& a, const ShootResult& b) {
        if (a.orbit.sup_norm != b.orbit.sup_norm) return a.orbit.sup_norm < b.orbit.sup_norm;
        return a.orbit.x0[0] < b.orbit.x0[0];
    });
    std::vector<ShootResult> unique;
    int nsamp = 512 * k;
    for (auto& cand : found) {
        bool dup = false;
        for (const auto& kept : unique) {
            double dist = 0.0;
            for (int i = 0; i <= nsamp; ++i) {
                double t = cand.orbit.period * i / nsamp;
                dist = std::max(dist, std::abs(cand.orbit.u(t) - kept.orbit.u(t)));
                if (dist >= opts.dedup_distance) break;
            }
            if (dist < opts.dedup_distance) {
                dup = true;
                break;
            }
        }
        if (!dup) unique.push_back(std::move(cand));
    }
    return unique;
}

ScanResult scan_lambda(const model::Weight& a, const model::Nonlinearity& g, double lambda_lo,
                       double lambda_hi, int n, const SolverOptions& opts) {
    if (!(lambda_lo > 0.0 && lambda_hi > lambda_lo && n >= 2))
        throw ValidationError("scan_lambda: need 0 < lambda_lo < lambda_hi and n >= 2");
    ScanResult out;
    for (int i = 0; i < n; ++i) {
        double lam = lambda_lo + (lambda_hi - lambda_lo) * i / (n - 1);
        Problem prob(a, g, lam);
        auto sols = find_solutions(prob, 1, opts);
        ScanPoint pt;
        pt.lambda = lam;
        pt.count = (int)sols.size();
        if (!sols.empty()) {
            pt.small_sup = sols.front().orbit.sup_norm;
            pt.large_sup = sols.back().orbit.sup_norm;
        }
        out.points.push_back(pt);
    }
    for (const auto& pt : out.points) {
        if (pt.count >= 2) {
            out.onset = pt.lambda;
            break;
        }
    }
    if (std::isfinite(out.onset)) {
        for (const auto& pt : out.points) {
            if (pt.lambda >= out.onset) break;
            if (pt.count == 0) out.largest_empty = pt.lambda;
        }
    }
    return out;
}

} // namespace minkper::solver
