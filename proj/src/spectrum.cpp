#include "minkper/spectrum.hpp"

#include <algorithm>
#include <cmath>

namespace minkper::spectral {

using ode::IntegratorConfig;
using ode::Vec;

namespace {

constexpr double kGoldenTol = 1e-10; // theta0 refinement width
constexpr double kGapTol = 1e-10;    // |f| target for bisection
constexpr double kMuCap = 1e6;       // bracket expansion limit

void validate(const SturmLiouville& sl) {
    if (!(sl.T > 0.0) || !std::isfinite(sl.T))
        throw ValidationError("sturm-liouville: period must be positive and finite");
    if (!sl.p || !sl.q) throw ValidationError("sturm-liouville: missing coefficient sampler");
    double pmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 1024; ++i) {
        double v = sl.p(sl.T * i / 1024.0);
        if (!std::isfinite(v)) throw ValidationError("sturm-liouville: p is not finite");
        pmin = std::min(pmin, v);
    }
    if (!(pmin > 0.0))
        throw ValidationError("sturm-liouville: p must be positive on the sample mesh");
}

double fold_period(double t, double T) {
    double r = std::fmod(t, T);
    if (r < 0.0) r += T;
    return r;
}

IntegratorConfig spectral_config(const SturmLiouville& sl, int n_periods,
                                 const ode::OdeOptions& opts) {
    IntegratorConfig cfg;
    // The gap function is bisected to 1e-10, so the angular flow is integrated
    // well below that regardless of the caller's planar tolerances.
    cfg.rel_tol = std::min(opts.rel_tol, 1e-12);
    cfg.abs_tol = std::min(opts.abs_tol, 1e-14);
    cfg.max_step = opts.max_step > 0.0 ? opts.max_step : sl.T / 4.0;
    for (int k = 0; k < n_periods; ++k) {
        for (double b : sl.breakpoints)
            if (b > 0.0) cfg.mesh.push_back(k * sl.T + b);
        if (k + 1 < n_periods) cfg.mesh.push_back((k + 1) * sl.T);
    }
    return cfg;
}

// One period of the angular flow theta' = sin^2/p + (mu+q) cos^2 together with
// the fundamental matrix of the underlying linear system.  Because that system
// is linear with unit-determinant monodromy, theta(T; theta0) for every theta0
// follows from the matrix and the single continuous lift at theta0 = 0:
// monotonicity of theta0 -> theta(T; theta0) and the equivariance
// theta(T; theta0 + pi) = theta(T; theta0) + pi pin the lift branch uniquely.
class RotationMap {
public:
    RotationMap(const SturmLiouville& sl, double mu, const ode::OdeOptions& opts) {
        IntegratorConfig cfg = spectral_config(sl, 1, opts);
        double T = sl.T;
        auto rhs = [&](double t, const Vec<6>& y, Vec<6>& out) {
            double tf = fold_period(t, T);
            double pv = sl.p(tf), qq = mu + sl.q(tf);
            double s = std::sin(y[0]), c = std::cos(y[0]);
            out[0] = s * s / pv + qq * c * c;
            out[1] = (qq - 1.0 / pv) * s * c;
            out[2] = y[3] / pv;
            out[3] = -qq * y[2];
            out[4] = y[5] / pv;
            out[5] = -qq * y[4];
        };
        Vec<6> y0 = {0.0, 0.0, 1.0, 0.0, 0.0, 1.0};
        auto traj = ode::integrate<6>(rhs, 0.0, T, y0, cfg);
        theta0_lift_ = traj.end_state[0];
        // Columns are the flows of (1,0) and (0,1) in (w, pw') coordinates.
        m_ = {traj.end_state[2], traj.end_state[4], traj.end_state[3], traj.end_state[5]};
    }

    // Continuous lift of theta(T; theta0) for theta0 in [0, 2 pi).
    double lift(double theta0) const {
        double base = std::floor(theta0 / M_PI);
        double th = theta0 - base * M_PI; // in [0, pi)
        double z1 = std::cos(th), z2 = -std::sin(th);
        double w1 = m_.a * z1 + m_.b * z2;
        double w2 = m_.c * z1 + m_.d * z2;
        double ang = std::atan2(-w2, w1); // clockwise angle convention
        // Monotonicity puts theta(T; th) in [lift(0), lift(0) + pi]; shift the
        // principal angle onto that branch.
        double target = theta0_lift_ + 0.5 * M_PI;
        double k = std::round((target - ang) / (2.0 * M_PI));
        return ang + 2.0 * M_PI * k + base * M_PI;
    }

    double gap(double theta0) const { return lift(theta0) - theta0; }

private:
    double theta0_lift_ = 0.0;
    ode::Mat2 m_;
};

struct Extremum {
    double value = 0.0;
    double theta0 = 0.0;
};

// min (or max) of the rotation gap over theta0: 256-point grid on [0, 2 pi)
// followed by golden-section refinement of the best bracket.
Extremum rotation_extremum(const RotationMap& map, bool maximize) {
    constexpr int n = 256;
    double sign = maximize ? -1.0 : 1.0;
    auto val = [&](double th) { return sign * map.gap(th); };

    int best = 0;
    double best_v = val(0.0);
    for (int i = 1; i < n; ++i) {
        double v = val(2.0 * M_PI * i / n);
        if (v < best_v) {
            best_v = v;
            best = i;
        }
    }
    double h = 2.0 * M_PI / n;
    double a = (best - 1) * h, b = (best + 1) * h;
    constexpr double invphi = 0.6180339887498949;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = val(c), fd = val(d);
    while (b - a > kGoldenTol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = val(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = val(d);
        }
    }
    double th = 0.5 * (a + b);
    Extremum out;
    out.theta0 = fold_period(th, 2.0 * M_PI);
    out.value = sign * std::min(val(th), best_v);
    return out;
}

Extremum gap_extremum(const SturmLiouville& sl, double mu, bool maximize,
                      const ode::OdeOptions& opts) {
    return rotation_extremum(RotationMap(sl, mu, opts), maximize);
}

// Unique zero of mu -> extremum(mu) - offset (strictly increasing): bracket by
// doubling outward from mu_start, then bisect until the value is below kGapTol.
double bisect_gap(const SturmLiouville& sl, bool maximize, double offset, double mu_start,
                  const ode::OdeOptions& opts, Extremum* at_zero, double* lo_out,
                  double* hi_out) {
    auto F = [&](double mu) { return gap_extremum(sl, mu, maximize, opts).value - offset; };

    double lo, hi;
    double f_start = F(mu_start);
    if (std::abs(f_start) <= kGapTol) {
        lo = hi = mu_start;
    } else if (f_start > 0.0) {
        hi = mu_start;
        double step = 1.0;
        lo = mu_start - step;
        while (F(lo) > 0.0) {
            step *= 2.0;
            lo = mu_start - step;
            if (std::abs(lo) > kMuCap)
                throw BracketFailure("eigenvalue bracket: no sign change below the cap");
        }
    } else {
        lo = mu_start;
        double step = 1.0;
        hi = mu_start + step;
        while (F(hi) < 0.0) {
            step *= 2.0;
            hi = mu_start + step;
            if (std::abs(hi) > kMuCap)
                throw BracketFailure("eigenvalue bracket: no sign change above the cap");
        }
    }

    // Bisect until the bracket collapses: the periodicity defect of the
    // recovered eigenfunction scales like sqrt(|mu - mu0|), so stopping at
    // |f| ~ 1e-10 would leave it at ~1e-5.
    double mu = 0.5 * (lo + hi);
    for (int it = 0; it < 200 && hi > lo; ++it) {
        mu = 0.5 * (lo + hi);
        double fm = F(mu);
        if (fm == 0.0) break;
        (fm < 0.0 ? lo : hi) = mu;
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mu))) break;
    }
    if (at_zero) *at_zero = gap_extremum(sl, mu, maximize, opts);
    if (lo_out) *lo_out = lo;
    if (hi_out) *hi_out = hi;
    return mu;
}

} // namespace

PrueferResult pruefer_flow(const SturmLiouville& sl, double mu, double theta0, int n_periods,
                           const ode::OdeOptions& opts) {
    validate(sl);
    if (n_periods < 1) throw ValidationError("pruefer_flow: n_periods must be >= 1");
    IntegratorConfig cfg = spectral_config(sl, n_periods, opts);
    double T = sl.T;
    auto rhs = [&](double t, const Vec<2>& y, Vec<2>& out) {
        double tf = fold_period(t, T);
        double pv = sl.p(tf), qq = mu + sl.q(tf);
        double s = std::sin(y[0]), c = std::cos(y[0]);
        out[0] = s * s / pv + qq * c * c;
        out[1] = (qq - 1.0 / pv) * s * c; // (log ell)'
    };
    auto traj = ode::integrate<2>(rhs, 0.0, n_periods * T, {theta0, 0.0}, cfg);
    PrueferResult out;
    out.theta = traj.end_state[0];
    out.ell = std::exp(traj.end_state[1]);
    return out;
}

double rotation_gap(const SturmLiouville& sl, double mu, const ode::OdeOptions& opts,
                    double* theta0_min) {
    validate(sl);
    Extremum e = gap_extremum(sl, mu, false, opts);
    if (theta0_min) *theta0_min = e.theta0;
    return e.value;
}

EigenvalueResult principal_eigenvalue(const SturmLiouville& sl, const ode::OdeOptions& opts) {
    validate(sl);
    EigenvalueResult out;
    Extremum star;
    out.mu0 = bisect_gap(sl, false, 0.0, 0.0, opts, &star, &out.bracket_lo, &out.bracket_hi);
    out.theta0_star = star.theta0;

    // Eigenfunction from the minimizing start angle: the fixed angle with unit
    // return radius gives the periodic solution of the linear system.
    IntegratorConfig cfg = spectral_config(sl, 1, opts);
    double T = sl.T, mu0 = out.mu0;
    auto rhs = [&](double t, const Vec<2>& z, Vec<2>& outz) {
        double tf = fold_period(t, T);
        outz[0] = z[1] / sl.p(tf);
        outz[1] = -(mu0 + sl.q(tf)) * z[0];
    };
    Vec<2> z0 = {std::cos(out.theta0_star), -std::sin(out.theta0_star)};
    auto traj = ode::integrate<2>(rhs, 0.0, T, z0, cfg);

    int n = 2048;
    out.t.resize(n + 1);
    out.w.resize(n + 1);
    out.pw.resize(n + 1);
    double wmax = 0.0;
    int imax = 0;
    for (int i = 0; i <= n; ++i) {
        double t = T * i / n;
        Vec<2> z = traj.state(t);
        out.t[i] = t;
        out.w[i] = z[0];
        out.pw[i] = z[1];
        if (std::abs(z[0]) > wmax) {
            wmax = std::abs(z[0]);
            imax = i;
        }
    }
    double scale_w = out.w[imax] > 0.0 ? wmax : -wmax; // normalize with w > 0
    for (int i = 0; i <= n; ++i) {
        out.w[i] /= scale_w;
        out.pw[i] /= scale_w;
    }
    out.periodicity_error =
        std::max(std::abs(out.w[n] - out.w[0]), std::abs(out.pw[n] - out.pw[0]));

    // A-posteriori equation residual: differentiate the dense output of p w'
    // (4th-order stencil inside each step; coefficient jumps sit on step edges).
    double qmax = 0.0;
    for (int i = 0; i < 1024; ++i) qmax = std::max(qmax, std::abs(sl.q(T * i / 1024.0)));
    double resid = 0.0;
    for (const auto& s : traj.steps) {
        double h = std::abs(s.h);
        if (h < 1e-12 * T) continue;
        double tm = s.t0 + s.h / 2.0, del = s.h / 8.0;
        auto pw_at = [&](double t) { return traj.state(t)[1]; };
        double dpw = (pw_at(tm - 2.0 * del) - 8.0 * pw_at(tm - del) + 8.0 * pw_at(tm + del) -
                      pw_at(tm + 2.0 * del)) /
                     (12.0 * del);
        double w_m = traj.state(tm)[0];
        resid = std::max(resid, std::abs(dpw + (mu0 + sl.q(fold_period(tm, T))) * w_m));
    }
    out.residual = resid / ((std::abs(mu0) + qmax + 1.0) * wmax);
    return out;
}

std::vector<EigenPair> higher_eigenvalues(const SturmLiouville& sl, int k_max,
                                          const ode::OdeOptions& opts) {
    validate(sl);
    if (k_max < 1) throw ValidationError("higher_eigenvalues: k_max must be >= 1");
    double start = bisect_gap(sl, false, 0.0, 0.0, opts, nullptr, nullptr, nullptr);
    std::vector<EigenPair> out;
    for (int k = 1; k <= k_max; ++k) {
        EigenPair pair;
        pair.k = k;
        pair.lower =
            bisect_gap(sl, true, 2.0 * M_PI * k, start, opts, nullptr, nullptr, nullptr);
        pair.upper =
            bisect_gap(sl, false, 2.0 * M_PI * k, pair.lower, opts, nullptr, nullptr, nullptr);
        out.push_back(pair);
        start = pair.upper;
    }
    return out;
}

double rotation_over(const SturmLiouville& sl, int k, double theta0,
                     const ode::OdeOptions& opts) {
    if (k < 1) throw ValidationError("rotation_over: k must be >= 1");
    return pruefer_flow(sl, 0.0, theta0, k, opts).theta - theta0;
}

SturmLiouville linearize_around(const model::Problem& prob, const solver::PeriodicOrbit& orbit) {
    if (orbit.period <= 0.0) throw ValidationError("linearize_around: orbit has no trajectory");
    SturmLiouville sl;
    sl.T = orbit.period;
    sl.p = [orbit](double t) {
        double x2 = orbit.x2(t);
        return std::pow(1.0 + x2 * x2, 1.5); // phi'(u') in terms of x2 = phi(u')
    };
    double lambda = prob.lambda();
    model::Weight a = prob.weight();
    model::Nonlinearity g = prob.nonlinearity();
    sl.q = [orbit, lambda, a, g](double t) {
        return lambda * a(t) * g.dg(std::max(0.0, orbit.u(t)));
    };
    for (int copy = 0; copy < orbit.k; ++copy)
        for (double b : a.breakpoints()) sl.breakpoints.push_back(copy * prob.T() + b);
    return sl;
}

} // namespace minkper::spectral
