#include "minkper/continuation.hpp"

#include "minkper/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

namespace minkper::cont {
namespace {

using model::Nonlinearity;
using model::Problem;
using model::Weight;
using ode::Mat2;
using ode::Vec;

// Extended continuation state (x1, x2, lambda).
using X3 = std::array<double, 3>;

double norm_inf2(const Vec<2>& v) {
    return std::max(std::abs(v[0]), std::abs(v[1]));
}

// Partial-pivot solve of a 3x3 system; false when a pivot vanishes.
bool solve3(std::array<std::array<double, 3>, 3> A, X3 b, X3& out) {
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (piv != col) {
            std::swap(A[piv], A[col]);
            std::swap(b[piv], b[col]);
        }
        if (!(std::abs(A[col][col]) > 1e-300)) return false;
        for (int r = col + 1; r < 3; ++r) {
            double f = A[r][col] / A[col][col];
            for (int c = col; c < 3; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int r = 2; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 3; ++c) s -= A[r][c] * out[c];
        out[r] = s / A[r][r];
    }
    return std::isfinite(out[0]) && std::isfinite(out[1]) && std::isfinite(out[2]);
}

struct Frame {
    const Weight* a = nullptr;
    const Nonlinearity* g = nullptr;
    const StepControl* ctl = nullptr;
    double T = 0.0;
};

Vec<2> period_map(const Frame& fr, double lam, const Vec<2>& x) {
    Problem prob(*fr.a, *fr.g, lam);
    return ode::flow(prob, x, 0.0, fr.T, fr.ctl->solver.ode).end_state;
}

Vec<2> residual_F(const Frame& fr, const X3& X) {
    Vec<2> e = period_map(fr, X[2], {X[0], X[1]});
    return {e[0] - X[0], e[1] - X[1]};
}

Mat2 monodromy(const Frame& fr, const X3& X) {
    Problem prob(*fr.a, *fr.g, X[2]);
    auto fj = ode::flow_with_jacobian(prob, {X[0], X[1]}, 0.0, fr.T, fr.ctl->solver.ode);
    if (!fj.crossed_zero) return fj.jac;
    // Finite differences when the co-integrated variational data is suspect.
    Mat2 M;
    Vec<2> base = {X[0], X[1]};
    for (int j = 0; j < 2; ++j) {
        double hj = fr.ctl->solver.fd_step * std::max(1.0, std::abs(base[j]));
        Vec<2> xp = base, xm = base;
        xp[j] += hj;
        xm[j] -= hj;
        Vec<2> ep = period_map(fr, X[2], xp);
        Vec<2> em = period_map(fr, X[2], xm);
        double c0 = (ep[0] - em[0]) / (2.0 * hj);
        double c1 = (ep[1] - em[1]) / (2.0 * hj);
        if (j == 0) {
            M.a = c0;
            M.c = c1;
        } else {
            M.b = c0;
            M.d = c1;
        }
    }
    return M;
}

Vec<2> lambda_sensitivity(const Frame& fr, const X3& X) {
    double dl = 1e-6 * std::max(1.0, std::abs(X[2]));
    Vec<2> ep = period_map(fr, X[2] + dl, {X[0], X[1]});
    Vec<2> em = period_map(fr, X[2] - dl, {X[0], X[1]});
    return {(ep[0] - em[0]) / (2.0 * dl), (ep[1] - em[1]) / (2.0 * dl)};
}

// Relative metric frozen at an accepted point: a unit of arclength is a unit
// of relative motion in each component.
X3 metric_of(const X3& X) {
    return {1.0 / std::max(1.0, std::abs(X[0])), 1.0 / std::max(1.0, std::abs(X[1])),
            1.0 / std::max(1.0, std::abs(X[2]))};
}

double wnorm(const X3& W, const X3& v) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += (W[i] * v[i]) * (W[i] * v[i]);
    return std::sqrt(s);
}

// Tangent at X: kernel direction of [M - I | dPhi/dlambda] closed by the
// reference tangent's metric row, which also fixes the orientation.
std::optional<X3> tangent_at(const Frame& fr, const X3& X, const X3& W, const X3& tau_ref) {
    Mat2 M;
    Vec<2> d;
    try {
        M = monodromy(fr, X);
        d = lambda_sensitivity(fr, X);
    } catch (const NumericalError&) {
        return std::nullopt;
    }
    std::array<std::array<double, 3>, 3> A = {{
        {M.a - 1.0, M.b, d[0]},
        {M.c, M.d - 1.0, d[1]},
        {W[0] * W[0] * tau_ref[0], W[1] * W[1] * tau_ref[1], W[2] * W[2] * tau_ref[2]},
    }};
    X3 t;
    if (!solve3(A, {0.0, 0.0, 1.0}, t)) return std::nullopt;
    double n = wnorm(W, t);
    if (!(n > 1e-300) || !std::isfinite(n)) return std::nullopt;
    for (double& c : t) c /= n;
    return t;
}

struct Corrected {
    X3 X{};
    int iterations = 0;
};

// Newton on the bordered system [Phi(x) - x ; tau . W^2 (X - Xp)] from the
// predictor; the residual check precedes every linear solve, so points that
// already satisfy the equation (the trivial branch) are accepted without
// touching the possibly singular Jacobian.
std::optional<Corrected> correct_step(const Frame& fr, const X3& Xp, const X3& W, const X3& tau) {
    const StepControl& ctl = *fr.ctl;
    X3 crow = {W[0] * W[0] * tau[0], W[1] * W[1] * tau[1], W[2] * W[2] * tau[2]};
    auto cdot = [&](const X3& Y) {
        return crow[0] * (Y[0] - Xp[0]) + crow[1] * (Y[1] - Xp[1]) + crow[2] * (Y[2] - Xp[2]);
    };
    X3 X = Xp;
    Vec<2> F;
    double rn;
    try {
        F = residual_F(fr, X);
    } catch (const NumericalError&) {
        return std::nullopt;
    }
    rn = norm_inf2(F);
    for (int iter = 0; iter < ctl.corrector_max_iter; ++iter) {
        if (!(X[2] > 1e-12) || norm_inf2({X[0], X[1]}) > ctl.solver.divergence_radius)
            return std::nullopt;
        if (rn <= ctl.corrector_tol) return Corrected{X, iter};
        Mat2 M;
        Vec<2> d;
        try {
            M = monodromy(fr, X);
            d = lambda_sensitivity(fr, X);
        } catch (const NumericalError&) {
            return std::nullopt;
        }
        std::array<std::array<double, 3>, 3> A = {{
            {M.a - 1.0, M.b, d[0]},
            {M.c, M.d - 1.0, d[1]},
            crow,
        }};
        X3 dX;
        if (!solve3(A, {-F[0], -F[1], -cdot(X)}, dX)) return std::nullopt;
        double alpha = 1.0;
        bool moved = false;
        for (int trial = 0; trial < 6; ++trial, alpha *= 0.5) {
            X3 Xt = {X[0] + alpha * dX[0], X[1] + alpha * dX[1], X[2] + alpha * dX[2]};
            if (!(Xt[2] > 1e-12)) continue;
            Vec<2> Ft;
            double rtn;
            try {
                Ft = residual_F(fr, Xt);
            } catch (const NumericalError&) {
                continue;
            }
            rtn = norm_inf2(Ft);
            if (rtn < rn || rtn <= ctl.corrector_tol) {
                X = Xt;
                F = Ft;
                rn = rtn;
                moved = true;
                break;
            }
        }
        if (!moved) return std::nullopt;
    }
    if (rn <= ctl.corrector_tol) return Corrected{X, ctl.corrector_max_iter};
    return std::nullopt;
}

// Plain damped Newton at fixed lambda (branch start and boundary landing).
std::optional<Corrected> newton_fixed(const Frame& fr, double lam, Vec<2> x) {
    const StepControl& ctl = *fr.ctl;
    auto resid = [&](const Vec<2>& p, Vec<2>& r) {
        Vec<2> e = period_map(fr, lam, p);
        r = {e[0] - p[0], e[1] - p[1]};
        return norm_inf2(r);
    };
    Vec<2> r;
    double rn;
    try {
        rn = resid(x, r);
    } catch (const NumericalError&) {
        return std::nullopt;
    }
    for (int iter = 0; iter < ctl.corrector_max_iter; ++iter) {
        if (norm_inf2(x) > ctl.solver.divergence_radius) return std::nullopt;
        if (rn <= ctl.corrector_tol) return Corrected{{x[0], x[1], lam}, iter};
        Mat2 M;
        try {
            M = monodromy(fr, {x[0], x[1], lam});
        } catch (const NumericalError&) {
            return std::nullopt;
        }
        Mat2 J{M.a - 1.0, M.b, M.c, M.d - 1.0};
        Vec<2> dx = J.solve({-r[0], -r[1]});
        if (!std::isfinite(dx[0]) || !std::isfinite(dx[1])) return std::nullopt;
        double alpha = 1.0;
        bool moved = false;
        for (int trial = 0; trial < 6; ++trial, alpha *= 0.5) {
            Vec<2> xt = {x[0] + alpha * dx[0], x[1] + alpha * dx[1]};
            Vec<2> rt;
            double rtn;
            try {
                rtn = resid(xt, rt);
            } catch (const NumericalError&) {
                continue;
            }
            if (rtn < rn || rtn <= ctl.corrector_tol) {
                x = xt;
                r = rt;
                rn = rtn;
                moved = true;
                break;
            }
        }
        if (!moved) return std::nullopt;
    }
    if (rn <= ctl.corrector_tol) return Corrected{{x[0], x[1], lam}, ctl.corrector_max_iter};
    return std::nullopt;
}

BranchPoint point_of(const Frame& fr, const X3& X, double rho) {
    BranchPoint p;
    p.lambda = X[2];
    p.x0 = {X[0], X[1]};
    Problem prob(*fr.a, *fr.g, X[2]);
    auto traj = ode::flow(prob, p.x0, 0.0, fr.T, fr.ctl->solver.ode);
    const int n = 2048;
    double umax = -1e300, umin = 1e300;
    for (int i = 0; i <= n; ++i) {
        double u = traj.state(fr.T * i / n)[0];
        umax = std::max(umax, u);
        umin = std::min(umin, u);
    }
    p.sup_norm = umax;
    p.min_u = umin;
    p.cls = umax < 1e-8        ? solver::OrbitClass::Trivial
            : umax < rho       ? solver::OrbitClass::Small
                               : solver::OrbitClass::Large;
    return p;
}

// Every tenth accepted nontrivial point is re-solved from scratch and pushed
// through the a-posteriori battery; a converged point passes the residual
// check before any Jacobian is formed, so proximity to a fold is harmless.
void reverify(const Frame& fr, const BranchPoint& p) {
    if (p.cls == solver::OrbitClass::Trivial) return;
    Problem prob(*fr.a, *fr.g, p.lambda);
    bool ok = false;
    std::string detail;
    try {
        auto rs = solver::newton_shoot(prob, p.x0, 1, fr.ctl->solver);
        auto rec = solver::verify_orbit(prob, rs.orbit, &rs);
        ok = rec.all_pass &&
             std::abs(rs.orbit.sup_norm - p.sup_norm) <= 1e-6 * (1.0 + p.sup_norm);
        if (!ok) detail = "verification checks failed";
    } catch (const NumericalError& e) {
        detail = e.what();
    }
    if (!ok)
        throw NumericalError("trace_branch: re-verification failed at lambda=" +
                             std::to_string(p.lambda) + " (" + detail + ")");
}

// Bisection along the arc from X0 (metric W, tangent tau, all frozen) toward
// the accepted point at arc distance ds_hi where the tangent's lambda
// component has flipped sign.
std::optional<FoldPoint> refine_fold(const Frame& fr, const X3& X0, const X3& W, const X3& tau,
                                     double ds_hi, const X3& X_hi) {
    int sign0 = tau[2] > 0.0 ? 1 : -1;
    double s_lo = 0.0, s_hi = ds_hi;
    double lam_lo = X0[2], lam_hi = X_hi[2];
    X3 best = X_hi;
    auto probe = [&](double s, int& sign_out, X3& Xout) -> bool {
        X3 Xp = {X0[0] + s * tau[0], X0[1] + s * tau[1], X0[2] + s * tau[2]};
        auto c = correct_step(fr, Xp, W, tau);
        if (!c) return false;
        auto t = tangent_at(fr, c->X, W, tau);
        if (!t) return false;
        sign_out = (*t)[2] > 0.0 ? 1 : -1;
        Xout = c->X;
        return true;
    };
    for (int it = 0; it < 80; ++it) {
        if (std::abs(lam_hi - lam_lo) <= 1e-6 * std::max(1.0, std::abs(lam_hi))) break;
        if (s_hi - s_lo <= 1e-13 * std::max(1.0, s_hi)) break;
        double sm = 0.5 * (s_lo + s_hi);
        int sg = 0;
        X3 Xm;
        if (!probe(sm, sg, Xm)) {
            s_hi = sm;
            continue;
        }
        if (sg == sign0) {
            s_lo = sm;
            lam_lo = Xm[2];
        } else {
            s_hi = sm;
            lam_hi = Xm[2];
            best = Xm;
        }
    }
    return FoldPoint{0.5 * (lam_lo + lam_hi), {best[0], best[1]}};
}

} // namespace

Branch trace_branch(const Weight& a, const Nonlinearity& g, Vec<2> x0, double lambda_start,
                    double lambda_lo, double lambda_hi, const StepControl& ctl) {
    if (!(lambda_lo > 0.0) || !(lambda_hi > lambda_lo))
        throw ValidationError("trace_branch: need 0 < lambda_lo < lambda_hi");
    if (!(lambda_start >= lambda_lo) || !(lambda_start <= lambda_hi))
        throw ValidationError("trace_branch: lambda_start must lie in [lambda_lo, lambda_hi]");
    if (!(ctl.ds0 > 0.0) || !(ctl.ds_min > 0.0) || !(ctl.ds_max >= ctl.ds_min))
        throw ValidationError("trace_branch: need 0 < ds_min <= ds_max and ds0 > 0");
    if (ctl.max_steps < 1 || ctl.corrector_max_iter < 1 || !(ctl.corrector_tol > 0.0))
        throw ValidationError("trace_branch: invalid corrector settings");
    if (ctl.direction != 1 && ctl.direction != -1)
        throw ValidationError("trace_branch: direction must be +1 or -1");

    Frame fr{&a, &g, &ctl, a.period()};
    double rho = model::threshold_constants(a, g).rho_star;

    auto st = newton_fixed(fr, lambda_start, x0);
    if (!st)
        throw CorrectorDivergence(lambda_start,
                                  "trace_branch: could not converge the starting state");
    X3 X = st->X;

    Branch br;
    br.points.push_back(point_of(fr, X, rho));

    X3 W = metric_of(X);
    X3 tau = {0.0, 0.0, static_cast<double>(ctl.direction)};
    tau[2] /= wnorm(W, tau);
    if (auto t = tangent_at(fr, X, W, tau)) tau = *t;

    double ds = std::clamp(ctl.ds0, ctl.ds_min, ctl.ds_max);

    while (static_cast<int>(br.points.size()) <= ctl.max_steps) {
        X3 Xp = {X[0] + ds * tau[0], X[1] + ds * tau[1], X[2] + ds * tau[2]};
        auto cor = correct_step(fr, Xp, W, tau);
        bool landing_failed = false;
        if (cor && (cor->X[2] < lambda_lo || cor->X[2] > lambda_hi)) {
            double bound = cor->X[2] < lambda_lo ? lambda_lo : lambda_hi;
            if (auto land = newton_fixed(fr, bound, {X[0], X[1]})) {
                br.step_history.push_back(ds);
                BranchPoint bp = point_of(fr, land->X, rho);
                br.points.push_back(bp);
                if ((br.points.size() - 1) % 10 == 0) reverify(fr, bp);
                br.stop_reason = "lambda_range";
                return br;
            }
            landing_failed = true;
        }
        if (!cor || landing_failed) {
            ds *= 0.5;
            if (ds < ctl.ds_min) {
                br.stop_reason = "corrector_divergence";
                return br;
            }
            continue;
        }

        X3 Xn = cor->X;
        X3 Wn = metric_of(Xn);
        X3 tau_n = tau;
        bool have_tan = false;
        if (auto t = tangent_at(fr, Xn, Wn, tau)) {
            tau_n = *t;
            have_tan = true;
        } else {
            double n = wnorm(Wn, tau_n);
            if (n > 0.0)
                for (double& c : tau_n) c /= n;
        }
        bool crossed_fold = have_tan && std::abs(tau[2]) > 1e-14 && std::abs(tau_n[2]) > 1e-14 &&
                            tau[2] * tau_n[2] < 0.0;
        if (crossed_fold) {
            if (auto fp = refine_fold(fr, X, W, tau, ds, Xn))
                br.folds.push_back(*fp);
            else
                br.folds.push_back(
                    FoldPoint{0.5 * (X[2] + Xn[2]), {0.5 * (X[0] + Xn[0]), 0.5 * (X[1] + Xn[1])}});
        }

        br.step_history.push_back(ds);
        BranchPoint bp = point_of(fr, Xn, rho);
        bp.fold = crossed_fold;
        br.points.push_back(bp);
        if ((br.points.size() - 1) % 10 == 0) reverify(fr, bp);

        if (cor->iterations <= 4)
            ds = std::min(ds * 1.3, ctl.ds_max);
        else if (cor->iterations > 8)
            ds = std::max(ds * 0.5, ctl.ds_min);

        X = Xn;
        W = Wn;
        tau = tau_n;
    }
    br.stop_reason = "max_steps";
    return br;
}

namespace {

// ---- asymptotic sweeps ----------------------------------------------------

struct Profile {
    std::vector<double> t, u, up;
    double sup = 0.0;
    double minu = 1e300;
    double fm1 = 0.0, f0 = 0.0, fp1 = 0.0, foth = 1.0;
    double curvature = 0.0; // max |u''| / |a| over samples with a(t) != 0
};

int band_of(double up, double band) {
    if (std::abs(up + 1.0) <= band) return -1;
    if (std::abs(up) <= band) return 0;
    if (std::abs(up - 1.0) <= band) return 1;
    return 2;
}

// Shared per-sample bookkeeping: slope bands and the pointwise curvature
// ratio |u''| / |a| = lambda g(u) (1 + x2^2)^{-3/2}, algebraic in the state.
struct ProfileAccum {
    const Problem* prob;
    double band, amax;
    int nm1 = 0, n0 = 0, np1 = 0, n = 0;
    Profile* P;

    void add(double t, double u, double x2) {
        double up = model::phi_inv(x2);
        P->t.push_back(t);
        P->u.push_back(u);
        P->up.push_back(up);
        P->sup = std::max(P->sup, u);
        P->minu = std::min(P->minu, u);
        switch (band_of(up, band)) {
        case -1: ++nm1; break;
        case 0: ++n0; break;
        case 1: ++np1; break;
        default: break;
        }
        ++n;
        if (std::abs((*prob).weight()(t)) > 1e-12 * amax)
            P->curvature = std::max(P->curvature, prob->lambda() * prob->nonlinearity().g(u) *
                                                      std::pow(1.0 + x2 * x2, -1.5));
    }
    void finish() {
        P->fm1 = double(nm1) / n;
        P->f0 = double(n0) / n;
        P->fp1 = double(np1) / n;
        P->foth = 1.0 - P->fm1 - P->f0 - P->fp1;
    }
};

Profile profile_of_orbit(const Problem& prob, const solver::PeriodicOrbit& orb,
                         const AsymptoticOptions& o) {
    Profile P;
    int N = o.profile_samples;
    double T = prob.T();
    P.t.reserve(N);
    P.u.reserve(N);
    P.up.reserve(N);
    ProfileAccum acc{&prob, o.band, ode::sup_abs(prob.weight()), 0, 0, 0, 0, &P};
    for (int i = 0; i < N; ++i) {
        double t = T * i / N;
        acc.add(t, orb.u(t), orb.x2(t));
    }
    acc.finish();
    return P;
}

// Profile of a reflection-symmetric orbit from its half-period trajectory:
// u(axis + s) = u(axis - s) and x2 flips sign, so only [axis, axis + T/2] is
// ever integrated and the mirrored half is exact by construction.
Profile profile_of_mirror(const Problem& prob, const ode::Trajectory<2>& half, double axis,
                          double h, const AsymptoticOptions& o, double* x2max_out) {
    Profile P;
    int N = o.profile_samples;
    double T = prob.T();
    P.t.reserve(N);
    P.u.reserve(N);
    P.up.reserve(N);
    ProfileAccum acc{&prob, o.band, ode::sup_abs(prob.weight()), 0, 0, 0, 0, &P};
    double x2max = 0.0;
    for (int i = 0; i < N; ++i) {
        double t = T * i / N;
        double d = t - axis;
        d -= T * std::floor(d / T);
        double s = d <= 0.5 * T ? d : T - d;
        auto y = half.state(axis + s);
        double x2 = d <= 0.5 * T ? y[1] : -y[1];
        x2max = std::max(x2max, std::abs(x2));
        acc.add(t, y[0], x2);
    }
    acc.finish();
    P.sup = std::max(P.sup, h); // u(axis) = h exactly, the grid may miss the axis
    if (x2max_out) *x2max_out = x2max;
    return P;
}

// W^{1,1} distance between sup-normalized profiles on the shared grid.
double w11_between(const Profile& A, const Profile& B, double T) {
    double sa = A.sup > 0.0 ? A.sup : 1.0;
    double sb = B.sup > 0.0 ? B.sup : 1.0;
    double s = 0.0;
    size_t n = std::min(A.u.size(), B.u.size());
    for (size_t i = 0; i < n; ++i)
        s += std::abs(A.u[i] / sa - B.u[i] / sb) + std::abs(A.up[i] / sa - B.up[i] / sb);
    return s * T / double(n);
}

// Maximal circular runs of a shared slope band, merged across the period
// seam, at least min_len long.
std::vector<ProfileSegment> find_segments(const Profile& P, double T, double band,
                                          double min_len) {
    int n = static_cast<int>(P.up.size());
    std::vector<ProfileSegment> out;
    if (n == 0) return out;
    std::vector<int> b(n);
    for (int i = 0; i < n; ++i) b[i] = band_of(P.up[i], band);

    int start = 0;
    bool uniform = true;
    for (int i = 1; i < n; ++i)
        if (b[i] != b[0]) {
            uniform = false;
            start = i; // first index of a fresh run
            break;
        }
    if (uniform) {
        if (b[0] != 2 && T >= min_len) {
            double mean = 0.0;
            for (double u : P.u) mean += u;
            out.push_back(ProfileSegment{0.0, T, b[0], mean / n});
        }
        return out;
    }
    while (b[(start + n - 1) % n] == b[start]) start = (start + n - 1) % n;

    int i = start;
    int covered = 0;
    while (covered < n) {
        int len = 0;
        int bandv = b[i];
        double mean = 0.0;
        int j = i;
        while (len < n && b[j] == bandv) {
            mean += P.u[j];
            ++len;
            j = (j + 1) % n;
        }
        double dur = T * double(len) / n;
        if (bandv != 2 && dur >= min_len)
            out.push_back(ProfileSegment{P.t[i], P.t[i] + dur, bandv, mean / len});
        covered += len;
        i = j;
    }
    std::sort(out.begin(), out.end(),
              [](const ProfileSegment& u, const ProfileSegment& v) { return u.lo < v.lo; });
    return out;
}

void validate_schedule(const char* who, const std::vector<double>& schedule, bool decades) {
    if (schedule.size() < 2)
        throw ValidationError(std::string(who) + ": schedule needs at least two points");
    if (!(schedule.front() > 0.0))
        throw ValidationError(std::string(who) + ": schedule must be positive");
    for (size_t i = 0; i + 1 < schedule.size(); ++i)
        if (!(schedule[i] < schedule[i + 1]))
            throw ValidationError(std::string(who) + ": schedule must be strictly increasing");
    if (decades && !(schedule.back() >= 1e3 * schedule.front()))
        throw ValidationError(std::string(who) + ": schedule must span at least three decades");
}

void finalize_report(AsymptoticReport& rep, Profile&& last, const Weight& a,
                     const AsymptoticOptions& opts) {
    double T = a.period();
    double min_len = opts.min_segment > 0.0 ? opts.min_segment : T / 100.0;
    rep.limit_segments = find_segments(last, T, opts.band, min_len);
    rep.limit_coverage = last.fm1 + last.f0 + last.fp1;
    rep.limit_t = std::move(last.t);
    rep.limit_u = std::move(last.u);
    rep.limit_up = std::move(last.up);
}

AsymptoticPoint point_from_profile(double lam, double p, const Profile& P) {
    AsymptoticPoint ap;
    ap.lambda = lam;
    ap.sup_norm = P.sup;
    ap.min_u = P.minu;
    ap.scaled_norm = std::pow(lam, 1.0 / p) * P.sup;
    ap.curvature_ratio = P.curvature;
    ap.band_frac_m1 = P.fm1;
    ap.band_frac_0 = P.f0;
    ap.band_frac_p1 = P.fp1;
    ap.band_frac_other = P.foth;
    return ap;
}

// Bisect the symmetric crossing height to machine width around a root already
// bracketed to ~1e-10 relative; psi(h) is the arrival x2 half a period past
// the axis.
double refine_height(const Problem& prob, double axis, double r, const solver::SolverOptions& s) {
    double T = prob.T();
    auto psi = [&](double hh) {
        return ode::flow(prob, {hh, 0.0}, axis, axis + 0.5 * T, s.ode).end_state[1];
    };
    double lo = r * (1.0 - 2e-9), hi = r * (1.0 + 2e-9);
    double flo, fhi;
    try {
        flo = psi(lo);
        fhi = psi(hi);
    } catch (const NumericalError&) {
        return r;
    }
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0)) return r;
    for (int it = 0;
         it < 80 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm;
        try {
            fm = psi(mid);
        } catch (const NumericalError&) {
            break;
        }
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

AsymptoticReport asymptotic_small(const Weight& a, const Nonlinearity& g,
                                  const std::vector<double>& schedule,
                                  const AsymptoticOptions& opts) {
    validate_schedule("asymptotic_small", schedule, true);
    double p = g.origin_exponent();
    AsymptoticReport rep;
    Vec<2> x_prev{};
    double sup_prev = 0.0, scaled_prev = 0.0;
    Profile prev;
    bool have_prev = false;

    // One warm Newton step lam_from -> lam_to under the lambda^{-1/p}
    // contraction; when the stride crosses a basin ridge the interval is
    // split geometrically until each hop converges.
    auto advance = [&](Vec<2> x, double lam_from, double lam_to) {
        solver::ShootResult rs;
        double cur = lam_from;
        while (true) {
            double target = lam_to;
            for (;;) {
                double f = std::pow(cur / target, 1.0 / p);
                Vec<2> guess = {x[0] * f, x[1] * f};
                try {
                    rs = solver::newton_shoot(Problem(a, g, target), guess, 1, opts.solver);
                    break;
                } catch (const NumericalError&) {
                    if (target / cur < 1.05)
                        throw BranchLost(lam_to, "asymptotic_small: Newton lost the family");
                    target = std::sqrt(cur * target);
                }
            }
            x = rs.orbit.x0;
            cur = target;
            if (cur == lam_to) return rs;
        }
    };

    for (size_t i = 0; i < schedule.size(); ++i) {
        double lam = schedule[i];
        Problem prob(a, g, lam);
        solver::ShootResult rs;
        if (i == 0) {
            auto sols = solver::find_solutions(prob, 1, opts.solver);
            const solver::ShootResult* pick = nullptr;
            for (const auto& s : sols)
                if (s.orbit.cls != solver::OrbitClass::Trivial && s.orbit.min_u > 0.0) {
                    pick = &s; // sorted by sup norm: the first hit is the small family
                    break;
                }
            if (!pick)
                throw BranchLost(lam, "asymptotic_small: no positive orbit at the first point");
            rs = *pick;
        } else {
            rs = advance(x_prev, schedule[i - 1], lam);
            if (!(rs.orbit.sup_norm < sup_prev))
                throw BranchLost(lam, "asymptotic_small: sup norm stopped decreasing");
        }
        if (!(rs.orbit.min_u > 0.0))
            throw BranchLost(lam, "asymptotic_small: orbit lost positivity");
        double scaled = std::pow(lam, 1.0 / p) * rs.orbit.sup_norm;
        if (i > 0 && !(scaled > 0.2 * scaled_prev && scaled < 5.0 * scaled_prev))
            throw BranchLost(lam, "asymptotic_small: scaled norm jumped off the family");
        auto rec = solver::verify_orbit(prob, rs.orbit, &rs);
        if (!rec.all_pass)
            throw BranchLost(lam, "asymptotic_small: a-posteriori verification failed");

        Profile P = profile_of_orbit(prob, rs.orbit, opts);
        AsymptoticPoint ap = point_from_profile(lam, p, P);
        ap.sup_norm = rs.orbit.sup_norm;
        ap.min_u = rs.orbit.min_u;
        ap.scaled_norm = scaled;
        ap.newton_iterations = rs.iterations;
        if (have_prev) ap.w11_distance = w11_between(prev, P, a.period());
        rep.points.push_back(ap);

        x_prev = rs.orbit.x0;
        sup_prev = rs.orbit.sup_norm;
        scaled_prev = scaled;
        prev = std::move(P);
        have_prev = true;
    }
    rep.s_p = 0.0;
    for (const auto& q : rep.points) rep.s_p = std::max(rep.s_p, q.scaled_norm);
    finalize_report(rep, std::move(prev), a, opts);
    return rep;
}

AsymptoticReport asymptotic_large(const Weight& a, const Nonlinearity& g,
                                  const std::vector<double>& schedule,
                                  const AsymptoticOptions& opts) {
    validate_schedule("asymptotic_large", schedule, false);
    double p = g.origin_exponent();
    double T = a.period();
    AsymptoticReport rep;
    Profile prev;
    bool have_prev = false;
    double sup_prev = 0.0;

    auto axes = solver::reflection_axes(a);
    if (!axes.empty()) {
        // The axis with the largest local weight average anchors the search
        // inside the dominant positivity hump, where the orbit is tame.
        double axis = axes[0], best = -1e300;
        for (double x : axes) {
            double w = T / 32.0;
            double avg = a.integrate(x - w, x + w) / (2.0 * w);
            if (avg > best) {
                best = avg;
                axis = x;
            }
        }
        double rho = model::threshold_constants(a, g).rho_star;
        double wide_lo = std::max(0.25 * rho, 1e-3);
        double wide_hi = opts.solver.r_max > 0.0 ? opts.solver.r_max : 0.6 * T;
        double h = 0.0;

        for (size_t i = 0; i < schedule.size(); ++i) {
            double lam = schedule[i];
            Problem prob(a, g, lam);
            if (i == 0) {
                auto roots =
                    solver::symmetric_crossing_heights(prob, axis, 1, wide_lo, wide_hi, 48,
                                                       opts.solver);
                if (roots.empty())
                    throw BranchLost(lam,
                                     "asymptotic_large: no symmetric crossing at the first point");
                h = *std::max_element(roots.begin(), roots.end());
            } else {
                auto roots = solver::symmetric_crossing_heights(prob, axis, 1, 0.8 * h, 1.4 * h,
                                                                24, opts.solver);
                if (roots.empty()) {
                    roots = solver::symmetric_crossing_heights(prob, axis, 1, wide_lo, wide_hi,
                                                               48, opts.solver);
                    if (roots.empty())
                        throw BranchLost(lam, "asymptotic_large: crossing height vanished");
                    h = *std::max_element(roots.begin(), roots.end());
                } else {
                    double r = roots[0];
                    for (double q : roots)
                        if (std::abs(q - h) < std::abs(r - h)) r = q;
                    h = r;
                }
            }
            h = refine_height(prob, axis, h, opts.solver);

            // Opportunistic polish: accept the planar section solve only when
            // it agrees with the scalar root, which it refines but must not
            // replace where conditioning breaks it.
            int iters = 0;
            try {
                auto s = solver::solve_at_section(prob, {h, 0.0}, axis, 1, opts.solver);
                if (std::abs(s.x[0] - h) <= 1e-6 * h &&
                    std::abs(s.x[1]) <= 1e-6 * (1.0 + std::abs(s.x[0]))) {
                    h = s.x[0];
                    iters = s.iterations;
                }
            } catch (const NumericalError&) {
            }

            auto half = ode::flow(prob, {h, 0.0}, axis, axis + 0.5 * T, opts.solver.ode);
            double x2max = 0.0;
            Profile P = profile_of_mirror(prob, half, axis, h, opts, &x2max);
            if (!(std::abs(half.end_state[1]) <= 1e-7 * (1.0 + x2max)))
                throw BranchLost(lam, "asymptotic_large: half-period closure defect too large");
            if (!(P.minu > 0.0))
                throw BranchLost(lam, "asymptotic_large: orbit lost positivity");
            if (i > 0 && !(P.sup >= 0.5 * sup_prev))
                throw BranchLost(lam, "asymptotic_large: sup norm collapsed off the family");

            AsymptoticPoint ap = point_from_profile(lam, p, P);
            ap.newton_iterations = iters;
            if (have_prev) ap.w11_distance = w11_between(prev, P, T);
            rep.points.push_back(ap);
            sup_prev = P.sup;
            prev = std::move(P);
            have_prev = true;
        }
    } else {
        // No reflection axis: warm-start the plain period-map Newton, splitting
        // a stride geometrically when a direct hop fails to converge.
        Vec<2> x_prev{};
        auto advance = [&](Vec<2> x, double lam_from, double lam_to) {
            solver::ShootResult rs;
            double cur = lam_from;
            while (true) {
                double target = lam_to;
                for (;;) {
                    try {
                        rs = solver::newton_shoot(Problem(a, g, target), x, 1, opts.solver);
                        break;
                    } catch (const NumericalError&) {
                        if (target / cur < 1.05)
                            throw BranchLost(lam_to, "asymptotic_large: Newton lost the family");
                        target = std::sqrt(cur * target);
                    }
                }
                x = rs.orbit.x0;
                cur = target;
                if (cur == lam_to) return rs;
            }
        };
        for (size_t i = 0; i < schedule.size(); ++i) {
            double lam = schedule[i];
            Problem prob(a, g, lam);
            solver::ShootResult rs;
            if (i == 0) {
                auto sols = solver::find_solutions(prob, 1, opts.solver);
                const solver::ShootResult* pick = nullptr;
                for (const auto& s : sols)
                    if (s.orbit.cls != solver::OrbitClass::Trivial && s.orbit.min_u > 0.0)
                        pick = &s; // sorted by sup norm: the last hit is the large family
                if (!pick)
                    throw BranchLost(lam, "asymptotic_large: no positive orbit at the first point");
                rs = *pick;
            } else {
                rs = advance(x_prev, schedule[i - 1], lam);
            }
            if (!(rs.orbit.min_u > 0.0))
                throw BranchLost(lam, "asymptotic_large: orbit lost positivity");
            if (i > 0 && !(rs.orbit.sup_norm >= 0.5 * sup_prev))
                throw BranchLost(lam, "asymptotic_large: sup norm collapsed off the family");
            auto rec = solver::verify_orbit(prob, rs.orbit, &rs);
            if (!rec.all_pass)
                throw BranchLost(lam, "asymptotic_large: a-posteriori verification failed");

            Profile P = profile_of_orbit(prob, rs.orbit, opts);
            AsymptoticPoint ap = point_from_profile(lam, p, P);
            ap.sup_norm = rs.orbit.sup_norm;
            ap.min_u = rs.orbit.min_u;
            ap.scaled_norm = std::pow(lam, 1.0 / p) * rs.orbit.sup_norm;
            ap.newton_iterations = rs.iterations;
            if (have_prev) ap.w11_distance = w11_between(prev, P, T);
            rep.points.push_back(ap);
            x_prev = rs.orbit.x0;
            sup_prev = rs.orbit.sup_norm;
            prev = std::move(P);
            have_prev = true;
        }
    }
    finalize_report(rep, std::move(prev), a, opts);
    return rep;
}

} // namespace minkper::cont
