#include "minkper/planar.hpp"

#include <cmath>

namespace minkper::ode {

using model::phi_inv;
using model::phi_inv_prime;

double Mat2::cond2() const {
    double s = a * a + b * b + c * c + d * d;
    double dt = det();
    if (dt == 0.0) return std::numeric_limits<double>::infinity();
    double disc = std::sqrt(std::max(0.0, s * s - 4.0 * dt * dt));
    // smax/smin = smax^2 / (smax*smin) = smax^2 / |det|; avoids the cancellation
    // in s - disc when the singular values are far apart.
    return (s + disc) / (2.0 * std::abs(dt));
}

Vec<2> Mat2::solve(const Vec<2>& r) const {
    double dt = det();
    return {(d * r[0] - b * r[1]) / dt, (a * r[1] - c * r[0]) / dt};
}

namespace {

struct PlanarRHS {
    const model::Problem* p;
    void operator()(double t, const Vec<2>& y, Vec<2>& dy) const {
        dy[0] = phi_inv(y[1]);
        dy[1] = -p->force(t, y[0]);
    }
};

struct PlanarVariationalRHS {
    const model::Problem* p;
    void operator()(double t, const Vec<6>& y, Vec<6>& dy) const {
        double dphi = phi_inv_prime(y[1]);
        double dfu = p->force_du(t, y[0]);
        dy[0] = phi_inv(y[1]);
        dy[1] = -p->force(t, y[0]);
        dy[2] = dphi * y[3]; // columns of Z: (y2,y3) and (y4,y5)
        dy[3] = -dfu * y[2];
        dy[4] = dphi * y[5];
        dy[5] = -dfu * y[4];
    }
};

} // namespace

IntegratorConfig make_config(const model::Problem& prob, double t0, double t1,
                             const OdeOptions& opts) {
    IntegratorConfig cfg;
    cfg.rel_tol = opts.rel_tol;
    cfg.abs_tol = opts.abs_tol;
    double T = prob.T();
    cfg.max_step = opts.max_step > 0.0 ? opts.max_step : T / 4.0;
    double lo = std::min(t0, t1), hi = std::max(t0, t1);
    for (double b : prob.weight().breakpoints()) {
        double start = b + T * std::floor((lo - b) / T);
        for (double m = start; m <= hi; m += T)
            if (m > lo && m < hi) cfg.mesh.push_back(m);
    }
    const auto& an = prob.weight().analysis();
    if (opts.lambda_step_cap && prob.lambda() > 1e3 && an.sign_condition) {
        double cap = T / (50.0 * std::sqrt(prob.lambda()));
        for (const auto& I : an.positive) cfg.cap_windows.push_back({I.lo, I.hi, cap});
        cfg.cap_period = T;
    }
    return cfg;
}

Trajectory<2> flow(const model::Problem& prob, Vec<2> x0, double t0, double t1,
                   const OdeOptions& opts) {
    return integrate<2>(PlanarRHS{&prob}, t0, t1, x0, make_config(prob, t0, t1, opts));
}

FlowJacobian flow_with_jacobian(const model::Problem& prob, Vec<2> x0, double t0, double t1,
                                const OdeOptions& opts) {
    Vec<6> y0 = {x0[0], x0[1], 1.0, 0.0, 0.0, 1.0};
    FlowJacobian out;
    out.traj =
        integrate<6>(PlanarVariationalRHS{&prob}, t0, t1, y0, make_config(prob, t0, t1, opts));
    const Vec<6>& e = out.traj.end_state;
    out.end = {e[0], e[1]};
    out.jac = Mat2{e[2], e[4], e[3], e[5]};
    for (const auto& s : out.traj.steps) {
        if (s.r1[0] <= 0.0) {
            out.crossed_zero = true;
            break;
        }
    }
    if (out.traj.end_state[0] <= 0.0) out.crossed_zero = true;
    return out;
}

double second_derivative_residual(const model::Problem& prob, const Trajectory<2>& traj,
                                  double* scale) {
    double worst = 0.0, umax = 0.0, amax = sup_abs(prob.weight());
    for (const auto& s : traj.steps) {
        double h = std::abs(s.h);
        if (h < 1e-12) continue;
        double tm = s.t0 + s.h / 2.0;
        double del = s.h / 8.0;
        auto up = [&](double t) { return phi_inv(traj.state(t)[1]); };
        Vec<2> xm = traj.state(tm);
        if (xm[0] <= 0.0) continue;
        // 4th-order central difference: near |u'| = 1 the slope varies fast
        // enough that the 2nd-order stencil's truncation error dominates the
        // integrator's own error.
        double upp = (up(tm - 2.0 * del) - 8.0 * up(tm - del) + 8.0 * up(tm + del) -
                      up(tm + 2.0 * del)) /
                     (12.0 * del);
        double s32 = std::pow(1.0 + xm[1] * xm[1], -1.5); // (1 - (u')^2)^(3/2)
        double res = std::abs(upp + prob.lambda() * prob.weight()(tm) *
                                        prob.nonlinearity().g(xm[0]) * s32);
        worst = std::max(worst, res);
        umax = std::max(umax, xm[0]);
    }
    if (scale)
        *scale = prob.lambda() * amax * (umax > 0.0 ? prob.nonlinearity().g(umax) : 1.0);
    return worst;
}

double hamiltonian(const model::Problem& prob, const Vec<2>& x) {
    double kin = std::sqrt(1.0 + x[1] * x[1]) - 1.0;
    double pot;
    if (x[0] <= 0.0) {
        pot = -x[0] * x[0] / 2.0;
    } else {
        // composite Simpson for the potential of the extended force
        int n = 256;
        double h = x[0] / n, acc = 0.0;
        auto f = [&](double u) { return prob.force(0.0, u); };
        for (int i = 0; i < n; ++i)
            acc += h / 6.0 * (f(i * h) + 4.0 * f((i + 0.5) * h) + f((i + 1) * h));
        pot = acc;
    }
    return kin + pot;
}

double sup_abs(const model::Weight& a) {
    if (a.is_trig()) return a.trig().amplitude + std::abs(a.trig().offset);
    double m = 0.0;
    for (double v : a.piecewise().values) m = std::max(m, std::abs(v));
    return m;
}

} // namespace minkper::ode
