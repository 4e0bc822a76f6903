#pragma once

#include "minkper/integrate.hpp"
#include "minkper/phi.hpp"
#include "minkper/problem.hpp"

namespace minkper::ode {

// 2x2 helpers for monodromy/Newton algebra.
struct Mat2 {
    double a = 0, b = 0, c = 0, d = 0; // [[a, b], [c, d]]
    double det() const { return a * d - b * c; }
    double cond2() const; // 2-norm condition number via singular values
    Vec<2> solve(const Vec<2>& r) const;
};

struct OdeOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.0;       // 0 = period / 4
    bool lambda_step_cap = true; // cap steps on positivity intervals when lambda > 1e3
};

// State convention: x1 = u, x2 = phi(u'), so x1' = phi_inv(x2), x2' = -f(t, x1).
Trajectory<2> flow(const model::Problem& prob, Vec<2> x0, double t0, double t1,
                   const OdeOptions& opts);

// Co-integrates the variational system along the trajectory; returns the end
// state and the fundamental matrix over [t0, t1] (columns = solutions with
// Z(t0) = I).
struct FlowJacobian {
    Vec<2> end;
    Mat2 jac;
    Trajectory<6> traj; // [x1 x2 z11 z21 z12 z22]
    bool crossed_zero = false; // trajectory touched x1 <= 0 (variational data suspect)
};
FlowJacobian flow_with_jacobian(const model::Problem& prob, Vec<2> x0, double t0, double t1,
                                const OdeOptions& opts);

// Shared construction of the integrator configuration (mesh at weight jumps,
// fast-rotation caps) for a span [t0, t1].
IntegratorConfig make_config(const model::Problem& prob, double t0, double t1,
                             const OdeOptions& opts);

// Max over step midpoints of |u'' + lambda a(t) g(u) (1-(u')^2)^(3/2)| with u''
// obtained by differentiating the dense output, evaluated where u > 0; `scale`
// receives lambda * sup|a| * max g(u) for relative comparisons.
double second_derivative_residual(const model::Problem& prob, const Trajectory<2>& traj,
                                  double* scale = nullptr);

// Hamiltonian (kinetic + potential) for autonomous-weight conservation checks:
// H = sqrt(1 + x2^2) - 1 + integral_0^{x1} f(s) ds, valid when a is constant.
double hamiltonian(const model::Problem& prob, const Vec<2>& x);

double sup_abs(const model::Weight& a);

} // namespace minkper::ode
