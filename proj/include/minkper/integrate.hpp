#pragma once

#include "minkper/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace minkper::ode {

template <int N>
using Vec = std::array<double, N>;

// Windows on the period circle where the step size is capped (used to resolve
// fast rotation inside weight-positivity intervals at large lambda).
struct CapWindow {
    double lo = 0.0;   // in [0, period)
    double hi = 0.0;   // may exceed period when the window wraps
    double cap = std::numeric_limits<double>::infinity();
};

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0; // 0 = choose automatically
    // Times the integrator must land on exactly (weight jumps, period marks).
    // Crossing one resets the step-size controller, so integrating a span in
    // one call or split at these times gives bit-identical results.
    std::vector<double> mesh;
    std::vector<CapWindow> cap_windows;
    double cap_period = 0.0; // period for the cap windows; 0 disables them
};

struct StepStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
};

// One accepted step with the quartic dense-output coefficients.
template <int N>
struct Step {
    double t0 = 0.0;
    double h = 0.0; // signed
    Vec<N> r1{}, r2{}, r3{}, r4{}, r5{};
};

template <int N>
class Trajectory {
public:
    double t_begin = 0.0, t_end = 0.0;
    Vec<N> begin_state{}, end_state{};
    std::vector<Step<N>> steps;
    StepStats stats;

    // Dense evaluation; t is clamped into the integration span.
    Vec<N> state(double t) const {
        const Step<N>& s = locate(t);
        double x = (t - s.t0) / s.h;
        x = std::clamp(x, 0.0, 1.0);
        double x1 = 1.0 - x;
        Vec<N> y;
        for (int i = 0; i < N; ++i)
            y[i] = s.r1[i] + x * (s.r2[i] + x1 * (s.r3[i] + x * (s.r4[i] + x1 * s.r5[i])));
        return y;
    }

private:
    const Step<N>& locate(double t) const {
        // Steps are ordered by t0 in the direction of integration.
        bool fwd = t_end >= t_begin;
        size_t lo = 0, hi = steps.size();
        while (hi - lo > 1) {
            size_t mid = (lo + hi) / 2;
            bool before = fwd ? (steps[mid].t0 <= t) : (steps[mid].t0 >= t);
            if (before)
                lo = mid;
            else
                hi = mid;
        }
        return steps[lo];
    }
};

namespace detail {

// Dormand-Prince 5(4) coefficients, with the standard quartic interpolant.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

} // namespace detail

template <int N, class RHS>
Trajectory<N> integrate(const RHS& rhs, double t0, double t1, Vec<N> y0,
                        const IntegratorConfig& cfg) {
    Trajectory<N> traj;
    traj.t_begin = t0;
    traj.t_end = t1;
    traj.begin_state = y0;
    if (t1 == t0) {
        traj.end_state = y0;
        return traj;
    }
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    const double h_min = 1e-14 * span;
    const double snap = 1e-12 * span;

    // Stop list: interior mesh points in direction order, then the endpoint.
    std::vector<double> stops;
    for (double m : cfg.mesh)
        if ((m - t0) * dir > snap && (t1 - m) * dir > snap) stops.push_back(m);
    std::sort(stops.begin(), stops.end(),
              [&](double a, double b) { return (a - t0) * dir < (b - t0) * dir; });
    stops.erase(std::unique(stops.begin(), stops.end(),
                            [&](double a, double b) { return std::abs(a - b) <= snap; }),
                stops.end());
    stops.push_back(t1);

    auto fold = [](double t, double P) {
        double r = std::fmod(t, P);
        if (r < 0.0) r += P;
        return r;
    };
    // Largest |h| allowed by the cap windows from time t moving in `dir`.
    auto window_limit = [&](double t) {
        double lim = std::numeric_limits<double>::infinity();
        if (cfg.cap_period <= 0.0 || cfg.cap_windows.empty()) return lim;
        double P = cfg.cap_period;
        double tm = fold(t, P);
        for (const auto& w : cfg.cap_windows) {
            bool inside = (tm >= w.lo && tm <= w.hi) || (tm + P >= w.lo && tm + P <= w.hi);
            if (inside) {
                lim = std::min(lim, w.cap);
            } else {
                double edge = dir > 0 ? w.lo : fold(w.hi, P);
                double d = dir > 0 ? fold(edge - tm, P) : fold(tm - edge, P);
                if (d > 1e-12 * P) lim = std::min(lim, d);
            }
        }
        return lim;
    };

    Vec<N> y = y0, k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, ytmp{}, ynew{};
    double t = t0;
    size_t stop_idx = 0;

    auto eval = [&](double tt, const Vec<N>& yy, Vec<N>& out) {
        rhs(tt, yy, out);
        ++traj.stats.rhs_evals;
    };

    auto rms = [&](const Vec<N>& v, const Vec<N>& sc) {
        double s = 0.0;
        for (int i = 0; i < N; ++i) {
            double r = v[i] / sc[i];
            s += r * r;
        }
        return std::sqrt(s / N);
    };

    // Automatic initial step (deterministic, re-run after every mesh landing).
    auto initial_step = [&]() {
        if (cfg.initial_step > 0.0) return std::min(cfg.initial_step, span);
        Vec<N> sc, f0, f1, yt;
        eval(t, y, f0);
        for (int i = 0; i < N; ++i) sc[i] = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
        double d0 = rms(y, sc), d1 = rms(f0, sc);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        for (int i = 0; i < N; ++i) yt[i] = y[i] + dir * h0 * f0[i];
        eval(t + dir * h0, yt, f1);
        double d2 = 0.0;
        for (int i = 0; i < N; ++i) {
            double r = (f1[i] - f0[i]) / sc[i];
            d2 += r * r;
        }
        d2 = std::sqrt(d2 / N) / h0;
        double dm = std::max(d1, d2);
        double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        return std::min({100.0 * h0, h1, span});
    };

    double h = initial_step();
    bool have_k1 = false;

    while (true) {
        double to_stop = std::abs(stops[stop_idx] - t);
        if (to_stop <= snap) {
            // Landed on a stop by accumulation; treat as exact.
            t = stops[stop_idx];
            if (stop_idx + 1 == stops.size()) break;
            ++stop_idx;
            h = initial_step();
            have_k1 = false;
            continue;
        }
        double h_use = std::min({h, cfg.max_step, window_limit(t), to_stop});
        bool landing = h_use >= to_stop * (1.0 - 1e-10);
        if (landing) h_use = to_stop;
        if (h_use < h_min)
            throw StepSizeUnderflow(t, "integrate: step size underflow");

        if (!have_k1) {
            eval(t, y, k1);
            have_k1 = true;
        }
        const double hh = dir * h_use;
        // Stages at the right end of a landing step sample one ulp inside the
        // interval: stops mark coefficient jumps, and a right-continuous
        // sampler evaluated exactly on the stop would feed the wrong side into
        // k6/k7 (polluting the error estimate and the dense output).
        const double t_end_eval =
            landing ? std::nextafter(stops[stop_idx], t) : t + hh;
        using namespace detail;
        for (int i = 0; i < N; ++i) ytmp[i] = y[i] + hh * a21 * k1[i];
        eval(t + hh * c2, ytmp, k2);
        for (int i = 0; i < N; ++i) ytmp[i] = y[i] + hh * (a31 * k1[i] + a32 * k2[i]);
        eval(t + hh * c3, ytmp, k3);
        for (int i = 0; i < N; ++i)
            ytmp[i] = y[i] + hh * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        eval(t + hh * c4, ytmp, k4);
        for (int i = 0; i < N; ++i)
            ytmp[i] = y[i] + hh * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        eval(t + hh * c5, ytmp, k5);
        for (int i = 0; i < N; ++i)
            ytmp[i] =
                y[i] + hh * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        eval(t_end_eval, ytmp, k6);
        for (int i = 0; i < N; ++i)
            ynew[i] = y[i] + hh * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        eval(t_end_eval, ynew, k7);

        double err = 0.0;
        for (int i = 0; i < N; ++i) {
            double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            double e = hh * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                             e7 * k7[i]);
            double r = e / sc;
            err += r * r;
        }
        err = std::sqrt(err / N);

        if (err <= 1.0) {
            Step<N> st;
            st.t0 = t;
            st.h = hh;
            for (int i = 0; i < N; ++i) {
                double dy = ynew[i] - y[i];
                double bspl = hh * k1[i] - dy;
                st.r1[i] = y[i];
                st.r2[i] = dy;
                st.r3[i] = bspl;
                st.r4[i] = dy - hh * k7[i] - bspl;
                st.r5[i] = hh * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                                 d7 * k7[i]);
            }
            traj.steps.push_back(st);
            ++traj.stats.accepted;
            y = ynew;
            if (landing) {
                t = stops[stop_idx];
                if (stop_idx + 1 == stops.size()) break;
                ++stop_idx;
                h = initial_step();
                have_k1 = false;
            } else {
                t += hh;
                double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                h = h_use * fac;
                k1 = k7; // first-same-as-last
            }
        } else {
            ++traj.stats.rejected;
            double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
            h = h_use * fac;
            if (h < h_min)
                throw StepSizeUnderflow(t, "integrate: step size underflow after rejection");
        }
    }
    traj.t_end = t;
    traj.end_state = y;
    if (traj.steps.empty()) { // zero-length span after snapping
        Step<N> st;
        st.t0 = t0;
        st.h = dir * snap;
        st.r1 = y0;
        traj.steps.push_back(st);
    }
    return traj;
}

} // namespace minkper::ode
