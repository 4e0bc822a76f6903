#pragma once

#include "minkper/nonlinearity.hpp"
#include "minkper/weight.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace minkper::model {

// The full datum of one periodic problem: sign-changing weight a(t), origin
// nonlinearity g(u), and the parameter lambda multiplying the weight.  The
// force is extended below u = 0 by f(t,u) = -u, which keeps the planar field
// continuous and makes every periodic solution automatically non-negative.
class Problem {
public:
    Problem(Weight a, Nonlinearity g, double lambda);

    const Weight& weight() const { return a_; }
    const Nonlinearity& nonlinearity() const { return g_; }
    double lambda() const { return lambda_; }
    double T() const { return a_.period(); }

    double force(double t, double u) const {
        return u <= 0.0 ? -u : lambda_ * a_(t) * g_.g(u);
    }
    // d/du of the force; at u = 0 the one-sided derivatives differ (-1 from
    // below, 0 from above) and the value for u > 0 is used.
    double force_du(double t, double u) const {
        return u < 0.0 ? -1.0 : lambda_ * a_(t) * g_.dg(u);
    }

    Problem with_lambda(double lambda) const { return Problem(a_, g_, lambda); }

private:
    Weight a_;
    Nonlinearity g_;
    double lambda_;
};

// Constants certifying the small-amplitude nonexistence window.  rho_star is
// the largest dyadic grid value satisfying, with a 10% margin, both
//   rho < |I_i| / 4   and   integral of a over [sigma_i + 2 rho, tau_i - 2 rho] > 0
// for every positivity interval I_i = [sigma_i, tau_i]; lambda_star is the
// induced parameter threshold
//   max_i  2 phi(1/2) / ( min{ g on [2 rho^2/|I_i|, rho] } * inner integral_i ).
// Below lambda_star no positive periodic solution can have its maximum over
// every I_i at or below rho_star.
struct ThresholdConstants {
    double rho_star = 0.0;
    double lambda_star = 0.0;
    std::vector<double> inner_integrals; // per positivity interval, at rho_star
    std::vector<double> g_minima;        // min of g over the induced range, per interval
    double grid_cap = 0.0;               // upper end of the dyadic search grid
    int grid_index = 0;                  // chosen numerator over GRID_DENOM
    static constexpr int GRID_DENOM = 256;
    static constexpr double MARGIN = 0.1;
};

ThresholdConstants threshold_constants(const Weight& a, const Nonlinearity& g);

// Left side minus right side of the localized amplitude bound
//   lambda * min{ g on [2 c1 rho/|I_i|, c2] } * inner_integral_i  <=  2 phi(c2 / (2 rho))
// for a solution whose maximum over I_i lies in [c1, c2] with c2 <= rho.
// Negative or zero slack means the bound holds.
double amplitude_bound_slack(const Weight& a, const Nonlinearity& g, double lambda,
                             size_t interval_index, double c1, double c2, double rho);

// The averaged scalar force (1/T) * integral of f(t, s) dt: equal to -s for
// s <= 0 and lambda * mean(a) * g(s) for s >= 0.  Its Brouwer degree on
// ]-d, d[ predicts the degree of the full problem on large balls.
struct DegreeDiagnostics {
    double d = 0.0;
    std::vector<std::pair<double, double>> samples; // (s, averaged force)
    int degree = 0;                                 // -1, 0, or +1
    bool undefined = false;                         // a zero landed on the boundary
};

DegreeDiagnostics average_map_degree(const Problem& prob, double d, int n_samples = 65);

} // namespace minkper::model
