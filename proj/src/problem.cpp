#include "minkper/problem.hpp"
#include "minkper/errors.hpp"
#include "minkper/phi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace minkper::model {

Problem::Problem(Weight a, Nonlinearity g, double lambda)
    : a_(std::move(a)), g_(std::move(g)), lambda_(lambda) {
    if (!(std::isfinite(lambda) && lambda > 0.0))
        throw ValidationError("problem: lambda must be positive");
}

namespace {

// min of g over [lo, hi]: g is strictly increasing for both supported
// families, so the minimum sits at lo; a coarse sweep guards the assumption.
double min_g_on(const Nonlinearity& g, double lo, double hi) {
    double m = g.g(lo);
    for (int i = 1; i <= 64; ++i) m = std::min(m, g.g(lo + (hi - lo) * i / 64.0));
    return m;
}

} // namespace

ThresholdConstants threshold_constants(const Weight& a, const Nonlinearity& g) {
    const auto& an = a.analysis();
    if (!an.sign_condition || an.positive.empty())
        throw ValidationError("threshold_constants: weight has no positivity interval");
    for (const auto& I : an.positive)
        if (I.length() >= a.period())
            throw ValidationError("threshold_constants: weight is nonnegative everywhere");

    ThresholdConstants out;
    double cap = std::numeric_limits<double>::infinity();
    for (const auto& I : an.positive) cap = std::min(cap, I.length() / 4.0);
    out.grid_cap = cap;

    auto feasible = [&](double rho) {
        if (rho > (1.0 - ThresholdConstants::MARGIN) * cap) return false;
        for (size_t i = 0; i < an.positive.size(); ++i) {
            const auto& I = an.positive[i];
            double inner = a.integrate(I.lo + 2.0 * rho, I.hi - 2.0 * rho);
            if (inner < ThresholdConstants::MARGIN * an.positive_integrals[i]) return false;
        }
        return true;
    };

    int chosen = 0;
    for (int j = ThresholdConstants::GRID_DENOM - 1; j >= 1; --j) {
        if (feasible(cap * j / ThresholdConstants::GRID_DENOM)) {
            chosen = j;
            break;
        }
    }
    if (chosen == 0)
        throw NumericalError("threshold_constants: no feasible radius on the search grid");
    out.grid_index = chosen;
    out.rho_star = cap * chosen / ThresholdConstants::GRID_DENOM;

    double lam = 0.0;
    for (size_t i = 0; i < an.positive.size(); ++i) {
        const auto& I = an.positive[i];
        double inner = a.integrate(I.lo + 2.0 * out.rho_star, I.hi - 2.0 * out.rho_star);
        double glo = 2.0 * out.rho_star * out.rho_star / I.length();
        double gm = min_g_on(g, glo, out.rho_star);
        out.inner_integrals.push_back(inner);
        out.g_minima.push_back(gm);
        lam = std::max(lam, 2.0 * phi(0.5) / (gm * inner));
    }
    out.lambda_star = lam;
    return out;
}

double amplitude_bound_slack(const Weight& a, const Nonlinearity& g, double lambda,
                             size_t interval_index, double c1, double c2, double rho) {
    const auto& an = a.analysis();
    if (interval_index >= an.positive.size())
        throw ValidationError("amplitude_bound_slack: interval index out of range");
    const auto& I = an.positive[interval_index];
    if (!(c1 > 0.0 && c1 <= c2 && c2 <= rho))
        throw ValidationError("amplitude_bound_slack: need 0 < c1 <= c2 <= rho");
    double inner = a.integrate(I.lo + 2.0 * rho, I.hi - 2.0 * rho);
    double glo = 2.0 * c1 * rho / I.length();
    double lhs = lambda * min_g_on(g, std::min(glo, c2), c2) * inner;
    double rhs = 2.0 * phi(c2 / (2.0 * rho));
    return lhs - rhs;
}

DegreeDiagnostics average_map_degree(const Problem& prob, double d, int n_samples) {
    if (!(d > 0.0)) throw ValidationError("average_map_degree: window radius must be positive");
    if (n_samples < 3) throw ValidationError("average_map_degree: need at least 3 samples");
    DegreeDiagnostics out;
    out.d = d;
    double mean_a = prob.weight().mean();
    auto favg = [&](double s) {
        return s <= 0.0 ? -s : prob.lambda() * mean_a * prob.nonlinearity().g(s);
    };
    for (int i = 0; i < n_samples; ++i) {
        double s = -d + 2.0 * d * i / (n_samples - 1);
        out.samples.emplace_back(s, favg(s));
    }
    double flo = favg(-d), fhi = favg(d);
    if (flo == 0.0 || fhi == 0.0) {
        out.undefined = true;
        out.degree = 0;
        return out;
    }
    if (flo > 0.0 && fhi < 0.0)
        out.degree = -1;
    else if (flo < 0.0 && fhi > 0.0)
        out.degree = +1;
    else
        out.degree = 0;
    return out;
}

} // namespace minkper::model
