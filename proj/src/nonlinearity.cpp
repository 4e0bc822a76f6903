#include "minkper/nonlinearity.hpp"
#include "minkper/errors.hpp"

#include <cmath>

namespace minkper::model {

namespace {

void check_domain(double u, const char* who) {
    if (!(u >= 0.0))
        throw std::domain_error(std::string(who) + ": argument must be >= 0");
}

} // namespace

Nonlinearity::Nonlinearity(PowerLaw form) : form_(form) {
    if (!(std::isfinite(form.p) && form.p > 1.0))
        throw ValidationError("nonlinearity: power law requires p > 1");
    report_.positive_and_increasing = true;
    report_.superlinear_at_zero = true;
    report_.differentiable_at_zero = true;
    report_.power_behavior_at_zero = true;
    report_.c_p = 1.0;
    report_.p = form.p;
    report_.controlled_at_infinity = true;
    report_.flat_ratio_at_infinity = true;       // g'/g = p/u -> 0
    report_.damped_derivative_at_infinity = true; // g'/g^eta bounded for eta in [1-1/p, 1)
    report_.convex_near_zero = true;             // g'' = p(p-1)u^(p-2) > 0, g'/g'' = u/(p-1) -> 0
    report_.growth_label = "power u^p at infinity";
}

Nonlinearity::Nonlinearity(SaturatedPower form) : form_(form) {
    if (!(std::isfinite(form.p) && std::isfinite(form.q) && form.p > 1.0 && form.q >= 0.0 &&
          form.q <= 1.0))
        throw ValidationError("nonlinearity: saturated power requires 0 <= q <= 1 < p");
    report_.positive_and_increasing = true;
    report_.superlinear_at_zero = true;
    report_.differentiable_at_zero = true;
    report_.power_behavior_at_zero = true;
    report_.c_p = 1.0;
    report_.p = form.p;
    report_.controlled_at_infinity = true;        // g ~ u^q (bounded when q = 0)
    report_.flat_ratio_at_infinity = true;        // g'/g ~ q/u -> 0
    report_.damped_derivative_at_infinity = true; // g' ~ q u^(q-1) is bounded (q <= 1)
    report_.convex_near_zero = true;
    report_.growth_label = form.q == 0.0 ? "bounded at infinity" : "power u^q at infinity";
}

double Nonlinearity::g(double u) const {
    check_domain(u, "g");
    if (const auto* pw = std::get_if<PowerLaw>(&form_)) return std::pow(u, pw->p);
    const auto& sp = std::get<SaturatedPower>(form_);
    return std::pow(u, sp.p) / (1.0 + std::pow(u, sp.p - sp.q));
}

double Nonlinearity::dg(double u) const {
    check_domain(u, "dg");
    if (const auto* pw = std::get_if<PowerLaw>(&form_)) {
        if (u == 0.0) return 0.0; // p > 1
        return pw->p * std::pow(u, pw->p - 1.0);
    }
    const auto& sp = std::get<SaturatedPower>(form_);
    if (u == 0.0) return 0.0;
    double r = sp.p - sp.q;
    double ur = std::pow(u, r);
    double D = 1.0 + ur;
    return std::pow(u, sp.p - 1.0) * (sp.p + sp.q * ur) / (D * D);
}

double Nonlinearity::d2g(double u) const {
    check_domain(u, "d2g");
    if (const auto* pw = std::get_if<PowerLaw>(&form_)) {
        if (u == 0.0) return 0.0; // taken as the limit for p > 2; callers keep u > 0
        return pw->p * (pw->p - 1.0) * std::pow(u, pw->p - 2.0);
    }
    const auto& sp = std::get<SaturatedPower>(form_);
    if (u == 0.0) return 0.0;
    double p = sp.p, q = sp.q, r = p - q;
    double ur = std::pow(u, r);
    double D = 1.0 + ur;
    double inner = ((p - 1.0) * (p + q * ur) + q * r * ur) * D - 2.0 * r * ur * (p + q * ur);
    return std::pow(u, p - 2.0) * inner / (D * D * D);
}

double Nonlinearity::origin_exponent() const { return report_.p; }

} // namespace minkper::model
