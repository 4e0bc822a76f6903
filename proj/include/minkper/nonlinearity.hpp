#pragma once

#include <string>
#include <variant>

namespace minkper::model {

// g(u) = u^p, p > 1.
struct PowerLaw {
    double p = 3.0;
};

// g(u) = u^p / (1 + u^(p-q)), 0 <= q <= 1 < p: behaves like u^p near zero and
// like u^q at infinity.
struct SaturatedPower {
    double p = 3.0;
    double q = 0.5;
};

// Structural properties the theory needs from g; for both supported families
// every flag follows from the parameter ranges, so they are set analytically.
struct HypothesisReport {
    bool positive_and_increasing = false;   // g(0) = 0, g > 0 and g' > 0 on ]0,inf[
    bool superlinear_at_zero = false;       // g(u)/u -> 0 as u -> 0+
    bool differentiable_at_zero = false;    // g in C^1 near 0 with g'(0) = 0
    bool power_behavior_at_zero = false;    // g(u)/u^p -> c_p in ]0,inf[
    double c_p = 0.0;                       // the limit above (1 for both families)
    double p = 0.0;                         // exponent governing the origin
    bool controlled_at_infinity = false;    // regular growth of g at infinity
    bool flat_ratio_at_infinity = false;    // g'(u)/g(u) -> 0 as u -> inf
    bool damped_derivative_at_infinity = false; // sup g'(u)/g(u)^eta < inf for some eta < 1
    bool convex_near_zero = false;          // g'' > 0 near 0 and g'/g'' -> 0 (twist theory)
    std::string growth_label;               // human-readable growth description
};

class Nonlinearity {
public:
    explicit Nonlinearity(PowerLaw form);
    explicit Nonlinearity(SaturatedPower form);

    double g(double u) const;   // u >= 0
    double dg(double u) const;  // u > 0 (continuous extension 0 at u = 0 when p > 1)
    double d2g(double u) const; // u > 0

    double origin_exponent() const; // the p of the u^p behavior at zero
    const HypothesisReport& hypotheses() const { return report_; }

    bool is_power() const { return std::holds_alternative<PowerLaw>(form_); }
    const PowerLaw& power() const { return std::get<PowerLaw>(form_); }
    const SaturatedPower& saturated() const { return std::get<SaturatedPower>(form_); }

private:
    std::variant<PowerLaw, SaturatedPower> form_;
    HypothesisReport report_;
};

} // namespace minkper::model
