#pragma once

#include <variant>
#include <vector>

namespace minkper::model {

// a(t) = amplitude * cos(2*pi*(t - phase)/T) + offset.  For T = 2*pi this is
// the familiar shifted cosine; the frequency scales with the period so the
// weight is T-periodic for any T.
struct TrigShifted {
    double amplitude = 1.0;
    double phase = 0.0;
    double offset = 0.0;
};

// Piecewise constant on [breakpoints[i], breakpoints[i+1]), wrapping from the
// last breakpoint through T back to breakpoints[0].  Breakpoints live in
// [0, T), strictly increasing, one value per segment.
struct PiecewiseConstant {
    std::vector<double> breakpoints;
    std::vector<double> values;
};

// One closed sub-interval of the period circle where the weight is > 0.
// lo is normalized into [0, T); hi may exceed T when the interval wraps the
// period seam (so hi - lo is always the length).
struct SignInterval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

struct WeightAnalysis {
    std::vector<SignInterval> positive;      // the intervals I_i where a > 0
    std::vector<double> positive_integrals;  // exact integral of a over each
    double mean = 0.0;                       // (1/T) * integral over a period
    bool sign_condition = false;  // finitely many positivity intervals, a <= 0 outside
    bool negative_mean = false;   // integral of a over a period is < 0
};

// T-periodic stepwise/trigonometric weight with exact integration.
class Weight {
public:
    Weight(double period, TrigShifted form);
    Weight(double period, PiecewiseConstant form);

    double period() const { return period_; }
    double operator()(double t) const;          // right-continuous at jumps
    double integrate(double t0, double t1) const; // exact closed-form integral
    double mean() const;

    // Jump locations within [0, period); empty for the smooth form.  The
    // integrator must place mesh points at every period image of these.
    const std::vector<double>& breakpoints() const { return breakpoints_; }

    const WeightAnalysis& analysis() const { return analysis_; }

    bool is_trig() const { return std::holds_alternative<TrigShifted>(form_); }
    const TrigShifted& trig() const { return std::get<TrigShifted>(form_); }
    const PiecewiseConstant& piecewise() const { return std::get<PiecewiseConstant>(form_); }

private:
    double period_;
    std::variant<TrigShifted, PiecewiseConstant> form_;
    std::vector<double> breakpoints_;
    std::vector<double> cumulative_; // running integral at each breakpoint (piecewise form)
    WeightAnalysis analysis_;

    void analyze();
};

} // namespace minkper::model
