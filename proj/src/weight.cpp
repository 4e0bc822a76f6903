#include "minkper/weight.hpp"
#include "minkper/errors.hpp"

#include <algorithm>
#include <cmath>

namespace minkper::model {

namespace {

double fold(double t, double T) {
    double r = std::fmod(t, T);
    if (r < 0.0) r += T;
    return r;
}

void require(bool ok, const char* msg) {
    if (!ok) throw ValidationError(msg);
}

} // namespace

Weight::Weight(double period, TrigShifted form) : period_(period), form_(form) {
    require(std::isfinite(period) && period > 0.0, "weight: period must be positive");
    require(std::isfinite(form.amplitude) && form.amplitude > 0.0,
            "weight: amplitude must be positive");
    require(std::isfinite(form.phase) && std::isfinite(form.offset),
            "weight: phase/offset must be finite");
    analyze();
}

Weight::Weight(double period, PiecewiseConstant form) : period_(period), form_(std::move(form)) {
    require(std::isfinite(period) && period > 0.0, "weight: period must be positive");
    const auto& pc = std::get<PiecewiseConstant>(form_);
    require(!pc.breakpoints.empty(), "weight: breakpoints must be non-empty");
    require(pc.breakpoints.size() == pc.values.size(),
            "weight: breakpoints and values must have equal length");
    for (size_t i = 0; i < pc.breakpoints.size(); ++i) {
        require(std::isfinite(pc.breakpoints[i]) && std::isfinite(pc.values[i]),
                "weight: breakpoints and values must be finite");
        require(pc.breakpoints[i] >= 0.0 && pc.breakpoints[i] < period,
                "weight: breakpoints must lie in [0, period)");
        if (i > 0)
            require(pc.breakpoints[i] > pc.breakpoints[i - 1],
                    "weight: breakpoints must be strictly increasing");
    }
    breakpoints_ = pc.breakpoints;
    // Running integral of a from 0 to each breakpoint; the segment before
    // breakpoints[0] (wrapping from the previous period) carries values.back().
    cumulative_.resize(breakpoints_.size());
    double acc = breakpoints_[0] * pc.values.back();
    for (size_t i = 0; i < breakpoints_.size(); ++i) {
        cumulative_[i] = acc;
        double hi = (i + 1 < breakpoints_.size()) ? breakpoints_[i + 1] : period_;
        acc += (hi - breakpoints_[i]) * pc.values[i];
    }
    analyze();
}

double Weight::operator()(double t) const {
    if (const auto* tg = std::get_if<TrigShifted>(&form_)) {
        double w = 2.0 * M_PI / period_;
        return tg->amplitude * std::cos(w * (t - tg->phase)) + tg->offset;
    }
    const auto& pc = std::get<PiecewiseConstant>(form_);
    double r = fold(t, period_);
    auto it = std::upper_bound(pc.breakpoints.begin(), pc.breakpoints.end(), r);
    if (it == pc.breakpoints.begin()) return pc.values.back(); // before first breakpoint
    return pc.values[size_t(it - pc.breakpoints.begin()) - 1];
}

double Weight::integrate(double t0, double t1) const {
    if (const auto* tg = std::get_if<TrigShifted>(&form_)) {
        double w = 2.0 * M_PI / period_;
        auto F = [&](double t) {
            return tg->amplitude / w * std::sin(w * (t - tg->phase)) + tg->offset * t;
        };
        return F(t1) - F(t0);
    }
    const auto& pc = std::get<PiecewiseConstant>(form_);
    double total = mean() * period_;
    auto F = [&](double t) { // integral from 0 to t, any real t
        double n = std::floor(t / period_);
        double r = t - n * period_;
        double partial;
        auto it = std::upper_bound(pc.breakpoints.begin(), pc.breakpoints.end(), r);
        if (it == pc.breakpoints.begin()) {
            partial = r * pc.values.back();
        } else {
            size_t i = size_t(it - pc.breakpoints.begin()) - 1;
            partial = cumulative_[i] + (r - pc.breakpoints[i]) * pc.values[i];
        }
        return n * total + partial;
    };
    return F(t1) - F(t0);
}

double Weight::mean() const {
    if (const auto* tg = std::get_if<TrigShifted>(&form_))
        return tg->offset; // the cosine integrates to zero over a full period
    const auto& pc = std::get<PiecewiseConstant>(form_);
    double acc = 0.0;
    for (size_t i = 0; i < pc.breakpoints.size(); ++i) {
        double hi = (i + 1 < pc.breakpoints.size()) ? pc.breakpoints[i + 1] : period_;
        double lo = pc.breakpoints[i];
        acc += (hi - lo) * pc.values[i];
    }
    acc += pc.breakpoints[0] * pc.values.back();
    return acc / period_;
}

void Weight::analyze() {
    analysis_ = WeightAnalysis{};
    analysis_.mean = mean();
    analysis_.negative_mean = analysis_.mean < 0.0;

    if (const auto* tg = std::get_if<TrigShifted>(&form_)) {
        double A = tg->amplitude, B = tg->offset;
        double w = 2.0 * M_PI / period_;
        if (B <= -A) {
            analysis_.sign_condition = false; // a <= 0 everywhere
            return;
        }
        if (B >= A) {
            // a >= 0 everywhere: the positivity set is the whole circle.
            analysis_.positive.push_back({0.0, period_});
            analysis_.positive_integrals.push_back(analysis_.mean * period_);
            analysis_.sign_condition = true;
            return;
        }
        double half = std::acos(-B / A) / w; // half-width of the positivity hump
        double lo = fold(tg->phase - half, period_);
        // Snap an endpoint that lands on the period seam up to rounding.
        if (lo > period_ - 1e-12 * period_ || lo < 1e-12 * period_) lo = 0.0;
        analysis_.positive.push_back({lo, lo + 2.0 * half});
        analysis_.positive_integrals.push_back(integrate(lo, lo + 2.0 * half));
        analysis_.sign_condition = true;
        return;
    }

    const auto& pc = std::get<PiecewiseConstant>(form_);
    // Assemble the pieces covering [0, period) in time order, including the
    // wrap segment before the first breakpoint.
    struct Piece { double lo, hi, v; };
    std::vector<Piece> pieces;
    if (pc.breakpoints[0] > 0.0)
        pieces.push_back({0.0, pc.breakpoints[0], pc.values.back()});
    for (size_t i = 0; i < pc.breakpoints.size(); ++i) {
        double hi = (i + 1 < pc.breakpoints.size()) ? pc.breakpoints[i + 1] : period_;
        pieces.push_back({pc.breakpoints[i], hi, pc.values[i]});
    }
    size_t K = pieces.size();
    size_t npos = 0;
    for (const auto& p : pieces)
        if (p.v > 0.0) ++npos;
    if (npos == 0) {
        analysis_.sign_condition = false;
        return;
    }
    if (npos == K) {
        analysis_.positive.push_back({0.0, period_});
        analysis_.positive_integrals.push_back(analysis_.mean * period_);
        analysis_.sign_condition = true;
        return;
    }
    // Walk circular maximal runs of positive pieces, starting just after a
    // non-positive piece so no run is split across the seam.
    size_t start = 0;
    while (pieces[start].v > 0.0) ++start;
    std::vector<SignInterval> runs;
    std::vector<double> run_ints;
    size_t i = start;
    do {
        size_t idx = i % K;
        if (pieces[idx].v > 0.0) {
            double lo = pieces[idx].lo;
            double hi = pieces[idx].hi;
            double sum = (pieces[idx].hi - pieces[idx].lo) * pieces[idx].v;
            size_t jmax = i + 1;
            while (pieces[jmax % K].v > 0.0) {
                const auto& q = pieces[jmax % K];
                hi += q.hi - q.lo;
                sum += (q.hi - q.lo) * q.v;
                ++jmax;
            }
            runs.push_back({lo, hi});
            run_ints.push_back(sum);
            i = jmax;
        } else {
            ++i;
        }
    } while (i < start + K);
    // Present intervals sorted by their left endpoint on [0, period).
    std::vector<size_t> order(runs.size());
    for (size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return runs[a].lo < runs[b].lo; });
    for (size_t j : order) {
        analysis_.positive.push_back(runs[j]);
        analysis_.positive_integrals.push_back(run_ints[j]);
    }
    analysis_.sign_condition = true;
}

} // namespace minkper::model
