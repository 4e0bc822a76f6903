#include "doctest.h"

#include "minkper/errors.hpp"
#include "minkper/phi.hpp"
#include "minkper/problem.hpp"

#include <cmath>
#include <random>

using namespace minkper;
using namespace minkper::model;

namespace {

// Adaptive-free reference quadrature: composite Simpson on a fine mesh.
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
    double h = (b - a) / n, acc = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = a + i * h;
        acc += h / 6.0 * (f(x) + 4.0 * f(x + h / 2.0) + f(x + h));
    }
    return acc;
}

Weight fig1_weight() {
    return Weight(2.0 * M_PI, TrigShifted{1.0, M_PI / 4.0, -std::sqrt(2.0) / 2.0});
}

Weight fig4_weight() {
    return Weight(10.0, PiecewiseConstant{{0.0, 1.0, 2.0, 3.0}, {1.0, 0.0, 1.0, -2.0}});
}

} // namespace

TEST_CASE("curvature operator: reference values and inverse pair") {
    CHECK(phi(0.6) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(phi_inv(0.75) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(phi_prime(0.6) == doctest::Approx(1.953125).epsilon(1e-14)); // 0.64^(-3/2)
    CHECK(phi(0.0) == 0.0);
    CHECK(phi_prime(0.0) == 1.0);
    for (int i = -9; i <= 9; ++i) {
        double xi = i / 10.0;
        CHECK(phi(-xi) == doctest::Approx(-phi(xi)).epsilon(1e-15));
        CHECK(phi_inv(phi(xi)) == doctest::Approx(xi).epsilon(1e-14));
        CHECK(phi_prime(xi) >= 1.0);
        CHECK(std::abs(phi_inv(phi(xi))) < 1.0);
    }
    CHECK_THROWS_AS(phi(1.0), std::domain_error);
    CHECK_THROWS_AS(phi(-1.0), std::domain_error);
    CHECK_THROWS_AS(phi_prime(1.2), std::domain_error);
}

TEST_CASE("curvature operator: derivatives match finite differences") {
    double h = 1e-6;
    for (double xi : {-0.8, -0.3, 0.0, 0.45, 0.9}) {
        double fd = (phi(xi + h) - phi(xi - h)) / (2.0 * h);
        CHECK(phi_prime(xi) == doctest::Approx(fd).epsilon(1e-7));
    }
    for (double v : {-5.0, -1.0, 0.0, 0.3, 8.0}) {
        double fd = (phi_inv(v + h) - phi_inv(v - h)) / (2.0 * h);
        CHECK(phi_inv_prime(v) == doctest::Approx(fd).epsilon(1e-7));
        // phi_inv is a contraction: derivative in ]0, 1]
        CHECK(phi_inv_prime(v) > 0.0);
        CHECK(phi_inv_prime(v) <= 1.0);
    }
}

TEST_CASE("shifted-cosine weight: exact values, integrals, sign structure") {
    Weight a = fig1_weight();
    CHECK(a.period() == doctest::Approx(2.0 * M_PI));
    CHECK(a(M_PI / 4.0) == doctest::Approx(1.0 - std::sqrt(2.0) / 2.0).epsilon(1e-14));
    CHECK(a(0.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(a(M_PI / 2.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(a.mean() == doctest::Approx(-std::sqrt(2.0) / 2.0).epsilon(1e-15));
    CHECK(a.integrate(0.0, 2.0 * M_PI) ==
          doctest::Approx(-std::sqrt(2.0) * M_PI).epsilon(1e-14));
    // closed-form integral agrees with brute-force quadrature on an awkward span
    double q = simpson([&](double t) { return a(t); }, 0.3, 15.7);
    CHECK(a.integrate(0.3, 15.7) == doctest::Approx(q).epsilon(1e-10));

    const auto& an = a.analysis();
    REQUIRE(an.positive.size() == 1);
    CHECK(an.positive[0].lo == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(an.positive[0].hi == doctest::Approx(M_PI / 2.0).epsilon(1e-12));
    CHECK(an.sign_condition);
    CHECK(an.negative_mean);
    CHECK(an.positive_integrals[0] ==
          doctest::Approx(std::sqrt(2.0) * (1.0 - M_PI / 4.0)).epsilon(1e-12));
}

TEST_CASE("shifted-cosine weight: generic sign decomposition") {
    std::mt19937 rng(20240817);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        double T = 0.5 + 9.5 * U(rng);
        double A = 0.2 + 3.0 * U(rng);
        double phase = T * U(rng);
        double B = A * (2.0 * U(rng) - 1.0) * 0.95; // |offset| < amplitude
        Weight a(T, TrigShifted{A, phase, B});
        const auto& an = a.analysis();
        REQUIRE(an.positive.size() == 1);
        CHECK(an.sign_condition);
        CHECK(an.negative_mean == (B < 0.0));
        double half = std::acos(-B / A) / (2.0 * M_PI / T);
        CHECK(an.positive[0].length() == doctest::Approx(2.0 * half).epsilon(1e-9));
        CHECK(an.positive_integrals[0] > 0.0);
        // the weight really is positive inside and non-positive outside
        double lo = an.positive[0].lo, hi = an.positive[0].hi;
        for (int i = 1; i < 40; ++i) {
            double t = lo + (hi - lo) * i / 40.0;
            CHECK(a(t) > -1e-12);
        }
        double mid_out = hi + 0.5 * (T - (hi - lo));
        CHECK(a(mid_out) < 1e-12);
    }
}

TEST_CASE("piecewise weight: evaluation, exact integral, decomposition") {
    Weight a = fig4_weight();
    CHECK(a(0.5) == 1.0);
    CHECK(a(1.5) == 0.0);
    CHECK(a(2.5) == 1.0);
    CHECK(a(5.0) == -2.0);
    CHECK(a(9.999) == -2.0);
    CHECK(a(10.5) == 1.0); // periodic extension
    CHECK(a(-0.5) == -2.0);
    CHECK(a.integrate(0.0, 10.0) == doctest::Approx(-12.0).epsilon(1e-14));
    CHECK(a.mean() == doctest::Approx(-1.2).epsilon(1e-14));
    CHECK(a.integrate(0.5, 2.5) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(a.integrate(-1.0, 11.0) == doctest::Approx(-12.0 - 2.0 + 1.0).epsilon(1e-12));

    const auto& an = a.analysis();
    REQUIRE(an.positive.size() == 2);
    CHECK(an.positive[0].lo == doctest::Approx(0.0));
    CHECK(an.positive[0].hi == doctest::Approx(1.0));
    CHECK(an.positive[1].lo == doctest::Approx(2.0));
    CHECK(an.positive[1].hi == doctest::Approx(3.0));
    CHECK(an.positive_integrals[0] == doctest::Approx(1.0));
    CHECK(an.positive_integrals[1] == doctest::Approx(1.0));
    CHECK(an.sign_condition);
    CHECK(an.negative_mean);
    CHECK(a.breakpoints() == std::vector<double>{0.0, 1.0, 2.0, 3.0});
}

TEST_CASE("piecewise weight: positivity run wrapping the period seam") {
    Weight a(10.0, PiecewiseConstant{{1.0, 3.0, 9.0}, {-1.0, 0.5, 2.0}});
    const auto& an = a.analysis();
    REQUIRE(an.positive.size() == 1);
    CHECK(an.positive[0].lo == doctest::Approx(3.0));
    CHECK(an.positive[0].hi == doctest::Approx(11.0)); // wraps through 10 to 1
    CHECK(an.positive_integrals[0] == doctest::Approx(6.0 * 0.5 + 2.0 * 2.0));
}

TEST_CASE("weight validation rejects malformed input") {
    CHECK_THROWS_AS(Weight(0.0, TrigShifted{1, 0, 0}), ValidationError);
    CHECK_THROWS_AS(Weight(1.0, TrigShifted{-1, 0, 0}), ValidationError);
    CHECK_THROWS_AS(Weight(1.0, PiecewiseConstant{{}, {}}), ValidationError);
    CHECK_THROWS_AS(Weight(1.0, PiecewiseConstant{{0.0, 0.5}, {1.0}}), ValidationError);
    CHECK_THROWS_AS(Weight(1.0, PiecewiseConstant{{0.5, 0.2}, {1.0, 2.0}}), ValidationError);
    CHECK_THROWS_AS(Weight(1.0, PiecewiseConstant{{0.0, 1.5}, {1.0, 2.0}}), ValidationError);
}

TEST_CASE("nonlinearities: values, derivatives, analytic hypothesis flags") {
    Nonlinearity cubic{PowerLaw{3.0}};
    CHECK(cubic.g(2.0) == doctest::Approx(8.0));
    CHECK(cubic.dg(2.0) == doctest::Approx(12.0));
    CHECK(cubic.d2g(2.0) == doctest::Approx(12.0));
    CHECK(cubic.g(0.0) == 0.0);
    CHECK(cubic.dg(0.0) == 0.0);

    Nonlinearity sat{SaturatedPower{2.5, 0.5}};
    CHECK(sat.g(1.0) == doctest::Approx(0.5)); // u^p/(1+u^(p-q)) at u=1
    CHECK(sat.g(0.0) == 0.0);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(0.05, 4.0);
    double h = 1e-6;
    for (int i = 0; i < 25; ++i) {
        double u = U(rng);
        for (const Nonlinearity* n : {&cubic, &sat}) {
            double fd1 = (n->g(u + h) - n->g(u - h)) / (2.0 * h);
            double fd2 = (n->dg(u + h) - n->dg(u - h)) / (2.0 * h);
            CHECK(n->dg(u) == doctest::Approx(fd1).epsilon(1e-6));
            CHECK(n->d2g(u) == doctest::Approx(fd2).epsilon(1e-5));
            CHECK(n->g(u) > 0.0);
            CHECK(n->dg(u) > 0.0);
        }
    }

    for (const Nonlinearity* n : {&cubic, &sat}) {
        const auto& hr = n->hypotheses();
        CHECK(hr.positive_and_increasing);
        CHECK(hr.superlinear_at_zero);
        CHECK(hr.differentiable_at_zero);
        CHECK(hr.power_behavior_at_zero);
        CHECK(hr.c_p == 1.0);
        CHECK(hr.controlled_at_infinity);
        CHECK(hr.flat_ratio_at_infinity);
        CHECK(hr.damped_derivative_at_infinity);
        CHECK(hr.convex_near_zero);
    }
    CHECK(cubic.origin_exponent() == 3.0);
    // the stated limit g(u)/u^p -> c_p = 1
    CHECK(sat.g(1e-5) / std::pow(1e-5, 2.5) == doctest::Approx(1.0).epsilon(1e-6));

    CHECK_THROWS_AS(Nonlinearity{PowerLaw{1.0}}, ValidationError);
    CHECK_THROWS_AS((Nonlinearity{SaturatedPower{2.0, 1.5}}), ValidationError);
    CHECK_THROWS_AS((Nonlinearity{SaturatedPower{0.9, 0.5}}), ValidationError);
    CHECK_THROWS_AS(cubic.g(-0.1), std::domain_error);
}

TEST_CASE("extended force: continuous at zero, linear below") {
    Problem prob(fig1_weight(), Nonlinearity{PowerLaw{3.0}}, 2.0);
    CHECK(prob.force(1.0, -2.0) == 2.0);
    CHECK(prob.force(1.0, 0.0) == 0.0);
    CHECK(prob.force(1.0, 1e-9) == doctest::Approx(0.0).epsilon(1e-20));
    double t = 0.7; // inside the positivity hump
    CHECK(prob.force(t, 0.5) ==
          doctest::Approx(2.0 * fig1_weight()(t) * 0.125).epsilon(1e-14));
    CHECK(prob.force_du(t, -1.0) == -1.0);
    CHECK(prob.force_du(t, 0.5) ==
          doctest::Approx(2.0 * fig1_weight()(t) * 3.0 * 0.25).epsilon(1e-14));
    CHECK(prob.with_lambda(5.0).lambda() == 5.0);
    CHECK_THROWS_AS(Problem(fig1_weight(), Nonlinearity{PowerLaw{3.0}}, -1.0), ValidationError);
}

TEST_CASE("threshold constants: certificate re-checked by independent quadrature") {
    for (int config = 0; config < 2; ++config) {
        Weight a = config == 0 ? fig1_weight() : fig4_weight();
        Nonlinearity g = config == 0 ? Nonlinearity{PowerLaw{3.0}} : Nonlinearity{PowerLaw{2.0}};
        auto th = threshold_constants(a, g);
        const auto& an = a.analysis();
        double min_len = 1e300;
        for (const auto& I : an.positive) min_len = std::min(min_len, I.length());
        CHECK(th.rho_star > 0.0);
        CHECK(th.rho_star <= 0.9 * min_len / 4.0 + 1e-12);
        REQUIRE(th.inner_integrals.size() == an.positive.size());
        for (size_t i = 0; i < an.positive.size(); ++i) {
            const auto& I = an.positive[i];
            double inner = simpson([&](double t) { return a(t); }, I.lo + 2.0 * th.rho_star,
                                   I.hi - 2.0 * th.rho_star);
            CHECK(th.inner_integrals[i] == doctest::Approx(inner).epsilon(1e-8));
            CHECK(inner >= 0.1 * an.positive_integrals[i] - 1e-9);
            // independent evaluation of the induced parameter threshold term
            double glo = 2.0 * th.rho_star * th.rho_star / I.length();
            CHECK(th.g_minima[i] == doctest::Approx(g.g(glo)).epsilon(1e-12));
        }
        double lam = 0.0;
        for (size_t i = 0; i < an.positive.size(); ++i)
            lam = std::max(lam, 2.0 * phi(0.5) / (th.g_minima[i] * th.inner_integrals[i]));
        CHECK(th.lambda_star == doctest::Approx(lam).epsilon(1e-12));
    }
}

TEST_CASE("threshold constants: frozen reference values") {
    auto th = threshold_constants(fig1_weight(), Nonlinearity{PowerLaw{3.0}});
    // rho* = (230/256) * (pi/8): the largest dyadic grid point obeying both
    // constraints with the 10% margin
    CHECK(th.grid_index == 230);
    CHECK(th.rho_star == doctest::Approx(0.35281558121369749).epsilon(1e-12));
    CHECK(th.lambda_star == doctest::Approx(6229.6647420553072).epsilon(1e-10));
}

TEST_CASE("localized amplitude bound: small maxima satisfy the inequality") {
    Weight a = fig1_weight();
    Nonlinearity g{PowerLaw{3.0}};
    auto th = threshold_constants(a, g);
    // For a tiny interval maximum the left side is cubic in c while the right
    // side is linear, so the slack must be negative.
    double slack = amplitude_bound_slack(a, g, 2.0, 0, 0.01, 0.01, th.rho_star);
    CHECK(slack < 0.0);
    CHECK_THROWS_AS(amplitude_bound_slack(a, g, 2.0, 5, 0.01, 0.01, th.rho_star),
                    ValidationError);
    CHECK_THROWS_AS(amplitude_bound_slack(a, g, 2.0, 0, 0.2, 0.1, th.rho_star), ValidationError);
}

TEST_CASE("averaged scalar force: degree bookkeeping") {
    Problem prob(fig1_weight(), Nonlinearity{PowerLaw{3.0}}, 2.0);
    auto dd = average_map_degree(prob, 1.0);
    CHECK(dd.degree == -1);
    CHECK(dd.samples.size() == 65);
    CHECK(dd.samples.front().second == doctest::Approx(1.0));           // -s at s=-1
    CHECK(dd.samples.back().second ==
          doctest::Approx(2.0 * -std::sqrt(2.0) / 2.0).epsilon(1e-14)); // lam*mean*g(1)
    CHECK_FALSE(dd.undefined);

    // positive-mean weight: the averaged force keeps one sign, degree 0
    Problem pos(Weight(2.0 * M_PI, TrigShifted{1.0, 0.0, 0.5}), Nonlinearity{PowerLaw{3.0}}, 2.0);
    CHECK(average_map_degree(pos, 1.0).degree == 0);

    // zero-mean weight: a zero lands on the boundary, degree undefined
    Problem zm(Weight(2.0 * M_PI, TrigShifted{1.0, 0.0, 0.0}), Nonlinearity{PowerLaw{3.0}}, 2.0);
    auto dz = average_map_degree(zm, 1.0);
    CHECK(dz.undefined);
}
