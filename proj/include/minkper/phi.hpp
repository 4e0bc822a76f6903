#pragma once

#include <cmath>
#include <stdexcept>

namespace minkper::model {

// Curvature operator phi(x) = x / sqrt(1 - x^2), a diffeomorphism ]-1,1[ -> R.
// Working in the "momentum" variable v = phi(u') keeps the planar vector field
// globally smooth: phi_inv and its derivative are defined on all of R, and
// |phi_inv| < 1 enforces the gradient bound |u'| < 1 structurally.

inline double phi(double xi) {
    if (!(std::abs(xi) < 1.0))
        throw std::domain_error("phi: argument must satisfy |xi| < 1");
    return xi / std::sqrt(1.0 - xi * xi);
}

inline double phi_prime(double xi) {
    if (!(std::abs(xi) < 1.0))
        throw std::domain_error("phi_prime: argument must satisfy |xi| < 1");
    double s = 1.0 - xi * xi;
    return 1.0 / (s * std::sqrt(s)); // (1 - xi^2)^(-3/2), always >= 1
}

inline double phi_inv(double v) {
    return v / std::sqrt(1.0 + v * v);
}

inline double phi_inv_prime(double v) {
    double s = 1.0 + v * v;
    return 1.0 / (s * std::sqrt(s)); // (1 + v^2)^(-3/2), in ]0, 1]
}

} // namespace minkper::model
