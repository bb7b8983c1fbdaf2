#pragma once

// Independent reference computations used by the unit tests and the
// acceptance binary. Nothing here calls into the solver paths it checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "frachill/potentials.hpp"

namespace oracle {

/// Moreau envelope min_s |s - r|^2/(2 lambda) + F1(s) by brute-force grid
/// search: 1e5 points over the effective domain, then 1e5 points over the
/// bracketing cells around the coarse minimiser.
inline double envelope_by_search(const frachill::PotentialSpec& pot, double lambda, double r) {
    using frachill::PotentialKind;
    double lo, hi;
    if (pot.kind == PotentialKind::logarithmic || pot.kind == PotentialKind::double_obstacle) {
        lo = -1.0;
        hi = 1.0;
    } else {
        lo = -std::abs(r) - 2.0;
        hi = std::abs(r) + 2.0;
    }
    auto objective = [&](double s) { return (s - r) * (s - r) / (2.0 * lambda) + pot.F1(s); };
    double best = std::numeric_limits<double>::infinity();
    double arg = lo;
    for (int pass = 0; pass < 2; ++pass) {
        const int n = 100000;
        const double ds = (hi - lo) / (n - 1);
        for (int i = 0; i < n; ++i) {
            const double s = lo + i * ds;
            const double v = objective(s);
            if (v < best) {
                best = v;
                arg = s;
            }
        }
        const double a = std::max(lo, arg - 2.0 * ds), b = std::min(hi, arg + 2.0 * ds);
        lo = a;
        hi = b;
    }
    return best;
}

/// d/dt [mu, phi] = M [mu, phi] for one mode of the linear benchmark
/// alpha mu' + phi' + a mu = 0, beta phi' + b phi = mu, and exp(M t) applied
/// to (mu0, phi0) in closed form (M has real eigenvalues).
inline std::array<double, 2> linear_mode_exact(double alpha, double beta, double a, double b, double mu0,
                                               double phi0, double t) {
    const double m11 = -(a + 1.0 / beta) / alpha, m12 = b / (alpha * beta);
    const double m21 = 1.0 / beta, m22 = -b / beta;
    const double m = 0.5 * (m11 + m22);
    const double disc = 0.25 * (m11 - m22) * (m11 - m22) + m12 * m21;
    const double d = std::sqrt(std::max(disc, 0.0));
    // exp(Mt) = [e^{(m+d)t}(M - (m-d)I) - e^{(m-d)t}(M - (m+d)I)] / (2d)
    double c0, c1;  // exp(Mt) = c0 I + c1 (M - m I)
    const double ep = std::exp((m + d) * t), em = std::exp((m - d) * t);
    c0 = 0.5 * (ep + em);
    c1 = d * t > 1e-8 ? (ep - em) / (2.0 * d) : std::exp(m * t) * t * (1.0 + d * d * t * t / 6.0);
    const double mu = c0 * mu0 + c1 * ((m11 - m) * mu0 + m12 * phi0);
    const double ph = c0 * phi0 + c1 * (m21 * mu0 + (m22 - m) * phi0);
    return {mu, ph};
}

/// One implicit-Euler step of the same mode, with the stabilisation term
/// L (phi' - phi), by Cramer's rule on the 2x2 system.
inline std::array<double, 2> linear_mode_step(double alpha, double beta, double L, double h, double a, double b,
                                              double mu, double phi) {
    // (alpha/h + a) mu' + (1/h) phi'            = (alpha/h) mu + phi/h
    // -mu' + (beta/h + L + b) phi'              = (beta/h + L) phi
    const double a11 = alpha / h + a, a12 = 1.0 / h;
    const double a21 = -1.0, a22 = beta / h + L + b;
    const double r1 = alpha / h * mu + phi / h, r2 = (beta / h + L) * phi;
    const double det = a11 * a22 - a12 * a21;
    return {(r1 * a22 - a12 * r2) / det, (a11 * r2 - a21 * r1) / det};
}

}  // namespace oracle
