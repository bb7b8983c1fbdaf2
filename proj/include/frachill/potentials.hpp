#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "frachill/error.hpp"

namespace frachill {

enum class PotentialKind { none, regular, logarithmic, double_obstacle };

inline std::string_view to_string(PotentialKind k) {
    switch (k) {
        case PotentialKind::none: return "none";
        case PotentialKind::regular: return "regular";
        case PotentialKind::logarithmic: return "log";
        case PotentialKind::double_obstacle: return "obstacle";
    }
    return "?";
}

inline PotentialKind parse_potential_kind(std::string_view s) {
    if (s == "none") return PotentialKind::none;
    if (s == "regular") return PotentialKind::regular;
    if (s == "log") return PotentialKind::logarithmic;
    if (s == "obstacle") return PotentialKind::double_obstacle;
    throw ConfigError("unknown potential '" + std::string(s) + "' (expected regular|log|obstacle|none)");
}

/// Double-well potential F = F1 + F2 with F1 convex, F1(0) = 0, and F2' Lipschitz.
///
/// Canonical splits:
///   regular   F1 = r^4/4,                              F2 = -r^2/2 + 1/4
///   log       F1 = (1+r)ln(1+r) + (1-r)ln(1-r),         F2 = -c1 r^2
///   obstacle  F1 = indicator of [-1, 1],                F2 = c2 (1 - r^2)
///   none      F1 = F2 = 0
struct PotentialSpec {
    PotentialKind kind = PotentialKind::regular;
    double c1 = 2.0;
    double c2 = 1.0;

    static PotentialSpec none() { return {PotentialKind::none, 0.0, 0.0}; }
    static PotentialSpec regular() { return {PotentialKind::regular, 0.0, 0.0}; }
    static PotentialSpec logarithmic(double c1) { return {PotentialKind::logarithmic, c1, 0.0}; }
    static PotentialSpec double_obstacle(double c2) { return {PotentialKind::double_obstacle, 0.0, c2}; }

    /// Convex part; +infinity outside its effective domain.
    double F1(double r) const {
        constexpr double inf = std::numeric_limits<double>::infinity();
        switch (kind) {
            case PotentialKind::none: return 0.0;
            case PotentialKind::regular: return 0.25 * r * r * r * r;
            case PotentialKind::logarithmic: {
                const double a = std::abs(r);
                if (a > 1.0) return inf;
                if (a == 1.0) return 2.0 * std::numbers::ln2;
                return (1.0 + r) * std::log1p(r) + (1.0 - r) * std::log1p(-r);
            }
            case PotentialKind::double_obstacle: return std::abs(r) <= 1.0 ? 0.0 : inf;
        }
        return 0.0;
    }

    double F2(double r) const {
        switch (kind) {
            case PotentialKind::none: return 0.0;
            case PotentialKind::regular: return -0.5 * r * r + 0.25;
            case PotentialKind::logarithmic: return -c1 * r * r;
            case PotentialKind::double_obstacle: return c2 * (1.0 - r * r);
        }
        return 0.0;
    }

    double f2(double r) const {
        switch (kind) {
            case PotentialKind::none: return 0.0;
            case PotentialKind::regular: return -r;
            case PotentialKind::logarithmic: return -2.0 * c1 * r;
            case PotentialKind::double_obstacle: return -2.0 * c2 * r;
        }
        return 0.0;
    }

    double lip_f2() const {
        switch (kind) {
            case PotentialKind::none: return 0.0;
            case PotentialKind::regular: return 1.0;
            case PotentialKind::logarithmic: return 2.0 * c1;
            case PotentialKind::double_obstacle: return 2.0 * c2;
        }
        return 0.0;
    }

    /// Element of minimum modulus of the subdifferential of F1; +infinity off D(f1).
    double f1_min_modulus(double s) const {
        constexpr double inf = std::numeric_limits<double>::infinity();
        switch (kind) {
            case PotentialKind::none: return 0.0;
            case PotentialKind::regular: return s * s * s;
            case PotentialKind::logarithmic:
                if (std::abs(s) >= 1.0) return inf;
                return std::log1p(s) - std::log1p(-s);
            case PotentialKind::double_obstacle: return std::abs(s) <= 1.0 ? 0.0 : inf;
        }
        return 0.0;
    }

    /// C0 with F1^lambda + F2 >= -C0 on the whole line, valid for lambda <= c0_lambda_max().
    double lower_bound_C0() const {
        switch (kind) {
            case PotentialKind::none: return 0.0;
            case PotentialKind::regular: return 0.75;
            case PotentialKind::logarithmic: return 2.0 * c1;
            case PotentialKind::double_obstacle: return c2;
        }
        return 0.0;
    }

    double c0_lambda_max() const {
        constexpr double inf = std::numeric_limits<double>::infinity();
        switch (kind) {
            case PotentialKind::none: return inf;
            case PotentialKind::regular: return 0.5;
            case PotentialKind::logarithmic: return c1 > 0.0 ? 0.25 / c1 : inf;
            case PotentialKind::double_obstacle: return c2 > 0.0 ? 0.25 / c2 : inf;
        }
        return inf;
    }
};

struct YosidaParams {
    double lambda = 1e-2;
    double root_tolerance = 1e-15;
    int max_root_iters = 200;
};

enum class ProliferationKind { constant, smooth_clamp, tabulated };

/// Bounded nonnegative Lipschitz proliferation function.
struct ProliferationSpec {
    ProliferationKind kind = ProliferationKind::smooth_clamp;
    double p0 = 1.0;
    double width = 1.0;
    /// (s, P) knots, strictly increasing in s; piecewise linear, constant beyond the ends.
    std::vector<std::pair<double, double>> table;

    static ProliferationSpec constant(double p0) { return {ProliferationKind::constant, p0, 1.0, {}}; }
    static ProliferationSpec smooth_clamp(double p0, double width) {
        return {ProliferationKind::smooth_clamp, p0, width, {}};
    }
    static ProliferationSpec tabulated(std::vector<std::pair<double, double>> knots) {
        if (knots.empty()) throw ConfigError("tabulated proliferation needs at least one knot");
        for (std::size_t i = 0; i < knots.size(); ++i) {
            if (knots[i].second < 0.0) throw ConfigError("proliferation values must be nonnegative");
            if (i > 0 && !(knots[i].first > knots[i - 1].first)) {
                throw ConfigError("proliferation knots must be strictly increasing");
            }
        }
        return {ProliferationKind::tabulated, 0.0, 1.0, std::move(knots)};
    }

    double operator()(double s) const {
        switch (kind) {
            case ProliferationKind::constant: return p0;
            case ProliferationKind::smooth_clamp: return p0 * 0.5 * (1.0 + std::tanh(s / width));
            case ProliferationKind::tabulated: {
                if (s <= table.front().first) return table.front().second;
                if (s >= table.back().first) return table.back().second;
                auto it = std::upper_bound(table.begin(), table.end(), s,
                                           [](double v, const auto& kn) { return v < kn.first; });
                const auto& [s1, p1] = *it;
                const auto& [s0, q0] = *(it - 1);
                return q0 + (p1 - q0) * (s - s0) / (s1 - s0);
            }
        }
        return 0.0;
    }

    double sup_P() const {
        if (kind == ProliferationKind::tabulated) {
            double m = 0.0;
            for (const auto& kn : table) m = std::max(m, kn.second);
            return m;
        }
        return p0;
    }

    double lip_P() const {
        switch (kind) {
            case ProliferationKind::constant: return 0.0;
            case ProliferationKind::smooth_clamp: return p0 / (2.0 * width);
            case ProliferationKind::tabulated: {
                double m = 0.0;
                for (std::size_t i = 1; i < table.size(); ++i) {
                    m = std::max(m, std::abs(table[i].second - table[i - 1].second) /
                                        (table[i].first - table[i - 1].first));
                }
                return m;
            }
        }
        return 0.0;
    }

    void validate() const {
        if (kind != ProliferationKind::tabulated) {
            if (!(p0 >= 0.0) || !std::isfinite(p0)) throw ConfigError("P.p0 must be nonnegative");
            if (kind == ProliferationKind::smooth_clamp && !(width > 0.0)) {
                throw ConfigError("P.width must be positive");
            }
        }
    }
};

namespace detail {

// Real root of J + lambda J^3 = r (depressed cubic with p = 1/lambda > 0), polished by Newton.
inline double cubic_resolvent(double lambda, double r) {
    const double p = 1.0 / lambda;
    const double q = -r / lambda;
    const double s = std::sqrt(p / 3.0);
    double J = -2.0 * s * std::sinh(std::asinh(1.5 * q / p / s) / 3.0);
    for (int i = 0; i < 3; ++i) {
        const double g = J + lambda * J * J * J - r;
        J -= g / (1.0 + 3.0 * lambda * J * J);
    }
    return J;
}

// Root of J + lambda ln((1+J)/(1-J)) = a on [0, 1) for a >= 0; safeguarded Newton.
inline double log_resolvent_positive(const YosidaParams& y, double a) {
    if (a == 0.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    double x = std::min(a, 1.0 - 1e-12);
    for (int it = 0; it < y.max_root_iters; ++it) {
        const double g = x + y.lambda * (std::log1p(x) - std::log1p(-x)) - a;
        if (g == 0.0) return x;
        (g < 0.0 ? lo : hi) = x;
        const double dg = 1.0 + 2.0 * y.lambda / ((1.0 - x) * (1.0 + x));
        double xn = x - g / dg;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= y.root_tolerance * std::max(1.0, std::abs(x)) || hi - lo <= y.root_tolerance) {
            return xn;
        }
        x = xn;
    }
    throw SolverFailure("logarithmic resolvent did not converge for r = " + std::to_string(a) +
                        "; last bracket [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

}  // namespace detail

/// J_lambda(r) = (I + lambda f1)^{-1}(r).
inline double resolvent(const PotentialSpec& spec, const YosidaParams& y, double r) {
    if (!(y.lambda > 0.0)) throw ConfigError("Yosida lambda must be positive");
    switch (spec.kind) {
        case PotentialKind::none: return r;
        case PotentialKind::regular: return r == 0.0 ? 0.0 : detail::cubic_resolvent(y.lambda, r);
        case PotentialKind::logarithmic: {
            const double J = detail::log_resolvent_positive(y, std::abs(r));
            return r < 0.0 ? -J : J;
        }
        case PotentialKind::double_obstacle: return std::clamp(r, -1.0, 1.0);
    }
    return r;
}

/// Yosida approximation f1^lambda(r) = (r - J_lambda(r)) / lambda.
inline double yosida_f1(const PotentialSpec& spec, const YosidaParams& y, double r) {
    return (r - resolvent(spec, y, r)) / y.lambda;
}

/// Moreau envelope F1^lambda(r) = F1(J) + |J - r|^2 / (2 lambda).
inline double yosida_F1(const PotentialSpec& spec, const YosidaParams& y, double r) {
    const double J = resolvent(spec, y, r);
    const double d = r - J;
    return spec.F1(J) + d * d / (2.0 * y.lambda);
}

/// Almost-everywhere derivative of f1^lambda, (1 - J') / lambda. At the
/// obstacle kinks the right-continuous branch is taken.
inline double yosida_f1_derivative(const PotentialSpec& spec, const YosidaParams& y, double r) {
    switch (spec.kind) {
        case PotentialKind::none: return 0.0;
        case PotentialKind::regular: {
            const double J = resolvent(spec, y, r);
            const double d = 3.0 * J * J;
            return d / (1.0 + y.lambda * d);
        }
        case PotentialKind::logarithmic: {
            const double J = resolvent(spec, y, r);
            return 2.0 / ((1.0 - J) * (1.0 + J) + 2.0 * y.lambda);
        }
        case PotentialKind::double_obstacle: return (r >= -1.0 && r < 1.0) ? 0.0 : 1.0 / y.lambda;
    }
    return 0.0;
}

inline double eval_F2(const PotentialSpec& spec, double r) { return spec.F2(r); }
inline double eval_f2(const PotentialSpec& spec, double r) { return spec.f2(r); }
inline double eval_P(const ProliferationSpec& p, double r) { return p(r); }

/// Stabilisation constant L = Lip f2 * (1 + margin).
inline double stabilization_L(const PotentialSpec& spec, double margin = 0.1) {
    return spec.lip_f2() * (1.0 + margin);
}

}  // namespace frachill
