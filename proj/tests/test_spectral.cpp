#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "frachill/random.hpp"
#include "frachill/spectral.hpp"

using namespace frachill;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// e_k(x) on one axis, written out directly from the definition.
double basis_1d(BoundaryCondition bc, std::size_t k, std::size_t n, double L, double x) {
    constexpr double pi = std::numbers::pi;
    if (bc == BoundaryCondition::neumann) {
        const double c = k == 0 ? 1.0 / std::sqrt(L) : std::sqrt(2.0 / L);
        return c * std::cos(static_cast<double>(k) * pi * x / L);
    }
    const double m = static_cast<double>(k + 1);
    const double c = k + 1 == n ? 1.0 / std::sqrt(L) : std::sqrt(2.0 / L);
    return c * std::sin(m * pi * x / L);
}

double eigen_1d(BoundaryCondition bc, std::size_t k, double L) {
    const double m = bc == BoundaryCondition::neumann ? static_cast<double>(k) : static_cast<double>(k + 1);
    const double kk = m * std::numbers::pi / L;
    return kk * kk;
}

double rel_err(const Field& a, const Field& b) { return norm(a - b) / std::max(norm(b), 1e-300); }

}  // namespace

TEST_CASE("forward transform matches direct sums against the eigenfunctions", "[spectral]") {
    for (auto bc : {BoundaryCondition::neumann, BoundaryCondition::dirichlet}) {
        const auto g = GridSpec::box(1.3, 0.7, 9, 6);
        const auto op = build_operator(g, bc);
        const Field v = random_field(g, 11, 1.0);
        const auto c = op.forward(v.values());
        for (std::size_t i = 0; i < 9; ++i) {
            for (std::size_t j = 0; j < 6; ++j) {
                double direct = 0.0;
                for (std::size_t p = 0; p < 9; ++p) {
                    for (std::size_t q = 0; q < 6; ++q) {
                        direct += g.weight() * v[p * 6 + q] * basis_1d(bc, i, 9, 1.3, g.node(0, p)) *
                                  basis_1d(bc, j, 6, 0.7, g.node(1, q));
                    }
                }
                CHECK_THAT(c[i * 6 + j], WithinAbs(direct, 1e-12));
                CHECK_THAT(op.eigenvalues_natural()[i * 6 + j],
                           WithinRel(eigen_1d(bc, i, 1.3) + eigen_1d(bc, j, 0.7), 1e-14));
            }
        }
    }
}

TEST_CASE("discrete eigenfunctions are orthonormal in the weighted inner product", "[spectral]") {
    for (auto bc : {BoundaryCondition::neumann, BoundaryCondition::dirichlet}) {
        const std::size_t n = 12;
        const auto g = GridSpec::line(2.0, n);
        for (std::size_t k = 0; k < n; ++k) {
            const Field ek = Field::sample(g, [&](double x, double) { return basis_1d(bc, k, n, 2.0, x); });
            for (std::size_t m = 0; m < n; ++m) {
                const Field em = Field::sample(g, [&](double x, double) { return basis_1d(bc, m, n, 2.0, x); });
                CHECK_THAT(inner(ek, em), WithinAbs(k == m ? 1.0 : 0.0, 1e-13));
            }
        }
    }
}

TEST_CASE("eigenmode is scaled by lambda^s", "[spectral]") {
    const auto g = GridSpec::line(1.0, 32);
    const auto op = build_operator(g, BoundaryCondition::neumann);
    const Field e3 = Field::sample(g, [](double x, double) { return std::cos(3 * std::numbers::pi * x); });
    const double lam = 9 * std::numbers::pi * std::numbers::pi;
    CHECK(rel_err(apply_fractional(op, 0.75, e3), std::pow(lam, 0.75) * e3) < 1e-12);
    // the constant mode is annihilated for every positive power
    CHECK(max_abs(apply_fractional(op, 0.3, Field(g, 2.5))) < 1e-13);
}

TEST_CASE("sorted order is nondecreasing and ties keep transform order", "[spectral]") {
    const auto op = build_operator(GridSpec::box(1.0, 1.0, 8, 8), BoundaryCondition::neumann);
    const auto ev = op.eigenvalues();
    for (std::size_t j = 1; j < ev.size(); ++j) CHECK(ev[j] >= ev[j - 1]);
    const auto ord = op.mode_order();
    // (0,1) and (1,0) tie; (0,1) has natural index 1, (1,0) index 8
    CHECK(ord[0] == 0);
    CHECK(ord[1] == 1);
    CHECK(ord[2] == 8);
}

TEST_CASE("round trip, Parseval, semigroup and self-adjointness", "[spectral]") {
    const GridSpec grids[] = {GridSpec::line(1.0, 256), GridSpec::box(1.0, 2.0, 64, 64)};
    for (const auto& g : grids) {
        for (auto bc : {BoundaryCondition::neumann, BoundaryCondition::dirichlet}) {
            const auto op = build_operator(g, bc);
            const Field u = random_field(g, 3, 1.0);
            const Field w = random_field(g, 4, 1.0);

            const Field back = from_modes(op, to_modes(op, u));
            CHECK(rel_err(back, u) < 1e-12);

            const auto c = to_modes(op, u).coeffs;
            double s = 0.0;
            for (double x : c) s += x * x;
            CHECK_THAT(s, WithinRel(inner(u, u), 1e-12));

            const Field ab = apply_fractional(op, 0.3, apply_fractional(op, 0.45, u));
            CHECK(rel_err(ab, apply_fractional(op, 0.75, u)) < 1e-10);

            const double l = inner(apply_fractional(op, 0.6, u), w);
            const double r = inner(u, apply_fractional(op, 0.6, w));
            CHECK(std::abs(l - r) <= 1e-10 * std::max(std::abs(l), 1.0));
        }
    }
}

TEST_CASE("norms agree with their modal definitions", "[spectral]") {
    const auto g = GridSpec::line(1.0, 16);
    const auto op = build_operator(g, BoundaryCondition::dirichlet);
    const Field u = random_field(g, 5, 1.0);
    const double semi = power_seminorm(op, 0.5, u);
    CHECK_THAT(graph_norm(op, 0.5, u), WithinRel(std::sqrt(inner(u, u) + semi * semi), 1e-13));
    CHECK_THAT(semi, WithinRel(norm(apply_fractional(op, 0.5, u)), 1e-12));
    CHECK(dual_norm(op, 0.5, u) <= norm(u));
    // for Dirichlet, ||A^{1/2} u||^2 = (A u, u)
    CHECK_THAT(semi * semi, WithinRel(inner(apply_fractional(op, 1.0, u), u), 1e-12));
}

TEST_CASE("shifted solve inverts the shifted operator", "[spectral]") {
    const auto g = GridSpec::box(1.0, 1.0, 16, 12);
    const auto op = build_operator(g, BoundaryCondition::neumann);
    const Field r = random_field(g, 6, 1.0);
    const Field v = solve_shifted(op, 1.2, 3.0, r);
    const Field back = 3.0 * v + apply_fractional(op, 1.2, v);
    CHECK(rel_err(back, r) < 1e-12);
    CHECK_THROWS_AS(solve_shifted(op, 1.0, 0.0, r), ConfigError);
}

TEST_CASE("two-thirds filter is a projection", "[spectral]") {
    const auto g = GridSpec::line(1.0, 30);
    const auto op = build_operator(g, BoundaryCondition::neumann);
    const Field u = random_field(g, 7, 1.0);
    const Field f = two_thirds_filter(op, u);
    CHECK(rel_err(two_thirds_filter(op, f), f) < 1e-13);
    const auto c = op.forward(f.values());
    for (std::size_t k = 20; k < 30; ++k) CHECK(std::abs(c[k]) < 1e-13);
}

TEST_CASE("operator rejects bad input", "[spectral]") {
    const auto op = build_operator(GridSpec::line(1.0, 8), BoundaryCondition::neumann);
    CHECK_THROWS_AS(op.apply_multiplier(Field(GridSpec::line(1.0, 9)), op.powers(1.0)), ConfigError);
    CHECK_THROWS_AS(op.powers(0.0), ConfigError);
    CHECK_THROWS_AS(op.powers(-1.0), ConfigError);
    CHECK_THROWS_AS(parse_boundary_condition("periodic"), ConfigError);
    CHECK(parse_boundary_condition("dirichlet") == BoundaryCondition::dirichlet);
    CHECK_THROWS_AS(GridSpec::line(1.0, 1), ConfigError);
    CHECK_THROWS_AS(GridSpec::line(-1.0, 8), ConfigError);
}
