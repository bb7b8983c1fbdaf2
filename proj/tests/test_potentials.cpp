#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "frachill/potentials.hpp"
#include "frachill/random.hpp"
#include "oracles.hpp"

using namespace frachill;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const PotentialSpec variants[] = {PotentialSpec::regular(), PotentialSpec::logarithmic(2.0),
                                  PotentialSpec::double_obstacle(1.0)};

}  // namespace

TEST_CASE("double obstacle closed forms", "[potentials]") {
    const auto pot = PotentialSpec::double_obstacle(1.0);
    const YosidaParams y{0.1};
    CHECK(resolvent(pot, y, 1.5) == 1.0);
    CHECK(resolvent(pot, y, -3.0) == -1.0);
    CHECK(resolvent(pot, y, 0.25) == 0.25);
    CHECK_THAT(yosida_f1(pot, y, 1.5), WithinAbs(5.0, 1e-12));
    CHECK_THAT(yosida_F1(pot, y, 1.5), WithinAbs(1.25, 1e-12));
    CHECK(yosida_f1(pot, y, 0.3) == 0.0);
    CHECK(yosida_F1(pot, y, -0.9) == 0.0);
}

TEST_CASE("resolvents solve their defining equations", "[potentials]") {
    for (double lam : {1.0, 0.1, 0.01, 1e-4}) {
        const YosidaParams y{lam};
        for (double r : {-50.0, -2.0, -0.3, 1e-9, 0.7, 3.0, 1e4}) {
            const double Jr = resolvent(PotentialSpec::regular(), y, r);
            CHECK_THAT(Jr + lam * Jr * Jr * Jr, WithinAbs(r, 1e-12 * std::max(1.0, std::abs(r))));
            const double Jl = resolvent(PotentialSpec::logarithmic(1.0), y, r);
            REQUIRE(std::abs(Jl) < 1.0);
            // residual scaled by the conditioning 1 + 2 lam / (1 - J^2) of the defining map
            if (std::abs(Jl) < 1.0 - 1e-12) {
                const double cond = 1.0 + 2.0 * lam / (1.0 - Jl * Jl);
                CHECK_THAT(Jl + lam * std::log((1 + Jl) / (1 - Jl)),
                           WithinAbs(r, 1e-10 * cond * std::max(1.0, std::abs(r))));
            }
        }
    }
    CHECK(resolvent(PotentialSpec::regular(), YosidaParams{0.1}, 0.0) == 0.0);
    CHECK(resolvent(PotentialSpec::logarithmic(1.0), YosidaParams{0.1}, 0.0) == 0.0);
}

TEST_CASE("envelope equals the brute-force minimisation", "[potentials]") {
    for (const auto& pot : variants) {
        for (double lam : {0.5, 0.05}) {
            for (double r : {-2.5, -1.0, -0.4, 0.0, 0.3, 0.99, 1.7}) {
                CHECK_THAT(yosida_F1(pot, YosidaParams{lam}, r), WithinAbs(oracle::envelope_by_search(pot, lam, r), 1e-6));
            }
        }
    }
}

TEST_CASE("derivative and integral relations of the envelope", "[potentials]") {
    for (const auto& pot : variants) {
        const YosidaParams y{0.05};
        // f1^lambda is the derivative of F1^lambda (central difference)
        for (double r : {-1.8, -0.5, 0.2, 0.95, 1.4}) {
            const double e = 1e-6;
            const double fd = (yosida_F1(pot, y, r + e) - yosida_F1(pot, y, r - e)) / (2 * e);
            CHECK_THAT(yosida_f1(pot, y, r), WithinAbs(fd, 1e-5 * std::max(1.0, std::abs(fd))));
        }
        // F1^lambda(s) = int_0^s f1^lambda, composite Simpson
        for (double s : {-1.6, 0.8, 2.0}) {
            const int n = 4000;
            const double hh = s / n;
            double acc = yosida_f1(pot, y, 0.0) + yosida_f1(pot, y, s);
            for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * yosida_f1(pot, y, i * hh);
            CHECK_THAT(yosida_F1(pot, y, s), WithinAbs(acc * hh / 3.0, 1e-7));
        }
        // a.e. derivative of f1^lambda
        for (double r : {-1.3, -0.2, 0.6, 1.2}) {
            const double e = 1e-7;
            const double fd = (yosida_f1(pot, y, r + e) - yosida_f1(pot, y, r - e)) / (2 * e);
            CHECK_THAT(yosida_f1_derivative(pot, y, r), WithinAbs(fd, 1e-4 * std::max(1.0, std::abs(fd))));
        }
    }
    // right-continuous branch at the obstacle kinks
    const auto ob = PotentialSpec::double_obstacle(1.0);
    CHECK(yosida_f1_derivative(ob, YosidaParams{0.1}, 1.0) == Catch::Approx(10.0));
    CHECK(yosida_f1_derivative(ob, YosidaParams{0.1}, -1.0) == 0.0);
}

TEST_CASE("envelope bounds on sampled points", "[potentials]") {
    SplitMix64 rng(99);
    for (const auto& pot : variants) {
        for (double lam : {1.0, 0.1, 0.01}) {
            const YosidaParams y{lam};
            for (int i = 0; i < 1000; ++i) {
                const double s = 6.0 * rng.uniform() - 3.0;
                const double Fl = yosida_F1(pot, y, s);
                CHECK(Fl >= -1e-12);
                CHECK(Fl <= pot.F1(s) + 1e-10);
                const double f0 = pot.f1_min_modulus(s);
                if (std::isfinite(f0)) CHECK(std::abs(yosida_f1(pot, y, s)) <= std::abs(f0) + 1e-10);
                if (lam <= pot.c0_lambda_max()) CHECK(Fl + pot.F2(s) >= -pot.lower_bound_C0() - 1e-10);
            }
        }
    }
}

TEST_CASE("monotone stabilised nonlinearity", "[potentials]") {
    for (const auto& pot : variants) {
        const double L = stabilization_L(pot);
        CHECK(L > pot.lip_f2());
        const YosidaParams y{0.01};
        double prev = -1e300;
        for (int i = 0; i <= 400; ++i) {
            const double s = -2.0 + 0.01 * i;
            const double v = yosida_f1(pot, y, s) + pot.f2(s) + L * s;
            CHECK(v >= prev - 1e-9);
            prev = v;
        }
    }
    CHECK(stabilization_L(PotentialSpec::none()) == 0.0);
}

TEST_CASE("potential pieces", "[potentials]") {
    const auto reg = PotentialSpec::regular();
    CHECK_THAT(reg.F1(1.0) + reg.F2(1.0), WithinAbs(0.0, 1e-15));
    CHECK_THAT(reg.F1(0.0) + reg.F2(0.0), WithinAbs(0.25, 1e-15));
    const auto lg = PotentialSpec::logarithmic(2.0);
    CHECK(std::isinf(lg.F1(1.1)));
    CHECK(std::isfinite(lg.F1(1.0)));
    CHECK(std::isinf(lg.f1_min_modulus(1.0)));
    const auto ob = PotentialSpec::double_obstacle(1.0);
    CHECK(std::isinf(ob.F1(1.0 + 1e-12)));
    CHECK(ob.f1_min_modulus(1.0) == 0.0);
    CHECK(parse_potential_kind("obstacle") == PotentialKind::double_obstacle);
    CHECK_THROWS_AS(parse_potential_kind("quartic"), ConfigError);
    CHECK_THROWS_AS(resolvent(reg, YosidaParams{0.0}, 1.0), ConfigError);
}

TEST_CASE("proliferation functions", "[potentials]") {
    const auto p = ProliferationSpec::smooth_clamp(2.0, 0.5);
    CHECK_THAT(p(0.0), WithinAbs(1.0, 1e-15));
    CHECK(p(100.0) <= p.sup_P());
    CHECK(p(-100.0) >= 0.0);
    SplitMix64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const double a = 4 * rng.uniform() - 2, b = 4 * rng.uniform() - 2;
        CHECK(std::abs(p(a) - p(b)) <= p.lip_P() * std::abs(a - b) + 1e-15);
    }
    const auto t = ProliferationSpec::tabulated({{-1.0, 0.0}, {0.0, 1.0}, {1.0, 1.5}});
    CHECK_THAT(t(-0.5), WithinAbs(0.5, 1e-15));
    CHECK_THAT(t(0.5), WithinAbs(1.25, 1e-15));
    CHECK(t(-5.0) == 0.0);
    CHECK(t(5.0) == 1.5);
    CHECK(t.sup_P() == 1.5);
    CHECK(t.lip_P() == 1.0);
    CHECK_THROWS_AS(ProliferationSpec::tabulated({{0.0, 1.0}, {0.0, 2.0}}), ConfigError);
    CHECK_THROWS_AS(ProliferationSpec::tabulated({{0.0, -1.0}}), ConfigError);
    CHECK_THROWS_AS(ProliferationSpec::constant(-1.0).validate(), ConfigError);
}
