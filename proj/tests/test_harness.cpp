#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "frachill/harness.hpp"
#include "frachill/random.hpp"

using namespace frachill;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SimConfig cfg(double h, int N, const PotentialSpec& pot = PotentialSpec::regular()) {
    SimConfig c;
    c.h = h;
    c.n_steps = N;
    c.L = stabilization_L(pot);
    return c;
}

SimState smooth_state(const GridSpec& g) {
    return {0, 0.0, Field::sample(g, [](double x, double) { return 0.2 * std::cos(2 * std::numbers::pi * x); }),
            Field::sample(g, [](double x, double) { return 0.5 * std::cos(std::numbers::pi * x); }), Field(g, 0.2)};
}

}  // namespace

TEST_CASE("energy of simple states", "[harness]") {
    const auto g = GridSpec::line(2.0, 16);
    const Stepper st(cfg(0.01, 1), Operators::neumann(g), Model{});
    CHECK_THAT(energy(st, Field(g), Field(g), Field(g)), WithinAbs(0.5, 1e-15));

    const Field mu = random_field(g, 1, 1.0);
    const double e1 = energy(st, mu, Field(g), Field(g)) - 0.5;
    const double e2 = energy(st, 2.0 * mu, Field(g), Field(g)) - 0.5;
    CHECK_THAT(e2, WithinRel(4.0 * e1, 1e-14));

    SimConfig small = cfg(0.01, 1);
    small.lambda = 1e-4;
    const Stepper sm(small, Operators::neumann(g), Model{});
    CHECK(std::abs(energy(sm, Field(g), Field(g, 1.0), Field(g))) <= 2.0 * small.lambda * g.volume());
    CHECK(std::abs(energy(sm, Field(g), Field(g, -1.0), Field(g))) <= 2.0 * small.lambda * g.volume());
}

TEST_CASE("energy inequality and its negative control", "[harness]") {
    const auto g = GridSpec::line(1.0, 64);
    SimConfig c = cfg(1e-3, 60);
    c.lambda = 1e-3;
    const Stepper st(c, Operators::neumann(g), Model{});
    SimState s0 = smooth_state(g);
    s0.mu = random_field(g, 3, 0.2);
    const auto r = run(st, s0);
    const auto led = check_energy_inequality(st, r);
    CHECK(led.passed());
    CHECK(led.line().passed());
    CHECK(led.energy.size() == 61);

    auto bad = r;
    bad.phi[30] *= 1.1;
    const auto failed = check_energy_inequality(st, bad);
    CHECK_FALSE(failed.passed());
    CHECK(failed.first_violation == 30);
    CHECK(failed.line().status == "fail");

    // pure linear decay: strict
    SimConfig lc = cfg(0.01, 20, PotentialSpec::none());
    const Stepper lin(lc, Operators::neumann(g), {PotentialSpec::none(), ProliferationSpec::constant(0.0)});
    CHECK(check_energy_inequality(lin, run(lin, s0)).passed());
    CHECK_THROWS_AS(check_energy_inequality(st.with_forcing({Field(g, 1.0), {}, {}}), r), ConfigError);
}

TEST_CASE("mass conservation", "[harness]") {
    const auto g = GridSpec::line(1.0, 32);
    const Stepper st(cfg(0.01, 20), Operators::neumann(g), Model{});
    const SimState cst{0, 0.0, Field(g, 0.1), Field(g, 0.3), Field(g, 0.1)};
    const auto rc = check_mass_conservation(st, run(st, cst));
    CHECK(rc.max_drift <= rc.threshold);
    const SimState rnd{0, 0.0, random_field(g, 1, 0.5), random_field(g, 2, 0.5), random_field(g, 3, 0.5)};
    CHECK(check_mass_conservation(st, run(st, rnd)).line().passed());

    Operators ops{build_operator(g, BoundaryCondition::dirichlet), build_operator(g, BoundaryCondition::neumann),
                  build_operator(g, BoundaryCondition::neumann)};
    const Stepper dir(cfg(0.01, 2), ops, Model{});
    const auto line = check_mass_conservation(dir, run(dir, rnd)).line();
    CHECK(line.status == "skipped: no constant eigenfunction");
    CHECK_FALSE(line.failed());
}

TEST_CASE("complementarity", "[harness]") {
    const auto g = GridSpec::line(1.0, 32);
    {
        const Stepper lin(cfg(0.01, 10, PotentialSpec::none()), Operators::neumann(g),
                          {PotentialSpec::none(), ProliferationSpec::constant(0.0)});
        const auto rep = check_complementarity(lin, run(lin, smooth_state(g)));
        CHECK(rep.xi_max < 1e-9);
    }
    {
        const Stepper st(cfg(0.01, 10), Operators::neumann(g), Model{});
        const auto rep = check_complementarity(st, run(st, smooth_state(g)));
        CHECK(rep.xi_vs_f1_lambda <= 1e-9);
    }
    {
        // small data stays inside the obstacle: xi within the interior band everywhere
        const auto pot = PotentialSpec::double_obstacle(1.0);
        const Stepper ob(cfg(0.01, 10, pot), Operators::neumann(g), {pot, ProliferationSpec{}});
        const auto rep = check_complementarity(ob, run(ob, smooth_state(g)));
        CHECK(rep.band_violation == 0.0);
        CHECK(rep.overshoot == 0.0);
        CHECK(rep.xi_max <= rep.tol);
    }
}

TEST_CASE("continuous dependence probe", "[harness]") {
    const auto g = GridSpec::line(1.0, 32);
    const Stepper st(cfg(0.01, 10), Operators::neumann(g), Model{});
    const SimState s0 = smooth_state(g);
    const auto base = run(st, s0);
    CHECK(dependence_norms(st, base, base).total() == 0.0);

    Forcing f;
    f.u_phi = random_field(g, 7, 1.0);
    const auto p = probe_continuous_dependence(st, s0, f, {1e-2, 5e-3});
    const double q = p[0].ratio / p[1].ratio;
    CHECK(q >= 0.5);
    CHECK(q <= 2.0);
    CHECK_THAT(p[0].forcing, WithinRel(1e-2 * std::sqrt(0.1) * norm(*f.u_phi), 1e-12));

    // perturbing the initial S instead: finite and decreasing with the size
    double prev = 1e300;
    for (double eps : {1e-1, 5e-2, 2.5e-2}) {
        SimState p0 = s0;
        p0.s += eps * random_field(g, 8, 1.0);
        const double d = dependence_norms(st, run(st, p0), base).total();
        CHECK(std::isfinite(d));
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("refinement studies", "[harness]") {
    const auto g = GridSpec::line(1.0, 32);
    const Stepper st(cfg(0.02, 5), Operators::neumann(g), Model{});
    const SimState s0 = smooth_state(g);
    CHECK_THROWS_AS(study_h(st, s0, 2), ConfigError);
    const auto r = study_h(st, s0, 3);
    CHECK(r.parameter.size() == 3);
    CHECK(r.mu.diffs.size() == 2);
    CHECK(r.phi.strictly_decreasing);
    CHECK(r.phi.fitted_order > 0.4);

    const auto same = study_lambda(st, s0, {0.05, 0.05});
    CHECK(same.phi.diffs[0] == 0.0);
    CHECK_THROWS_AS(study_lambda(st, s0, {0.05}), ConfigError);

    CHECK(nonincreasing_within({1.0, 1.05, 0.5}, 0.1));
    CHECK_FALSE(nonincreasing_within({1.0, 1.2}, 0.1));
}

TEST_CASE("regularity norms", "[harness]") {
    const auto g = GridSpec::line(1.0, 16);
    const Model m{};
    SimConfig c = cfg(0.02, 5);
    const Stepper st(c, Operators::neumann(g), m);
    const double cval = yosida_f1(m.potential, c.yosida(), 0.4) + m.potential.f2(0.4);
    const SimState eq{0, 0.0, Field(g, cval), Field(g, 0.4), Field(g, cval)};
    const auto rep = check_regularity(st, eq, 2);
    for (const auto& l : rep.levels) CHECK(l.max_dphi_dt < 1e-8);

    const auto lg = PotentialSpec::logarithmic(1.0);
    const Stepper lst(cfg(0.02, 5, lg), Operators::neumann(g), {lg, ProliferationSpec{}});
    CHECK_THROWS_AS(check_regularity(lst, SimState{0, 0.0, Field(g), Field(g, 1.0), Field(g)}, 2), ConfigError);
}

TEST_CASE("summary line format", "[harness]") {
    CHECK(format_check(make_check("x", 0.5, 1.0, true)) == "x,0.5,1,pass");
    CHECK(format_check(make_check("y", 2.0, 1.0, false)) == "y,2,1,fail");
}
