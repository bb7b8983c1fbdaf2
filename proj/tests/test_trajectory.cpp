#include <catch_amalgamated.hpp>

#include "frachill/random.hpp"
#include "frachill/trajectory.hpp"

using namespace frachill;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Trajectory random_traj(const GridSpec& g, double h, int N, std::uint64_t seed) {
    std::vector<Field> z;
    for (int n = 0; n <= N; ++n) z.push_back(random_field(g, seed + n, 1.0));
    return Trajectory(h, std::move(z));
}

}  // namespace

TEST_CASE("single step constant fields", "[trajectory]") {
    const auto g = GridSpec::line(2.0, 4);
    const Trajectory t(0.1, {Field(g, 0.0), Field(g, 1.0)});
    const auto nn = interpolant_norms(t);
    CHECK_THAT(nn.bar_minus_hat_L2_sq, WithinAbs(0.1 / 3.0 * 2.0, 1e-15));
}

TEST_CASE("evaluators at nodes and between them", "[trajectory]") {
    const auto g = GridSpec::line(1.0, 5);
    const Trajectory t = random_traj(g, 0.25, 4, 10);
    for (int n = 0; n <= 4; ++n) CHECK(t.eval(InterpolantKind::hat, 0.25 * n) == t[n]);
    CHECK(t.eval(InterpolantKind::bar, 0.0) == t[1]);
    CHECK(t.eval(InterpolantKind::bar, 0.25) == t[1]);
    CHECK(t.eval(InterpolantKind::bar, 0.3) == t[2]);
    CHECK(t.eval(InterpolantKind::underline, 0.25) == t[1]);
    CHECK(t.eval(InterpolantKind::underline, 0.2) == t[0]);
    CHECK(t.eval(InterpolantKind::underline, 1.0) == t[3]);
    const Field mid = t.eval(InterpolantKind::hat, 0.375);
    const Field want = 0.5 * t[1] + 0.5 * t[2];
    CHECK(norm(mid - want) < 1e-15);
    CHECK_THROWS_AS(t.eval(InterpolantKind::hat, 1.1), ConfigError);
    CHECK_THROWS_AS(t.eval(InterpolantKind::hat, -0.01), ConfigError);
    const Trajectory t0(0.1, {Field(g, 3.0)});
    CHECK(t0.eval(InterpolantKind::bar, 0.0) == Field(g, 3.0));
}

TEST_CASE("norm identities agree with quadrature of the evaluators", "[trajectory]") {
    const auto g = GridSpec::line(1.0, 6);
    const double h = 0.1;
    const int N = 7;
    const Trajectory t = random_traj(g, h, N, 20);
    const auto nn = interpolant_norms(t);

    // Gauss-Legendre (3 points, exact for quartics) on every step
    const double gx[] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    const double gw[] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    double hat2 = 0, bar2 = 0, under2 = 0, bmh2 = 0, dt2 = 0;
    for (int n = 0; n < N; ++n) {
        for (int q = 0; q < 3; ++q) {
            const double tt = h * (n + 0.5 + 0.5 * gx[q]);
            const Field zh = t.eval(InterpolantKind::hat, tt);
            const Field zb = t.eval(InterpolantKind::bar, tt);
            const Field zu = t.eval(InterpolantKind::underline, tt);
            const double w = 0.5 * h * gw[q];
            hat2 += w * inner(zh, zh);
            bar2 += w * inner(zb, zb);
            under2 += w * inner(zu, zu);
            bmh2 += w * inner(zb - zh, zb - zh);
        }
        const Field d = (1.0 / h) * (t[n + 1] - t[n]);
        dt2 += h * inner(d, d);
    }
    CHECK_THAT(nn.hat_L2_sq, WithinRel(hat2, 1e-12));
    CHECK_THAT(nn.bar_L2_sq, WithinRel(bar2, 1e-12));
    CHECK_THAT(nn.underline_L2_sq, WithinRel(under2, 1e-12));
    CHECK_THAT(nn.bar_minus_hat_L2_sq, WithinRel(bmh2, 1e-12));
    CHECK_THAT(nn.dt_L2_sq, WithinRel(dt2, 1e-12));
    // ||bar - hat||^2 = (h^2/3)||d_t hat||^2
    CHECK_THAT(nn.bar_minus_hat_L2_sq, WithinRel(h * h / 3.0 * nn.dt_L2_sq, 1e-12));

    double mx = 0;
    for (int n = 1; n <= N; ++n) mx = std::max(mx, norm(t[n]));
    CHECK(nn.bar_Linf == mx);
}

TEST_CASE("time distance between interpolants", "[trajectory]") {
    const auto g = GridSpec::line(1.0, 4);
    const Trajectory a = random_traj(g, 0.2, 3, 30);
    CHECK(l2_time_distance(a, a) == 0.0);
    // coarse trajectory embedded in a fine one by linear interpolation: distance 0
    std::vector<Field> fine;
    for (int n = 0; n <= 6; ++n) fine.push_back(a.eval(InterpolantKind::hat, 0.1 * n));
    CHECK(l2_time_distance(a, Trajectory(0.1, fine)) < 1e-14);
    // constant offset c over [0, T]: distance sqrt(T |Omega|) |c|
    std::vector<Field> shifted;
    for (const auto& z : a.values()) shifted.push_back(z + Field(g, 0.5));
    CHECK_THAT(l2_time_distance(a, Trajectory(0.2, shifted)), WithinRel(0.5 * std::sqrt(0.6), 1e-13));
    CHECK_THROWS_AS(l2_time_distance(a, random_traj(g, 0.15, 4, 1)), ConfigError);
}
