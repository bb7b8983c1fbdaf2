#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "frachill/error.hpp"
#include "frachill/grid.hpp"
#include "frachill/potentials.hpp"
#include "frachill/spectral.hpp"
#include "frachill/stepper.hpp"
#include "frachill/trajectory.hpp"

namespace frachill {

/// One row of the machine-readable summary.
struct CheckLine {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string status;  // "pass", "fail" or "skipped: <reason>"

    bool passed() const { return status == "pass"; }
    bool failed() const { return status == "fail"; }
};

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_check(const CheckLine& c) {
    return c.name + "," + format_number(c.value) + "," + format_number(c.threshold) + "," + c.status;
}

inline CheckLine make_check(std::string name, double value, double threshold, bool ok) {
    return {std::move(name), value, threshold, ok ? "pass" : "fail"};
}

// ---------------------------------------------------------------- energy

/// (alpha/2)||mu||^2 + (1/2)||B^sigma phi||^2 + int F^lambda(phi) + (1/2)||S||^2.
inline double energy(const Stepper& st, const Field& mu, const Field& phi, const Field& s) {
    const auto& cfg = st.config();
    const auto& pot = st.model().potential;
    const auto yp = cfg.yosida();
    const double bs = power_seminorm(st.operators().B, cfg.sigma, phi);
    double F = 0.0;
    for (double v : phi.values()) F += yosida_F1(pot, yp, v) + pot.F2(v);
    const double nm = norm(mu), ns = norm(s);
    return 0.5 * cfg.alpha * nm * nm + 0.5 * bs * bs + phi.grid().weight() * F + 0.5 * ns * ns;
}

inline double energy(const Stepper& st, const SimState& state) { return energy(st, state.mu, state.phi, state.s); }

/// Dissipation terms of one step n -> n+1.
struct StepDissipation {
    double A_mu = 0.0;        // h ||A^rho mu'||^2
    double proliferation = 0.0;  // h int P(phi^n)(mu' - S')^2
    double phi_rate = 0.0;    // beta ||phi' - phi||^2 / h
    double C_s = 0.0;         // h ||C^tau S'||^2
    double mu_jump = 0.0;     // (alpha/2)||mu' - mu||^2
    double B_phi_jump = 0.0;  // (1/2)||B^sigma (phi' - phi)||^2
    double s_jump = 0.0;      // (1/2)||S' - S||^2
    double L_jump = 0.0;      // (L/2)||phi' - phi||^2

    double total() const {
        return A_mu + proliferation + phi_rate + C_s + mu_jump + B_phi_jump + s_jump + L_jump;
    }
};

inline StepDissipation step_dissipation(const Stepper& st, const SimState& prev, const SimState& next) {
    const auto& cfg = st.config();
    const auto& ops = st.operators();
    const double h = cfg.h;
    auto sq = [](double x) { return x * x; };
    StepDissipation d;
    d.A_mu = h * sq(power_seminorm(ops.A, cfg.rho, next.mu));
    const Field P = st.proliferation_field(prev.phi);
    const Field gap = next.mu - next.s;
    d.proliferation = h * inner(hadamard(P, gap), gap);
    const Field dphi = next.phi - prev.phi;
    const double ndphi = norm(dphi);
    d.phi_rate = cfg.beta * ndphi * ndphi / h;
    d.C_s = h * sq(power_seminorm(ops.C, cfg.tau, next.s));
    d.mu_jump = 0.5 * cfg.alpha * sq(norm(next.mu - prev.mu));
    d.B_phi_jump = 0.5 * sq(power_seminorm(ops.B, cfg.sigma, dphi));
    d.s_jump = 0.5 * sq(norm(next.s - prev.s));
    d.L_jump = 0.5 * cfg.L * ndphi * ndphi;
    return d;
}

struct EnergyLedger {
    std::vector<double> energy;          // E_m
    std::vector<double> dissipation;     // cumulative sum over n < m
    double slack = 0.0;
    double max_excess = -std::numeric_limits<double>::infinity();  // max_m E_m + D_m - E_0
    int first_violation = -1;

    bool passed() const { return first_violation < 0; }
    CheckLine line() const {
        CheckLine c = make_check("energy_inequality", max_excess, slack, passed());
        if (!passed()) c.status = "fail";
        return c;
    }
};

/// E_m + sum_{n<m} dissipation_n <= E_0 + slack for every m,
/// slack = 100 N (tol_outer + tol_cg + tol_newton)(1 + |E_0|).
inline EnergyLedger check_energy_inequality(const Stepper& st, const RunResult& run) {
    if (!st.forcing().empty()) throw ConfigError("energy inequality is stated for the unforced problem");
    const auto& cfg = st.config();
    const int N = run.steps();
    EnergyLedger led;
    const double E0 = energy(st, run.state(0));
    led.slack = 100.0 * std::max(N, 1) * (cfg.tol_outer + cfg.tol_cg + cfg.tol_newton) * (1.0 + std::abs(E0));
    led.energy.push_back(E0);
    led.dissipation.push_back(0.0);
    double cum = 0.0;
    for (int m = 1; m <= N; ++m) {
        const SimState prev = run.state(m - 1), next = run.state(m);
        cum += step_dissipation(st, prev, next).total();
        const double Em = energy(st, next);
        led.energy.push_back(Em);
        led.dissipation.push_back(cum);
        const double excess = Em + cum - E0;
        led.max_excess = std::max(led.max_excess, excess);
        if (excess > led.slack && led.first_violation < 0) led.first_violation = m;
    }
    if (N == 0) led.max_excess = 0.0;
    return led;
}

// ---------------------------------------------------------------- mass

struct MassReport {
    std::vector<double> mass;  // mean(alpha mu + phi + S)
    double max_drift = 0.0;    // max |m_n - m_0| / (1 + |m_0|)
    double threshold = 0.0;
    bool skipped = false;
    CheckLine line() const {
        if (skipped) return {"mass_conservation", 0.0, threshold, "skipped: no constant eigenfunction"};
        return make_check("mass_conservation", max_drift, threshold, max_drift <= threshold);
    }
};

inline double mass(const Stepper& st, const Field& mu, const Field& phi, const Field& s) {
    return st.config().alpha * mean(mu) + mean(phi) + mean(s);
}

/// Drift of mean(alpha mu + phi + S); only meaningful when A and C carry the
/// constant eigenfunction and no forcing is applied. Threshold 10 N tol_outer
/// unless overridden.
inline MassReport check_mass_conservation(const Stepper& st, const RunResult& run,
                                          std::optional<double> threshold = std::nullopt) {
    MassReport rep;
    const int N = run.steps();
    rep.threshold = threshold.value_or(10.0 * std::max(N, 1) * st.config().tol_outer);
    const auto& ops = st.operators();
    if (ops.A.bc() != BoundaryCondition::neumann || ops.C.bc() != BoundaryCondition::neumann) {
        rep.skipped = true;
        return rep;
    }
    const double m0 = mass(st, run.mu[0], run.phi[0], run.s[0]);
    for (int n = 0; n <= N; ++n) {
        const double m = mass(st, run.mu[n], run.phi[n], run.s[n]);
        rep.mass.push_back(m);
        rep.max_drift = std::max(rep.max_drift, std::abs(m - m0) / (1.0 + std::abs(m0)));
    }
    return rep;
}

// ---------------------------------------------------------------- continuous dependence

/// The solution-difference norms on the left of the continuous-dependence
/// estimate, on piecewise-constant interpolants of (a - b).
struct DependenceNorms {
    double mu_L2H = 0.0;
    double one_star_mu = 0.0;  // max_m ||h sum_{n<m} mu^n||_{V_A^rho}
    double phi_LinfH = 0.0;
    double phi_L2VB = 0.0;
    double s_LinfH = 0.0;
    double s_L2VC = 0.0;
    double total() const { return mu_L2H + one_star_mu + phi_LinfH + phi_L2VB + s_LinfH + s_L2VC; }
};

inline DependenceNorms dependence_norms(const Stepper& st, const RunResult& a, const RunResult& b) {
    if (a.steps() != b.steps()) throw ConfigError("runs have different step counts");
    const auto& cfg = st.config();
    const auto& ops = st.operators();
    const double h = a.mu.h();
    const int N = a.steps();
    DependenceNorms d;
    Field cum(a.mu[0].grid());
    double mu2 = 0.0, phiV = 0.0, sV = 0.0;
    for (int n = 1; n <= N; ++n) {
        cum.axpy(h, a.mu[n - 1] - b.mu[n - 1]);
        d.one_star_mu = std::max(d.one_star_mu, graph_norm(ops.A, cfg.rho, cum));
        const Field dmu = a.mu[n] - b.mu[n];
        const Field dphi = a.phi[n] - b.phi[n];
        const Field ds = a.s[n] - b.s[n];
        mu2 += h * inner(dmu, dmu);
        const double gp = graph_norm(ops.B, cfg.sigma, dphi);
        const double gs = graph_norm(ops.C, cfg.tau, ds);
        phiV += h * gp * gp;
        sV += h * gs * gs;
        d.phi_LinfH = std::max(d.phi_LinfH, norm(dphi));
        d.s_LinfH = std::max(d.s_LinfH, norm(ds));
    }
    d.mu_L2H = std::sqrt(mu2);
    d.phi_L2VB = std::sqrt(phiV);
    d.s_L2VC = std::sqrt(sV);
    return d;
}

/// sum of ||u||_{L2(0,T;H)} over the supplied time-independent forcings.
inline double forcing_norm(const Forcing& f, double T) {
    double s = 0.0;
    for (const auto* u : {&f.u_mu, &f.u_phi, &f.u_s}) {
        if (*u) s += std::sqrt(T) * norm(**u);
    }
    return s;
}

struct DependenceProbe {
    double epsilon = 0.0;
    DependenceNorms difference;
    double forcing = 0.0;
    double ratio = 0.0;
};

/// Runs the unforced and the eps-scaled forced problem from the same data and
/// returns the ratio of the difference aggregate to the forcing norm.
inline std::vector<DependenceProbe> probe_continuous_dependence(const Stepper& st, const SimState& initial,
                                                                const Forcing& direction,
                                                                const std::vector<double>& epsilons) {
    const RunResult base = run(st, initial);
    const double T = st.config().h * st.config().n_steps;
    std::vector<DependenceProbe> out;
    for (double eps : epsilons) {
        Forcing f;
        if (direction.u_mu) f.u_mu = eps * *direction.u_mu;
        if (direction.u_phi) f.u_phi = eps * *direction.u_phi;
        if (direction.u_s) f.u_s = eps * *direction.u_s;
        const RunResult forced = run(st.with_forcing(f), initial);
        DependenceProbe p;
        p.epsilon = eps;
        p.difference = dependence_norms(st, forced, base);
        p.forcing = forcing_norm(f, T);
        p.ratio = p.forcing > 0.0 ? p.difference.total() / p.forcing : 0.0;
        out.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------- refinement studies

struct FieldStudy {
    std::vector<double> diffs;   // ||hat z_k - hat z_{k+1}||_{L2(0,T;H)}
    std::vector<double> orders;  // log2(d_k / d_{k+1})
    double fitted_order = std::numeric_limits<double>::quiet_NaN();
    bool strictly_decreasing = false;
};

struct StudyResult {
    std::vector<double> parameter;  // h or lambda per level
    FieldStudy mu, phi, s;
    std::vector<double> overshoot;             // lambda study only
    std::vector<double> natural_residual;      // lambda study, obstacle only
    std::vector<double> band_violation;        // lambda study, obstacle only
    std::vector<RunResult> runs;
};

namespace detail {

inline FieldStudy analyse_sequence(std::vector<double> diffs, const std::vector<double>& parameter) {
    FieldStudy fs;
    fs.diffs = std::move(diffs);
    fs.strictly_decreasing = fs.diffs.size() >= 2;
    for (std::size_t k = 0; k + 1 < fs.diffs.size(); ++k) {
        if (!(fs.diffs[k + 1] < fs.diffs[k])) fs.strictly_decreasing = false;
        fs.orders.push_back(std::log(fs.diffs[k] / fs.diffs[k + 1]) / std::log(parameter[k] / parameter[k + 1]));
    }
    // least-squares slope of log d_k against log p_k
    const std::size_t m = fs.diffs.size();
    if (m >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t k = 0; k < m; ++k) {
            const double x = std::log(parameter[k]), y = std::log(fs.diffs[k]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        fs.fitted_order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    return fs;
}

}  // namespace detail

/// Runs h, h/2, ..., h/2^{levels-1} over the same final time and records the
/// L2(0,T;H) distances between successive piecewise-linear interpolants.
inline StudyResult study_h(const Stepper& st, const SimState& initial, int levels) {
    if (levels < 3) throw ConfigError("h study needs at least 3 levels");
    StudyResult r;
    for (int k = 0; k < levels; ++k) {
        const Stepper sk = st.refined(1 << k);
        r.parameter.push_back(sk.config().h);
        r.runs.push_back(run(sk, initial));
    }
    std::vector<double> dm, dp, ds;
    for (int k = 0; k + 1 < levels; ++k) {
        dm.push_back(l2_time_distance(r.runs[k].mu, r.runs[k + 1].mu));
        dp.push_back(l2_time_distance(r.runs[k].phi, r.runs[k + 1].phi));
        ds.push_back(l2_time_distance(r.runs[k].s, r.runs[k + 1].s));
    }
    std::vector<double> mid(r.parameter.begin(), r.parameter.end() - 1);
    r.mu = detail::analyse_sequence(dm, mid);
    r.phi = detail::analyse_sequence(dp, mid);
    r.s = detail::analyse_sequence(ds, mid);
    return r;
}

// ---------------------------------------------------------------- complementarity

struct ComplementarityReport {
    double xi_vs_f1_lambda = 0.0;  // max_n ||xi^n - f1^lambda(phi^n)||, relative to the assembled terms
    double xi_vs_f1 = 0.0;         // regular: max_n ||xi^n - (phi^n)^3||
    double xi_max = 0.0;           // max_n ||xi^n||_inf
    // double obstacle
    double delta = 0.0;
    double tol = 0.0;
    double band_violation = 0.0;    // max amount beyond tol of the sign / interior conditions
    double natural_residual = 0.0;  // max_n ||phi - clamp(phi + xi)||_inf
    double overshoot = 0.0;         // max (|phi| - 1)_+
};

/// Recovers xi^n = mu^n - beta (phi^n - phi^{n-1})/h - B^{2sigma} phi^n - f2(phi^n)
///                 - L (phi^n - phi^{n-1}) - u_phi
/// for n >= 1 and compares it with the subdifferential of F1.
inline ComplementarityReport check_complementarity(const Stepper& st, const RunResult& run) {
    const auto& cfg = st.config();
    const auto& pot = st.model().potential;
    const auto yp = cfg.yosida();
    ComplementarityReport rep;
    double max_res = 0.0;
    for (const auto& r : run.reports) max_res = std::max({max_res, r.residual_mu, r.residual_phi, r.residual_s});
    rep.delta = std::max(10.0 * cfg.lambda, 1e-6);
    rep.tol = 10.0 * (cfg.lambda + max_res);
    for (int n = 1; n <= run.steps(); ++n) {
        const Field& phi = run.phi[n];
        const Field dphi = phi - run.phi[n - 1];
        Field xi = run.mu[n];
        xi.axpy(-(cfg.beta / cfg.h + cfg.L), dphi);
        xi -= st.B2(phi);
        xi -= map_values(phi, [&](double v) { return pot.f2(v); });
        if (st.forcing().u_phi) xi -= *st.forcing().u_phi;

        const Field fl = map_values(phi, [&](double v) { return yosida_f1(pot, yp, v); });
        // relative to the size of the terms xi was assembled from
        const double scale = 1.0 + norm(run.mu[n]) + (cfg.beta / cfg.h + cfg.L) * norm(dphi) + norm(st.B2(phi)) +
                             norm(map_values(phi, [&](double v) { return pot.f2(v); })) + norm(fl);
        rep.xi_vs_f1_lambda = std::max(rep.xi_vs_f1_lambda, norm(xi - fl) / scale);
        rep.xi_max = std::max(rep.xi_max, max_abs(xi));
        if (pot.kind == PotentialKind::regular) {
            const Field cube = map_values(phi, [](double v) { return v * v * v; });
            rep.xi_vs_f1 = std::max(rep.xi_vs_f1, norm(xi - cube));
        }
        if (pot.kind == PotentialKind::double_obstacle) {
            for (std::size_t i = 0; i < phi.size(); ++i) {
                const double p = phi[i], x = xi[i];
                double v = 0.0;
                if (p >= 1.0 - rep.delta) v = std::max(v, -x - rep.tol);
                if (p <= -1.0 + rep.delta) v = std::max(v, x - rep.tol);
                if (std::abs(p) <= 1.0 - rep.delta) v = std::max(v, std::abs(x) - rep.tol);
                rep.band_violation = std::max(rep.band_violation, v);
                rep.natural_residual = std::max(rep.natural_residual, std::abs(p - std::clamp(p + x, -1.0, 1.0)));
                rep.overshoot = std::max(rep.overshoot, std::max(std::abs(p) - 1.0, 0.0));
            }
        }
    }
    return rep;
}

/// Same h, successive lambda levels; Cauchy differences between successive
/// levels plus, for the double obstacle, overshoot and complementarity norms.
inline StudyResult study_lambda(const Stepper& st, const SimState& initial, const std::vector<double>& lambdas) {
    if (lambdas.size() < 2) throw ConfigError("lambda study needs at least 2 levels");
    StudyResult r;
    for (double lam : lambdas) {
        const Stepper sl = st.with_lambda(lam);
        r.parameter.push_back(lam);
        r.runs.push_back(run(sl, initial));
        if (st.model().potential.kind == PotentialKind::double_obstacle) {
            const auto c = check_complementarity(sl, r.runs.back());
            r.overshoot.push_back(c.overshoot);
            r.natural_residual.push_back(c.natural_residual);
            r.band_violation.push_back(c.band_violation);
        }
    }
    std::vector<double> dm, dp, ds;
    for (std::size_t k = 0; k + 1 < lambdas.size(); ++k) {
        dm.push_back(l2_time_distance(r.runs[k].mu, r.runs[k + 1].mu));
        dp.push_back(l2_time_distance(r.runs[k].phi, r.runs[k + 1].phi));
        ds.push_back(l2_time_distance(r.runs[k].s, r.runs[k + 1].s));
    }
    std::vector<double> mid(r.parameter.begin(), r.parameter.end() - 1);
    r.mu = detail::analyse_sequence(dm, mid);
    r.phi = detail::analyse_sequence(dp, mid);
    r.s = detail::analyse_sequence(ds, mid);
    return r;
}

/// x_{k+1} <= x_k (1 + rel) for all k.
inline bool nonincreasing_within(const std::vector<double>& x, double rel) {
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        if (x[k + 1] > x[k] * (1.0 + rel)) return false;
    }
    return true;
}

// ---------------------------------------------------------------- regularity

struct RegularityLevel {
    double h = 0.0;
    double max_dphi_dt = 0.0;  // max_n ||(phi^{n+1} - phi^n)/h||
    double max_mu_graph = 0.0; // max_n ||mu^n||_{V_A^rho}
    double max_s_graph = 0.0;  // max_n ||S^n||_{V_C^tau}
};

struct RegularityReport {
    std::vector<RegularityLevel> levels;
    // max/min - 1 across levels
    double spread_dphi = 0.0;
    double spread_mu = 0.0;
    double spread_s = 0.0;
};

inline RegularityLevel regularity_norms(const Stepper& st, const RunResult& run) {
    const auto& cfg = st.config();
    const auto& ops = st.operators();
    RegularityLevel lv;
    lv.h = cfg.h;
    for (int n = 0; n <= run.steps(); ++n) {
        if (n < run.steps()) lv.max_dphi_dt = std::max(lv.max_dphi_dt, norm(run.phi[n + 1] - run.phi[n]) / cfg.h);
        lv.max_mu_graph = std::max(lv.max_mu_graph, graph_norm(ops.A, cfg.rho, run.mu[n]));
        lv.max_s_graph = std::max(lv.max_s_graph, graph_norm(ops.C, cfg.tau, run.s[n]));
    }
    return lv;
}

/// Requires smooth data: f1 minimal section of phi_0 finite everywhere (the
/// admissibility gate for this check) and finite discrete graph norms.
inline RegularityReport check_regularity(const Stepper& st, const SimState& initial, int halvings) {
    const auto& pot = st.model().potential;
    for (double v : initial.phi.values()) {
        if (!std::isfinite(pot.f1_min_modulus(v))) {
            throw ConfigError("regularity check needs f1 minimal section of phi_0 bounded; violated at phi_0 = " +
                              std::to_string(v));
        }
    }
    RegularityReport rep;
    for (int k = 0; k <= halvings; ++k) {
        const Stepper sk = st.refined(1 << k);
        rep.levels.push_back(regularity_norms(sk, run(sk, initial)));
    }
    auto spread = [&](auto get) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& l : rep.levels) {
            lo = std::min(lo, get(l));
            hi = std::max(hi, get(l));
        }
        if (hi == 0.0) return 0.0;
        return lo > 0.0 ? hi / lo - 1.0 : std::numeric_limits<double>::infinity();
    };
    rep.spread_dphi = spread([](const RegularityLevel& l) { return l.max_dphi_dt; });
    rep.spread_mu = spread([](const RegularityLevel& l) { return l.max_mu_graph; });
    rep.spread_s = spread([](const RegularityLevel& l) { return l.max_s_graph; });
    return rep;
}

}  // namespace frachill
