#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "frachill/cg.hpp"
#include "frachill/error.hpp"
#include "frachill/grid.hpp"
#include "frachill/potentials.hpp"
#include "frachill/random.hpp"
#include "frachill/spectral.hpp"
#include "frachill/trajectory.hpp"

namespace frachill {

/// Physical and numerical parameters of one run.
struct SimConfig {
    double alpha = 1.0;
    double beta = 1.0;
    double rho = 0.5;
    double sigma = 0.5;
    double tau = 0.5;
    double h = 1e-3;
    int n_steps = 1;
    double lambda = 1e-2;
    double L = 1.1;
    double tol_outer = 1e-10;
    double tol_cg = 1e-12;
    double tol_newton = 1e-11;
    int max_outer = 100;
    int max_cg = 500;
    int max_newton = 50;
    bool adapt_h = false;
    int max_halvings = 10;
    double root_tolerance = 1e-15;
    int max_root_iters = 200;

    YosidaParams yosida() const { return {lambda, root_tolerance, max_root_iters}; }

    void validate(const PotentialSpec& potential) const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
        };
        positive(alpha, "alpha");
        positive(beta, "beta");
        positive(rho, "rho");
        positive(sigma, "sigma");
        positive(tau, "tau");
        positive(h, "h");
        positive(lambda, "lambda");
        positive(tol_outer, "tol.outer");
        positive(tol_cg, "tol.cg");
        positive(tol_newton, "tol.newton");
        if (n_steps < 0) throw ConfigError("n_steps must be nonnegative");
        if (max_outer < 1 || max_cg < 1 || max_newton < 1) throw ConfigError("iteration caps must be >= 1");
        const double lip = potential.lip_f2();
        const bool ok = lip > 0.0 ? L > lip : L >= 0.0;
        if (!ok || !std::isfinite(L)) {
            throw ConfigError("stabilisation constant L = " + std::to_string(L) + " must exceed Lip f2 = " +
                              std::to_string(lip));
        }
    }
};

/// Realisations of A, B, C on a common grid.
struct Operators {
    SpectralOperator A;
    SpectralOperator B;
    SpectralOperator C;

    static Operators neumann(const GridSpec& g) {
        return {build_operator(g, BoundaryCondition::neumann), build_operator(g, BoundaryCondition::neumann),
                build_operator(g, BoundaryCondition::neumann)};
    }
    const GridSpec& grid() const { return A.grid(); }
};

/// Nonlinear ingredients of the model.
struct Model {
    PotentialSpec potential = PotentialSpec::regular();
    ProliferationSpec proliferation = ProliferationSpec::smooth_clamp(1.0, 1.0);
};

/// Known time-independent source terms added to the right-hand sides of the
/// mu, phi and S equations.
struct Forcing {
    std::optional<Field> u_mu;
    std::optional<Field> u_phi;
    std::optional<Field> u_s;
    bool empty() const { return !u_mu && !u_phi && !u_s; }
};

struct SimState {
    int n = 0;
    double time = 0.0;
    Field mu;
    Field phi;
    Field s;
};

struct StepReport {
    int outer_iters = 0;
    int cg_iters = 0;
    int newton_iters = 0;
    double outer_ratio = 0.0;
    double residual_mu = 0.0;
    double residual_phi = 0.0;
    double residual_s = 0.0;
    double K_hat = 0.0;
    int halvings = 0;
};

/// Relative residuals of the three discrete equations for an accepted step.
struct StepResiduals {
    double mu = 0.0;
    double phi = 0.0;
    double s = 0.0;
};

/// Outcome of one evaluation of the composed fixed-point map.
struct PhiMapValue {
    Field mu;
    Field phi;
    Field s;
};

struct SolveStats {
    int cg_iters = 0;
    int newton_iters = 0;
};

/// Semi-implicit Euler step for the regularised system
///
///   alpha (mu' - mu)/h + (phi' - phi)/h + A^{2rho} mu' + P(phi)(mu' - S') = u_mu
///   beta (phi' - phi)/h + B^{2sigma} phi' + f^lambda(phi') + L (phi' - phi) = mu' + u_phi
///   (S' - S)/h + C^{2tau} S' + P(phi)(S' - mu') = u_S
///
/// solved by iterating mu_bar -> Phi1(Phi2(Phi3(mu_bar)), Phi3(mu_bar)), where
/// Phi3 solves the S equation, Phi2 the phi equation with mu' eliminated
/// through A_h^{-1}, and Phi1 recovers mu'.
class Stepper {
public:
    Stepper(SimConfig cfg, Operators ops, Model model, Forcing forcing = {})
        : cfg_(std::move(cfg)), ops_(std::move(ops)), model_(std::move(model)), forcing_(std::move(forcing)) {
        cfg_.validate(model_.potential);
        model_.proliferation.validate();
        if (!(ops_.B.grid() == ops_.A.grid()) || !(ops_.C.grid() == ops_.A.grid())) {
            throw ConfigError("operators A, B, C must share one grid");
        }
        for (const auto* f : {&forcing_.u_mu, &forcing_.u_phi, &forcing_.u_s}) {
            if (*f) ops_.A.check_grid(**f);
        }
        a2_ = ops_.A.powers(2.0 * cfg_.rho);
        b2_ = ops_.B.powers(2.0 * cfg_.sigma);
        c2_ = ops_.C.powers(2.0 * cfg_.tau);
    }

    const SimConfig& config() const noexcept { return cfg_; }
    const Operators& operators() const noexcept { return ops_; }
    const Model& model() const noexcept { return model_; }
    const Forcing& forcing() const noexcept { return forcing_; }

    /// Same model with a different time step.
    Stepper with_step(double h) const {
        Stepper s = *this;
        s.cfg_.h = h;
        return s;
    }

    /// h / factor over the same final time.
    Stepper refined(int factor) const {
        if (factor < 1) throw ConfigError("refinement factor must be >= 1");
        Stepper s = with_step(cfg_.h / factor);
        s.cfg_.n_steps = cfg_.n_steps * factor;
        return s;
    }

    Stepper with_lambda(double lambda) const {
        Stepper s = *this;
        s.cfg_.lambda = lambda;
        s.cfg_.validate(model_.potential);
        return s;
    }

    Stepper with_forcing(Forcing f) const { return Stepper(cfg_, ops_, model_, std::move(f)); }

    Field proliferation_field(const Field& phi_n) const {
        return map_values(phi_n, [&](double v) { return model_.proliferation(v); });
    }

    Field A2(const Field& v) const { return ops_.A.apply_multiplier(v, a2_); }
    Field B2(const Field& v) const { return ops_.B.apply_multiplier(v, b2_); }
    Field C2(const Field& v) const { return ops_.C.apply_multiplier(v, c2_); }

    /// A_h v = (alpha/h) v + A^{2rho} v + P(phi_n) v.
    Field apply_Ah(const Field& phi_n, const Field& v) const { return apply_Ah_frozen(proliferation_field(phi_n), v); }

    Field solve_Ah(const Field& phi_n, const Field& rhs, SolveStats* stats = nullptr) const {
        const Field P = proliferation_field(phi_n);
        return solve_Ah_frozen(P, mean(P), rhs, stats);
    }

    /// S' from (1/h + C^{2tau} + P) S' = S/h + P mu_bar + u_S.
    Field phi3_solve(const Field& phi_n, const Field& s_n, const Field& mu_bar, SolveStats* stats = nullptr) const {
        const Field P = proliferation_field(phi_n);
        return phi3_frozen(P, mean(P), s_n, mu_bar, stats);
    }

    /// phi' from the phi equation with mu' = A_h^{-1}(...) substituted.
    Field phi2_solve(const Field& phi_n, const Field& mu_n, const Field& s_np1, SolveStats* stats = nullptr,
                     const Field* guess = nullptr) const {
        const Field P = proliferation_field(phi_n);
        return phi2_frozen(P, mean(P), phi_n, mu_n, s_np1, stats, guess);
    }

    /// mu' = A_h^{-1}((alpha/h) mu - (phi' - phi)/h + P S' + u_mu).
    Field phi1_apply(const Field& phi_n, const Field& mu_n, const Field& phi_np1, const Field& s_np1,
                     SolveStats* stats = nullptr) const {
        const Field P = proliferation_field(phi_n);
        return phi1_frozen(P, mean(P), phi_n, mu_n, phi_np1, s_np1, stats);
    }

    /// One evaluation of the composed map at mu_bar.
    PhiMapValue phi_map(const SimState& state, const Field& mu_bar, SolveStats* stats = nullptr,
                        const Field* phi_guess = nullptr) const {
        const Field P = proliferation_field(state.phi);
        const double Pm = mean(P);
        return phi_map_frozen(P, Pm, state, mu_bar, stats, phi_guess);
    }

    /// Advances one step. Non-contraction, an exhausted iteration budget or an
    /// inner solver failure is retried with 2, 4, ... substeps when adapt_h is
    /// set; otherwise it throws SolverFailure.
    std::pair<SimState, StepReport> step(const SimState& state) const {
        try {
            return step_once(state);
        } catch (const SolverFailure& first) {
            if (!cfg_.adapt_h) throw;
            for (int k = 1; k <= cfg_.max_halvings; ++k) {
                const int sub = 1 << k;
                const Stepper fine = with_step(cfg_.h / sub);
                try {
                    SimState cur = state;
                    StepReport agg;
                    for (int i = 0; i < sub; ++i) {
                        auto [next, rep] = fine.step_once(cur);
                        agg.outer_iters += rep.outer_iters;
                        agg.cg_iters += rep.cg_iters;
                        agg.newton_iters += rep.newton_iters;
                        agg.outer_ratio = std::max(agg.outer_ratio, rep.outer_ratio);
                        agg.K_hat = std::max(agg.K_hat, rep.K_hat);
                        agg.residual_mu = std::max(agg.residual_mu, rep.residual_mu);
                        agg.residual_phi = std::max(agg.residual_phi, rep.residual_phi);
                        agg.residual_s = std::max(agg.residual_s, rep.residual_s);
                        cur = std::move(next);
                    }
                    agg.halvings = k;
                    cur.n = state.n + 1;
                    cur.time = state.time + cfg_.h;
                    return {std::move(cur), agg};
                } catch (const SolverFailure&) {
                }
            }
            throw SolverFailure(std::string("step ") + std::to_string(state.n) + " failed after " +
                                std::to_string(cfg_.max_halvings) + " halvings: " + first.what());
        }
    }

    /// Substitutes (next, prev) into the three discrete equations.
    StepResiduals residuals(const SimState& prev, const SimState& next) const {
        const double h = cfg_.h;
        const Field P = proliferation_field(prev.phi);
        const auto yp = cfg_.yosida();
        StepResiduals out;
        {
            const Field t1 = (cfg_.alpha / h) * (next.mu - prev.mu);
            const Field t2 = (1.0 / h) * (next.phi - prev.phi);
            const Field t3 = A2(next.mu);
            const Field t4 = hadamard(P, next.mu);
            const Field t5 = hadamard(P, next.s);
            Field r = t1 + t2 + t3 + t4 - t5;
            double scale = 1.0 + norm(t1) + norm(t2) + norm(t3) + norm(t4) + norm(t5);
            if (forcing_.u_mu) {
                r -= *forcing_.u_mu;
                scale += norm(*forcing_.u_mu);
            }
            out.mu = norm(r) / scale;
        }
        {
            const Field t1 = (cfg_.beta / h + cfg_.L) * (next.phi - prev.phi);
            const Field t2 = B2(next.phi);
            const Field t3 = map_values(next.phi, [&](double v) {
                return yosida_f1(model_.potential, yp, v) + model_.potential.f2(v);
            });
            Field r = t1 + t2 + t3 - next.mu;
            double scale = 1.0 + norm(t1) + norm(t2) + norm(t3) + norm(next.mu);
            if (forcing_.u_phi) {
                r -= *forcing_.u_phi;
                scale += norm(*forcing_.u_phi);
            }
            out.phi = norm(r) / scale;
        }
        {
            const Field t1 = (1.0 / h) * (next.s - prev.s);
            const Field t2 = C2(next.s);
            const Field t3 = hadamard(P, next.s - next.mu);
            Field r = t1 + t2 + t3;
            double scale = 1.0 + norm(t1) + norm(t2) + norm(hadamard(P, next.s)) + norm(hadamard(P, next.mu));
            if (forcing_.u_s) {
                r -= *forcing_.u_s;
                scale += norm(*forcing_.u_s);
            }
            out.s = norm(r) / scale;
        }
        return out;
    }

private:
    CgOptions cg_options() const { return {cfg_.tol_cg, 1e-14, cfg_.max_cg}; }

    Field apply_Ah_frozen(const Field& P, const Field& v) const {
        Field out = A2(v);
        out.axpy(cfg_.alpha / cfg_.h, v);
        out += hadamard(P, v);
        return out;
    }

    Field solve_Ah_frozen(const Field& P, double Pmean, const Field& rhs, SolveStats* stats) const {
        const double shift = cfg_.alpha / cfg_.h + Pmean;
        auto res = conjugate_gradient([&](const Field& v) { return apply_Ah_frozen(P, v); },
                                      [&](const Field& r) { return solve_shifted(ops_.A, 2.0 * cfg_.rho, shift, r); },
                                      rhs, cg_options());
        if (stats) stats->cg_iters += res.iters;
        return std::move(res.x);
    }

    Field phi3_frozen(const Field& P, double Pmean, const Field& s_n, const Field& mu_bar, SolveStats* stats) const {
        const double inv_h = 1.0 / cfg_.h;
        Field rhs = inv_h * s_n;
        rhs += hadamard(P, mu_bar);
        if (forcing_.u_s) rhs += *forcing_.u_s;
        const double shift = inv_h + Pmean;
        auto res = conjugate_gradient(
            [&](const Field& v) {
                Field out = C2(v);
                out.axpy(inv_h, v);
                out += hadamard(P, v);
                return out;
            },
            [&](const Field& r) { return solve_shifted(ops_.C, 2.0 * cfg_.tau, shift, r); }, rhs, cg_options());
        if (stats) stats->cg_iters += res.iters;
        return std::move(res.x);
    }

    Field phi1_frozen(const Field& P, double Pmean, const Field& phi_n, const Field& mu_n, const Field& phi_np1,
                      const Field& s_np1, SolveStats* stats) const {
        const double h = cfg_.h;
        Field rhs = (cfg_.alpha / h) * mu_n;
        rhs.axpy(-1.0 / h, phi_np1);
        rhs.axpy(1.0 / h, phi_n);
        rhs += hadamard(P, s_np1);
        if (forcing_.u_mu) rhs += *forcing_.u_mu;
        return solve_Ah_frozen(P, Pmean, rhs, stats);
    }

    // Newton on R(phi) = (beta/h + L)(phi - phi_n) + B^{2sigma} phi + f^lambda(phi)
    //                    + (1/h) A_h^{-1} phi - g,
    // g = A_h^{-1}((alpha/h) mu_n + phi_n/h + P S' + u_mu) + u_phi.
    // R is the gradient of a convex functional G, used as the line-search merit.
    Field phi2_frozen(const Field& P, double Pmean, const Field& phi_n, const Field& mu_n, const Field& s_np1,
                      SolveStats* stats, const Field* guess) const {
        const double h = cfg_.h;
        const double c = cfg_.beta / h + cfg_.L;
        const auto yp = cfg_.yosida();
        const auto& pot = model_.potential;

        Field src = (cfg_.alpha / h) * mu_n;
        src.axpy(1.0 / h, phi_n);
        src += hadamard(P, s_np1);
        if (forcing_.u_mu) src += *forcing_.u_mu;
        Field g = solve_Ah_frozen(P, Pmean, src, stats);
        if (forcing_.u_phi) g += *forcing_.u_phi;

        Field rhs = c * phi_n;
        rhs += g;
        const double target = std::max(cfg_.tol_newton * norm(rhs), 1e-14);

        auto f_lambda = [&](const Field& phi) {
            return map_values(phi, [&](double v) { return yosida_f1(pot, yp, v) + pot.f2(v); });
        };
        auto merit = [&](const Field& phi, const Field& bphi, const Field& aphi) {
            double G = 0.5 * c * inner(phi, phi) - inner(rhs, phi) + 0.5 * inner(bphi, phi) +
                       0.5 / h * inner(aphi, phi);
            double F = 0.0;
            for (double v : phi.values()) F += yosida_F1(pot, yp, v) + pot.F2(v);
            return G + phi.grid().weight() * F;
        };
        // R given the linear pieces.
        auto residual = [&](const Field& phi, const Field& bphi, const Field& aphi) {
            Field r = c * phi;
            r += bphi;
            r += f_lambda(phi);
            r.axpy(1.0 / h, aphi);
            r -= rhs;
            return r;
        };

        const bool same_basis = ops_.A.bc() == ops_.B.bc();
        auto make_precond = [&](double diag_shift) {
            std::vector<double> m(b2_.size());
            for (std::size_t k = 0; k < m.size(); ++k) {
                double d = diag_shift + b2_[k];
                if (same_basis) d += 1.0 / (cfg_.alpha + h * a2_[k] + h * Pmean);
                m[k] = 1.0 / d;
            }
            return m;
        };

        Field phi = guess ? *guess : phi_n;
        Field bphi = B2(phi);
        Field aphi = solve_Ah_frozen(P, Pmean, phi, stats);
        Field R = residual(phi, bphi, aphi);
        double rn = norm(R);

        for (int it = 0; it < cfg_.max_newton; ++it) {
            if (rn <= target) {
                // confirm with a fresh A_h^{-1} phi
                aphi = solve_Ah_frozen(P, Pmean, phi, stats);
                R = residual(phi, bphi, aphi);
                rn = norm(R);
                if (rn <= target) return phi;
            }
            if (stats) ++stats->newton_iters;
            const Field dfl = map_values(phi, [&](double v) { return yosida_f1_derivative(pot, yp, v); });
            const double dmean = mean(dfl);
            const auto pre = make_precond(c + dmean);
            const double eta = std::max(cfg_.tol_cg, std::min(1e-2, rn / std::max(norm(rhs), 1e-300)));
            CgOptions opt{eta, 1e-16, cfg_.max_cg};
            auto jac = [&](const Field& d) {
                Field out = c * d;
                out += hadamard(dfl, d);
                out += B2(d);
                out.axpy(1.0 / h, solve_Ah_frozen(P, Pmean, d, stats));
                return out;
            };
            auto cg = conjugate_gradient(jac, [&](const Field& r) { return ops_.B.apply_multiplier(r, pre); },
                                         (-1.0) * R, opt);
            if (stats) stats->cg_iters += cg.iters;
            const Field& d = cg.x;
            const Field bd = B2(d);
            const Field ad = solve_Ah_frozen(P, Pmean, d, stats);

            const double G0 = merit(phi, bphi, aphi);
            const double slope = inner(R, d);
            double t = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 40; ++ls) {
                Field phit = phi;
                phit.axpy(t, d);
                Field bt = bphi;
                bt.axpy(t, bd);
                Field at = aphi;
                at.axpy(t, ad);
                Field Rt = residual(phit, bt, at);
                const double rnt = norm(Rt);
                const bool res_ok = rnt <= (1.0 - 1e-4 * t) * rn;
                const bool armijo = slope < 0.0 && merit(phit, bt, at) <= G0 + 1e-4 * t * slope;
                if (res_ok || armijo) {
                    phi = std::move(phit);
                    bphi = std::move(bt);
                    aphi = std::move(at);
                    R = std::move(Rt);
                    rn = rnt;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) break;
        }
        if (rn <= target) return phi;
        return phi2_fallback(P, Pmean, std::move(phi), rhs, target, stats);
    }

    // Damped preconditioned gradient iteration on the same convex functional.
    Field phi2_fallback(const Field& P, double Pmean, Field phi, const Field& rhs, double target,
                        SolveStats* stats) const {
        const double h = cfg_.h;
        const double c = cfg_.beta / h + cfg_.L;
        const auto yp = cfg_.yosida();
        const auto& pot = model_.potential;
        std::vector<double> pre(b2_.size());
        for (std::size_t k = 0; k < pre.size(); ++k) pre[k] = 1.0 / (c + b2_[k] + 1.0 / cfg_.alpha);
        auto eval = [&](const Field& x, Field& R) {
            const Field ax = solve_Ah_frozen(P, Pmean, x, stats);
            const Field bx = B2(x);
            R = c * x;
            R += bx;
            R += map_values(x, [&](double v) { return yosida_f1(pot, yp, v) + pot.f2(v); });
            R.axpy(1.0 / h, ax);
            R -= rhs;
            double F = 0.0;
            for (double v : x.values()) F += yosida_F1(pot, yp, v) + pot.F2(v);
            return 0.5 * c * inner(x, x) - inner(rhs, x) + 0.5 * inner(bx, x) + 0.5 / h * inner(ax, x) +
                   x.grid().weight() * F;
        };
        Field R;
        double G = eval(phi, R);
        const int cap = 20 * cfg_.max_newton;
        for (int it = 0; it < cap; ++it) {
            if (norm(R) <= target) return phi;
            if (stats) ++stats->newton_iters;
            const Field d = (-1.0) * ops_.B.apply_multiplier(R, pre);
            const double slope = inner(R, d);
            double t = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 50; ++ls) {
                Field trial = phi;
                trial.axpy(t, d);
                Field Rt;
                const double Gt = eval(trial, Rt);
                if (Gt <= G + 1e-4 * t * slope) {
                    phi = std::move(trial);
                    R = std::move(Rt);
                    G = Gt;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if (!moved) break;
        }
        if (norm(R) <= target) return phi;
        throw SolverFailure("phi equation: Newton and damped fallback both stagnated at residual " +
                            std::to_string(norm(R)) + " (target " + std::to_string(target) + ")");
    }

    PhiMapValue phi_map_frozen(const Field& P, double Pmean, const SimState& st, const Field& mu_bar,
                               SolveStats* stats, const Field* phi_guess) const {
        PhiMapValue v;
        v.s = phi3_frozen(P, Pmean, st.s, mu_bar, stats);
        v.phi = phi2_frozen(P, Pmean, st.phi, st.mu, v.s, stats, phi_guess);
        v.mu = phi1_frozen(P, Pmean, st.phi, st.mu, v.phi, v.s, stats);
        return v;
    }

    std::pair<SimState, StepReport> step_once(const SimState& state) const {
        const Field P = proliferation_field(state.phi);
        const double Pmean = mean(P);
        const bool decoupled = max_abs(P) == 0.0;
        SolveStats stats;
        StepReport rep;

        Field mu_bar = state.mu;
        std::optional<Field> phi_guess;
        std::vector<double> diffs;
        for (int k = 1; k <= cfg_.max_outer; ++k) {
            PhiMapValue v = phi_map_frozen(P, Pmean, state, mu_bar, &stats, phi_guess ? &*phi_guess : nullptr);
            rep.outer_iters = k;
            const double d = norm(v.mu - mu_bar);
            const double scale = 1.0 + norm(v.mu);
            if (diffs.size() >= 1) {
                const double prev = diffs.back();
                if (prev > 1e3 * cfg_.tol_outer * scale) {
                    rep.outer_ratio = std::max(rep.outer_ratio, d / prev);
                }
            }
            diffs.push_back(d);
            if (rep.outer_ratio >= 1.0) {
                throw SolverFailure("outer fixed point is not contracting at step " + std::to_string(state.n) +
                                    " (ratio " + std::to_string(rep.outer_ratio) + ")");
            }
            if (decoupled || d <= cfg_.tol_outer * scale) {
                SimState next{state.n + 1, state.time + cfg_.h, std::move(v.mu), std::move(v.phi), std::move(v.s)};
                rep.cg_iters = stats.cg_iters;
                rep.newton_iters = stats.newton_iters;
                rep.K_hat = rep.outer_ratio / cfg_.h;
                const auto r = residuals(state, next);
                rep.residual_mu = r.mu;
                rep.residual_phi = r.phi;
                rep.residual_s = r.s;
                return {std::move(next), rep};
            }
            mu_bar = std::move(v.mu);
            phi_guess = std::move(v.phi);
        }
        throw SolverFailure("outer fixed point exceeded " + std::to_string(cfg_.max_outer) + " iterations at step " +
                            std::to_string(state.n));
    }

    SimConfig cfg_;
    Operators ops_;
    Model model_;
    Forcing forcing_;
    std::vector<double> a2_, b2_, c2_;
};

/// Per-field trajectories plus step reports of a completed run.
struct RunResult {
    Trajectory mu;
    Trajectory phi;
    Trajectory s;
    std::vector<StepReport> reports;

    SimState state(int n) const { return {n, n * mu.h(), mu[n], phi[n], s[n]}; }
    int steps() const { return mu.steps(); }
};

/// Rejects initial data with F1(phi_0) not finite somewhere or non-finite values.
inline void check_admissible(const SimState& initial, const Model& model) {
    for (const Field* f : {&initial.mu, &initial.phi, &initial.s}) {
        if (!f->all_finite()) throw ConfigError("initial datum contains non-finite values");
    }
    for (double v : initial.phi.values()) {
        if (!std::isfinite(model.potential.F1(v))) {
            throw ConfigError("initial datum outside D(F1): phi_0 = " + std::to_string(v) + " for potential " +
                              std::string(to_string(model.potential.kind)));
        }
    }
}

template <class OnStep>
RunResult run(const Stepper& stepper, const SimState& initial, OnStep&& on_step) {
    check_admissible(initial, stepper.model());
    const auto& g = stepper.operators().grid();
    for (const Field* f : {&initial.mu, &initial.phi, &initial.s}) {
        if (!(f->grid() == g)) throw ConfigError("initial data grid does not match operators");
    }
    const int N = stepper.config().n_steps;
    std::vector<Field> mu{initial.mu}, phi{initial.phi}, s{initial.s};
    mu.reserve(N + 1);
    phi.reserve(N + 1);
    s.reserve(N + 1);
    std::vector<StepReport> reports;
    reports.reserve(N);
    SimState cur = initial;
    cur.n = 0;
    cur.time = 0.0;
    for (int n = 0; n < N; ++n) {
        auto [next, rep] = stepper.step(cur);
        on_step(cur, next, rep);
        mu.push_back(next.mu);
        phi.push_back(next.phi);
        s.push_back(next.s);
        reports.push_back(rep);
        cur = std::move(next);
    }
    const double h = stepper.config().h;
    return {Trajectory(h, std::move(mu)), Trajectory(h, std::move(phi)), Trajectory(h, std::move(s)),
            std::move(reports)};
}

inline RunResult run(const Stepper& stepper, const SimState& initial) {
    return run(stepper, initial, [](const SimState&, const SimState&, const StepReport&) {});
}

struct ContractionSample {
    int pair = 0;
    double ratio = 0.0;  // ||Phi(a) - Phi(b)|| / ||a - b||
    double K_hat = 0.0;  // ratio / h
};

/// Lipschitz probe of the composed map at `state`: pairs a, b = mu^n + smoothed
/// random perturbations of sup size amp (1 + ||mu^n||_inf), seeded deterministically.
inline std::vector<ContractionSample> probe_contraction(const Stepper& stepper, const SimState& state, int pairs,
                                                       std::uint64_t seed, double amp = 0.1) {
    if (pairs < 1) throw ConfigError("probe needs at least one pair");
    const double scale = amp * (1.0 + max_abs(state.mu));
    const double h = stepper.config().h;
    std::vector<ContractionSample> out;
    for (int p = 0; p < pairs; ++p) {
        // smoothed noise: white noise mostly probes strongly damped high modes
        auto perturb = [&](std::uint64_t k) {
            const Field w = random_field(state.mu.grid(), k, 1.0);
            Field smooth = solve_shifted(stepper.operators().A, 1.0, 1.0, w);
            smooth *= scale / std::max(max_abs(smooth), 1e-300);
            SplitMix64 rng(~k);
            return state.mu + smooth + Field(state.mu.grid(), scale * (2.0 * rng.uniform() - 1.0));
        };
        const Field a = perturb(seed + 2 * static_cast<std::uint64_t>(p));
        const Field b = perturb(seed + 2 * static_cast<std::uint64_t>(p) + 1);
        const Field fa = stepper.phi_map(state, a).mu;
        const Field fb = stepper.phi_map(state, b).mu;
        const double r = norm(fa - fb) / norm(a - b);
        out.push_back({p, r, r / h});
    }
    return out;
}

}  // namespace frachill
