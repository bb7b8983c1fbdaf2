#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "frachill/config.hpp"
#include "frachill/error.hpp"
#include "frachill/harness.hpp"
#include "frachill/snapshot.hpp"
#include "frachill/stepper.hpp"

namespace frachill {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_solver = 3, exit_check = 4 };

struct CommandOptions {
    std::optional<std::string> out;
    int levels = 4;
    std::uint64_t seed = 1;
    int pairs = 20;
};

inline const char* series_header =
    "step,time,outer_iters,outer_ratio,energy,mass,norm_mu,norm_phi_Bsigma,norm_s,res_mu,res_phi,res_s";

/// FRACHILL_THREADS, if set, must be a positive integer. The solver is
/// sequential, so any pinned value gives the same bits.
inline int pinned_threads() {
    const char* env = std::getenv("FRACHILL_THREADS");
    if (!env || !*env) return 1;
    const int n = detail::parse_int<int>(env, "FRACHILL_THREADS");
    if (n < 1) throw ConfigError("FRACHILL_THREADS must be a positive integer");
    return n;
}

namespace detail {

inline std::filesystem::path prepare_out(const RunConfig& cfg, const CommandOptions& opt) {
    std::filesystem::path dir = opt.out.value_or(cfg.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
    // normalized echo of every effective value next to the outputs
    std::ofstream echo(dir / "config.cfg", std::ios::binary | std::ios::trunc);
    if (!echo) throw ConfigError("cannot write '" + (dir / "config.cfg").string() + "'");
    echo << serialize(cfg);
    return dir;
}

inline std::ofstream open_out(const std::filesystem::path& p, std::ios::openmode mode = std::ios::trunc) {
    std::ofstream f(p, std::ios::binary | mode);
    if (!f) throw ConfigError("cannot write '" + p.string() + "'");
    return f;
}

inline std::string join(std::initializer_list<std::string> xs) {
    std::string s;
    for (const auto& x : xs) {
        if (!s.empty()) s += ',';
        s += x;
    }
    return s;
}

inline std::string series_row(const Stepper& st, const SimState& s, const StepReport* rep) {
    const auto& cfg = st.config();
    return join({std::to_string(s.n), format_number(s.time), std::to_string(rep ? rep->outer_iters : 0),
                 format_number(rep ? rep->outer_ratio : 0.0), format_number(energy(st, s)),
                 format_number(mass(st, s.mu, s.phi, s.s)), format_number(norm(s.mu)),
                 format_number(graph_norm(st.operators().B, cfg.sigma, s.phi)), format_number(norm(s.s)),
                 format_number(rep ? rep->residual_mu : 0.0), format_number(rep ? rep->residual_phi : 0.0),
                 format_number(rep ? rep->residual_s : 0.0)});
}

inline std::string snapshot_name(int n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snap_%06d.bin", n);
    return buf;
}

}  // namespace detail

/// Runs the configured problem; writes series.csv and snapshots.
inline RunResult cmd_run(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
    const auto dir = detail::prepare_out(cfg, opt);
    const Stepper st = make_stepper(cfg);
    const SimState init = make_initial(cfg);
    auto csv = detail::open_out(dir / "series.csv");
    csv << series_header << '\n' << detail::series_row(st, init, nullptr) << '\n';
    const int every = cfg.snapshots_every;
    if (every > 0) write_snapshot((dir / detail::snapshot_name(0)).string(), init);
    RunResult r;
    try {
        r = run(st, init, [&](const SimState&, const SimState& next, const StepReport& rep) {
            csv << detail::series_row(st, next, &rep) << '\n';
            if (every > 0 && next.n % every == 0) {
                write_snapshot((dir / detail::snapshot_name(next.n)).string(), next);
            }
        });
    } catch (const SolverFailure&) {
        csv.flush();
        throw;
    }
    log << "run: " << cfg.n_steps << " steps, series written to " << (dir / "series.csv").string() << '\n';
    return r;
}

/// Step-residual, energy, mass and complementarity checks on one run.
inline std::vector<CheckLine> run_checks(const Stepper& st, const RunResult& r) {
    const auto& cfg = st.config();
    const double tol_sum = cfg.tol_outer + cfg.tol_cg + cfg.tol_newton;
    std::vector<CheckLine> lines;
    double res = 0.0;
    for (const auto& rep : r.reports) res = std::max({res, rep.residual_mu, rep.residual_phi, rep.residual_s});
    lines.push_back(make_check("step_residuals", res, 10.0 * tol_sum, res <= 10.0 * tol_sum));
    lines.push_back(check_energy_inequality(st, r).line());
    lines.push_back(check_mass_conservation(st, r).line());
    const auto comp = check_complementarity(st, r);
    lines.push_back(make_check("xi_consistency", comp.xi_vs_f1_lambda, 10.0 * tol_sum,
                               comp.xi_vs_f1_lambda <= 10.0 * tol_sum));
    if (st.model().potential.kind == PotentialKind::double_obstacle) {
        lines.push_back(make_check("complementarity_band", comp.band_violation, 0.0, comp.band_violation <= 0.0));
    }
    return lines;
}

inline void write_checks(const std::filesystem::path& p, const std::vector<CheckLine>& lines, std::ostream& log) {
    const bool fresh = !std::filesystem::exists(p);
    auto f = detail::open_out(p, std::ios::app);
    if (fresh) f << "name,value,threshold,status\n";
    for (const auto& l : lines) {
        f << format_check(l) << '\n';
        log << format_check(l) << '\n';
    }
}

inline int report(const std::vector<CheckLine>& lines) {
    for (const auto& l : lines) {
        if (l.failed()) return exit_check;
    }
    return exit_ok;
}

inline int cmd_check(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
    const RunResult r = cmd_run(cfg, opt, log);
    const auto lines = run_checks(make_stepper(cfg), r);
    write_checks(detail::prepare_out(cfg, opt) / "checks.csv", lines, log);
    return report(lines);
}

namespace detail {

inline double combined(const StudyResult& r, std::size_t k) {
    return std::sqrt(r.mu.diffs[k] * r.mu.diffs[k] + r.phi.diffs[k] * r.phi.diffs[k] +
                     r.s.diffs[k] * r.s.diffs[k]);
}

}  // namespace detail

/// One row per successive pair of levels: the finer level's parameter, the
/// combined and per-field differences, and the order against the previous row.
inline int cmd_study_h(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
    const auto dir = detail::prepare_out(cfg, opt);
    const StudyResult r = study_h(make_stepper(cfg), make_initial(cfg), opt.levels);
    auto f = detail::open_out(dir / "study_h.csv");
    f << "level,h,diff_L2,diff_mu,diff_phi,diff_s,order\n";
    for (std::size_t k = 0; k < r.mu.diffs.size(); ++k) {
        std::string order;
        if (k > 0) order = format_number(std::log2(detail::combined(r, k - 1) / detail::combined(r, k)));
        f << detail::join({std::to_string(k + 1), format_number(r.parameter[k + 1]),
                           format_number(detail::combined(r, k)), format_number(r.mu.diffs[k]),
                           format_number(r.phi.diffs[k]), format_number(r.s.diffs[k]), order})
          << '\n';
    }
    std::vector<CheckLine> lines;
    for (const auto& [name, fs] : {std::pair{"mu", &r.mu}, std::pair{"phi", &r.phi}, std::pair{"s", &r.s}}) {
        lines.push_back(make_check(std::string("h_order_") + name, fs->fitted_order, 0.4,
                                   fs->strictly_decreasing && fs->fitted_order >= 0.4));
    }
    write_checks(dir / "checks.csv", lines, log);
    return report(lines);
}

inline int cmd_study_lambda(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
    if (opt.levels < 2) throw ConfigError("--levels must be at least 2 for a lambda study");
    const auto dir = detail::prepare_out(cfg, opt);
    std::vector<double> lambdas;
    for (int k = 0; k < opt.levels; ++k) lambdas.push_back(cfg.lambda / static_cast<double>(1 << k));
    const StudyResult r = study_lambda(make_stepper(cfg), make_initial(cfg), lambdas);
    const bool obstacle = !r.overshoot.empty();
    auto f = detail::open_out(dir / "study_lambda.csv");
    f << "level,lambda,diff_L2,diff_mu,diff_phi,diff_s,order,overshoot,natural_residual,band_violation\n";
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        std::string d, dm, dp, ds, order, ov, nr, bv;
        if (k > 0) {
            d = format_number(detail::combined(r, k - 1));
            dm = format_number(r.mu.diffs[k - 1]);
            dp = format_number(r.phi.diffs[k - 1]);
            ds = format_number(r.s.diffs[k - 1]);
        }
        if (k > 1) order = format_number(std::log2(detail::combined(r, k - 2) / detail::combined(r, k - 1)));
        if (obstacle) {
            ov = format_number(r.overshoot[k]);
            nr = format_number(r.natural_residual[k]);
            bv = format_number(r.band_violation[k]);
        }
        f << detail::join({std::to_string(k), format_number(lambdas[k]), d, dm, dp, ds, order, ov, nr, bv}) << '\n';
    }
    std::vector<CheckLine> lines;
    for (const auto& [name, fs] : {std::pair{"mu", &r.mu}, std::pair{"phi", &r.phi}, std::pair{"s", &r.s}}) {
        lines.push_back(make_check(std::string("lambda_cauchy_") + name, fs->diffs.back(), fs->diffs.front(),
                                   fs->strictly_decreasing));
    }
    if (obstacle) {
        lines.push_back(make_check("overshoot_nonincreasing", r.overshoot.back(), 0.1,
                                   nonincreasing_within(r.overshoot, 0.1)));
        lines.push_back(make_check("natural_residual_nonincreasing", r.natural_residual.back(), 0.1,
                                   nonincreasing_within(r.natural_residual, 0.1)));
        lines.push_back(make_check("band_violation_nonincreasing", r.band_violation.back(), 0.0,
                                   nonincreasing_within(r.band_violation, 0.0)));
    }
    write_checks(dir / "checks.csv", lines, log);
    return report(lines);
}

inline int cmd_probe_contraction(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
    const auto dir = detail::prepare_out(cfg, opt);
    const auto samples = probe_contraction(make_stepper(cfg), make_initial(cfg), opt.pairs, opt.seed);
    auto f = detail::open_out(dir / "contraction.csv");
    f << "pair,ratio,K_hat\n";
    double kmax = 0.0;
    for (const auto& s : samples) {
        f << detail::join({std::to_string(s.pair), format_number(s.ratio), format_number(s.K_hat)}) << '\n';
        kmax = std::max(kmax, s.K_hat);
    }
    const double hk = kmax * cfg.h;
    const std::vector<CheckLine> lines{make_check("contraction", hk, 1.0, hk < 1.0)};
    write_checks(dir / "checks.csv", lines, log);
    return report(lines);
}

/// Dispatches one subcommand, mapping failures to exit codes.
inline int dispatch(const std::string& command, const std::string& config_path, const CommandOptions& opt,
                    std::ostream& log, std::ostream& err) {
    try {
        pinned_threads();
        const RunConfig cfg = parse_config(config_path);
        if (command == "run") {
            cmd_run(cfg, opt, log);
            return exit_ok;
        }
        if (command == "check") return cmd_check(cfg, opt, log);
        if (command == "study-h") return cmd_study_h(cfg, opt, log);
        if (command == "study-lambda") return cmd_study_lambda(cfg, opt, log);
        if (command == "probe-contraction") return cmd_probe_contraction(cfg, opt, log);
        throw ConfigError("unknown command '" + command + "'");
    } catch (const ConfigError& e) {
        err << "config error: " << config_path << ": " << e.what() << '\n';
        return exit_config;
    } catch (const SolverFailure& e) {
        err << "solver failure: " << e.what() << '\n';
        return exit_solver;
    } catch (const CheckFailure& e) {
        err << "check failure: " << e.what() << '\n';
        return exit_check;
    }
}

}  // namespace frachill
