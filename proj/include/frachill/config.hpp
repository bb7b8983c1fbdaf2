#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "frachill/error.hpp"
#include "frachill/grid.hpp"
#include "frachill/harness.hpp"
#include "frachill/potentials.hpp"
#include "frachill/random.hpp"
#include "frachill/spectral.hpp"
#include "frachill/stepper.hpp"

namespace frachill {

/// Initial-datum expression from the fixed catalog:
///   constant:<v>
///   cosine:<k>:<amp>                 amp cos(k pi x / Lx) [ * cos(k pi y / Ly) in 2-D ]
///   gaussian:<center>:<width>:<amp>  amp exp(-|x - c|^2 / (2 width^2)), c = center on every axis
///   random:<seed>:<amp>              amp (2u - 1), u from splitmix64(seed) in row-major order
struct InitExpr {
    enum class Kind { constant, cosine, gaussian, random };
    Kind kind = Kind::constant;
    double a = 0.0;  // constant value / k / center
    double b = 0.0;  // amp / width
    double c = 0.0;  // amp (gaussian)
    std::uint64_t seed = 0;

    bool operator==(const InitExpr&) const = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline double parse_double(std::string_view s, const std::string& what) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end || s.empty() || !std::isfinite(v)) {
        throw ConfigError("cannot parse '" + std::string(s) + "' as a number for " + what);
    }
    return v;
}

template <class Int>
Int parse_int(std::string_view s, const std::string& what) {
    Int v{};
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end || s.empty()) {
        throw ConfigError("cannot parse '" + std::string(s) + "' as an integer for " + what);
    }
    return v;
}

inline bool parse_bool(std::string_view s, const std::string& what) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("cannot parse '" + std::string(s) + "' as a boolean for " + what);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace detail

inline InitExpr parse_init_expr(std::string_view text) {
    const auto parts = detail::split(text, ':');
    const std::string what = "initial expression '" + std::string(text) + "'";
    auto need = [&](std::size_t n) {
        if (parts.size() != n) throw ConfigError(what + " expects " + std::to_string(n - 1) + " parameters");
    };
    InitExpr e;
    if (parts[0] == "constant") {
        need(2);
        e.kind = InitExpr::Kind::constant;
        e.a = detail::parse_double(parts[1], what);
    } else if (parts[0] == "cosine") {
        need(3);
        e.kind = InitExpr::Kind::cosine;
        e.a = detail::parse_double(parts[1], what);
        e.b = detail::parse_double(parts[2], what);
    } else if (parts[0] == "gaussian") {
        need(4);
        e.kind = InitExpr::Kind::gaussian;
        e.a = detail::parse_double(parts[1], what);
        e.b = detail::parse_double(parts[2], what);
        e.c = detail::parse_double(parts[3], what);
        if (!(e.b > 0.0)) throw ConfigError(what + ": width must be positive");
    } else if (parts[0] == "random") {
        need(3);
        e.kind = InitExpr::Kind::random;
        e.seed = detail::parse_int<std::uint64_t>(parts[1], what);
        e.b = detail::parse_double(parts[2], what);
    } else {
        throw ConfigError("unknown initial expression '" + std::string(parts[0]) +
                          "' (expected constant, cosine, gaussian or random)");
    }
    return e;
}

inline std::string to_string(const InitExpr& e) {
    switch (e.kind) {
        case InitExpr::Kind::constant: return "constant:" + format_number(e.a);
        case InitExpr::Kind::cosine: return "cosine:" + format_number(e.a) + ":" + format_number(e.b);
        case InitExpr::Kind::gaussian:
            return "gaussian:" + format_number(e.a) + ":" + format_number(e.b) + ":" + format_number(e.c);
        case InitExpr::Kind::random: return "random:" + std::to_string(e.seed) + ":" + format_number(e.b);
    }
    return {};
}

inline Field evaluate(const InitExpr& e, const GridSpec& g) {
    const int dim = g.dimension();
    switch (e.kind) {
        case InitExpr::Kind::constant: return Field(g, e.a);
        case InitExpr::Kind::cosine: {
            const double lx = g.extent(0), ly = g.extent(1);
            return Field::sample(g, [&](double x, double y) {
                double v = e.b * std::cos(e.a * std::numbers::pi * x / lx);
                if (dim == 2) v *= std::cos(e.a * std::numbers::pi * y / ly);
                return v;
            });
        }
        case InitExpr::Kind::gaussian:
            return Field::sample(g, [&](double x, double y) {
                double r2 = (x - e.a) * (x - e.a);
                if (dim == 2) r2 += (y - e.a) * (y - e.a);
                return e.c * std::exp(-r2 / (2.0 * e.b * e.b));
            });
        case InitExpr::Kind::random: return random_field(g, e.seed, e.b);
    }
    return Field(g);
}

/// File form of a run: flat `key = value` lines, `#` starts a comment.
struct RunConfig {
    int dimension = 1;
    double extent_x = 1.0;
    double extent_y = 1.0;
    std::size_t n_x = 64;
    std::size_t n_y = 64;
    BoundaryCondition bc_A = BoundaryCondition::neumann;
    BoundaryCondition bc_B = BoundaryCondition::neumann;
    BoundaryCondition bc_C = BoundaryCondition::neumann;
    double rho = 0.5;
    double sigma = 0.5;
    double tau = 0.5;
    double alpha = 1.0;
    double beta = 1.0;
    double h = 0.0;
    int n_steps = 0;
    double lambda = 1e-2;
    PotentialKind potential = PotentialKind::regular;
    double c1 = 2.0;
    double c2 = 1.0;
    ProliferationKind P_kind = ProliferationKind::smooth_clamp;
    double P_p0 = 1.0;
    double P_width = 1.0;
    double L_margin = 0.1;
    double tol_outer = 1e-10;
    double tol_cg = 1e-12;
    double tol_newton = 1e-11;
    bool adapt_h = false;
    InitExpr init_mu{InitExpr::Kind::constant, 0.0, 0.0, 0.0, 0};
    InitExpr init_phi{InitExpr::Kind::cosine, 1.0, 0.5, 0.0, 0};
    InitExpr init_s{InitExpr::Kind::constant, 0.0, 0.0, 0.0, 0};
    std::string out_dir = ".";
    int snapshots_every = 0;

    bool operator==(const RunConfig&) const = default;
};

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "dimension", "extent.x", "extent.y", "n.x",      "n.y",       "bc.A",       "bc.B",        "bc.C",
        "rho",       "sigma",    "tau",      "alpha",    "beta",      "h",          "n_steps",     "lambda",
        "potential", "c1",       "c2",       "P.kind",   "P.p0",      "P.width",    "L.margin",    "tol.outer",
        "tol.cg",    "tol.newton", "adapt_h", "init.mu", "init.phi",  "init.s",     "out.dir",     "snapshots.every"};
    return keys;
}

inline PotentialSpec potential_spec(const RunConfig& c) {
    switch (c.potential) {
        case PotentialKind::none: return PotentialSpec::none();
        case PotentialKind::regular: return PotentialSpec::regular();
        case PotentialKind::logarithmic: return PotentialSpec::logarithmic(c.c1);
        case PotentialKind::double_obstacle: return PotentialSpec::double_obstacle(c.c2);
    }
    return PotentialSpec::regular();
}

inline ProliferationSpec proliferation_spec(const RunConfig& c) {
    if (c.P_kind == ProliferationKind::constant) return ProliferationSpec::constant(c.P_p0);
    return ProliferationSpec::smooth_clamp(c.P_p0, c.P_width);
}

inline GridSpec make_grid(const RunConfig& c) {
    if (c.dimension == 1) return GridSpec::line(c.extent_x, c.n_x);
    return GridSpec::box(c.extent_x, c.extent_y, c.n_x, c.n_y);
}

inline SimConfig make_sim_config(const RunConfig& c) {
    SimConfig s;
    s.alpha = c.alpha;
    s.beta = c.beta;
    s.rho = c.rho;
    s.sigma = c.sigma;
    s.tau = c.tau;
    s.h = c.h;
    s.n_steps = c.n_steps;
    s.lambda = c.lambda;
    s.L = stabilization_L(potential_spec(c), c.L_margin);
    s.tol_outer = c.tol_outer;
    s.tol_cg = c.tol_cg;
    s.tol_newton = c.tol_newton;
    s.adapt_h = c.adapt_h;
    return s;
}

inline Stepper make_stepper(const RunConfig& c) {
    const GridSpec g = make_grid(c);
    Operators ops{build_operator(g, c.bc_A), build_operator(g, c.bc_B), build_operator(g, c.bc_C)};
    return Stepper(make_sim_config(c), std::move(ops), Model{potential_spec(c), proliferation_spec(c)});
}

inline SimState make_initial(const RunConfig& c) {
    const GridSpec g = make_grid(c);
    return {0, 0.0, evaluate(c.init_mu, g), evaluate(c.init_phi, g), evaluate(c.init_s, g)};
}

/// Canonical form: every key in fixed order, numbers with 17 significant digits.
inline std::string serialize(const RunConfig& c) {
    std::ostringstream o;
    auto kv = [&](const char* k, const std::string& v) { o << k << " = " << v << '\n'; };
    auto num = [&](const char* k, double v) { kv(k, format_number(v)); };
    kv("dimension", std::to_string(c.dimension));
    num("extent.x", c.extent_x);
    num("extent.y", c.extent_y);
    kv("n.x", std::to_string(c.n_x));
    kv("n.y", std::to_string(c.n_y));
    kv("bc.A", std::string(to_string(c.bc_A)));
    kv("bc.B", std::string(to_string(c.bc_B)));
    kv("bc.C", std::string(to_string(c.bc_C)));
    num("rho", c.rho);
    num("sigma", c.sigma);
    num("tau", c.tau);
    num("alpha", c.alpha);
    num("beta", c.beta);
    num("h", c.h);
    kv("n_steps", std::to_string(c.n_steps));
    num("lambda", c.lambda);
    kv("potential", std::string(to_string(c.potential)));
    num("c1", c.c1);
    num("c2", c.c2);
    kv("P.kind", c.P_kind == ProliferationKind::constant ? "constant" : "smooth_clamp");
    num("P.p0", c.P_p0);
    num("P.width", c.P_width);
    num("L.margin", c.L_margin);
    num("tol.outer", c.tol_outer);
    num("tol.cg", c.tol_cg);
    num("tol.newton", c.tol_newton);
    kv("adapt_h", c.adapt_h ? "true" : "false");
    kv("init.mu", to_string(c.init_mu));
    kv("init.phi", to_string(c.init_phi));
    kv("init.s", to_string(c.init_s));
    kv("out.dir", c.out_dir);
    kv("snapshots.every", std::to_string(c.snapshots_every));
    return o.str();
}

namespace detail {

inline void assign_key(RunConfig& c, const std::string& key, const std::string& v) {
    auto positive = [&](double x) {
        if (!(x > 0.0)) throw ConfigError(key + " must be positive");
        return x;
    };
    if (key == "dimension") {
        c.dimension = parse_int<int>(v, key);
        if (c.dimension != 1 && c.dimension != 2) throw ConfigError("dimension must be 1 or 2");
    } else if (key == "extent.x") {
        c.extent_x = positive(parse_double(v, key));
    } else if (key == "extent.y") {
        c.extent_y = positive(parse_double(v, key));
    } else if (key == "n.x" || key == "n.y") {
        const auto n = parse_int<std::size_t>(v, key);
        if (n < 2) throw ConfigError(key + " must be at least 2");
        (key == "n.x" ? c.n_x : c.n_y) = n;
    } else if (key == "bc.A") {
        c.bc_A = parse_boundary_condition(v);
    } else if (key == "bc.B") {
        c.bc_B = parse_boundary_condition(v);
    } else if (key == "bc.C") {
        c.bc_C = parse_boundary_condition(v);
    } else if (key == "rho") {
        c.rho = positive(parse_double(v, key));
    } else if (key == "sigma") {
        c.sigma = positive(parse_double(v, key));
    } else if (key == "tau") {
        c.tau = positive(parse_double(v, key));
    } else if (key == "alpha") {
        c.alpha = positive(parse_double(v, key));
    } else if (key == "beta") {
        c.beta = positive(parse_double(v, key));
    } else if (key == "h") {
        c.h = positive(parse_double(v, key));
    } else if (key == "n_steps") {
        c.n_steps = parse_int<int>(v, key);
        if (c.n_steps < 1) throw ConfigError("n_steps must be at least 1");
    } else if (key == "lambda") {
        c.lambda = positive(parse_double(v, key));
    } else if (key == "potential") {
        c.potential = parse_potential_kind(v);
    } else if (key == "c1") {
        c.c1 = parse_double(v, key);
        if (c.c1 < 0.0) throw ConfigError("c1 must be nonnegative");
    } else if (key == "c2") {
        c.c2 = parse_double(v, key);
        if (c.c2 < 0.0) throw ConfigError("c2 must be nonnegative");
    } else if (key == "P.kind") {
        if (v == "constant") {
            c.P_kind = ProliferationKind::constant;
        } else if (v == "smooth_clamp") {
            c.P_kind = ProliferationKind::smooth_clamp;
        } else {
            throw ConfigError("P.kind must be constant or smooth_clamp, got '" + v + "'");
        }
    } else if (key == "P.p0") {
        c.P_p0 = parse_double(v, key);
        if (c.P_p0 < 0.0) throw ConfigError("P.p0 must be nonnegative");
    } else if (key == "P.width") {
        c.P_width = positive(parse_double(v, key));
    } else if (key == "L.margin") {
        c.L_margin = positive(parse_double(v, key));
    } else if (key == "tol.outer") {
        c.tol_outer = positive(parse_double(v, key));
    } else if (key == "tol.cg") {
        c.tol_cg = positive(parse_double(v, key));
    } else if (key == "tol.newton") {
        c.tol_newton = positive(parse_double(v, key));
    } else if (key == "adapt_h") {
        c.adapt_h = parse_bool(v, key);
    } else if (key == "init.mu") {
        c.init_mu = parse_init_expr(v);
    } else if (key == "init.phi") {
        c.init_phi = parse_init_expr(v);
    } else if (key == "init.s") {
        c.init_s = parse_init_expr(v);
    } else if (key == "out.dir") {
        if (v.empty()) throw ConfigError("out.dir must not be empty");
        c.out_dir = v;
    } else if (key == "snapshots.every") {
        c.snapshots_every = parse_int<int>(v, key);
        if (c.snapshots_every < 0) throw ConfigError("snapshots.every must be nonnegative");
    } else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

}  // namespace detail

/// Parses, validates and applies the admissibility gate on the initial data.
inline RunConfig parse_config_text(std::string_view text) {
    RunConfig c;
    std::map<std::string, int> seen;
    int lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(start, end - start);
        start = end + 1;
        ++lineno;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string line = detail::trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + line + "'", lineno);
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
        if (seen.count(key)) {
            throw ConfigError("duplicate key '" + key + "' (first on line " + std::to_string(seen[key]) + ")",
                              lineno);
        }
        try {
            detail::assign_key(c, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(e.what(), lineno);
        }
        seen[key] = lineno;
        if (end == text.size()) break;
    }
    const int last = lineno;
    for (const char* req : {"h", "n_steps"}) {
        if (!seen.count(req)) throw ConfigError(std::string("missing required key '") + req + "'", last);
    }
    auto line_of = [&](const char* k) { return seen.count(k) ? seen[k] : last; };

    try {
        const PotentialSpec pot = potential_spec(c);
        make_sim_config(c).validate(pot);
    } catch (const ConfigError& e) {
        throw ConfigError(e.what(), line_of("potential"));
    }
    // gate: F1(phi_0) finite everywhere
    const Field phi0 = evaluate(c.init_phi, make_grid(c));
    const PotentialSpec pot = potential_spec(c);
    for (double v : phi0.values()) {
        if (!std::isfinite(pot.F1(v))) {
            throw ConfigError("initial datum outside D(F1): init.phi reaches " + format_number(v) + " but potential " +
                                  std::string(to_string(c.potential)) + " requires |phi_0| <= 1",
                              std::max(line_of("init.phi"), line_of("potential")));
        }
    }
    return c;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace frachill
