#include "perihom/config.hpp"

#include "perihom/errors.hpp"
#include "perihom/mollifier.hpp"
#include "perihom/operators.hpp"
#include "perihom/presets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace perihom {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_number(const std::string& tok, const std::string& key) {
    // fractions keep grid-aligned rationals exact in configs
    const auto slash = tok.find('/');
    try {
        if (slash != std::string::npos) {
            const double num = std::stod(tok.substr(0, slash));
            const double den = std::stod(tok.substr(slash + 1));
            if (den == 0.0)
                throw ConfigError("division by zero in value for '" + key + "'");
            return num / den;
        }
        return std::stod(tok);
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        throw ConfigError("cannot parse number '" + tok + "' for key '" + key + "'");
    }
}

bool parse_bool(const std::string& tok, const std::string& key) {
    if (tok == "true")
        return true;
    if (tok == "false")
        return false;
    throw ConfigError("expected true/false for key '" + key + "', got '" + tok + "'");
}

std::string unquote(const std::string& tok) {
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"')
        return tok.substr(1, tok.size() - 2);
    return tok;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string t;
    while (is >> t)
        out.push_back(t);
    return out;
}

} // namespace

int parse_inv_epsilon(const std::string& token) {
    const double eps = parse_number(token, "epsilons");
    if (!(eps > 0.0))
        throw ConfigError("epsilon must be positive, got '" + token + "'");
    const double inv = 1.0 / eps;
    const double rounded = std::round(inv);
    if (std::abs(inv - rounded) > 1e-9 || rounded < 2.0)
        throw ConfigError("1/epsilon must be an integer >= 2, got '" + token + "'");
    return static_cast<int>(rounded);
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string raw, section;
    int lineno = 0;
    // keys listed per section; anything else is rejected
    auto fail_key = [&](const std::string& key) {
        throw ConfigError("unknown key '" + key + "' in section [" + section + "] (line " +
                          std::to_string(lineno) + ")");
    };
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(raw);
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = trim(line.substr(0, hash));
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section != "geometry" && section != "physics" && section != "discretization" &&
                section != "sweep" && section != "flags")
                throw ConfigError("unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)));

        if (section == "geometry") {
            if (key == "dim")
                c.dim = static_cast<int>(parse_number(value, key));
            else if (key == "hole") {
                if (value == "none")
                    c.has_hole = false;
                else {
                    const auto parts = split_ws(value);
                    if (parts.size() != 2)
                        throw ConfigError("hole expects \"lo hi\" or \"none\"");
                    c.has_hole = true;
                    c.hole_lo = parse_number(parts[0], key);
                    c.hole_hi = parse_number(parts[1], key);
                }
            } else if (key == "micro_resolution")
                c.micro_resolution = static_cast<int>(parse_number(value, key));
            else if (key == "lengths") {
                const auto parts = split_ws(value);
                if (parts.size() != 2)
                    throw ConfigError("lengths expects two integers");
                c.lengths = {static_cast<int>(parse_number(parts[0], key)),
                             static_cast<int>(parse_number(parts[1], key))};
            } else
                fail_key(key);
        } else if (section == "physics") {
            if (key == "tau")
                c.tau = parse_number(value, key);
            else if (key == "mu")
                c.mu = parse_number(value, key);
            else if (key == "a")
                c.a = parse_number(value, key);
            else if (key == "b")
                c.b = parse_number(value, key);
            else if (key == "g")
                c.g = parse_number(value, key);
            else if (key == "alpha")
                c.alpha = parse_number(value, key);
            else if (key == "beta")
                c.beta = parse_number(value, key);
            else if (key == "c_elip_min")
                c.c_elip_min = parse_number(value, key);
            else if (key == "c_elip_max")
                c.c_elip_max = parse_number(value, key);
            else if (key == "reaction")
                c.reaction = value;
            else if (key == "diffusion")
                c.diffusion = value;
            else if (key == "conductivity")
                c.conductivity = value;
            else if (key == "source")
                c.source = value;
            else if (key == "delta")
                c.delta = parse_number(value, key);
            else
                fail_key(key);
        } else if (section == "discretization") {
            if (key == "dt")
                c.dt = value == "auto" ? 0.0 : parse_number(value, key);
            else if (key == "horizon")
                c.horizon = parse_number(value, key);
            else if (key == "snapshots")
                c.snapshots = static_cast<int>(parse_number(value, key));
            else if (key == "solver_tol")
                c.solver_tol = parse_number(value, key);
            else if (key == "max_iter")
                c.max_iter = static_cast<int>(parse_number(value, key));
            else
                fail_key(key);
        } else if (section == "sweep") {
            if (key == "epsilons") {
                c.inv_epsilons.clear();
                for (const auto& tok : split_ws(value))
                    c.inv_epsilons.push_back(parse_inv_epsilon(tok));
            } else
                fail_key(key);
        } else if (section == "flags") {
            if (key == "deterministic")
                c.deterministic = parse_bool(value, key);
            else if (key == "ambiguity_sweep")
                c.ambiguity_sweep = parse_bool(value, key);
            else if (key == "sign_limit_exchange")
                c.sign_limit_exchange = static_cast<int>(parse_number(value, key));
            else if (key == "output_dir")
                c.output_dir = value;
            else
                fail_key(key);
        } else {
            throw ConfigError("key '" + key + "' outside any section (line " +
                              std::to_string(lineno) + ")");
        }
    }
    validate_config(c);
    return c;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream o;
    o << "[geometry]\n";
    o << "dim = " << c.dim << "\n";
    if (c.has_hole)
        o << "hole = \"" << fmt_double(c.hole_lo) << " " << fmt_double(c.hole_hi) << "\"\n";
    else
        o << "hole = \"none\"\n";
    o << "micro_resolution = " << c.micro_resolution << "\n";
    o << "lengths = \"" << c.lengths[0] << " " << c.lengths[1] << "\"\n";
    o << "\n[physics]\n";
    o << "tau = " << fmt_double(c.tau) << "\n";
    o << "mu = " << fmt_double(c.mu) << "\n";
    o << "a = " << fmt_double(c.a) << "\n";
    o << "b = " << fmt_double(c.b) << "\n";
    o << "g = " << fmt_double(c.g) << "\n";
    o << "alpha = " << fmt_double(c.alpha) << "\n";
    o << "beta = " << fmt_double(c.beta) << "\n";
    o << "c_elip_min = " << fmt_double(c.c_elip_min) << "\n";
    o << "c_elip_max = " << fmt_double(c.c_elip_max) << "\n";
    o << "reaction = \"" << c.reaction << "\"\n";
    o << "diffusion = \"" << c.diffusion << "\"\n";
    o << "conductivity = \"" << c.conductivity << "\"\n";
    o << "source = \"" << c.source << "\"\n";
    o << "delta = " << fmt_double(c.delta) << "\n";
    o << "\n[discretization]\n";
    if (c.dt == 0.0)
        o << "dt = \"auto\"\n";
    else
        o << "dt = " << fmt_double(c.dt) << "\n";
    o << "horizon = " << fmt_double(c.horizon) << "\n";
    o << "snapshots = " << c.snapshots << "\n";
    o << "solver_tol = " << fmt_double(c.solver_tol) << "\n";
    o << "max_iter = " << c.max_iter << "\n";
    o << "\n[sweep]\n";
    o << "epsilons = \"";
    for (std::size_t i = 0; i < c.inv_epsilons.size(); ++i)
        o << (i ? " " : "") << "1/" << c.inv_epsilons[i];
    o << "\"\n";
    o << "\n[flags]\n";
    o << "deterministic = " << (c.deterministic ? "true" : "false") << "\n";
    o << "ambiguity_sweep = " << (c.ambiguity_sweep ? "true" : "false") << "\n";
    o << "sign_limit_exchange = " << c.sign_limit_exchange << "\n";
    o << "output_dir = \"" << c.output_dir << "\"\n";
    return o.str();
}

std::vector<std::string> validate_config(const RunConfig& c) {
    std::vector<std::string> warnings;
    if (c.dim != 2)
        throw ConfigError("dim must be 2");
    if (c.micro_resolution < 2)
        throw ConfigError("micro_resolution must be at least 2");
    if (c.lengths[0] < 1 || c.lengths[1] < 1)
        throw ConfigError("lengths must be positive integers");
    if (c.tau < 0 || c.mu < 0 || c.a < 0 || c.b < 0 || c.g < 0)
        throw ConfigError("tau, mu, a, b, g must be non-negative");

    if (c.alpha > 0.0 && c.alpha < 1.0)
        throw ConfigError("alpha in (0,1) is not meaningful: the cross-diffusion term is "
                          "unbounded at that scaling");
    if (c.beta > 0.0 && c.beta < 1.0)
        throw ConfigError("beta in (0,1) makes the temperature cross-diffusion diverge");
    if (c.alpha != 1.0)
        warnings.push_back("alpha = " + fmt_double(c.alpha) +
                           " accepted, but only alpha = 1 is covered by the verified limit");
    if (c.beta != 1.0)
        warnings.push_back("beta = " + fmt_double(c.beta) +
                           " accepted, but only beta = 1 is covered by the verified limit");

    if (!(c.c_elip_min > 0) || !(c.c_elip_max > c.c_elip_min))
        throw ConfigError("ellipticity bounds must satisfy 0 < min < max");
    if (!(c.delta > 0))
        throw ConfigError("delta must be positive");
    if (!(c.horizon > 0))
        throw ConfigError("horizon must be positive");
    if (c.dt < 0)
        throw ConfigError("dt must be positive or auto");
    if (c.snapshots < 1)
        throw ConfigError("snapshots must be at least 1");
    if (!(c.solver_tol > 0))
        throw ConfigError("solver_tol must be positive");
    if (c.max_iter < 1)
        throw ConfigError("max_iter must be positive");
    if (c.inv_epsilons.empty())
        throw ConfigError("sweep needs at least one epsilon");
    if (c.sign_limit_exchange != 1 && c.sign_limit_exchange != -1)
        throw ConfigError("sign_limit_exchange must be +1 or -1");
    if (c.workers < 0)
        throw ConfigError("workers must be non-negative");

    // geometry admissibility (alignment, hole placement)
    const auto geom = make_geometry(c);

    // the mollifier enters only through the cross terms and the source average
    if (c.tau > 0 || c.mu > 0) {
        for (int inv : c.inv_epsilons) {
            const double eps = 1.0 / inv;
            const auto check = check_mollifier(c.delta, eps, geom);
            if (!check.admissible)
                throw ConfigError(check.message);
            if (!check.strict_bound_ok)
                warnings.push_back(check.message);
        }
    }

    // presets must resolve
    reaction_preset(c.reaction);
    coefficient_preset(c.diffusion);
    coefficient_preset(c.conductivity);
    source_preset(c.source);
    return warnings;
}

std::uint64_t config_hash(const RunConfig& c) {
    const std::string s = serialize_config(c);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_hash_hex(const RunConfig& c) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(c)));
    return buf;
}

double resolved_dt(const RunConfig& c) {
    if (c.dt > 0)
        return c.dt;
    int finest = 0;
    for (int inv : c.inv_epsilons)
        finest = std::max(finest, inv);
    const double h = 1.0 / (static_cast<double>(finest) * c.micro_resolution);
    double dt = std::min(1e-3, h);
    // keep horizon / dt an integer with the snapshot cadence intact
    const double steps = std::ceil(c.horizon / dt / c.snapshots) * c.snapshots;
    return c.horizon / steps;
}

CellGeometry make_geometry(const RunConfig& c) {
    std::optional<HoleBox> hole;
    if (c.has_hole)
        hole = HoleBox{c.hole_lo, c.hole_hi};
    return build_cell_geometry(c.dim, hole, c.micro_resolution);
}

CoefficientField make_diffusion(const RunConfig& c, const CellGeometry& geom) {
    return sample_coefficient(geom, coefficient_preset(c.diffusion), c.c_elip_min,
                              c.c_elip_max);
}

CoefficientField make_conductivity(const RunConfig& c, const CellGeometry& geom) {
    return sample_coefficient(geom, coefficient_preset(c.conductivity), c.c_elip_min,
                              c.c_elip_max);
}

MicroProblem make_micro_problem(const RunConfig& c, const PerforatedGrid& grid, double dt) {
    MicroProblem p;
    p.grid = &grid;
    p.diffusion = make_diffusion(c, grid.cell);
    p.conductivity = make_conductivity(c, grid.cell);
    p.tau = c.tau;
    p.mu = c.mu;
    p.a = c.a;
    p.b = c.b;
    p.g = c.g;
    p.alpha = c.alpha;
    p.beta = c.beta;
    p.reaction = reaction_preset(c.reaction);
    p.source = source_preset(c.source);
    p.delta = c.delta;
    p.horizon = c.horizon;
    p.dt = dt;
    p.snapshot_cadence = c.snapshots;
    p.solver.tol = c.solver_tol;
    p.solver.max_iter = c.max_iter;

    p.u0 = sample_nodal(grid, default_u0);
    p.theta0 = ScalarField(grid);
    const int m = grid.cell.micro_resolution;
    for (std::int32_t id = 0; id < grid.n_nodes; ++id) {
        const auto gc = grid.node_coord[id];
        const auto xy = grid.node_xy(id);
        const double y1 = static_cast<double>(gc[0] % m) / m;
        const double y2 = static_cast<double>(gc[1] % m) / m;
        p.theta0.values[id] = default_theta0(xy[0], xy[1], y1, y2);
    }
    return p;
}

LimitProblem make_limit_problem(const RunConfig& c, const PerforatedGrid& macro_grid,
                                const CellGeometry& cell, const EffectiveTensor& tensor,
                                double dt, int sign_exchange) {
    LimitProblem p;
    p.macro_grid = &macro_grid;
    p.cell = &cell;
    p.tensor = tensor;
    p.conductivity = make_conductivity(c, cell);
    p.mu = c.mu;
    p.a = c.a;
    p.b = c.b;
    p.g = c.g;
    p.sign_exchange = sign_exchange;
    p.reaction = reaction_preset(c.reaction);
    p.source = source_preset(c.source);
    p.delta = c.delta;
    p.horizon = c.horizon;
    p.dt = dt;
    p.snapshot_cadence = c.snapshots;
    p.solver.tol = c.solver_tol;
    p.solver.max_iter = c.max_iter;
    p.workers = c.workers;

    p.u0 = sample_nodal(macro_grid, default_u0);
    const int m = cell.micro_resolution;
    const int nper = cell.n_periodic_dofs;
    p.theta0.assign(p.theta_cells() * nper, 0.0);
    for (int cj = 0; cj < macro_grid.cells_y; ++cj)
        for (int ci = 0; ci < macro_grid.cells_x; ++ci) {
            const double cx = (ci + 0.5) * macro_grid.h;
            const double cy = (cj + 0.5) * macro_grid.h;
            const std::size_t base = macro_grid.cell_flat(ci, cj) * nper;
            for (int b = 0; b < m; ++b)
                for (int a = 0; a < m; ++a) {
                    const auto pid = cell.periodic_id(a, b);
                    if (pid < 0)
                        continue;
                    p.theta0[base + pid] = default_theta0(
                        cx, cy, static_cast<double>(a) / m, static_cast<double>(b) / m);
                }
        }
    return p;
}

} // namespace perihom
