#pragma once

#include "perihom/geometry.hpp"
#include "perihom/limit_solver.hpp"
#include "perihom/micro_solver.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace perihom {

struct RunConfig {
    // geometry
    int dim = 2;
    bool has_hole = true;
    double hole_lo = 1.0 / 3.0;
    double hole_hi = 2.0 / 3.0;
    int micro_resolution = 12;
    std::array<int, 2> lengths{1, 1};

    // physics
    double tau = 0.5, mu = 0.5, a = 0.0, b = 0.5, g = 0.5;
    double alpha = 1.0, beta = 1.0;
    double c_elip_min = 0.05, c_elip_max = 20.0;
    std::string reaction = "smoluchowski";
    std::string diffusion = "identity";
    std::string conductivity = "identity";
    std::string source = "standard";
    double delta = 0.25;

    // discretization
    double dt = 0.0; // 0 resolves to min(1e-3, finest ε / m)
    double horizon = 0.1;
    int snapshots = 20;
    double solver_tol = 1e-10;
    int max_iter = 20000;

    // sweep
    std::vector<int> inv_epsilons{4, 8, 16, 32};

    // flags
    bool deterministic = true;
    bool ambiguity_sweep = false;
    int sign_limit_exchange = +1;
    std::string output_dir;
    int workers = 0; // execution knob (CLI --workers); not part of the config surface

    // configuration identity excludes the execution knob
    bool operator==(const RunConfig& o) const {
        return dim == o.dim && has_hole == o.has_hole && hole_lo == o.hole_lo &&
               hole_hi == o.hole_hi && micro_resolution == o.micro_resolution &&
               lengths == o.lengths && tau == o.tau && mu == o.mu && a == o.a && b == o.b &&
               g == o.g && alpha == o.alpha && beta == o.beta &&
               c_elip_min == o.c_elip_min && c_elip_max == o.c_elip_max &&
               reaction == o.reaction && diffusion == o.diffusion &&
               conductivity == o.conductivity && source == o.source && delta == o.delta &&
               dt == o.dt && horizon == o.horizon && snapshots == o.snapshots &&
               solver_tol == o.solver_tol && max_iter == o.max_iter &&
               inv_epsilons == o.inv_epsilons && deterministic == o.deterministic &&
               ambiguity_sweep == o.ambiguity_sweep &&
               sign_limit_exchange == o.sign_limit_exchange && output_dir == o.output_dir;
    }
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);
std::string serialize_config(const RunConfig& c);

// throws ConfigError on violations; returns non-fatal warnings (legacy
// exponents, mollifier bound at coarse ε)
std::vector<std::string> validate_config(const RunConfig& c);

std::uint64_t config_hash(const RunConfig& c);
std::string config_hash_hex(const RunConfig& c);

// resolved time step for the given sweep
double resolved_dt(const RunConfig& c);

// materialization
CellGeometry make_geometry(const RunConfig& c);
CoefficientField make_diffusion(const RunConfig& c, const CellGeometry& geom);
CoefficientField make_conductivity(const RunConfig& c, const CellGeometry& geom);

// micro problem at one ε with the default initial recipes; grid must outlive
// the problem
MicroProblem make_micro_problem(const RunConfig& c, const PerforatedGrid& grid, double dt);

// limit problem on the given hole-free macro grid
LimitProblem make_limit_problem(const RunConfig& c, const PerforatedGrid& macro_grid,
                                const CellGeometry& cell, const EffectiveTensor& tensor,
                                double dt, int sign_exchange);

// parses "1/8" or "0.125" into the integer 1/ε
int parse_inv_epsilon(const std::string& token);

} // namespace perihom
