// perihom command-line tool: cell problems, single micro/limit runs, the full
// convergence study, and the operator exactness suite.

#include "perihom/cell_problem.hpp"
#include "perihom/config.hpp"
#include "perihom/errors.hpp"
#include "perihom/io.hpp"
#include "perihom/operators.hpp"
#include "perihom/presets.hpp"
#include "perihom/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace perihom;

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::string sweep_override;
    std::string epsilon_override;
    bool deterministic_flag = false;
    int workers = -1;
};

RunConfig load_config(const CliOptions& cli) {
    RunConfig cfg;
    if (!cli.config_path.empty())
        cfg = parse_config(cli.config_path);
    if (!cli.sweep_override.empty()) {
        cfg.inv_epsilons.clear();
        std::string token;
        std::istringstream in(cli.sweep_override);
        while (std::getline(in, token, ','))
            if (!token.empty())
                cfg.inv_epsilons.push_back(parse_inv_epsilon(token));
    }
    if (cli.deterministic_flag)
        cfg.deterministic = true;
    if (cli.workers >= 0)
        cfg.workers = cli.workers;
    if (!cli.out_dir.empty())
        cfg.output_dir = cli.out_dir;
    const auto warnings = validate_config(cfg);
    for (const auto& w : warnings)
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    return cfg;
}

std::filesystem::path make_run_dir(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path base = cfg.output_dir.empty() ? fs::path("runs") : fs::path(cfg.output_dir);
    fs::create_directories(base);
    const auto now = std::chrono::system_clock::now();
    const auto tt = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", std::localtime(&tt));
    const std::string name = std::string(stamp) + "_" + config_hash_hex(cfg);
    fs::path dir = base / name;
    // reports are never overwritten
    for (int k = 2; fs::exists(dir); ++k)
        dir = base / (name + "-" + std::to_string(k));
    fs::create_directories(dir);
    return dir;
}

int run_cell(const CliOptions& cli) {
    const auto cfg = load_config(cli);
    const auto geom = make_geometry(cfg);
    const auto D = make_diffusion(cfg, geom);
    SolveOptions opts{cfg.solver_tol, cfg.max_iter, false};
    const auto tensor = solve_cell_problems(geom, D, opts);
    std::printf("d_eff = [[%.12g, %.12g], [%.12g, %.12g]]\n", tensor.d_eff.a11,
                tensor.d_eff.a12, tensor.d_eff.a12, tensor.d_eff.a22);
    std::printf("|Y_*| = %.12g   per(dT) = %.12g   cell residuals = [%.2e, %.2e]\n",
                tensor.area_y_star, tensor.hole_perimeter, tensor.cell_residuals[0],
                tensor.cell_residuals[1]);
    if (!cfg.output_dir.empty()) {
        const auto dir = make_run_dir(cfg);
        write_text_file((dir / "d_eff.csv").string(), tensor_csv(tensor));
        write_text_file((dir / "correctors.csv").string(), correctors_csv(geom, tensor));
        write_text_file((dir / "config.txt").string(), serialize_config(cfg));
        std::printf("wrote %s\n", dir.string().c_str());
    }
    return 0;
}

int run_micro_cmd(const CliOptions& cli) {
    const auto cfg = load_config(cli);
    const int inv = cli.epsilon_override.empty() ? cfg.inv_epsilons.front()
                                                 : parse_inv_epsilon(cli.epsilon_override);
    const auto geom = make_geometry(cfg);
    const auto grid = build_perforated_grid(geom, 1.0 / inv, cfg.lengths);
    const double dt = resolved_dt(cfg);
    const auto problem = make_micro_problem(cfg, grid, dt);
    const auto traj = run_micro(problem);

    const auto& last = traj.diagnostics.back();
    std::printf("micro run eps=1/%d: %zu steps, u in [%.6g, %.6g], theta in [%.6g, %.6g]\n",
                inv, traj.diagnostics.size(), last.u_min, last.u_max, last.theta_min,
                last.theta_max);
    std::printf("sup-H1 indicator %.6g, measured C_delta %.6g%s\n", traj.sup_h1_indicator,
                traj.measured_cdelta,
                traj.positivity_violated ? ", POSITIVITY FLAGGED" : "");
    if (!cfg.output_dir.empty()) {
        const auto dir = make_run_dir(cfg);
        for (std::size_t k = 0; k < traj.u.size(); ++k) {
            char name[64];
            std::snprintf(name, sizeof(name), "micro_snap_%03zu.csv", k);
            write_text_file((dir / name).string(), snapshot_csv(traj.u[k], traj.theta[k]));
        }
        write_text_file((dir / "diagnostics.jsonl").string(), diagnostics_jsonl(traj));
        write_text_file((dir / "config.txt").string(), serialize_config(cfg));
        std::printf("wrote %s\n", dir.string().c_str());
    }
    return traj.positivity_violated ? 1 : 0;
}

int run_limit_cmd(const CliOptions& cli) {
    const auto cfg = load_config(cli);
    const auto geom = make_geometry(cfg);
    const auto D = make_diffusion(cfg, geom);
    SolveOptions opts{cfg.solver_tol, cfg.max_iter, false};
    const auto tensor = solve_cell_problems(geom, D, opts);
    int inv_max = 0;
    for (int inv : cfg.inv_epsilons)
        inv_max = std::max(inv_max, inv);
    const auto macro_geom = build_cell_geometry(2, std::nullopt, 1);
    const auto macro = build_perforated_grid(macro_geom, 1.0 / inv_max, cfg.lengths);
    const double dt = resolved_dt(cfg);
    const auto problem =
        make_limit_problem(cfg, macro, geom, tensor, dt, cfg.sign_limit_exchange);
    const auto traj = run_limit(problem);
    const auto& last = traj.diagnostics.back();
    std::printf("limit run (macro 1/%d, sign %+d): u in [%.6g, %.6g], theta in [%.6g, %.6g]\n",
                inv_max, cfg.sign_limit_exchange, last.u_min, last.u_max, last.theta_min,
                last.theta_max);
    if (!cfg.output_dir.empty()) {
        const auto dir = make_run_dir(cfg);
        const auto idx = make_two_scale_index(macro.cells_x, macro.cells_y, macro.h, geom);
        for (std::size_t k = 0; k < traj.u.size(); ++k) {
            char name[64];
            std::snprintf(name, sizeof(name), "limit_u_%03zu.csv", k);
            ScalarField zero(macro);
            ScalarField uk = traj.u[k];
            uk.grid = &macro;
            write_text_file((dir / name).string(), snapshot_csv(uk, zero));
            std::snprintf(name, sizeof(name), "limit_corrector_%03zu.csv", k);
            write_text_file((dir / name).string(),
                            two_scale_csv(corrector_snapshot(problem, uk, idx)));
            std::snprintf(name, sizeof(name), "limit_theta_%03zu.csv", k);
            write_text_file((dir / name).string(),
                            two_scale_csv(theta_snapshot(problem, traj.theta[k], idx,
                                                         traj.snapshot_times[k])));
        }
        write_text_file((dir / "diagnostics.jsonl").string(), diagnostics_jsonl(traj));
        write_text_file((dir / "config.txt").string(), serialize_config(cfg));
        std::printf("wrote %s\n", dir.string().c_str());
    }
    return 0;
}

int run_study_cmd(const CliOptions& cli) {
    const auto cfg = load_config(cli);
    const auto report = run_study(cfg);
    for (const auto& v : report.variants) {
        std::printf("sign %+d:\n", v.sign_exchange);
        std::printf("  %-10s %-12s %-12s %-12s %-12s %-12s\n", "epsilon", "e1", "e2", "e3",
                    "e4", "total");
        for (const auto& p : v.points)
            std::printf("  1/%-8d %-12.4e %-12.4e %-12.4e %-12.4e %-12.4e\n", p.inv_epsilon,
                        p.errors.e1, p.errors.e2, p.errors.e3, p.errors.e4, p.errors.total());
        if (v.points.size() >= 3)
            std::printf("  slopes: total %.3f (fit residual %.3f), e1 %.3f, e2 %.3f, "
                        "e3 %.3f, e4 %.3f, initial gap %.3f\n",
                        v.fit_total.slope, v.fit_total.residual, v.fit_e1.slope,
                        v.fit_e2.slope, v.fit_e3.slope, v.fit_e4.slope,
                        v.fit_initial_gap.slope);
    }
    std::printf("aux slopes: refold %.3f, unfold %.3f, folding mismatch %.3f, "
                "mollifier commutation %.3f\n",
                report.aux.fit_refold.slope, report.aux.fit_unfold.slope,
                report.aux.fit_mismatch.slope, report.aux.fit_mollifier.slope);

    const auto dir = make_run_dir(cfg);
    write_text_file((dir / "report.json").string(), report_to_json(report));
    write_text_file((dir / "rates.csv").string(), report_rates_csv(report));
    write_text_file((dir / "aux_rates.csv").string(), report_aux_csv(report));
    write_text_file((dir / "config.txt").string(), report.resolved_config);
    std::printf("wrote %s\n", dir.string().c_str());
    return 0;
}

int run_ops_check(const CliOptions& cli) {
    const auto cfg = load_config(cli);
    const auto geom = make_geometry(cfg);
    const auto checks = ops_exactness_suite(geom, cfg.inv_epsilons, 0x9e3779b97f4a7cull);
    bool all_pass = true;
    for (const auto& c : checks) {
        std::printf("[%s] %-55s error %.3e (tol %.0e)\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.error, c.tolerance);
        all_pass = all_pass && c.pass;
    }
    std::printf("%s\n", all_pass ? "all identities hold" : "IDENTITY FAILURES PRESENT");
    return all_pass ? 0 : 1;
}

int run_presets() {
    std::printf("reaction: ");
    for (const auto& n : reaction_preset_names())
        std::printf("%s ", n.c_str());
    std::printf("\ncoefficients: ");
    for (const auto& n : coefficient_preset_names())
        std::printf("%s ", n.c_str());
    std::printf("\nsource: ");
    for (const auto& n : source_preset_names())
        std::printf("%s ", n.c_str());
    std::printf("\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"periodic homogenization toolkit for perforated thermo-diffusion"};
    app.require_subcommand(1);
    app.fallthrough(); // global options may follow the subcommand

    CliOptions cli;
    app.add_option("--config", cli.config_path, "run configuration file");
    app.add_option("--out", cli.out_dir, "output directory (overrides config)");
    app.add_option("--sweep", cli.sweep_override, "epsilon list, e.g. \"1/4,1/8,1/16\"");
    app.add_flag("--deterministic", cli.deterministic_flag, "force deterministic mode");
    app.add_option("--workers", cli.workers, "worker pool size (0 = hardware)");

    auto* cell = app.add_subcommand("cell", "solve the unit-cell problems only");
    auto* micro = app.add_subcommand("micro", "single microscale run at one epsilon");
    micro->add_option("--epsilon", cli.epsilon_override, "epsilon for this run, e.g. 1/8");
    auto* limit = app.add_subcommand("limit", "two-scale limit run");
    auto* study = app.add_subcommand("study", "full convergence study");
    auto* ops = app.add_subcommand("ops-check", "operator algebra exactness suite");
    auto* presets = app.add_subcommand("presets", "list named data presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cell->parsed())
            return run_cell(cli);
        if (micro->parsed())
            return run_micro_cmd(cli);
        if (limit->parsed())
            return run_limit_cmd(cli);
        if (study->parsed())
            return run_study_cmd(cli);
        if (ops->parsed())
            return run_ops_check(cli);
        if (presets->parsed())
            return run_presets();
    } catch (const perihom::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 1;
    }
    return 0;
}
