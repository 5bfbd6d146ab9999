#include "perihom/errors.hpp"
#include "perihom/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <memory>
#include <thread>

namespace perihom {

namespace {

using ordered_json = nlohmann::ordered_json;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ordered_json fit_json(const RateFit& f) {
    ordered_json j;
    j["slope"] = f.slope;
    j["prefactor"] = f.intercept;
    j["residual"] = f.residual;
    j["points_used"] = f.points_used;
    if (!f.notes.empty())
        j["notes"] = f.notes;
    return j;
}

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

ConvergenceReport run_study(const RunConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();

    ConvergenceReport rep;
    rep.warnings = validate_config(config);
    rep.config_hash = config_hash_hex(config);
    rep.resolved_config = serialize_config(config);
    const double dt = resolved_dt(config);
    rep.dt = dt;

    // sweep sorted so reports run from the finest ε upward
    std::vector<int> invs = config.inv_epsilons;
    std::sort(invs.begin(), invs.end(), std::greater<int>());
    invs.erase(std::unique(invs.begin(), invs.end()), invs.end());
    const int inv_max = invs.front();
    for (int inv : invs)
        if (inv_max % inv != 0)
            throw PairingError("every 1/ε in the sweep must divide the finest one (1/" +
                               std::to_string(inv_max) + "), got 1/" + std::to_string(inv));

    const auto geom = make_geometry(config);
    const auto diffusion = make_diffusion(config, geom);
    SolveOptions cell_opts;
    cell_opts.tol = config.solver_tol;
    cell_opts.max_iter = config.max_iter;
    const auto tensor = solve_cell_problems(geom, diffusion, cell_opts);
    rep.d_eff = tensor.d_eff;
    rep.area_y_star = geom.area_y_star;
    rep.hole_perimeter = geom.hole_perimeter;
    rep.cell_residuals = tensor.cell_residuals;

    // limit run(s), one per sign convention
    const auto macro_geom = build_cell_geometry(2, std::nullopt, 1);
    const auto macro_grid =
        build_perforated_grid(macro_geom, 1.0 / inv_max, config.lengths);
    std::vector<int> signs{config.sign_limit_exchange};
    if (config.ambiguity_sweep)
        signs.push_back(-config.sign_limit_exchange);

    std::vector<LimitProblem> limit_problems;
    std::vector<LimitTrajectory> limit_trajs;
    limit_problems.reserve(signs.size());
    for (int sign : signs) {
        limit_problems.push_back(
            make_limit_problem(config, macro_grid, geom, tensor, dt, sign));
        limit_trajs.push_back(run_limit(limit_problems.back()));
    }

    // micro runs in a worker pool; each job owns its grid and reduces its own
    // errors, so results are independent of scheduling
    struct JobResult {
        std::vector<ErrorFunctional> errors; // per sign
        double initial_gap = 0.0;
        double sup_h1 = 0.0;
        double cdelta = 0.0;
        bool positivity_violated = false;
        double runtime_seconds = 0.0;
    };
    std::vector<JobResult> results(invs.size());

    auto job = [&](std::size_t j) {
        const auto tj = std::chrono::steady_clock::now();
        const double eps = 1.0 / invs[j];
        const auto grid = build_perforated_grid(geom, eps, config.lengths);
        const auto problem = make_micro_problem(config, grid, dt);
        const auto traj = run_micro(problem);
        const TrajectoryComparator cmp(grid, macro_grid, tensor);
        JobResult r;
        for (std::size_t v = 0; v < limit_trajs.size(); ++v)
            r.errors.push_back(error_functional(traj, limit_trajs[v], cmp));
        r.initial_gap = cmp.initial_gap(traj.u.front(), traj.theta.front(),
                                        limit_trajs.front().u.front(),
                                        limit_trajs.front().theta.front());
        r.sup_h1 = traj.sup_h1_indicator;
        r.cdelta = traj.measured_cdelta;
        r.positivity_violated = traj.positivity_violated;
        r.runtime_seconds = seconds_since(tj);
        results[j] = std::move(r);
    };

    unsigned workers = config.workers > 0 ? static_cast<unsigned>(config.workers)
                                          : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, invs.size()));
    if (workers == 1) {
        for (std::size_t j = 0; j < invs.size(); ++j)
            job(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t j = next.fetch_add(1);
                    if (j >= invs.size())
                        return;
                    job(j);
                }
            });
        for (auto& th : pool)
            th.join();
    }

    for (std::size_t v = 0; v < signs.size(); ++v) {
        StudyVariant var;
        var.sign_exchange = signs[v];
        for (std::size_t j = 0; j < invs.size(); ++j) {
            EpsilonResult pt;
            pt.inv_epsilon = invs[j];
            pt.errors = results[j].errors[v];
            pt.initial_gap = results[j].initial_gap;
            pt.sup_h1_indicator = results[j].sup_h1;
            pt.measured_cdelta = results[j].cdelta;
            pt.positivity_violated = results[j].positivity_violated;
            pt.runtime_seconds = config.deterministic ? 0.0 : results[j].runtime_seconds;
            var.points.push_back(pt);
        }
        if (var.points.size() >= 3) {
            auto pts = [&](auto&& get) {
                std::vector<std::pair<double, double>> p;
                for (const auto& q : var.points)
                    p.emplace_back(1.0 / q.inv_epsilon, get(q));
                return p;
            };
            auto p_total = pts([](const EpsilonResult& q) { return q.errors.total(); });
            var.fit_total = fit_rate(p_total);
            auto p1 = pts([](const EpsilonResult& q) { return q.errors.e1; });
            var.fit_e1 = fit_rate(p1);
            auto p2 = pts([](const EpsilonResult& q) { return q.errors.e2; });
            var.fit_e2 = fit_rate(p2);
            auto p3 = pts([](const EpsilonResult& q) { return q.errors.e3; });
            var.fit_e3 = fit_rate(p3);
            auto p4 = pts([](const EpsilonResult& q) { return q.errors.e4; });
            var.fit_e4 = fit_rate(p4);
            auto pg = pts([](const EpsilonResult& q) { return q.initial_gap; });
            var.fit_initial_gap = fit_rate(pg);
        } else {
            rep.warnings.push_back("fewer than 3 epsilon points; no slopes fitted");
        }
        rep.variants.push_back(std::move(var));
    }

    rep.aux = auxiliary_rates(geom, invs, config.delta);
    rep.total_runtime_seconds = config.deterministic ? 0.0 : seconds_since(t0);
    return rep;
}

std::string report_to_json(const ConvergenceReport& rep) {
    ordered_json j;
    j["tool"] = "perihom";
    j["kind"] = "convergence_study";
    j["config_hash"] = rep.config_hash;
    j["dt"] = rep.dt;
    j["warnings"] = rep.warnings;

    ordered_json cell;
    cell["d_eff"] = {{rep.d_eff.a11, rep.d_eff.a12}, {rep.d_eff.a12, rep.d_eff.a22}};
    cell["area_y_star"] = rep.area_y_star;
    cell["hole_perimeter"] = rep.hole_perimeter;
    cell["exchange_ratio"] =
        rep.area_y_star > 0 ? rep.hole_perimeter / rep.area_y_star : 0.0;
    cell["solve_residuals"] = {rep.cell_residuals[0], rep.cell_residuals[1]};
    j["cell"] = cell;

    ordered_json variants = ordered_json::array();
    for (const auto& var : rep.variants) {
        ordered_json v;
        v["sign_exchange"] = var.sign_exchange;
        ordered_json pts = ordered_json::array();
        for (const auto& p : var.points) {
            ordered_json q;
            q["epsilon"] = 1.0 / p.inv_epsilon;
            q["inv_epsilon"] = p.inv_epsilon;
            q["e1"] = p.errors.e1;
            q["e2"] = p.errors.e2;
            q["e3"] = p.errors.e3;
            q["e4"] = p.errors.e4;
            q["total"] = p.errors.total();
            q["initial_gap"] = p.initial_gap;
            q["sup_h1_indicator"] = p.sup_h1_indicator;
            q["measured_cdelta"] = p.measured_cdelta;
            q["positivity_violated"] = p.positivity_violated;
            q["runtime_seconds"] = p.runtime_seconds;
            pts.push_back(q);
        }
        v["points"] = pts;
        if (!var.points.empty() && var.points.size() >= 3) {
            ordered_json fits;
            fits["total"] = fit_json(var.fit_total);
            fits["e1"] = fit_json(var.fit_e1);
            fits["e2"] = fit_json(var.fit_e2);
            fits["e3"] = fit_json(var.fit_e3);
            fits["e4"] = fit_json(var.fit_e4);
            fits["initial_gap"] = fit_json(var.fit_initial_gap);
            v["fits"] = fits;
        }
        variants.push_back(v);
    }
    j["variants"] = variants;

    ordered_json aux;
    aux["epsilons"] = rep.aux.epsilons;
    aux["refold_error"] = rep.aux.refold_error;
    aux["unfold_error"] = rep.aux.unfold_error;
    aux["folding_mismatch"] = rep.aux.folding_mismatch;
    aux["mollifier_commutation"] = rep.aux.mollifier_commutation;
    if (rep.aux.epsilons.size() >= 3) {
        aux["fits"] = ordered_json{{"refold_error", fit_json(rep.aux.fit_refold)},
                                   {"unfold_error", fit_json(rep.aux.fit_unfold)},
                                   {"folding_mismatch", fit_json(rep.aux.fit_mismatch)},
                                   {"mollifier_commutation", fit_json(rep.aux.fit_mollifier)}};
    }
    j["aux"] = aux;
    j["total_runtime_seconds"] = rep.total_runtime_seconds;
    j["config"] = rep.resolved_config;
    return j.dump(2) + "\n";
}

std::string report_rates_csv(const ConvergenceReport& rep) {
    std::string out = "epsilon,e1,e2,e3,e4,total,initial_gap\n";
    if (rep.variants.empty())
        return out;
    for (const auto& p : rep.variants.front().points) {
        out += csv_num(1.0 / p.inv_epsilon) + "," + csv_num(p.errors.e1) + "," +
               csv_num(p.errors.e2) + "," + csv_num(p.errors.e3) + "," + csv_num(p.errors.e4) +
               "," + csv_num(p.errors.total()) + "," + csv_num(p.initial_gap) + "\n";
    }
    return out;
}

std::string report_aux_csv(const ConvergenceReport& rep) {
    std::string out = "epsilon,refold_error,unfold_error,mollifier_commutation,folding_mismatch\n";
    for (std::size_t i = 0; i < rep.aux.epsilons.size(); ++i) {
        out += csv_num(rep.aux.epsilons[i]) + "," + csv_num(rep.aux.refold_error[i]) + "," +
               csv_num(rep.aux.unfold_error[i]) + "," + csv_num(rep.aux.mollifier_commutation[i]) + "," +
               csv_num(rep.aux.folding_mismatch[i]) + "\n";
    }
    return out;
}

} // namespace perihom
