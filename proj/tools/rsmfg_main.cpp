#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsmfg/equilibrium.hpp"
#include "rsmfg/errors.hpp"
#include "rsmfg/io.hpp"
#include "rsmfg/nplayer.hpp"
#include "rsmfg/parallel.hpp"
#include "rsmfg/sim.hpp"

using nlohmann::json;
using namespace rsmfg;

namespace {

struct CliContext {
    IniConfig cfg;
    ModelBundle bundle;
    std::string out_dir;
    std::string hash;
    int threads = 0;
};

VISolveOptions solver_options(const IniConfig& cfg) {
    VISolveOptions o;
    o.tol = cfg.get_double("solver", "tol", o.tol);
    o.max_sweeps = cfg.get_long("solver", "max_sweeps", o.max_sweeps);
    o.omega = cfg.get_double("solver", "omega", o.omega);
    const std::string backend = cfg.get_string("solver", "backend", "line");
    o.backend = backend == "psor" ? VIBackend::pointwise_psor : VIBackend::line_lcp;
    if (o.tol <= 0.0) throw DomainError("config: [solver] tol must be positive");
    if (cfg.get_double("equilibrium", "tol", 1e-6) <= 0.0)
        throw DomainError("config: [equilibrium] tol must be positive");
    if (cfg.get_double("sim", "dt", 1e-3) <= 0.0)
        throw DomainError("config: [sim] dt must be positive");
    return o;
}

uint64_t required_seed(const IniConfig& cfg) {
    if (!cfg.has("sim", "seed"))
        throw DomainError("config requires an explicit [sim] seed (no wall-clock default)");
    return static_cast<uint64_t>(cfg.get_long("sim", "seed", 0));
}

DynkinSolution run_dynkin_solve(const CliContext& ctx, double theta) {
    const auto& cfg = ctx.cfg;
    const int n = static_cast<int>(cfg.get_long("grid", "n", 2001));
    const VISolveOptions opts = solver_options(cfg);
    if (cfg.has("grid", "x_lo") && cfg.get_string("grid", "x_lo") != "auto") {
        Grid g{cfg.get_double("grid", "x_lo"), cfg.get_double("grid", "x_hi"), n};
        return solve_vi(ctx.bundle.model, ctx.bundle.spec, theta, g, opts);
    }
    const double margin = cfg.get_double("grid", "margin", 0.5);
    return solve_vi_auto(ctx.bundle.model, ctx.bundle.spec, theta, n, opts, margin);
}

void write_value_csv(const CliContext& ctx, const DynkinSolution& sol, const std::string& name) {
    std::vector<std::string> cols{"x"};
    for (int i = 0; i < ctx.bundle.model.d; ++i) cols.push_back("v" + std::to_string(i));
    CsvWriter csv(ctx.out_dir + "/" + name, ctx.hash, cols);
    for (int k = 0; k < sol.grid.n; ++k) {
        std::vector<double> row{sol.grid.x(k)};
        for (int i = 0; i < ctx.bundle.model.d; ++i) row.push_back(sol.v[i][k]);
        csv.row(row);
    }
}

int cmd_validate(const CliContext& ctx) {
    const auto& b = ctx.bundle;
    const double theta0 = ctx.cfg.get_double("dynkin", "theta", 1.0);
    std::vector<double> theta_grid;
    for (double f : {0.25, 0.5, 1.0, 2.0, 4.0}) theta_grid.push_back(theta0 * f);
    // sampling window wide enough for the threshold roots at every sampled
    // theta (roots grow as theta shrinks)
    const Grid w_lo = auto_grid(b.model, b.spec, theta_grid.front(), 257, 0.5);
    const Grid w_hi = auto_grid(b.model, b.spec, theta_grid.back(), 257, 0.5);
    const Grid window{std::min(w_lo.x_lo, w_hi.x_lo), std::max(w_lo.x_hi, w_hi.x_hi), 1025};
    const auto rep = validate_assumptions(b.model, b.spec, window.nodes(), theta_grid);

    json j;
    j["config_hash"] = ctx.hash;
    j["generator_ok"] = rep.generator_ok;
    j["column_sums_ok"] = rep.column_sums_ok;
    j["dissipativity_ok"] = rep.dissipativity_ok;
    j["volatility_positive"] = rep.volatility_positive;
    j["profit_monotone_concave"] = rep.profit_monotone_concave;
    j["profit_x_theta_decreasing"] = rep.profit_x_theta_decreasing;
    j["maps_increasing"] = rep.maps_increasing;
    j["rate_formula_gap"] = rep.rate_formula_gap;
    j["warnings"] = rep.warnings;
    json roots = json::array();
    for (const auto& r : rep.roots)
        roots.push_back({{"regime", r.regime},
                         {"theta", r.theta},
                         {"x_minus", r.x_minus},
                         {"x_plus", r.x_plus},
                         {"sign_pattern_ok", r.sign_pattern_ok}});
    j["threshold_roots"] = roots;
    write_text_file(ctx.out_dir + "/validate.json", j.dump(2) + "\n");

    std::printf("validation: %s (%zu warnings)\n", rep.all_ok() ? "ok" : "issues found",
                rep.warnings.size());
    for (const auto& w : rep.warnings) std::printf("  warning: %s\n", w.c_str());
    return rep.generator_ok ? 0 : 1;
}

int cmd_dynkin(const CliContext& ctx, double theta) {
    DynkinSolution sol = run_dynkin_solve(ctx, theta);
    write_value_csv(ctx, sol, "dynkin_v.csv");
    write_text_file(ctx.out_dir + "/dynkin_summary.json", dynkin_summary_json(sol, ctx.hash));
    std::printf("theta=%g alpha=(", theta);
    for (int i = 0; i < ctx.bundle.model.d; ++i)
        std::printf("%s%.6g", i ? ", " : "", sol.alpha[i]);
    std::printf(") beta=(");
    for (int i = 0; i < ctx.bundle.model.d; ++i) std::printf("%s%.6g", i ? ", " : "", sol.beta[i]);
    std::printf(") lam_bar=%.8g residual=%.3g\n", sol.lam_bar, sol.residual);
    return 0;
}

int cmd_stationary(const CliContext& ctx, double theta) {
    DynkinSolution sol = run_dynkin_solve(ctx, theta);
    const int mesh_n = static_cast<int>(ctx.cfg.get_long("mesh", "n", 2001));
    StationaryCDF law = solve_stationary(ctx.bundle.model, sol.alpha, sol.beta, mesh_n);
    double clamped = 0.0;
    const double moment = interaction_moment(law, ctx.bundle.spec.f_map, &clamped);

    const int d = ctx.bundle.model.d;
    std::vector<std::string> cols{"x"};
    for (int i = 0; i < d; ++i) cols.push_back("mu" + std::to_string(i));
    for (int i = 0; i < d; ++i) cols.push_back("density" + std::to_string(i));
    CsvWriter csv(ctx.out_dir + "/stationary.csv", ctx.hash, cols);
    const double h = law.grid.h();
    for (int k = 0; k < law.grid.n; ++k) {
        std::vector<double> row{law.grid.x(k)};
        for (int i = 0; i < d; ++i) row.push_back(law.mu[i][k]);
        for (int i = 0; i < d; ++i) {
            double dens;
            if (k == 0)
                dens = (law.mu[i][1] - law.mu[i][0]) / h;
            else if (k == law.grid.n - 1)
                dens = (law.mu[i][k] - law.mu[i][k - 1]) / h;
            else
                dens = (law.mu[i][k + 1] - law.mu[i][k - 1]) / (2.0 * h);
            row.push_back(dens);
        }
        csv.row(row);
    }
    write_text_file(ctx.out_dir + "/stationary_summary.json",
                    stationary_summary_json(law, moment, clamped, ctx.hash));
    std::printf("theta=%g interaction_moment=%.8g residual=%.3g\n", theta, moment, law.residual);
    return 0;
}

EquilibriumResult run_equilibrium(const CliContext& ctx) {
    const auto& cfg = ctx.cfg;
    const int n = static_cast<int>(cfg.get_long("grid", "n", 2401));
    const int mesh_n = static_cast<int>(cfg.get_long("mesh", "n", 2401));
    EquilibriumOptions eopts;
    eopts.tol = cfg.get_double("equilibrium", "tol", eopts.tol);
    eopts.max_iter = static_cast<int>(cfg.get_long("equilibrium", "max_iter", eopts.max_iter));
    return solve_equilibrium(ctx.bundle.model, ctx.bundle.spec, n, mesh_n, solver_options(cfg),
                             eopts);
}

void write_equilibrium_outputs(const CliContext& ctx, const EquilibriumResult& res) {
    write_text_file(ctx.out_dir + "/equilibrium.json", equilibrium_summary_json(res, ctx.hash));
    CsvWriter csv(ctx.out_dir + "/equilibrium_trace.csv", ctx.hash,
                  {"step", "theta", "T_theta", "gap"});
    for (size_t k = 0; k < res.trace.size(); ++k)
        csv.row({static_cast<double>(k), res.trace[k].theta, res.trace[k].t_theta,
                 res.trace[k].gap});
}

int cmd_equilibrium(const CliContext& ctx) {
    EquilibriumResult res = run_equilibrium(ctx);
    write_equilibrium_outputs(ctx, res);
    std::printf("theta_star=%.8f bracket=[%.6f, %.6f] steps=%d evaluations=%zu\n", res.theta_star,
                res.bracket.first, res.bracket.second, res.bisection_steps, res.trace.size());
    return 0;
}

int cmd_simulate(const CliContext& ctx, const DynkinSolution& sol, double theta,
                 const std::string& prefix) {
    const auto& cfg = ctx.cfg;
    const auto& b = ctx.bundle;
    const uint64_t seed = required_seed(cfg);
    const double dt = cfg.get_double("sim", "dt", 1e-3);
    const double horizon = cfg.get_double("sim", "horizon", 200.0);
    const long n_paths = cfg.get_long("sim", "n_paths", 32);
    const double burn_in = cfg.get_double("sim", "burn_in", 0.1);
    const double path_horizon = cfg.get_double("sim", "path_horizon", std::min(horizon, 50.0));

    PathBundle path = simulate_reflected(b.model, sol.alpha, sol.beta,
                                         0.5 * (sol.alpha[0] + sol.beta[0]), 0, path_horizon, dt,
                                         seed);
    {
        CsvWriter csv(ctx.out_dir + "/" + prefix + "path.csv", ctx.hash,
                      {"t", "x", "y", "xi_plus", "xi_minus"});
        for (size_t k = 0; k < path.times.size(); ++k)
            csv.row({path.times[k], path.x[k], static_cast<double>(path.y[k]), path.xi_plus[k],
                     path.xi_minus[k]});
    }

    const MCEstimate est = ergodic_payoff_estimate(b.model, b.spec, theta, sol.alpha, sol.beta,
                                                   horizon, dt, n_paths, seed, burn_in,
                                                   ctx.threads);
    const int mesh_n = static_cast<int>(cfg.get_long("mesh", "n", 2001));
    StationaryCDF law = solve_stationary(b.model, sol.alpha, sol.beta, mesh_n);
    const double occ_dt = cfg.get_double("sim", "occupation_dt", dt);
    const double occ_horizon = cfg.get_double("sim", "occupation_horizon", horizon);
    const StationaryCheck chk = simulate_stationary_check(b.model, law, occ_horizon, occ_dt, seed);

    json j;
    j["config_hash"] = ctx.hash;
    j["theta"] = theta;
    j["seed"] = seed;
    j["payoff_mean"] = est.mean;
    j["payoff_std_error"] = est.std_error;
    j["n_paths"] = est.n_samples;
    j["lam_bar"] = sol.lam_bar;
    j["payoff_minus_lam_bar"] = est.mean - sol.lam_bar;
    j["occupation_sup_distance"] = chk.sup_distance;
    j["regime_fraction"] = chk.empirical.regime_fraction;
    j["mean_regeneration_gap"] = chk.empirical.mean_regeneration_gap;
    write_text_file(ctx.out_dir + "/" + prefix + "simulate_summary.json", j.dump(2) + "\n");
    std::printf("payoff=%.6f (se %.6f) lam_bar=%.6f occupation_sup_distance=%.4f\n", est.mean,
                est.std_error, sol.lam_bar, chk.sup_distance);
    return 0;
}

int cmd_nplayer(const CliContext& ctx, const EquilibriumResult& res, const std::string& prefix) {
    const auto& cfg = ctx.cfg;
    const auto& b = ctx.bundle;
    const uint64_t seed = required_seed(cfg);

    BarrierPolicy eq{res.solution_at_star.alpha, res.solution_at_star.beta};
    PopulationRun base;
    base.equilibrium = eq;
    base.khat = res.khat;
    base.horizon = cfg.get_double("nplayer", "horizon", 100.0);
    base.dt = cfg.get_double("nplayer", "dt", 4e-3);
    base.n_rep = static_cast<int>(cfg.get_long("nplayer", "n_rep", 64));
    base.seed = seed;
    base.burn_in_fraction = cfg.get_double("sim", "burn_in", 0.1);
    base.n_threads = ctx.threads;

    std::vector<int> n_list;
    for (double v : cfg.get_list("nplayer", "n_list", {2, 5, 10, 20, 50}))
        n_list.push_back(static_cast<int>(v));
    const int half_width =
        static_cast<int>(cfg.get_long("nplayer", "deviation_half_width", 2));
    const double step = res.solution_at_star.grid.h();
    const double budget = cfg.get_double("nplayer", "budget_seconds", 0.0);

    const auto grid = deviation_grid(eq, res.khat, step, half_width);
    const EpsilonCurve curve =
        epsilon_curve(b.model, b.spec, eq, res.khat, n_list, step, base, budget);

    {
        CsvWriter csv(ctx.out_dir + "/" + prefix + "epsilon_curve.csv", ctx.hash,
                      {"N", "epsilon_hat", "raw_best_gain", "best_gain_se", "equilibrium_payoff",
                       "n_deviations"});
        for (const auto& r : curve.rows)
            csv.row({static_cast<double>(r.n_players), r.epsilon_hat, r.raw_best_gain,
                     r.best_gain_se, r.equilibrium_payoff, static_cast<double>(r.n_deviations)});
    }
    {
        std::vector<std::string> cols{"N", "deviation_id"};
        for (int i = 0; i < b.model.d; ++i) cols.push_back("alpha" + std::to_string(i));
        for (int i = 0; i < b.model.d; ++i) cols.push_back("beta" + std::to_string(i));
        cols.insert(cols.end(), {"payoff", "payoff_se", "gain", "gain_se"});
        CsvWriter csv(ctx.out_dir + "/" + prefix + "deviations.csv", ctx.hash, cols);
        for (size_t r = 0; r < curve.details.size(); ++r) {
            const auto& table = curve.details[r].table;
            for (size_t dvn = 0; dvn < table.size(); ++dvn) {
                std::vector<double> row{static_cast<double>(curve.rows[r].n_players),
                                        static_cast<double>(dvn)};
                for (double v : table[dvn].policy.alpha) row.push_back(v);
                for (double v : table[dvn].policy.beta) row.push_back(v);
                row.insert(row.end(), {table[dvn].payoff, table[dvn].payoff_se, table[dvn].gain,
                                       table[dvn].gain_se});
                csv.row(row);
            }
        }
    }
    json j;
    j["config_hash"] = ctx.hash;
    j["seed"] = seed;
    j["n_list"] = n_list;
    j["deviation_step"] = step;
    j["n_deviations"] = grid.size();
    j["theta_star"] = res.theta_star;
    j["equilibrium_alpha"] = eq.alpha;
    j["equilibrium_beta"] = eq.beta;
    j["khat"] = {res.khat.first, res.khat.second};
    j["budget_exhausted"] = curve.budget_exhausted;
    write_text_file(ctx.out_dir + "/" + prefix + "nplayer_manifest.json", j.dump(2) + "\n");

    for (const auto& r : curve.rows)
        std::printf("N=%2d epsilon_hat=%.6f (raw %.6f, se %.6f)\n", r.n_players, r.epsilon_hat,
                    r.raw_best_gain, r.best_gain_se);
    if (curve.budget_exhausted) std::printf("budget exhausted: table is partial\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stationary mean-field game solver for two-sided singular control with regime switching"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    int threads = 0;
    double theta_flag = -1.0;
    long seed_flag = -1;

    app.add_option("--config", config_path, "path to the run configuration")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (default: all cores)");
    app.add_option("--seed", seed_flag, "override [sim] seed");
    app.add_option("--theta", theta_flag, "interaction parameter (dynkin/stationary only)");

    auto* c_validate = app.add_subcommand("validate", "check model assumptions on sampled grids");
    auto* c_dynkin = app.add_subcommand("dynkin", "solve the obstacle problem at a fixed theta");
    auto* c_stationary = app.add_subcommand("stationary", "stationary law at a fixed theta");
    auto* c_equilibrium = app.add_subcommand("equilibrium", "bracket and solve the fixed point");
    auto* c_simulate = app.add_subcommand("simulate", "reflected path, payoff and occupation checks");
    auto* c_nplayer = app.add_subcommand("nplayer", "best-deviation gains across population sizes");
    auto* c_pipeline = app.add_subcommand("pipeline", "equilibrium, simulation cross-check, nplayer");

    CLI11_PARSE(app, argc, argv);

    try {
        CliContext ctx;
        ctx.cfg = IniConfig::parse_file(config_path);
        if (seed_flag >= 0) ctx.cfg.set("sim", "seed", std::to_string(seed_flag));
        if (theta_flag > 0.0) ctx.cfg.set("dynkin", "theta", format_double(theta_flag));
        if (ctx.cfg.has("output", "dir") && out_dir == "out")
            out_dir = ctx.cfg.get_string("output", "dir");
        ctx.out_dir = out_dir;
        ctx.threads = threads;
        ctx.hash = config_hash_hex(ctx.cfg);
        ctx.bundle = build_model(ctx.cfg);
        std::filesystem::create_directories(ctx.out_dir);

        auto theta_for = [&](const char* cmd) {
            if (!ctx.cfg.has("dynkin", "theta")) {
                std::fprintf(stderr, "%s requires --theta or [dynkin] theta in the config\n", cmd);
                std::exit(2);
            }
            return ctx.cfg.get_double("dynkin", "theta");
        };

        if (c_validate->parsed()) return cmd_validate(ctx);
        if (c_dynkin->parsed()) return cmd_dynkin(ctx, theta_for("dynkin"));
        if (c_stationary->parsed()) return cmd_stationary(ctx, theta_for("stationary"));
        if (c_equilibrium->parsed()) return cmd_equilibrium(ctx);
        if (c_simulate->parsed()) {
            const double theta = theta_for("simulate");
            DynkinSolution sol = run_dynkin_solve(ctx, theta);
            return cmd_simulate(ctx, sol, theta, "");
        }
        if (c_nplayer->parsed()) {
            EquilibriumResult res = run_equilibrium(ctx);
            write_equilibrium_outputs(ctx, res);
            return cmd_nplayer(ctx, res, "");
        }
        if (c_pipeline->parsed()) {
            EquilibriumResult res = run_equilibrium(ctx);
            write_equilibrium_outputs(ctx, res);
            const int rc1 = cmd_simulate(ctx, res.solution_at_star, res.theta_star, "pipeline_");
            const int rc2 = cmd_nplayer(ctx, res, "pipeline_");
            return rc1 != 0 ? rc1 : rc2;
        }
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
