#include "rsmfg/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rsmfg/chain.hpp"
#include "rsmfg/errors.hpp"

namespace rsmfg {

double T_map(const RegimeModel& model, const ProfitSpec& spec, double theta,
             const PipelineGrids& grids, DynkinSolution* sol_out, StationaryCDF* law_out) {
    DynkinSolution sol = solve_vi(model, spec, theta, grids.vi_grid, grids.vi_opts);
    StationaryCDF law = solve_stationary(model, sol.alpha, sol.beta, grids.mesh_n);
    const double moment = interaction_moment(law, spec.f_map);
    const double mapped = spec.F_map(moment);
    if (sol_out) *sol_out = std::move(sol);
    if (law_out) *law_out = std::move(law);
    return mapped;
}

EquilibriumBracket compute_bracket(const RegimeModel& model, const ProfitSpec& spec, int grid_n,
                                   int mesh_n, const VISolveOptions& vi_opts) {
    EquilibriumBracket br;

    // lower end: the large-theta limit game and its stationary law
    DynkinSolution aux = solve_auxiliary_vi_auto(model, spec, grid_n, vi_opts);
    br.aux_alpha = aux.alpha;
    br.aux_beta = aux.beta;
    const StationaryCDF law_lo = solve_stationary(model, aux.alpha, aux.beta, mesh_n);
    br.theta_lo = std::max(spec.F_map(interaction_moment(law_lo, spec.f_map)), spec.theta_min);

    // upper end: chain-averaged f at the theta_lo band tops
    DynkinSolution sol_lo = solve_vi_auto(model, spec, br.theta_lo, grid_n, vi_opts);
    br.beta_at_lo = sol_lo.beta;
    const auto p = model.d >= 2 ? chain_stationary(model.rate_matrix) : std::vector<double>{1.0};
    double avg_f = 0.0;
    for (int i = 0; i < model.d; ++i) avg_f += p[i] * spec.f_map(sol_lo.beta[i]);
    br.theta_hi = spec.F_map(avg_f);

    if (br.theta_lo > br.theta_hi + 1e-9 * std::max(1.0, br.theta_hi))
        throw NumericsError("bracket inversion: theta_lo " + std::to_string(br.theta_lo) +
                            " above theta_hi " + std::to_string(br.theta_hi));
    br.theta_hi = std::max(br.theta_hi, br.theta_lo);

    br.khat = {*std::min_element(br.aux_alpha.begin(), br.aux_alpha.end()),
               *std::max_element(br.beta_at_lo.begin(), br.beta_at_lo.end())};

    // one grid for every subsequent map evaluation: the hull of the strategy
    // box and the threshold roots at both bracket ends, padded by 25%
    const Grid g_lo_end = auto_grid(model, spec, br.theta_lo, grid_n, 0.0);
    const Grid g_hi_end = auto_grid(model, spec, br.theta_hi, grid_n, 0.0);
    const double need_lo = std::min({br.khat.first, g_lo_end.x_lo, g_hi_end.x_lo});
    const double need_hi = std::max({br.khat.second, g_lo_end.x_hi, g_hi_end.x_hi});
    const double width = need_hi - need_lo;
    double lo = need_lo - 0.25 * width;
    double hi = need_hi + 0.25 * width;
    // domain clamps must stay strictly outside the strategy box
    if (std::isfinite(model.state_interval.first))
        lo = std::max(lo, model.state_interval.first + 0.25 * (need_lo - model.state_interval.first));
    if (std::isfinite(model.state_interval.second))
        hi = std::min(hi, model.state_interval.second - 0.25 * (model.state_interval.second - need_hi));

    br.grids.vi_grid = Grid{lo, hi, grid_n};
    br.grids.mesh_n = mesh_n;
    br.grids.vi_opts = vi_opts;
    // the pads around the strategy box must resolve at least a few cells,
    // otherwise the edge diagnostics of later solves cannot distinguish a
    // genuine truncation problem from coarse sampling
    const double h = br.grids.vi_grid.h();
    const double pad = std::min(need_lo - lo, hi - need_hi);
    if (pad < 1.5 * h)
        throw NumericsError("equilibrium grid too coarse for the strategy box (pad " +
                            std::to_string(pad) + " vs h " + std::to_string(h) +
                            "); increase grid n");
    return br;
}

EquilibriumResult solve_equilibrium(const RegimeModel& model, const ProfitSpec& spec,
                                    const EquilibriumBracket& bracket,
                                    const EquilibriumOptions& opts) {
    EquilibriumResult res;
    res.bracket = {bracket.theta_lo, bracket.theta_hi};
    res.khat = bracket.khat;

    auto gap_at = [&](double theta) {
        const double t = T_map(model, spec, theta, bracket.grids);
        res.trace.push_back({theta, t, theta - t});
        return theta - t;
    };

    double lo = bracket.theta_lo, hi = bracket.theta_hi;
    double g_lo = gap_at(lo);
    const double scale = std::max(1.0, hi);
    const double slack = std::max(10.0 * opts.tol, 1e-9 * scale);

    double theta_star = lo;
    bool converged = std::abs(g_lo) <= opts.tol;
    if (!converged) {
        if (g_lo > slack)
            throw NumericsError("bracket does not straddle: gap positive at theta_lo");
        double g_hi = gap_at(hi);
        if (std::abs(g_hi) <= opts.tol) {
            theta_star = hi;
            converged = true;
        } else if (g_hi < -slack) {
            throw NumericsError("bracket does not straddle: gap negative at theta_hi");
        }

        double best_theta = std::abs(g_lo) < std::abs(g_hi) ? lo : hi;
        double best_gap = std::min(std::abs(g_lo), std::abs(g_hi));
        bool non_monotone = false;

        while (!converged && res.bisection_steps < opts.max_iter) {
            ++res.bisection_steps;
            const double mid = 0.5 * (lo + hi);
            const double g_mid = gap_at(mid);
            if (g_mid < g_lo - slack || g_mid > g_hi + slack) non_monotone = true;
            if (std::abs(g_mid) < best_gap) {
                best_gap = std::abs(g_mid);
                best_theta = mid;
            }
            if (std::abs(g_mid) <= opts.tol) {
                theta_star = mid;
                converged = true;
                break;
            }
            if (g_mid < 0.0) {
                lo = mid;
                g_lo = g_mid;
            } else {
                hi = mid;
                g_hi = g_mid;
            }
            // the gap can be locally steep, so the bracket may need to
            // shrink far below the gap tolerance; stop only at the floating
            // point resolution of theta
            if (hi - lo <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) {
                theta_star = best_theta;
                converged = best_gap <= opts.tol;
                break;
            }
        }

        if (non_monotone)
            res.warnings.push_back("discretized map gap non-monotone across bisection points");

        if (!converged) {
            // guarded damped fixed-point fallback
            res.used_damped_fallback = true;
            double theta = best_theta;
            for (int it = 0; it < opts.damped_cap && !converged; ++it) {
                const double t = T_map(model, spec, theta, bracket.grids);
                res.trace.push_back({theta, t, theta - t});
                if (std::abs(theta - t) <= opts.tol) {
                    theta_star = theta;
                    converged = true;
                    break;
                }
                theta = (1.0 - opts.damping) * theta + opts.damping * t;
                theta = std::clamp(theta, bracket.theta_lo, bracket.theta_hi);
            }
            if (!converged)
                throw SolverError("equilibrium iteration budget exhausted (best gap " +
                                      std::to_string(best_gap) + ")",
                                  best_gap);
        }
    }

    res.theta_star = theta_star;
    T_map(model, spec, theta_star, bracket.grids, &res.solution_at_star, &res.law_at_star);
    return res;
}

EquilibriumResult solve_equilibrium(const RegimeModel& model, const ProfitSpec& spec, int grid_n,
                                    int mesh_n, const VISolveOptions& vi_opts,
                                    const EquilibriumOptions& opts) {
    const EquilibriumBracket br = compute_bracket(model, spec, grid_n, mesh_n, vi_opts);
    return solve_equilibrium(model, spec, br, opts);
}

}  // namespace rsmfg
