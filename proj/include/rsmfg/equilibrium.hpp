#pragma once

#include <utility>
#include <vector>

#include "rsmfg/dynkin.hpp"
#include "rsmfg/stationary.hpp"

namespace rsmfg {

/// Shared discretization for every evaluation of the consistency map within
/// one run: the fixed point found is that of the discretized map.
struct PipelineGrids {
    Grid vi_grid;
    int mesh_n = 1201;
    VISolveOptions vi_opts;
};

/// One evaluation of the consistency map: solve the obstacle problem at
/// theta, reflect, solve the stationary law, integrate f, apply F.
/// Deterministic for fixed grids. Optionally returns the intermediates.
double T_map(const RegimeModel& model, const ProfitSpec& spec, double theta,
             const PipelineGrids& grids, DynkinSolution* sol_out = nullptr,
             StationaryCDF* law_out = nullptr);

/// Bracket for the fixed point: theta_lo from the large-theta limit game,
/// theta_hi from the chain-averaged f at the theta_lo band edges, plus the
/// compact strategy box spanned by those boundaries.
struct EquilibriumBracket {
    double theta_lo = 0.0;
    double theta_hi = 0.0;
    std::vector<double> aux_alpha;      ///< boundaries of the limit game
    std::vector<double> aux_beta;
    std::vector<double> beta_at_lo;     ///< upper boundaries at theta_lo
    std::pair<double, double> khat;     ///< [min_j aux_alpha_j, max_j beta_j(theta_lo)]
    PipelineGrids grids;                ///< unified grids for subsequent runs
};

EquilibriumBracket compute_bracket(const RegimeModel& model, const ProfitSpec& spec, int grid_n,
                                   int mesh_n, const VISolveOptions& vi_opts = {});

struct IterationRecord {
    double theta = 0.0;
    double t_theta = 0.0;
    double gap = 0.0;  ///< theta - T(theta)
};

struct EquilibriumResult {
    double theta_star = 0.0;
    std::pair<double, double> bracket;
    std::vector<IterationRecord> trace;
    DynkinSolution solution_at_star;
    StationaryCDF law_at_star;
    std::pair<double, double> khat;
    int bisection_steps = 0;
    bool used_damped_fallback = false;
    std::vector<std::string> warnings;
};

struct EquilibriumOptions {
    double tol = 1e-6;  ///< on |theta - T(theta)|
    int max_iter = 80;
    double damping = 0.5;   ///< fallback relaxation
    int damped_cap = 200;   ///< fallback iteration budget
};

/// Bisection on theta - T(theta) over the bracket (the gap is nondecreasing
/// when the map is monotone); a damped fixed-point iteration takes over if
/// bisection exhausts its budget with a non-monotone gap.
EquilibriumResult solve_equilibrium(const RegimeModel& model, const ProfitSpec& spec,
                                    const EquilibriumBracket& bracket,
                                    const EquilibriumOptions& opts = {});

/// Convenience wrapper: bracket construction followed by the solve.
EquilibriumResult solve_equilibrium(const RegimeModel& model, const ProfitSpec& spec, int grid_n,
                                    int mesh_n, const VISolveOptions& vi_opts = {},
                                    const EquilibriumOptions& opts = {});

}  // namespace rsmfg
