#pragma once

#include <vector>

#include "rsmfg/grid.hpp"
#include "rsmfg/model.hpp"

namespace rsmfg {

/// Relaxation backend for the double-obstacle solve. Both act on the same
/// discrete system; line relaxation solves each regime's tridiagonal
/// complementarity problem exactly per sweep (active-set inner loop), so its
/// sweep count is governed by the chain coupling instead of the mesh.
/// Pointwise projected SOR is kept for cross-checking on coarse grids: its
/// asymptotic rate degrades like h^2 / sigma^2 and large-volatility regions
/// stall below practical tolerances.
enum class VIBackend { line_lcp, pointwise_psor };

/// Options for the projected-relaxation double-obstacle solve.
struct VISolveOptions {
    double tol = 1e-9;        ///< sup-norm of the projected fixed-point residual
    long max_sweeps = 400000;  ///< total sweep budget across all cascade levels
    double omega = 1.5;        ///< pointwise backend relaxation, clipped to [1, 1.8]
    int cascade_levels = -1;   ///< coarse-to-fine warm start depth; -1 = automatic
    bool check_truncation = true;  ///< reject contact sets touching the grid ends
    VIBackend backend = VIBackend::line_lcp;
};

/// Solution of the double-obstacle problem for one value of the interaction
/// parameter: the game value on the grid, the contact boundaries, the
/// per-regime ergodic constants and their chain average.
struct DynkinSolution {
    Grid grid;
    std::vector<std::vector<double>> v;  ///< v[regime][node], k2 <= v <= k1
    std::vector<double> alpha;           ///< upper-contact boundary per regime
    std::vector<double> beta;            ///< lower-contact boundary per regime
    std::vector<double> lam;             ///< ergodic constant per regime
    double lam_bar = 0.0;                ///< stationary-chain average of lam
    std::vector<double> K;               ///< K_i = -integral of v over (alpha_i, beta_i)
    double residual = 0.0;               ///< max pointwise obstacle-equation residual
    double theta = 0.0;
    long sweeps = 0;
};

/// Solves the coupled double-obstacle problem
///   max{ k2 - v, min{ k1 - v, A v + pi_x } } = 0,
/// where A is the upwinded discretization of
///   (1/2) sigma^2 v_xx + (b + sigma sigma_x) v_x + b_x v + Q-coupling,
/// with v = k1 at x_lo and v = k2 at x_hi. Boundaries and ergodic constants
/// are extracted from the converged value.
DynkinSolution solve_vi(const RegimeModel& model, const ProfitSpec& spec, double theta,
                        const Grid& grid, const VISolveOptions& opts = {});

/// Same problem with the running term pi_x(x, theta) replaced by its
/// large-theta limit kappa(x). Used to seed the equilibrium bracket.
DynkinSolution solve_auxiliary_vi(const RegimeModel& model, const ProfitSpec& spec,
                                  const Grid& grid, const VISolveOptions& opts = {});

/// Contact boundaries from an obstacle-bounded value: per regime, alpha is the
/// interpolated crossing of k1 - tol (innermost contact with the upper
/// obstacle), beta the crossing of k2 + tol. Throws GridError when a contact
/// set is empty or touches the truncation.
void extract_boundaries(const std::vector<std::vector<double>>& v, const Grid& grid, double k1,
                        double k2, double tol, std::vector<double>& alpha,
                        std::vector<double>& beta, bool check_truncation = true);

/// Ergodic constants from a converged solution:
///   lam_i = sum_{j != i} q_ij ( int_{alpha_j}^{alpha_i} v(y,j) dy + K_i - K_j )
///           + b(alpha_i, i) k1 + pi(alpha_i, theta),
/// with K_i = -int_{alpha_i}^{beta_i} v(y,i) dy by trapezoid quadrature.
std::vector<double> lambda_per_regime(const DynkinSolution& sol, const RegimeModel& model,
                                      const ProfitSpec& spec, double theta,
                                      std::vector<double>* K_out = nullptr);

/// lam per regime plus the stationary-chain average.
void compute_lambda(DynkinSolution& sol, const RegimeModel& model, const ProfitSpec& spec,
                    double theta);

/// Signed integral of the piecewise-linear interpolant of a grid function
/// between arbitrary points a and b inside the grid.
double integrate_linear(const std::vector<double>& values, const Grid& grid, double a, double b);

/// Node-by-node classification of a converged solution against the discrete
/// obstacle system. Relative residuals are measured against the local
/// equation scale (diagonal coefficient times k1).
struct ComplementarityReport {
    long n_upper = 0;     ///< nodes clamped at k1
    long n_lower = 0;     ///< nodes clamped at k2
    long n_equation = 0;  ///< nodes where the interior equation holds
    double max_equation_residual = 0.0;  ///< relative |A v + r| over equation nodes
    double max_upper_violation = 0.0;    ///< relative (A v + r)^- over k1 nodes
    double max_lower_violation = 0.0;    ///< relative (A v + r)^+ over k2 nodes
    double obstacle_tol = 0.0;           ///< v-distance used to detect contact
};

ComplementarityReport complementarity_report(const DynkinSolution& sol, const RegimeModel& model,
                                             const ProfitSpec& spec, double obstacle_tol = 1e-7);

/// One-sided finite-difference slopes of v across the contact points; both
/// vanish like O(h) under grid refinement.
struct SmoothFitSlopes {
    std::vector<double> at_alpha;
    std::vector<double> at_beta;
};

SmoothFitSlopes smooth_fit_slopes(const DynkinSolution& sol);

/// Truncation window [lo, hi] covering the threshold roots of all regimes
/// with a relative margin, clamped inside the state interval.
Grid auto_grid(const RegimeModel& model, const ProfitSpec& spec, double theta, int n,
               double margin = 0.5);

/// Same window construction with the large-theta slope limit kappa in place
/// of pi_x; used before the auxiliary solve.
Grid auto_grid_aux(const RegimeModel& model, const ProfitSpec& spec, int n, double margin = 0.5);

/// solve_vi on an automatically chosen window, widening the truncation and
/// retrying when a contact set touches a grid edge. The contact band can
/// extend well beyond the threshold roots, so a fixed margin cannot be
/// guaranteed in advance.
DynkinSolution solve_vi_auto(const RegimeModel& model, const ProfitSpec& spec, double theta, int n,
                             const VISolveOptions& opts = {}, double margin = 0.5,
                             int max_widenings = 8);

DynkinSolution solve_auxiliary_vi_auto(const RegimeModel& model, const ProfitSpec& spec, int n,
                                       const VISolveOptions& opts = {}, double margin = 0.5,
                                       int max_widenings = 8);

}  // namespace rsmfg
