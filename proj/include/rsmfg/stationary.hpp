#pragma once

#include <vector>

#include "rsmfg/grid.hpp"
#include "rsmfg/model.hpp"
#include "rsmfg/sim.hpp"

namespace rsmfg {

/// Per-regime cumulative distribution of the reflected pair on a common
/// grid spanning [min_i alpha_i, max_i beta_i]. Extended by 0 left of
/// alpha_i and by the chain marginal p(i) right of beta_i.
struct StationaryCDF {
    Grid grid;
    std::vector<std::vector<double>> mu;  ///< mu[regime][node], nondecreasing
    std::vector<double> p;                ///< chain marginals
    std::vector<double> alpha;            ///< exact band edges (cut cells at the ends)
    std::vector<double> beta;
    double snap_error = 0.0;  ///< retained diagnostic; zero for cut-cell solves
    double residual = 0.0;    ///< max relative interior equation residual
};

/// Direct solve of the weakly-coupled stationary boundary-value system
///   (1/2) sigma^2 mu_xx - (b - sigma sigma_x) mu_x + sum_j q_ji mu(clamp_j(x), j) = 0
/// on each band (alpha_i, beta_i), with mu(alpha_i, i) = 0 and
/// mu(beta_i, i) = p(i). Coupling values outside regime j's band enter as the
/// constants 0 or p(j). One global block-tridiagonal system, no iteration;
/// the cells adjacent to each band edge are cut so the Dirichlet data sits at
/// the exact boundary abscissa.
StationaryCDF solve_stationary(const RegimeModel& model, const std::vector<double>& alpha,
                               const std::vector<double>& beta, int mesh_n,
                               double monotonicity_tol = 1e-6);

/// Riemann-Stieltjes integral of f against the stationary law:
/// sum_i sum_k f(midpoint_k) (mu(x_{k+1}, i) - mu(x_k, i)). Negative
/// increments from discretization noise are clamped to zero; the clamped
/// mass is reported through the optional out-parameter.
double interaction_moment(const StationaryCDF& law, const ScalarFn& f_map,
                          double* clamped_mass = nullptr);

/// Empirical occupation check of the solver output against one long
/// reflected simulation.
struct StationaryCheck {
    OccupationEstimate empirical;
    double sup_distance = 0.0;  ///< max over nodes and regimes vs the solver CDF
};

StationaryCheck simulate_stationary_check(const RegimeModel& model, const StationaryCDF& law,
                                          double horizon, double dt, uint64_t seed);

}  // namespace rsmfg
