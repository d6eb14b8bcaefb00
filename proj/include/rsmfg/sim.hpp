#pragma once

#include <cstdint>
#include <vector>

#include "rsmfg/model.hpp"

namespace rsmfg {

/// One simulated trajectory of the reflected pair (X, Y) with the cumulative
/// pushing processes and the noise that produced it.
struct PathBundle {
    std::vector<double> times;
    std::vector<double> x;
    std::vector<int> y;
    std::vector<double> xi_plus;   ///< cumulative up-push, nondecreasing from 0
    std::vector<double> xi_minus;  ///< cumulative down-push, nondecreasing from 0
    std::vector<double> dw;        ///< Brownian increments, one per step
    uint64_t seed = 0;
    double dt = 0.0;
};

/// Monte Carlo scalar with its standard error; confidence intervals are
/// mean +/- z * std_error.
struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long n_samples = 0;
    double horizon = 0.0;
};

/// Fixed driving noise for the Skorokhod constructions: Brownian increments
/// and the regime path on the discrete time grid.
struct NoisePath {
    double dt = 0.0;
    std::vector<double> dw;  ///< length n_steps
    std::vector<int> y;      ///< length n_steps + 1
};

/// Draws the noise exactly as simulate_reflected consumes it (one normal and
/// one chain uniform per step), so the same key reproduces the same (W, Y).
NoisePath make_noise(const RegimeModel& model, int i0, double horizon, double dt, uint64_t key);

/// Euler path of the regime-switching diffusion with post-step projection
/// onto [alpha_y, beta_y]; overshoot is credited to xi. Chain transitions are
/// sampled per step from exp(Q dt). Deterministic given the seed.
PathBundle simulate_reflected(const RegimeModel& model, const std::vector<double>& alpha,
                              const std::vector<double>& beta, double x0, int i0, double horizon,
                              double dt, uint64_t seed);

struct GammaResult {
    std::vector<double> path;
    std::vector<double> xi_plus;
    std::vector<double> xi_minus;
};

/// Discrete two-sided reflection map applied to an integrated raw path:
/// running max of clipped running infima against the regime-dependent
/// barriers. O(n) single pass.
GammaResult gamma_map(const std::vector<double>& raw_path, const std::vector<int>& regimes,
                      const std::vector<double>& alpha, const std::vector<double>& beta);

struct PicardResult {
    std::vector<double> path;
    std::vector<double> xi_plus;
    std::vector<double> xi_minus;
    std::vector<double> iterate_changes;  ///< sup-norm change per iteration
};

/// Fixed-point construction of the reflected path for a fixed noise:
/// integrate the coefficients along the previous iterate, reflect, repeat.
/// Changes are expected to decay geometrically; an error is raised if they
/// grow three times in a row.
PicardResult picard_skorokhod(const RegimeModel& model, const std::vector<double>& alpha,
                              const std::vector<double>& beta, double x0, int i0,
                              const NoisePath& noise, int n_iter, double tol = 0.0);

/// Long-run average payoff of the barrier policy:
/// time-average of pi(X, theta) dt - k1 dxi+ + k2 dxi- after burn-in,
/// averaged over independent path streams.
MCEstimate ergodic_payoff_estimate(const RegimeModel& model, const ProfitSpec& spec, double theta,
                                   const std::vector<double>& alpha,
                                   const std::vector<double>& beta, double horizon, double dt,
                                   long n_paths, uint64_t seed, double burn_in_fraction = 0.1,
                                   int n_threads = 0);

/// Value of the stopping game under hitting-time strategies at the candidate
/// barriers: simulate the derivative-process dynamics (drift b + sigma
/// sigma_x), accumulate the discount weight exp(int b_x), pay k1 at a lower
/// hit and k2 at an upper hit. Time is capped where the weight falls below
/// 1e-12 (guaranteed by b_x <= -c).
MCEstimate mc_dynkin_value(const RegimeModel& model, const ProfitSpec& spec, double theta,
                           const std::vector<double>& stop_alpha,
                           const std::vector<double>& stop_beta, double x0, int i0, long n_paths,
                           double dt, uint64_t seed, int n_threads = 0);

/// Occupation statistics of one long reflected path, for cross-checking the
/// stationary solver.
struct OccupationEstimate {
    std::vector<double> grid_x;
    std::vector<std::vector<double>> cdf;  ///< cdf[regime][node]
    std::vector<double> regime_fraction;
    double mean_regeneration_gap = 0.0;  ///< mean time between lower-barrier contacts
    double horizon = 0.0;
};

OccupationEstimate occupation_estimate(const RegimeModel& model, const std::vector<double>& alpha,
                                       const std::vector<double>& beta, double x0, int i0,
                                       double horizon, double dt, uint64_t seed,
                                       const std::vector<double>& grid_x,
                                       double burn_in_fraction = 0.1);

}  // namespace rsmfg
