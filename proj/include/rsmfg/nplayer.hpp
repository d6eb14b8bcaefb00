#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rsmfg/model.hpp"
#include "rsmfg/sim.hpp"

namespace rsmfg {

/// Barrier strategy: one (alpha, beta) pair per regime.
struct BarrierPolicy {
    std::vector<double> alpha;
    std::vector<double> beta;

    bool inside_box(const std::pair<double, double>& box) const {
        for (size_t i = 0; i < alpha.size(); ++i) {
            if (alpha[i] < box.first || beta[i] > box.second) return false;
            if (!(alpha[i] < beta[i])) return false;
        }
        return true;
    }
};

/// Configuration of one symmetric population experiment: everyone plays the
/// equilibrium barriers; a tagged player may deviate inside the strategy box.
struct PopulationRun {
    int n_players = 2;
    BarrierPolicy equilibrium;
    std::pair<double, double> khat;  ///< compact strategy box
    double horizon = 2000.0;
    double dt = 1e-3;
    int n_rep = 64;
    uint64_t seed = 0;
    double burn_in_fraction = 0.1;
    int n_threads = 0;
};

/// Long-run payoff of the tagged player when its opponents hold the
/// equilibrium barriers. Per repetition: independent noise per player, the
/// interaction term is F of the opponents' f-average, payoff is the
/// time-average of pi minus the k1/k2-weighted own controls after burn-in.
/// Repetition r and player l always consume the stream keyed by
/// (seed, r, l), so runs with different deviations share their noise.
MCEstimate estimate_player_payoff(const RegimeModel& model, const ProfitSpec& spec,
                                  const PopulationRun& run, const BarrierPolicy& deviation,
                                  std::vector<double>* per_rep = nullptr);

struct DeviationRow {
    BarrierPolicy policy;
    double payoff = 0.0;
    double payoff_se = 0.0;
    double gain = 0.0;     ///< payoff - equilibrium payoff, common random numbers
    double gain_se = 0.0;  ///< standard error of the paired difference
};

struct EpsilonEstimate {
    double epsilon_hat = 0.0;  ///< max(0, best gain over the deviation grid)
    double raw_best_gain = 0.0;
    double best_gain_se = 0.0;
    BarrierPolicy best_deviation;
    MCEstimate equilibrium_payoff;
    std::vector<DeviationRow> table;
};

/// Best-deviation gain over a finite grid of barrier policies, evaluated
/// with common random numbers against the equilibrium run. A lower bound on
/// the true best-deviation gain (the grid is finite).
EpsilonEstimate estimate_epsilon(const RegimeModel& model, const ProfitSpec& spec,
                                 const PopulationRun& run,
                                 const std::vector<BarrierPolicy>& deviation_grid);

/// Tensor perturbations of the equilibrium barriers: all alphas shifted by
/// one offset, all betas by another, offsets in {-2,-1,0,1,2} * step,
/// clipped to the strategy box and to alpha < beta feasibility.
std::vector<BarrierPolicy> deviation_grid(const BarrierPolicy& equilibrium,
                                          const std::pair<double, double>& khat, double step,
                                          int half_width = 2);

struct EpsilonCurveRow {
    int n_players = 0;
    double epsilon_hat = 0.0;
    double raw_best_gain = 0.0;
    double best_gain_se = 0.0;
    double equilibrium_payoff = 0.0;
    long n_deviations = 0;
};

struct EpsilonCurve {
    std::vector<EpsilonCurveRow> rows;
    std::vector<EpsilonEstimate> details;  ///< per-deviation tables, one per row
    bool budget_exhausted = false;
};

/// epsilon estimates across population sizes with shared seeds. Stops early
/// (flagging the table) if the wall-clock budget is exceeded.
EpsilonCurve epsilon_curve(const RegimeModel& model, const ProfitSpec& spec,
                           const BarrierPolicy& equilibrium, const std::pair<double, double>& khat,
                           const std::vector<int>& n_list, double deviation_step,
                           const PopulationRun& base, double budget_seconds = 0.0);

}  // namespace rsmfg
