#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rsmfg/chain.hpp"

namespace rsmfg {

using StateFn = std::function<double(double x, int regime)>;
using ProfitFn = std::function<double(double x, double theta)>;
using ScalarFn = std::function<double(double)>;

/// Regime-switching controlled diffusion: drift b, volatility sigma, their
/// x-derivatives, the chain generator and the state interval. All regimes are
/// dissipative: b_x <= -dissipativity_c.
struct RegimeModel {
    int d = 0;
    StateFn drift;
    StateFn drift_x;
    StateFn vol;
    StateFn vol_x;
    Matrix rate_matrix;
    std::pair<double, double> state_interval{-std::numeric_limits<double>::infinity(),
                                             std::numeric_limits<double>::infinity()};
    double dissipativity_c = 0.0;

    /// Effective drift of the derivative-process dynamics: b + sigma*sigma_x.
    double hat_drift(double x, int i) const { return drift(x, i) + vol(x, i) * vol_x(x, i); }
};

/// Running profit and interaction data: profit pi(x, theta) with derivative
/// pi_x, action costs k1 > k2 > 0, the interaction maps F and f, and the
/// large-theta slope limit kappa(x) of pi_x.
struct ProfitSpec {
    ProfitFn profit;
    ProfitFn profit_x;
    double k1 = 1.0;
    double k2 = 0.5;
    ScalarFn F_map;
    ScalarFn f_map;
    ScalarFn kappa_limit;
    double growth_beta = 0.5;
    double theta_min = 0.05;
};

/// Parametric family with b(x,i) = -delta_i x, sigma(x,i) = sigma_i x on
/// (0, inf), profit x^beta * (theta^-(1+beta) + kappa_star), F(x) = x^(1/beta),
/// f(x) = x^beta.
struct BenchmarkInstance {
    double beta = 0.5;
    double kappa_star = 1.0;
    std::vector<double> delta;
    std::vector<double> sigma;
    Matrix rate_matrix;
    double k1 = 1.0;
    double k2 = 0.5;
    double theta_min = 0.05;

    RegimeModel make_model() const;
    ProfitSpec make_profit() const;
};

/// The canonical two-regime instance used as a default throughout the suite.
BenchmarkInstance default_benchmark();

/// pi(x, theta) with domain checks (x in the state interval closure,
/// theta >= theta_min). Throws DomainError otherwise.
double eval_profit(const RegimeModel& model, const ProfitSpec& spec, double x, double theta);

/// Threshold data for one (regime, theta) pair: the sign-change points of
/// pi_x + k1 b_x and pi_x + k2 b_x.
struct ThresholdRoots {
    int regime = 0;
    double theta = 0.0;
    double x_minus = 0.0;
    double x_plus = 0.0;
    bool sign_pattern_ok = false;
};

struct ValidationReport {
    std::vector<ThresholdRoots> roots;  // one entry per (regime, theta)
    bool dissipativity_ok = true;       // b_x <= -c on the sampled grid
    bool volatility_positive = true;
    bool profit_monotone_concave = true;
    bool profit_x_theta_decreasing = true;
    bool maps_increasing = true;         // F and f strictly increasing
    bool generator_ok = true;            // conservative irreducible generator
    bool column_sums_ok = true;          // sum_j q_ji <= 0 per column
    double rate_formula_gap = 0.0;       // sup |pQ=0 solution - rate proportions|
    std::vector<std::string> warnings;

    bool all_ok() const {
        return dissipativity_ok && volatility_positive && profit_monotone_concave &&
               profit_x_theta_decreasing && maps_increasing && generator_ok && column_sums_ok &&
               warnings.empty();
    }
};

/// Sampled-grid validation of the standing structural conditions plus the
/// threshold sign pattern. Non-structural failures are recorded as warnings;
/// only empty grids are fatal.
ValidationReport validate_assumptions(const RegimeModel& model, const ProfitSpec& spec,
                                      const std::vector<double>& x_grid,
                                      const std::vector<double>& theta_grid);

/// Root of g on [lo, hi] by bisection, assuming a sign change. Returns
/// nullopt if g has the same sign at both ends.
std::optional<double> bisect_root(const std::function<double(double)>& g, double lo, double hi,
                                  double tol = 1e-12, int max_iter = 200);

}  // namespace rsmfg
