#include "rsmfg/model.hpp"

#include <algorithm>
#include <cmath>

#include "rsmfg/errors.hpp"

namespace rsmfg {

RegimeModel BenchmarkInstance::make_model() const {
    const int d = static_cast<int>(delta.size());
    if (d < 1 || sigma.size() != delta.size())
        throw DomainError("benchmark: delta and sigma must be nonempty and equally sized");
    for (double v : delta)
        if (v <= 0.0) throw DomainError("benchmark: delta must be positive");
    for (double v : sigma)
        if (v <= 0.0) throw DomainError("benchmark: sigma must be positive");

    RegimeModel m;
    m.d = d;
    const std::vector<double> del = delta;
    const std::vector<double> sig = sigma;
    m.drift = [del](double x, int i) { return -del[i] * x; };
    m.drift_x = [del](double, int i) { return -del[i]; };
    m.vol = [sig](double x, int i) { return sig[i] * x; };
    m.vol_x = [sig](double, int i) { return sig[i]; };
    m.rate_matrix = rate_matrix;
    m.state_interval = {0.0, std::numeric_limits<double>::infinity()};
    m.dissipativity_c = *std::min_element(delta.begin(), delta.end());
    return m;
}

ProfitSpec BenchmarkInstance::make_profit() const {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("benchmark: beta must lie in (0,1)");
    if (!(0.0 < k2 && k2 < k1)) throw DomainError("benchmark: need 0 < k2 < k1");

    ProfitSpec s;
    const double b = beta, ks = kappa_star;
    s.profit = [b, ks](double x, double theta) {
        return std::pow(x, b) * (std::pow(theta, -(1.0 + b)) + ks);
    };
    s.profit_x = [b, ks](double x, double theta) {
        return b * std::pow(x, b - 1.0) * (std::pow(theta, -(1.0 + b)) + ks);
    };
    s.k1 = k1;
    s.k2 = k2;
    s.F_map = [b](double x) { return std::pow(x, 1.0 / b); };
    s.f_map = [b](double x) { return std::pow(x, b); };
    s.kappa_limit = [b, ks](double x) { return ks * b * std::pow(x, b - 1.0); };
    s.growth_beta = beta;
    s.theta_min = theta_min;
    return s;
}

BenchmarkInstance default_benchmark() {
    BenchmarkInstance inst;
    inst.beta = 0.5;
    inst.kappa_star = 1.0;
    inst.delta = {0.5, 1.0};
    inst.sigma = {0.2, 0.3};
    inst.rate_matrix = Matrix(2, 2);
    inst.rate_matrix(0, 0) = -1.0;
    inst.rate_matrix(0, 1) = 1.0;
    inst.rate_matrix(1, 0) = 1.0;
    inst.rate_matrix(1, 1) = -1.0;
    inst.k1 = 1.0;
    inst.k2 = 0.5;
    inst.theta_min = 0.05;
    return inst;
}

double eval_profit(const RegimeModel& model, const ProfitSpec& spec, double x, double theta) {
    if (theta < spec.theta_min) throw DomainError("theta below admissible cutoff");
    if (x < model.state_interval.first || x > model.state_interval.second)
        throw DomainError("state outside the model interval");
    return spec.profit(x, theta);
}

std::optional<double> bisect_root(const std::function<double(double)>& g, double lo, double hi,
                                  double tol, int max_iter) {
    double flo = g(lo), fhi = g(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) return std::nullopt;
    for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = g(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

namespace {

// Locates the sign change of psi on the sampled grid; refines by bisection.
// Returns nullopt and counts crossings when the pattern is not +...+-...-.
std::optional<double> threshold_root(const std::function<double(double)>& psi,
                                     const std::vector<double>& grid, int* n_crossings) {
    int crossings = 0;
    std::optional<double> root;
    for (size_t k = 0; k + 1 < grid.size(); ++k) {
        const double a = psi(grid[k]), b = psi(grid[k + 1]);
        if ((a > 0.0 && b <= 0.0) || (a >= 0.0 && b < 0.0) || (a < 0.0 && b >= 0.0) ||
            (a <= 0.0 && b > 0.0)) {
            ++crossings;
            if (!root) root = bisect_root(psi, grid[k], grid[k + 1]);
        }
    }
    if (n_crossings) *n_crossings = crossings;
    const bool downward = psi(grid.front()) > 0.0 && psi(grid.back()) < 0.0;
    if (crossings == 1 && downward) return root;
    return std::nullopt;
}

}  // namespace

ValidationReport validate_assumptions(const RegimeModel& model, const ProfitSpec& spec,
                                      const std::vector<double>& x_grid,
                                      const std::vector<double>& theta_grid) {
    if (x_grid.empty() || theta_grid.empty())
        throw DomainError("validate_assumptions: empty sample grid");

    ValidationReport rep;
    const int d = model.d;

    std::string why;
    rep.generator_ok = is_valid_generator(model.rate_matrix, &why) && is_irreducible(model.rate_matrix);
    if (!rep.generator_ok) rep.warnings.push_back("generator: " + why);

    if (rep.generator_ok && d >= 2) {
        for (int j = 0; j < d; ++j) {
            double col = 0.0;
            for (int i = 0; i < d; ++i) col += model.rate_matrix(i, j);
            if (col > 1e-12) rep.column_sums_ok = false;
        }
        if (!rep.column_sums_ok)
            rep.warnings.push_back("generator column sums positive: equilibrium comparison bound unavailable");

        const auto p = chain_stationary(model.rate_matrix);
        const auto k = chain_rate_proportions(model.rate_matrix);
        for (int i = 0; i < d; ++i)
            rep.rate_formula_gap = std::max(rep.rate_formula_gap, std::abs(p[i] - k[i]));
    }

    for (int i = 0; i < d; ++i) {
        for (double x : x_grid) {
            if (model.vol(x, i) <= 0.0) rep.volatility_positive = false;
            if (model.drift_x(x, i) > -model.dissipativity_c + 1e-12) rep.dissipativity_ok = false;
        }
    }
    if (!rep.volatility_positive) rep.warnings.push_back("volatility not positive on sampled grid");
    if (!rep.dissipativity_ok) rep.warnings.push_back("drift slope exceeds -c on sampled grid");

    for (double theta : theta_grid) {
        for (size_t k = 0; k + 1 < x_grid.size(); ++k) {
            const double px0 = spec.profit_x(x_grid[k], theta);
            const double px1 = spec.profit_x(x_grid[k + 1], theta);
            if (px0 < -1e-12 || px1 < -1e-12) rep.profit_monotone_concave = false;  // nondecreasing
            if (px1 > px0 + 1e-10) rep.profit_monotone_concave = false;             // concave
        }
    }
    for (double x : x_grid) {
        for (size_t k = 0; k + 1 < theta_grid.size(); ++k) {
            if (spec.profit_x(x, theta_grid[k + 1]) >= spec.profit_x(x, theta_grid[k]) - 1e-14)
                rep.profit_x_theta_decreasing = false;
        }
    }
    if (!rep.profit_monotone_concave)
        rep.warnings.push_back("profit not nondecreasing/concave on sampled grid");
    if (!rep.profit_x_theta_decreasing)
        rep.warnings.push_back("profit_x not strictly decreasing in theta on sampled grid");

    for (size_t k = 0; k + 1 < x_grid.size(); ++k) {
        if (spec.f_map(x_grid[k + 1]) <= spec.f_map(x_grid[k])) rep.maps_increasing = false;
        const double y0 = spec.f_map(x_grid[k]), y1 = spec.f_map(x_grid[k + 1]);
        if (spec.F_map(y1) <= spec.F_map(y0)) rep.maps_increasing = false;
    }
    if (!rep.maps_increasing) rep.warnings.push_back("F or f not strictly increasing on sampled grid");

    for (double theta : theta_grid) {
        for (int i = 0; i < d; ++i) {
            ThresholdRoots tr;
            tr.regime = i;
            tr.theta = theta;
            auto psi1 = [&](double x) { return spec.profit_x(x, theta) + spec.k1 * model.drift_x(x, i); };
            auto psi2 = [&](double x) { return spec.profit_x(x, theta) + spec.k2 * model.drift_x(x, i); };
            int c1 = 0, c2 = 0;
            const auto r1 = threshold_root(psi1, x_grid, &c1);
            const auto r2 = threshold_root(psi2, x_grid, &c2);
            tr.sign_pattern_ok = r1.has_value() && r2.has_value() && *r1 < *r2;
            if (tr.sign_pattern_ok) {
                tr.x_minus = *r1;
                tr.x_plus = *r2;
            } else {
                rep.warnings.push_back("threshold sign pattern violated at regime " +
                                       std::to_string(i) + ", theta " + std::to_string(theta));
            }
            rep.roots.push_back(tr);
        }
    }
    return rep;
}

}  // namespace rsmfg
