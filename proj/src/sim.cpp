#include "rsmfg/sim.hpp"

#include <algorithm>
#include <cmath>

#include "rsmfg/chain.hpp"
#include "rsmfg/errors.hpp"
#include "rsmfg/parallel.hpp"
#include "rsmfg/rng.hpp"

namespace rsmfg {

namespace {

// Per-step transition probabilities exp(Q dt), rows stored cumulatively.
struct ChainSampler {
    int d = 1;
    std::vector<double> cum;

    ChainSampler(const Matrix& q, double dt) : d(q.rows() > 0 ? q.rows() : 1) {
        if (d == 1) return;
        Matrix scaled(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) scaled(i, j) = q(i, j) * dt;
        const Matrix p = expm(scaled);
        cum.resize(static_cast<size_t>(d) * d);
        for (int i = 0; i < d; ++i) {
            double acc = 0.0;
            for (int j = 0; j < d; ++j) {
                acc += std::max(p(i, j), 0.0);
                cum[i * d + j] = acc;
            }
            cum[i * d + d - 1] = 1.0;  // absorb rounding
        }
    }

    int step(int y, double u) const {
        if (d == 1) return 0;
        const double* row = cum.data() + static_cast<size_t>(y) * d;
        for (int j = 0; j < d - 1; ++j)
            if (u <= row[j]) return j;
        return d - 1;
    }
};

void check_sim_args(double horizon, double dt) {
    if (dt <= 0.0) throw DomainError("time step must be positive");
    if (horizon <= 0.0) throw DomainError("horizon must be positive");
}

long step_count(double horizon, double dt) {
    const long n = std::lround(horizon / dt);
    return std::max<long>(n, 1);
}

// Shared projection stepper. The observer sees every recorded point:
// obs(step_index, x, y, dxi_plus, dxi_minus, dw_step).
template <class Observer>
void run_projected(const RegimeModel& model, const std::vector<double>& alpha,
                   const std::vector<double>& beta, double x0, int i0, long n_steps, double dt,
                   CounterRng& rng, const ChainSampler& chain, Observer&& obs) {
    const double sqdt = std::sqrt(dt);
    int y = i0;
    double x = x0;
    // initial projection: a start outside the band is pushed in at time zero
    {
        const double up = std::max(0.0, alpha[y] - x);
        const double dn = std::max(0.0, x - beta[y]);
        x += up - dn;
        obs(0L, x, y, up, dn, 0.0);
    }
    for (long k = 1; k <= n_steps; ++k) {
        const double z = rng.next_normal();
        const double u = rng.next_uniform();
        const double dw = sqdt * z;
        const double x_pre = x + model.drift(x, y) * dt + model.vol(x, y) * dw;
        y = chain.step(y, u);
        const double up = std::max(0.0, alpha[y] - x_pre);
        const double dn = std::max(0.0, x_pre - beta[y]);
        x = x_pre + up - dn;
        obs(k, x, y, up, dn, dw);
    }
}

MCEstimate aggregate(const std::vector<double>& per_path, double horizon) {
    MCEstimate est;
    est.n_samples = static_cast<long>(per_path.size());
    est.horizon = horizon;
    est.mean = pairwise_sum(per_path) / est.n_samples;
    if (est.n_samples > 1) {
        std::vector<double> sq(per_path.size());
        for (size_t i = 0; i < per_path.size(); ++i) {
            const double d = per_path[i] - est.mean;
            sq[i] = d * d;
        }
        est.std_error = std::sqrt(pairwise_sum(sq) / (est.n_samples * (est.n_samples - 1.0)));
    }
    return est;
}

}  // namespace

NoisePath make_noise(const RegimeModel& model, int i0, double horizon, double dt, uint64_t key) {
    check_sim_args(horizon, dt);
    const long n = step_count(horizon, dt);
    const ChainSampler chain(model.rate_matrix, dt);
    CounterRng rng(key);
    NoisePath out;
    out.dt = dt;
    out.dw.resize(n);
    out.y.resize(n + 1);
    out.y[0] = i0;
    const double sqdt = std::sqrt(dt);
    for (long k = 0; k < n; ++k) {
        out.dw[k] = sqdt * rng.next_normal();
        out.y[k + 1] = chain.step(out.y[k], rng.next_uniform());
    }
    return out;
}

PathBundle simulate_reflected(const RegimeModel& model, const std::vector<double>& alpha,
                              const std::vector<double>& beta, double x0, int i0, double horizon,
                              double dt, uint64_t seed) {
    check_sim_args(horizon, dt);
    const long n = step_count(horizon, dt);
    const ChainSampler chain(model.rate_matrix, dt);
    CounterRng rng(CounterRng::derive_key(seed, 0));

    PathBundle out;
    out.seed = seed;
    out.dt = dt;
    out.times.resize(n + 1);
    out.x.resize(n + 1);
    out.y.resize(n + 1);
    out.xi_plus.resize(n + 1);
    out.xi_minus.resize(n + 1);
    out.dw.resize(n);

    double xp = 0.0, xm = 0.0;
    run_projected(model, alpha, beta, x0, i0, n, dt, rng, chain,
                  [&](long k, double x, int y, double up, double dn, double dw) {
                      xp += up;
                      xm += dn;
                      out.times[k] = k * dt;
                      out.x[k] = x;
                      out.y[k] = y;
                      out.xi_plus[k] = xp;
                      out.xi_minus[k] = xm;
                      if (k > 0) out.dw[k - 1] = dw;
                  });
    return out;
}

GammaResult gamma_map(const std::vector<double>& raw_path, const std::vector<int>& regimes,
                      const std::vector<double>& alpha, const std::vector<double>& beta) {
    if (raw_path.size() != regimes.size() || raw_path.empty())
        throw DomainError("gamma_map: path and regime sequences must match");
    const size_t n = raw_path.size();
    GammaResult out;
    out.path.resize(n);
    out.xi_plus.resize(n);
    out.xi_minus.resize(n);

    // Xi_t = max{ (x0 - beta_{i0})^+ ^ min_{s<=t} B_s,
    //             max_{s<=t} [ A_s ^ min_{u in [s,t]} B_u ] },
    // with A_s = I_s - beta_{Y_s}, B_s = I_s - alpha_{Y_s}. Both inner terms
    // satisfy one-step recursions, so a single pass suffices.
    const double head = std::max(0.0, raw_path[0] - beta[regimes[0]]);
    double run_min_b = 0.0;  // min_{s<=t} B_s
    double clipped_max = 0.0;
    double xi_prev = 0.0, xp = 0.0, xm = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const double a = raw_path[k] - beta[regimes[k]];
        const double b = raw_path[k] - alpha[regimes[k]];
        if (k == 0) {
            run_min_b = b;
            clipped_max = std::min(a, b);
        } else {
            run_min_b = std::min(run_min_b, b);
            clipped_max = std::min(std::max(clipped_max, a), b);
        }
        const double xi = std::max(std::min(head, run_min_b), clipped_max);
        out.path[k] = raw_path[k] - xi;
        const double d = xi - xi_prev;
        if (k == 0) {
            xp = std::max(0.0, -xi);
            xm = std::max(0.0, xi);
        } else if (d > 0.0) {
            xm += d;
        } else {
            xp += -d;
        }
        out.xi_plus[k] = xp;
        out.xi_minus[k] = xm;
        xi_prev = xi;
    }
    return out;
}

PicardResult picard_skorokhod(const RegimeModel& model, const std::vector<double>& alpha,
                              const std::vector<double>& beta, double x0, int i0,
                              const NoisePath& noise, int n_iter, double tol) {
    if (n_iter < 1) throw DomainError("picard_skorokhod: need at least one iteration");
    if (noise.y.empty() || noise.y.size() != noise.dw.size() + 1)
        throw DomainError("picard_skorokhod: inconsistent noise path");
    if (noise.y[0] != i0) throw DomainError("picard_skorokhod: noise starts in a different regime");
    const size_t n = noise.dw.size();
    const double dt = noise.dt;

    std::vector<double> prev(n + 1, x0);
    std::vector<double> integrated(n + 1);
    PicardResult out;
    GammaResult g;
    int growth_streak = 0;
    double last_change = std::numeric_limits<double>::infinity();

    for (int it = 0; it < n_iter; ++it) {
        integrated[0] = x0;
        for (size_t k = 0; k < n; ++k) {
            const int y = noise.y[k];
            integrated[k + 1] = integrated[k] + model.drift(prev[k], y) * dt +
                                model.vol(prev[k], y) * noise.dw[k];
        }
        g = gamma_map(integrated, noise.y, alpha, beta);
        double change = 0.0;
        for (size_t k = 0; k <= n; ++k) change = std::max(change, std::abs(g.path[k] - prev[k]));
        out.iterate_changes.push_back(change);
        prev = g.path;
        if (change > last_change) {
            if (++growth_streak >= 3)
                throw SolverError("picard iteration not contracting", change);
        } else {
            growth_streak = 0;
        }
        last_change = change;
        if (tol > 0.0 && change < tol) break;
    }
    out.path = std::move(g.path);
    out.xi_plus = std::move(g.xi_plus);
    out.xi_minus = std::move(g.xi_minus);
    return out;
}

MCEstimate ergodic_payoff_estimate(const RegimeModel& model, const ProfitSpec& spec, double theta,
                                   const std::vector<double>& alpha,
                                   const std::vector<double>& beta, double horizon, double dt,
                                   long n_paths, uint64_t seed, double burn_in_fraction,
                                   int n_threads) {
    check_sim_args(horizon, dt);
    if (n_paths < 1) throw DomainError("need at least one path");
    const long n = step_count(horizon, dt);
    const long k_burn = static_cast<long>(burn_in_fraction * n);
    const double t_eff = (n - k_burn) * dt;
    const ChainSampler chain(model.rate_matrix, dt);

    std::vector<double> per_path(n_paths);
    parallel_for(n_paths, n_threads, [&](long p) {
        CounterRng rng(CounterRng::derive_key(seed, static_cast<uint64_t>(p)));
        double profit_sum = 0.0, cost = 0.0;
        double x_prev = 0.0;
        run_projected(model, alpha, beta, 0.5 * (alpha[0] + beta[0]), 0, n, dt, rng, chain,
                      [&](long k, double x, int, double up, double dn, double) {
                          if (k > k_burn) {
                              profit_sum += spec.profit(x_prev, theta) * dt;
                              cost += spec.k1 * up - spec.k2 * dn;
                          }
                          x_prev = x;
                      });
        per_path[p] = (profit_sum - cost) / t_eff;
    });
    return aggregate(per_path, horizon);
}

MCEstimate mc_dynkin_value(const RegimeModel& model, const ProfitSpec& spec, double theta,
                           const std::vector<double>& stop_alpha,
                           const std::vector<double>& stop_beta, double x0, int i0, long n_paths,
                           double dt, uint64_t seed, int n_threads) {
    if (dt <= 0.0) throw DomainError("time step must be positive");
    if (n_paths < 1) throw DomainError("need at least one path");
    if (model.dissipativity_c <= 0.0)
        throw DomainError("mc_dynkin_value requires a positive dissipativity constant");
    for (size_t i = 0; i < stop_alpha.size(); ++i)
        if (!(stop_alpha[i] < stop_beta[i]))
            throw DomainError("candidate stopping barriers must satisfy a < b");

    const double t_max = std::log(1e12) / model.dissipativity_c;
    const long n_cap = step_count(t_max, dt);
    const ChainSampler chain(model.rate_matrix, dt);
    const double sqdt = std::sqrt(dt);

    std::vector<double> per_path(n_paths);
    parallel_for(n_paths, n_threads, [&](long p) {
        CounterRng rng(CounterRng::derive_key(seed, static_cast<uint64_t>(p), 1));
        double x = x0, w = 1.0, value = 0.0;
        int y = i0;
        for (long k = 0; k < n_cap; ++k) {
            if (x <= stop_alpha[y]) {
                value += spec.k1 * w;
                break;
            }
            if (x >= stop_beta[y]) {
                value += spec.k2 * w;
                break;
            }
            value += w * spec.profit_x(x, theta) * dt;
            w *= std::exp(model.drift_x(x, y) * dt);
            const double z = rng.next_normal();
            const double u = rng.next_uniform();
            x += model.hat_drift(x, y) * dt + model.vol(x, y) * sqdt * z;
            y = chain.step(y, u);
        }
        per_path[p] = value;
    });
    return aggregate(per_path, t_max);
}

OccupationEstimate occupation_estimate(const RegimeModel& model, const std::vector<double>& alpha,
                                       const std::vector<double>& beta, double x0, int i0,
                                       double horizon, double dt, uint64_t seed,
                                       const std::vector<double>& grid_x,
                                       double burn_in_fraction) {
    check_sim_args(horizon, dt);
    if (grid_x.size() < 2) throw DomainError("occupation grid too small");
    const long n = step_count(horizon, dt);
    const long k_burn = static_cast<long>(burn_in_fraction * n);
    const ChainSampler chain(model.rate_matrix, dt);
    CounterRng rng(CounterRng::derive_key(seed, 0, 2));

    const int d = model.d;
    const size_t m = grid_x.size();
    std::vector<std::vector<long>> counts(d, std::vector<long>(m + 1, 0));
    std::vector<long> regime_counts(d, 0);
    long n_samples = 0;
    long n_episodes = 0;
    // a lower-barrier contact counts as a fresh regeneration only after the
    // path has climbed a tenth of the band width away from the barrier
    bool armed = true;

    run_projected(model, alpha, beta, x0, i0, n, dt, rng, chain,
                  [&](long k, double x, int y, double up, double, double) {
                      if (k <= k_burn) return;
                      // smallest node index with grid_x[idx] >= x (m if none)
                      const size_t idx =
                          std::lower_bound(grid_x.begin(), grid_x.end(), x) - grid_x.begin();
                      ++counts[y][idx];
                      ++regime_counts[y];
                      ++n_samples;
                      if (up > 0.0 && armed) {
                          ++n_episodes;
                          armed = false;
                      } else if (!armed && x > alpha[y] + 0.1 * (beta[y] - alpha[y])) {
                          armed = true;
                      }
                  });

    OccupationEstimate out;
    out.grid_x = grid_x;
    out.horizon = horizon;
    out.cdf.assign(d, std::vector<double>(m, 0.0));
    for (int i = 0; i < d; ++i) {
        long acc = 0;
        for (size_t kx = 0; kx < m; ++kx) {
            acc += counts[i][kx];
            out.cdf[i][kx] = static_cast<double>(acc) / n_samples;
        }
    }
    out.regime_fraction.resize(d);
    for (int i = 0; i < d; ++i)
        out.regime_fraction[i] = static_cast<double>(regime_counts[i]) / n_samples;
    out.mean_regeneration_gap =
        n_episodes > 0 ? (n_samples * dt) / n_episodes : std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace rsmfg
