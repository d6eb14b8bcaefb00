#include "rsmfg/nplayer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "rsmfg/chain.hpp"
#include "rsmfg/errors.hpp"
#include "rsmfg/parallel.hpp"
#include "rsmfg/rng.hpp"

namespace rsmfg {

namespace {

struct PlayerState {
    double x = 0.0;
    int y = 0;
    CounterRng rng;
    explicit PlayerState(uint64_t key) : rng(key) {}
};

// Per-step transition rows (cumulative) shared across players.
std::vector<double> cumulative_rows(const Matrix& q, double dt, int d) {
    if (d == 1) return {};
    Matrix scaled(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) scaled(i, j) = q(i, j) * dt;
    const Matrix p = expm(scaled);
    std::vector<double> cum(static_cast<size_t>(d) * d);
    for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j) {
            acc += std::max(p(i, j), 0.0);
            cum[i * d + j] = acc;
        }
        cum[i * d + d - 1] = 1.0;
    }
    return cum;
}

int sample_regime(const std::vector<double>& cum, int d, int y, double u) {
    if (d == 1) return 0;
    const double* row = cum.data() + static_cast<size_t>(y) * d;
    for (int j = 0; j < d - 1; ++j)
        if (u <= row[j]) return j;
    return d - 1;
}

// One repetition: returns the tagged player's time-average payoff.
double run_population_once(const RegimeModel& model, const ProfitSpec& spec,
                           const PopulationRun& run, const BarrierPolicy& tagged,
                           const std::vector<double>& cum, long rep) {
    const int n_players = run.n_players;
    const int d = model.d;
    const double dt = run.dt;
    const double sqdt = std::sqrt(dt);
    const long n_steps = std::max<long>(std::lround(run.horizon / dt), 1);
    const long k_burn = static_cast<long>(run.burn_in_fraction * n_steps);
    const double t_eff = (n_steps - k_burn) * dt;

    std::vector<PlayerState> players;
    players.reserve(n_players);
    for (int l = 0; l < n_players; ++l) {
        players.emplace_back(CounterRng::derive_key(run.seed, static_cast<uint64_t>(rep),
                                                    static_cast<uint64_t>(l)));
        const BarrierPolicy& pol = (l == 0) ? tagged : run.equilibrium;
        players[l].x = 0.5 * (pol.alpha[0] + pol.beta[0]);
        players[l].y = 0;
    }

    double profit_sum = 0.0, cost = 0.0;
    for (long k = 1; k <= n_steps; ++k) {
        // interaction seen by the tagged player: opponents' states at time t
        double f_avg = 0.0;
        for (int l = 1; l < n_players; ++l) f_avg += spec.f_map(players[l].x);
        f_avg /= (n_players - 1);
        const double theta_n = spec.F_map(f_avg);
        if (k > k_burn) profit_sum += spec.profit(players[0].x, theta_n) * dt;

        for (int l = 0; l < n_players; ++l) {
            PlayerState& pl = players[l];
            const BarrierPolicy& pol = (l == 0) ? tagged : run.equilibrium;
            const double z = pl.rng.next_normal();
            const double u = pl.rng.next_uniform();
            const double x_pre =
                pl.x + model.drift(pl.x, pl.y) * dt + model.vol(pl.x, pl.y) * sqdt * z;
            pl.y = sample_regime(cum, d, pl.y, u);
            const double up = std::max(0.0, pol.alpha[pl.y] - x_pre);
            const double dn = std::max(0.0, x_pre - pol.beta[pl.y]);
            pl.x = x_pre + up - dn;
            if (l == 0 && k > k_burn) cost += spec.k1 * up - spec.k2 * dn;
        }
    }
    return (profit_sum - cost) / t_eff;
}

}  // namespace

MCEstimate estimate_player_payoff(const RegimeModel& model, const ProfitSpec& spec,
                                  const PopulationRun& run, const BarrierPolicy& deviation,
                                  std::vector<double>* per_rep) {
    if (run.n_players < 2) throw DomainError("population needs at least two players");
    if (!deviation.inside_box(run.khat))
        throw DomainError("deviation barriers outside the strategy box");
    if (!run.equilibrium.inside_box(run.khat))
        throw DomainError("equilibrium barriers outside the strategy box");

    const auto cum = cumulative_rows(model.rate_matrix, run.dt, model.d);
    std::vector<double> vals(run.n_rep);
    parallel_for(run.n_rep, run.n_threads, [&](long r) {
        vals[r] = run_population_once(model, spec, run, deviation, cum, r);
    });

    MCEstimate est;
    est.n_samples = run.n_rep;
    est.horizon = run.horizon;
    est.mean = pairwise_sum(vals) / run.n_rep;
    if (run.n_rep > 1) {
        std::vector<double> sq(vals.size());
        for (size_t i = 0; i < vals.size(); ++i) {
            const double dv = vals[i] - est.mean;
            sq[i] = dv * dv;
        }
        est.std_error = std::sqrt(pairwise_sum(sq) / (run.n_rep * (run.n_rep - 1.0)));
    }
    if (per_rep) *per_rep = std::move(vals);
    return est;
}

EpsilonEstimate estimate_epsilon(const RegimeModel& model, const ProfitSpec& spec,
                                 const PopulationRun& run,
                                 const std::vector<BarrierPolicy>& grid) {
    if (grid.empty()) throw DomainError("deviation grid is empty");

    EpsilonEstimate out;
    std::vector<double> eq_rep;
    out.equilibrium_payoff = estimate_player_payoff(model, spec, run, run.equilibrium, &eq_rep);

    out.raw_best_gain = -std::numeric_limits<double>::infinity();
    for (const auto& dev : grid) {
        std::vector<double> dev_rep;
        const MCEstimate payoff = estimate_player_payoff(model, spec, run, dev, &dev_rep);

        // paired differences: the repetitions share noise streams
        std::vector<double> diff(dev_rep.size());
        for (size_t r = 0; r < dev_rep.size(); ++r) diff[r] = dev_rep[r] - eq_rep[r];
        const double gain = pairwise_sum(diff) / diff.size();
        double gain_se = 0.0;
        if (diff.size() > 1) {
            std::vector<double> sq(diff.size());
            for (size_t r = 0; r < diff.size(); ++r) {
                const double dd = diff[r] - gain;
                sq[r] = dd * dd;
            }
            gain_se = std::sqrt(pairwise_sum(sq) / (diff.size() * (diff.size() - 1.0)));
        }

        out.table.push_back({dev, payoff.mean, payoff.std_error, gain, gain_se});
        if (gain > out.raw_best_gain) {
            out.raw_best_gain = gain;
            out.best_gain_se = gain_se;
            out.best_deviation = dev;
        }
    }
    out.epsilon_hat = std::max(0.0, out.raw_best_gain);
    return out;
}

std::vector<BarrierPolicy> deviation_grid(const BarrierPolicy& equilibrium,
                                          const std::pair<double, double>& khat, double step,
                                          int half_width) {
    const size_t d = equilibrium.alpha.size();
    std::vector<BarrierPolicy> out;
    for (int da = -half_width; da <= half_width; ++da) {
        for (int db = -half_width; db <= half_width; ++db) {
            BarrierPolicy pol = equilibrium;
            bool feasible = true;
            for (size_t i = 0; i < d; ++i) {
                pol.alpha[i] = std::clamp(equilibrium.alpha[i] + da * step, khat.first, khat.second);
                pol.beta[i] = std::clamp(equilibrium.beta[i] + db * step, khat.first, khat.second);
                if (!(pol.alpha[i] < pol.beta[i])) feasible = false;
            }
            if (feasible) out.push_back(std::move(pol));
        }
    }
    return out;
}

EpsilonCurve epsilon_curve(const RegimeModel& model, const ProfitSpec& spec,
                           const BarrierPolicy& equilibrium, const std::pair<double, double>& khat,
                           const std::vector<int>& n_list, double deviation_step,
                           const PopulationRun& base, double budget_seconds) {
    const auto grid = deviation_grid(equilibrium, khat, deviation_step);
    const auto t0 = std::chrono::steady_clock::now();

    EpsilonCurve curve;
    for (int n : n_list) {
        if (budget_seconds > 0.0) {
            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (elapsed > budget_seconds) {
                curve.budget_exhausted = true;
                break;
            }
        }
        PopulationRun run = base;
        run.n_players = n;
        run.equilibrium = equilibrium;
        run.khat = khat;
        EpsilonEstimate est = estimate_epsilon(model, spec, run, grid);
        curve.rows.push_back({n, est.epsilon_hat, est.raw_best_gain, est.best_gain_se,
                              est.equilibrium_payoff.mean, static_cast<long>(grid.size())});
        curve.details.push_back(std::move(est));
    }
    return curve;
}

}  // namespace rsmfg
