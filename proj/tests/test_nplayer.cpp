#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rsmfg/equilibrium.hpp"
#include "rsmfg/errors.hpp"
#include "rsmfg/model.hpp"
#include "rsmfg/nplayer.hpp"
#include "rsmfg/sim.hpp"

using namespace rsmfg;

namespace {

struct Fixture {
    RegimeModel model;
    ProfitSpec spec;
    BarrierPolicy eq;
    std::pair<double, double> khat;
    double step = 0.0;
    double lam_bar_star = 0.0;

    Fixture() {
        const auto inst = default_benchmark();
        model = inst.make_model();
        spec = inst.make_profit();
        const auto res = solve_equilibrium(model, spec, 1601, 1601);
        eq = {res.solution_at_star.alpha, res.solution_at_star.beta};
        khat = res.khat;
        step = res.solution_at_star.grid.h();
        lam_bar_star = res.solution_at_star.lam_bar;
    }

    PopulationRun run(int n_players, int n_rep = 16, double horizon = 40.0) const {
        PopulationRun r;
        r.n_players = n_players;
        r.equilibrium = eq;
        r.khat = khat;
        r.horizon = horizon;
        r.dt = 4e-3;
        r.n_rep = n_rep;
        r.seed = 20240809;
        r.n_threads = 2;
        return r;
    }
};

const Fixture& fixture() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_CASE("two independent seed pools give statistically equal payoffs") {
    const auto& f = fixture();
    auto r1 = f.run(2, 24);
    auto r2 = r1;
    r2.seed = 777;
    const auto a = estimate_player_payoff(f.model, f.spec, r1, f.eq);
    const auto b = estimate_player_payoff(f.model, f.spec, r2, f.eq);
    const double se = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    CHECK(std::abs(a.mean - b.mean) <= 3.0 * se);
}

TEST_CASE("a constant interaction map collapses to the single-agent payoff") {
    const auto& f = fixture();
    ProfitSpec flat = f.spec;
    const double fixed_f = 1.7;
    flat.f_map = [fixed_f](double) { return fixed_f; };
    const double theta_c = f.spec.F_map(fixed_f);

    auto r = f.run(4, 32, 60.0);
    const auto popn = estimate_player_payoff(f.model, flat, r, f.eq);
    const auto solo = ergodic_payoff_estimate(f.model, f.spec, theta_c, f.eq.alpha, f.eq.beta,
                                              60.0, 4e-3, 32, 31337, 0.1, 2);
    const double se = std::sqrt(popn.std_error * popn.std_error + solo.std_error * solo.std_error);
    CHECK(std::abs(popn.mean - solo.mean) <= 3.0 * se);
}

TEST_CASE("the equilibrium-only grid yields a zero gain estimate") {
    const auto& f = fixture();
    const auto est = estimate_epsilon(f.model, f.spec, f.run(3, 8, 20.0), {f.eq});
    CHECK(est.epsilon_hat == 0.0);
    CHECK(est.raw_best_gain == 0.0);
}

TEST_CASE("deviation grids respect the box and feasibility") {
    const auto& f = fixture();
    const auto grid = deviation_grid(f.eq, f.khat, f.step, 2);
    CHECK(grid.size() <= 25);
    CHECK(grid.size() >= 20);
    for (const auto& pol : grid) CHECK(pol.inside_box(f.khat));
    CHECK_THROWS_AS(estimate_epsilon(f.model, f.spec, f.run(2), {}), DomainError);

    BarrierPolicy outside = f.eq;
    outside.alpha[0] = f.khat.first - 1.0;
    CHECK_THROWS_AS(estimate_player_payoff(f.model, f.spec, f.run(2), outside), DomainError);
}

TEST_CASE("repetition scaling shrinks the standard error like root n") {
    const auto& f = fixture();
    const auto small = estimate_player_payoff(f.model, f.spec, f.run(2, 16), f.eq);
    const auto big = estimate_player_payoff(f.model, f.spec, f.run(2, 32), f.eq);
    const double expected = small.std_error / std::sqrt(2.0);
    CHECK(std::abs(big.std_error - expected) <= 0.3 * expected);
}

TEST_CASE("paired differences beat independent differences on variance") {
    const auto& f = fixture();
    BarrierPolicy dev = f.eq;
    for (size_t i = 0; i < dev.alpha.size(); ++i) dev.alpha[i] += f.step;

    const auto est = estimate_epsilon(f.model, f.spec, f.run(2, 24), {dev});
    REQUIRE(est.table.size() == 1);
    const auto& row = est.table[0];
    const double indep_se = std::sqrt(row.payoff_se * row.payoff_se +
                                      est.equilibrium_payoff.std_error *
                                          est.equilibrium_payoff.std_error);
    CHECK(row.gain_se < indep_se);
}

TEST_CASE("the epsilon table is deterministic given the seed") {
    const auto& f = fixture();
    const auto grid = deviation_grid(f.eq, f.khat, f.step, 1);
    const auto a = estimate_epsilon(f.model, f.spec, f.run(3, 8, 20.0), grid);
    const auto b = estimate_epsilon(f.model, f.spec, f.run(3, 8, 20.0), grid);
    CHECK(a.epsilon_hat == b.epsilon_hat);
    CHECK(a.raw_best_gain == b.raw_best_gain);
    REQUIRE(a.table.size() == b.table.size());
    for (size_t k = 0; k < a.table.size(); ++k) {
        CHECK(a.table[k].payoff == b.table[k].payoff);
        CHECK(a.table[k].gain == b.table[k].gain);
    }
}

TEST_CASE("a large population's equilibrium payoff approaches the single-agent constant") {
    const auto& f = fixture();
    const auto est = estimate_player_payoff(f.model, f.spec, f.run(50, 32, 60.0), f.eq);
    // finite-population and burn-in bias allowance calibrated once at 0.15/sqrt(N)
    CHECK(std::abs(est.mean - f.lam_bar_star) <=
          3.0 * est.std_error + 0.15 / std::sqrt(50.0));
}

TEST_CASE("deviation gains shrink as the population grows") {
    const auto& f = fixture();
    PopulationRun base = f.run(2, 32, 60.0);
    const auto curve = epsilon_curve(f.model, f.spec, f.eq, f.khat, {2, 20}, f.step, base);
    REQUIRE(curve.rows.size() == 2);
    CHECK_FALSE(curve.budget_exhausted);
    const auto& small_n = curve.rows[0];
    const auto& large_n = curve.rows[1];
    const double se = std::sqrt(small_n.best_gain_se * small_n.best_gain_se +
                                large_n.best_gain_se * large_n.best_gain_se);
    CHECK(small_n.epsilon_hat - large_n.epsilon_hat > 1.645 * se);
}

TEST_CASE("an exhausted budget flags a partial table") {
    const auto& f = fixture();
    PopulationRun base = f.run(2, 4, 10.0);
    const auto curve = epsilon_curve(f.model, f.spec, f.eq, f.khat, {2, 3, 4}, f.step, base, 1e-9);
    CHECK(curve.budget_exhausted);
    CHECK(curve.rows.size() < 3);
}
