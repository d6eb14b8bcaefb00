#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rsmfg/dynkin.hpp"
#include "rsmfg/errors.hpp"
#include "rsmfg/model.hpp"
#include "rsmfg/rng.hpp"
#include "rsmfg/sim.hpp"

using namespace rsmfg;

namespace {

// test double with constant coefficients per regime (possibly zero noise)
RegimeModel flat_model(double drift0, double drift1, double vol0, double vol1) {
    RegimeModel m;
    m.d = 2;
    m.drift = [drift0, drift1](double, int i) { return i == 0 ? drift0 : drift1; };
    m.drift_x = [](double, int) { return 0.0; };
    m.vol = [vol0, vol1](double, int i) { return i == 0 ? vol0 : vol1; };
    m.vol_x = [](double, int) { return 0.0; };
    m.rate_matrix = Matrix(2, 2);
    m.rate_matrix(0, 0) = -1.0;
    m.rate_matrix(0, 1) = 1.0;
    m.rate_matrix(1, 0) = 1.0;
    m.rate_matrix(1, 1) = -1.0;
    m.dissipativity_c = 0.0;
    return m;
}

}  // namespace

TEST_CASE("no noise and no drift means no motion and no pushing") {
    const auto model = flat_model(0.0, 0.0, 0.0, 0.0);
    const auto pb = simulate_reflected(model, {0.0, 0.0}, {2.0, 2.0}, 1.0, 0, 5.0, 1e-2, 1);
    for (double x : pb.x) CHECK(x == 1.0);
    CHECK(pb.xi_plus.back() == 0.0);
    CHECK(pb.xi_minus.back() == 0.0);
}

TEST_CASE("a deterministic downward drift sticks to the lower barrier") {
    const auto model = flat_model(-1.0, -1.0, 0.0, 0.0);
    const double T = 4.0, dt = 1e-3;
    const auto pb = simulate_reflected(model, {0.0, 0.0}, {5.0, 5.0}, 0.3, 0, T, dt, 1);
    CHECK(pb.x.back() == doctest::Approx(0.0).epsilon(1e-12));
    // pushing accrues at rate |b| once the barrier is reached
    CHECK(pb.xi_plus.back() == doctest::Approx(T - 0.3).epsilon(2.0 * dt));
    CHECK(pb.xi_minus.back() == 0.0);
}

TEST_CASE("paths with ordered starts stay ordered under common noise") {
    const auto inst = default_benchmark();
    const auto model = inst.make_model();
    const std::vector<double> alpha{1.5, 1.0}, beta{9.0, 7.0};
    const auto lo = simulate_reflected(model, alpha, beta, 2.0, 0, 20.0, 1e-3, 77);
    const auto hi = simulate_reflected(model, alpha, beta, 6.0, 0, 20.0, 1e-3, 77);
    for (size_t k = 0; k < lo.x.size(); ++k) CHECK(lo.x[k] <= hi.x[k] + 1e-12);
}

TEST_CASE("each recorded point lies in the active band and pushes are exclusive") {
    const auto inst = default_benchmark();
    const auto model = inst.make_model();
    const std::vector<double> alpha{1.5, 1.0}, beta{9.0, 7.0};
    const auto pb = simulate_reflected(model, alpha, beta, 2.0, 0, 20.0, 1e-3, 5);
    for (size_t k = 0; k < pb.x.size(); ++k) {
        CHECK(pb.x[k] >= alpha[pb.y[k]] - 1e-12);
        CHECK(pb.x[k] <= beta[pb.y[k]] + 1e-12);
        if (k > 0) {
            const double dplus = pb.xi_plus[k] - pb.xi_plus[k - 1];
            const double dminus = pb.xi_minus[k] - pb.xi_minus[k - 1];
            CHECK(dplus >= 0.0);
            CHECK(dminus >= 0.0);
            CHECK(!(dplus > 0.0 && dminus > 0.0));
            if (dplus > 0.0) CHECK(pb.x[k] == doctest::Approx(alpha[pb.y[k]]).epsilon(1e-14));
            if (dminus > 0.0) CHECK(pb.x[k] == doctest::Approx(beta[pb.y[k]]).epsilon(1e-14));
        }
    }
    CHECK(pb.xi_plus.front() == 0.0);
    CHECK(pb.xi_minus.front() == 0.0);
}

TEST_CASE("identical seeds give bit-identical bundles") {
    const auto inst = default_benchmark();
    const auto model = inst.make_model();
    const std::vector<double> alpha{1.5, 1.0}, beta{9.0, 7.0};
    const auto a = simulate_reflected(model, alpha, beta, 2.0, 0, 5.0, 1e-3, 123);
    const auto b = simulate_reflected(model, alpha, beta, 2.0, 0, 5.0, 1e-3, 123);
    const auto c = simulate_reflected(model, alpha, beta, 2.0, 0, 5.0, 1e-3, 124);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.xi_plus == b.xi_plus);
    CHECK(a.x != c.x);
}

TEST_CASE("reflection map leaves interior paths untouched") {
    const std::vector<double> raw{3.0, 3.5, 2.8, 4.0, 3.2};
    const std::vector<int> regimes{0, 0, 1, 1, 0};
    const auto g = gamma_map(raw, regimes, {1.0, 0.5}, {8.0, 6.0});
    CHECK(g.path == raw);
    CHECK(g.xi_plus.back() == 0.0);
    CHECK(g.xi_minus.back() == 0.0);
}

TEST_CASE("reflection map reduces to the classical one-sided formula") {
    std::vector<double> raw;
    std::vector<int> regimes;
    uint64_t s = 9;
    double x = 2.0;
    for (int k = 0; k < 400; ++k) {
        raw.push_back(x);
        regimes.push_back(0);
        s = s * 6364136223846793005ull + 1442695040888963407ull;
        x += -0.05 + 0.08 * (static_cast<double>(s >> 11) / 9007199254740992.0 - 0.5);
    }
    const double barrier = 1.0;
    const auto g = gamma_map(raw, regimes, {barrier}, {1e18});
    double running = 0.0;
    for (size_t k = 0; k < raw.size(); ++k) {
        running = std::max(running, barrier - raw[k]);
        const double classic = raw[k] + std::max(0.0, running);
        CHECK(g.path[k] == doctest::Approx(classic).epsilon(1e-12));
    }
}

TEST_CASE("reflection map is idempotent on its own output") {
    const auto inst = default_benchmark();
    const auto model = inst.make_model();
    const std::vector<double> alpha{1.5, 1.0}, beta{9.0, 7.0};
    const auto pb = simulate_reflected(model, alpha, beta, 2.0, 0, 10.0, 1e-3, 21);
    const auto again = gamma_map(pb.x, pb.y, alpha, beta);
    for (size_t k = 0; k < pb.x.size(); ++k)
        CHECK(again.path[k] == doctest::Approx(pb.x[k]).epsilon(1e-14));
}

TEST_CASE("projection, reflection map and the fixed-point construction agree") {
    const auto inst = default_benchmark();
    const auto model = inst.make_model();
    const std::vector<double> alpha{1.5, 1.0}, beta{8.0, 6.0};
    const double x0 = 3.0, T = 10.0;
    // C pinned from calibration: the three discrete constructions coincide,
    // so any unit constant holds with margin
    const double C = 1.0;
    for (double dt : {1e-2, 2.5e-3}) {
        const auto pb = simulate_reflected(model, alpha, beta, x0, 0, T, dt, 99);
        const auto noise = make_noise(model, 0, T, dt, CounterRng::derive_key(99, 0));
        REQUIRE(noise.y.size() == pb.y.size());
        for (size_t k = 0; k < noise.y.size(); ++k) REQUIRE(noise.y[k] == pb.y[k]);

        std::vector<double> integrated(noise.dw.size() + 1);
        integrated[0] = x0;
        for (size_t k = 0; k < noise.dw.size(); ++k)
            integrated[k + 1] = integrated[k] + model.drift(pb.x[k], pb.y[k]) * dt +
                                model.vol(pb.x[k], pb.y[k]) * noise.dw[k];
        const auto gm = gamma_map(integrated, noise.y, alpha, beta);
        const auto pc = picard_skorokhod(model, alpha, beta, x0, 0, noise, 40, 1e-13);

        double d_gamma = 0.0, d_picard = 0.0;
        for (size_t k = 0; k < pb.x.size(); ++k) {
            d_gamma = std::max(d_gamma, std::abs(gm.path[k] - pb.x[k]));
            d_picard = std::max(d_picard, std::abs(pc.path[k] - pb.x[k]));
        }
        CHECK(d_gamma <= C * std::sqrt(dt));
        CHECK(d_picard <= C * std::sqrt(dt));
    }
}

TEST_CASE("the fixed-point construction converges immediately for state-free coefficients") {
    const auto model = flat_model(-0.3, -0.6, 0.2, 0.3);
    const auto noise = make_noise(model, 0, 5.0, 1e-2, 17);
    const auto pc = picard_skorokhod(model, {0.5, 0.2}, {3.0, 2.5}, 1.0, 0, noise, 5, 0.0);
    REQUIRE(pc.iterate_changes.size() >= 2);
    CHECK(pc.iterate_changes[1] <= 1e-12);
}

TEST_CASE("the fixed-point iteration contracts geometrically on the canonical model") {
    const auto inst = default_benchmark();
    const auto model = inst.make_model();
    const auto noise = make_noise(model, 0, 1.0, 1e-3, 31);
    const auto pc = picard_skorokhod(model, {1.5, 1.0}, {8.0, 6.0}, 3.0, 0, noise, 30, 1e-13);
    REQUIRE(pc.iterate_changes.size() >= 4);
    for (size_t m = 1; m + 1 < pc.iterate_changes.size(); ++m)
        CHECK(pc.iterate_changes[m + 1] <= pc.iterate_changes[m] + 1e-15);
    CHECK(pc.iterate_changes.back() < 1e-10);
}

TEST_CASE("a destabilizing drift is diagnosed instead of looping") {
    RegimeModel m;
    m.d = 1;
    m.drift = [](double x, int) { return 40.0 * x; };
    m.drift_x = [](double, int) { return 40.0; };
    m.vol = [](double, int) { return 0.1; };
    m.vol_x = [](double, int) { return 0.0; };
    m.rate_matrix = Matrix(1, 1);
    const auto noise = make_noise(m, 0, 3.0, 1e-2, 3);
    CHECK_THROWS_AS(picard_skorokhod(m, {-1e6}, {1e6}, 1.0, 0, noise, 60, 0.0), SolverError);
}

TEST_CASE("zero running profit and a frozen path earn nothing") {
    const auto model = flat_model(0.0, 0.0, 0.0, 0.0);
    ProfitSpec spec;
    spec.profit = [](double, double) { return 0.0; };
    spec.profit_x = [](double, double) { return 0.0; };
    spec.k1 = 1.0;
    spec.k2 = 0.5;
    spec.theta_min = 0.0;
    const auto est = ergodic_payoff_estimate(model, spec, 1.0, {0.0, 0.0}, {2.0, 2.0}, 10.0, 1e-2,
                                             4, 9);
    CHECK(est.mean == 0.0);
    CHECK(est.std_error == 0.0);
}

TEST_CASE("the long-run payoff of the extracted band matches the ergodic constant") {
    const auto inst = default_benchmark();
    const auto model = inst.make_model();
    const auto spec = inst.make_profit();
    const auto sol = solve_vi_auto(model, spec, 1.0, 1201);
    const auto est = ergodic_payoff_estimate(model, spec, 1.0, sol.alpha, sol.beta, 150.0, 1e-3,
                                             24, 4242, 0.1, 2);
    CHECK(std::abs(est.mean - sol.lam_bar) <= 3.0 * est.std_error + 0.05 * std::abs(sol.lam_bar));
}

TEST_CASE("shrinking the band away from the extracted one does not help") {
    const auto inst = default_benchmark();
    const auto model = inst.make_model();
    const auto spec = inst.make_profit();
    const auto sol = solve_vi_auto(model, spec, 1.0, 1201);
    const auto at_band = ergodic_payoff_estimate(model, spec, 1.0, sol.alpha, sol.beta, 150.0,
                                                 1e-3, 24, 555, 0.1, 2);
    std::vector<double> a2 = sol.alpha, b2 = sol.beta;
    for (int i = 0; i < 2; ++i) {
        const double w = sol.beta[i] - sol.alpha[i];
        a2[i] += 0.25 * w;
        b2[i] -= 0.25 * w;
    }
    const auto shrunk = ergodic_payoff_estimate(model, spec, 1.0, a2, b2, 150.0, 1e-3, 24, 555,
                                                0.1, 2);
    const double se = std::sqrt(at_band.std_error * at_band.std_error +
                                shrunk.std_error * shrunk.std_error);
    CHECK(shrunk.mean <= at_band.mean + 3.0 * se);
    CHECK(shrunk.mean < at_band.mean);  // same seeds pair the comparison
}

TEST_CASE("stopped-value doubles with a flat running term") {
    // b_x = -c constant via linear drift; zero running slope
    BenchmarkInstance inst = default_benchmark();
    const auto model = inst.make_model();
    ProfitSpec spec = inst.make_profit();
    spec.profit_x = [](double, double) { return 0.0; };

    SUBCASE("never stopping is worth nothing") {
        const auto est = mc_dynkin_value(model, spec, 1.0, {-1e300, -1e300}, {1e300, 1e300}, 3.0,
                                         0, 200, 1e-2, 8);
        CHECK(est.mean == 0.0);
    }
    SUBCASE("an immediate lower stop pays the upper cost exactly") {
        const auto est = mc_dynkin_value(model, spec, 1.0, {5.0, 5.0}, {9.0, 9.0}, 4.0, 0, 200,
                                         1e-2, 8);
        CHECK(est.mean == doctest::Approx(spec.k1).epsilon(1e-14));
        CHECK(est.std_error == 0.0);
    }
    SUBCASE("an immediate upper stop pays the lower cost exactly") {
        const auto est = mc_dynkin_value(model, spec, 1.0, {1.0, 1.0}, {3.5, 3.5}, 4.0, 0, 200,
                                         1e-2, 8);
        CHECK(est.mean == doctest::Approx(spec.k2).epsilon(1e-14));
    }
}

TEST_CASE("the extracted barriers sit at a simulated saddle point") {
    const auto inst = default_benchmark();
    const auto model = inst.make_model();
    const auto spec = inst.make_profit();
    const auto sol = solve_vi_auto(model, spec, 1.0, 1501);
    const double h = sol.grid.h();
    const double x0 = 6.0;
    const int i0 = 0;
    const long paths = 20000;
    const auto at = mc_dynkin_value(model, spec, 1.0, sol.alpha, sol.beta, x0, i0, paths, 1e-3,
                                    808, 2);
    auto shift = [](std::vector<double> v, double d) {
        for (double& x : v) x += d;
        return v;
    };
    // the stopper controlling the upper barrier maximizes: moving beta away
    // from the saddle can only lower the value
    const auto beta_bad =
        mc_dynkin_value(model, spec, 1.0, sol.alpha, shift(sol.beta, +40.0 * h), x0, i0, paths,
                        1e-3, 808, 2);
    // the stopper controlling the lower barrier minimizes: moving alpha away
    // can only raise it
    const auto alpha_bad =
        mc_dynkin_value(model, spec, 1.0, shift(sol.alpha, -40.0 * h), sol.beta, x0, i0, paths,
                        1e-3, 808, 2);
    const double se_b = std::sqrt(at.std_error * at.std_error + beta_bad.std_error * beta_bad.std_error);
    const double se_a = std::sqrt(at.std_error * at.std_error + alpha_bad.std_error * alpha_bad.std_error);
    CHECK(beta_bad.mean <= at.mean + 3.0 * se_b);
    CHECK(alpha_bad.mean >= at.mean - 3.0 * se_a);
}

TEST_CASE("invalid simulation arguments are rejected") {
    const auto inst = default_benchmark();
    const auto model = inst.make_model();
    CHECK_THROWS_AS(simulate_reflected(model, {1.0, 1.0}, {2.0, 2.0}, 1.5, 0, 1.0, 0.0, 1),
                    DomainError);
    CHECK_THROWS_AS(simulate_reflected(model, {1.0, 1.0}, {2.0, 2.0}, 1.5, 0, -1.0, 1e-3, 1),
                    DomainError);
    const auto spec = inst.make_profit();
    CHECK_THROWS_AS(mc_dynkin_value(model, spec, 1.0, {3.0, 3.0}, {2.0, 2.0}, 2.5, 0, 10, 1e-3, 1),
                    DomainError);
}
