#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "rsmfg/chain.hpp"
#include "rsmfg/dynkin.hpp"
#include "rsmfg/errors.hpp"
#include "rsmfg/model.hpp"
#include "oracles.hpp"

using namespace rsmfg;

namespace {

Matrix make_q(std::initializer_list<std::initializer_list<double>> rows) {
    const int d = static_cast<int>(rows.size());
    Matrix q(d, d);
    int i = 0;
    for (auto& row : rows) {
        int j = 0;
        for (double v : row) q(i, j++) = v;
        ++i;
    }
    return q;
}

}  // namespace

TEST_CASE("stationary law of the symmetric two-state chain") {
    const auto p = chain_stationary(make_q({{-1, 1}, {1, -1}}));
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("stationary law of an asymmetric two-state chain") {
    // hand-checked elimination: -2 p0 + p1 = 0 and p0 + p1 = 1
    const auto p = chain_stationary(make_q({{-2, 2}, {1, -1}}));
    CHECK(p[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("stationary law of the three-state cycle") {
    const auto p = chain_stationary(make_q({{-1, 1, 0}, {0, -1, 1}, {1, 0, -1}}));
    for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("stationary law solves p Q = 0 and is invariant under time rescaling") {
    // hand-rolled generator sampling
    uint64_t state = 12345;
    auto next = [&state]() {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<double>(state >> 11) / 9007199254740992.0;
    };
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 2 + static_cast<int>(next() * 3);
        Matrix q(d, d);
        for (int i = 0; i < d; ++i) {
            double row = 0.0;
            for (int j = 0; j < d; ++j)
                if (j != i) {
                    q(i, j) = 0.05 + next();
                    row += q(i, j);
                }
            q(i, i) = -row;
        }
        const auto p = chain_stationary(q);
        double mass = 0.0;
        for (int j = 0; j < d; ++j) {
            double dot = 0.0;
            for (int i = 0; i < d; ++i) dot += p[i] * q(i, j);
            CHECK(std::abs(dot) < 1e-12);
            mass += p[j];
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

        const double c = 0.1 + 5.0 * next();
        Matrix qc(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) qc(i, j) = c * q(i, j);
        const auto pc = chain_stationary(qc);
        for (int i = 0; i < d; ++i) CHECK(pc[i] == doctest::Approx(p[i]).epsilon(1e-10));
    }
}

TEST_CASE("reducible generators are rejected") {
    CHECK_THROWS_AS(chain_stationary(make_q({{0, 0}, {0, 0}})), NumericsError);
    // two disconnected blocks
    CHECK_THROWS_AS(chain_stationary(make_q({{-1, 1, 0, 0},
                                             {1, -1, 0, 0},
                                             {0, 0, -2, 2},
                                             {0, 0, 2, -2}})),
                    NumericsError);
}

TEST_CASE("jump-rate proportions differ from the stationary law in general") {
    const Matrix q = make_q({{-2, 2}, {1, -1}});
    const auto rates = chain_rate_proportions(q);
    CHECK(rates[0] == doctest::Approx(2.0 / 3.0));
    const auto p = chain_stationary(q);
    CHECK(std::abs(rates[0] - p[0]) > 0.3);  // the two notions genuinely disagree here
    // and the validation report surfaces the gap
    auto inst = default_benchmark();
    inst.rate_matrix = q;
    const auto model = inst.make_model();
    const auto spec = inst.make_profit();
    const Grid w = auto_grid(model, spec, 1.0, 200, 0.5);
    const auto rep = validate_assumptions(model, spec, w.nodes(), {1.0});
    CHECK(rep.rate_formula_gap == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("matrix exponential matches the two-state closed form") {
    const double a = 1.7, b = 0.4, t = 0.3;
    Matrix q(2, 2);
    q(0, 0) = -a;
    q(0, 1) = a;
    q(1, 0) = b;
    q(1, 1) = -b;
    Matrix qt(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) qt(i, j) = q(i, j) * t;
    const Matrix p = expm(qt);
    const double e = std::exp(-(a + b) * t);
    CHECK(p(0, 0) == doctest::Approx((b + a * e) / (a + b)).epsilon(1e-12));
    CHECK(p(1, 0) == doctest::Approx((b - b * e) / (a + b)).epsilon(1e-12));
    for (int i = 0; i < 2; ++i) CHECK(p(i, 0) + p(i, 1) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("profit evaluation on the benchmark closed form") {
    auto inst = default_benchmark();
    const auto model = inst.make_model();
    const auto spec = inst.make_profit();
    CHECK(eval_profit(model, spec, 4.0, 1.0) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(spec.profit_x(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(eval_profit(model, spec, 4.0, 0.0), DomainError);
    CHECK_THROWS_AS(eval_profit(model, spec, -1.0, 1.0), DomainError);

    // with no limit markup the profit vanishes for large theta
    inst.kappa_star = 0.0;
    const auto spec0 = inst.make_profit();
    CHECK(spec0.profit(3.0, 1e8) < 1e-10);
}

TEST_CASE("threshold roots match an independent bisection oracle") {
    BenchmarkInstance inst = default_benchmark();
    inst.delta = {0.5, 0.5};
    inst.sigma = {0.2, 0.2};
    const auto model = inst.make_model();
    const auto spec = inst.make_profit();
    const double theta = 1.0;

    // oracle: root of (beta x^(beta-1)) (theta^-(1+beta) + kappa*) - k1 delta
    auto psi = [&](double x) {
        return 0.5 * std::pow(x, -0.5) * (std::pow(theta, -1.5) + 1.0) - 1.0 * 0.5;
    };
    const double x_minus_oracle = testor::bisect(psi, 0.1, 100.0);
    CHECK(x_minus_oracle == doctest::Approx(4.0).epsilon(1e-9));  // analytic: x = 4

    const Grid w = auto_grid(model, spec, theta, 4096, 0.5);
    const auto rep = validate_assumptions(model, spec, w.nodes(), {theta});
    REQUIRE(rep.roots.size() == 2);
    for (const auto& r : rep.roots) {
        CHECK(r.sign_pattern_ok);
        CHECK(r.x_minus == doctest::Approx(x_minus_oracle).epsilon(1e-6));
        CHECK(r.x_minus < r.x_plus);
    }
}

TEST_CASE("threshold roots depend on the regime and decrease in theta") {
    const auto inst = default_benchmark();  // delta differ across regimes
    const auto model = inst.make_model();
    const auto spec = inst.make_profit();
    const Grid w_wide = auto_grid(model, spec, 0.25, 2048, 0.5);
    const Grid w_narrow = auto_grid(model, spec, 4.0, 2048, 0.5);
    const Grid w{std::min(w_wide.x_lo, w_narrow.x_lo), std::max(w_wide.x_hi, w_narrow.x_hi), 8192};
    const std::vector<double> thetas{0.25, 0.5, 1.0, 2.0, 4.0};
    const auto rep = validate_assumptions(model, spec, w.nodes(), thetas);
    REQUIRE(rep.roots.size() == 2 * thetas.size());

    // regime dependence at fixed theta
    CHECK(rep.roots[0].x_minus != doctest::Approx(rep.roots[1].x_minus).epsilon(1e-3));

    // monotone decrease in theta within each regime
    for (int i = 0; i < 2; ++i) {
        for (size_t t = 0; t + 1 < thetas.size(); ++t) {
            const auto& cur = rep.roots[2 * t + i];
            const auto& nxt = rep.roots[2 * (t + 1) + i];
            REQUIRE(cur.sign_pattern_ok);
            REQUIRE(nxt.sign_pattern_ok);
            CHECK(nxt.x_minus < cur.x_minus);
            CHECK(nxt.x_plus < cur.x_plus);
        }
    }
}

TEST_CASE("the canonical instance satisfies every sampled structural condition") {
    const auto inst = default_benchmark();
    const auto model = inst.make_model();
    const auto spec = inst.make_profit();
    // window wide enough for the roots at the smallest sampled theta
    const Grid w_lo = auto_grid(model, spec, 0.5, 256, 0.5);
    const Grid w_hi = auto_grid(model, spec, 2.0, 256, 0.5);
    const Grid w{std::min(w_lo.x_lo, w_hi.x_lo), std::max(w_lo.x_hi, w_hi.x_hi), 2048};
    const auto rep = validate_assumptions(model, spec, w.nodes(), {0.5, 1.0, 2.0});
    CHECK(rep.all_ok());
    CHECK(rep.generator_ok);
    CHECK(rep.column_sums_ok);
    CHECK(rep.dissipativity_ok);
    CHECK(rep.volatility_positive);
    CHECK(rep.profit_monotone_concave);
    CHECK(rep.profit_x_theta_decreasing);
    CHECK(rep.maps_increasing);
}

TEST_CASE("empty sample grids are rejected") {
    const auto inst = default_benchmark();
    CHECK_THROWS_AS(validate_assumptions(inst.make_model(), inst.make_profit(), {}, {1.0}),
                    DomainError);
}
