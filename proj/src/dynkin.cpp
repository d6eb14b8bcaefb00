#include "rsmfg/dynkin.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsmfg/errors.hpp"

namespace rsmfg {

namespace {

// Per-level discretization of A v + r = 0 written with positive weights:
//   cd * v_k = cl * v_{k-1} + cu * v_{k+1} + sum_{j != i} q_ij v_{j,k} + r_k.
// Central diffusion, upwinded (b + sigma sigma_x) advection, the potential
// b_x and the chain exit rate sit on the diagonal, so cd - cl - cu - kappa_i
// >= c > 0 and projected sweeps contract.
struct Stencil {
    Grid grid;
    int d = 0;
    std::vector<std::vector<double>> cl, cu, cd, rhs;
    const Matrix* q = nullptr;

    void assemble(const RegimeModel& model, const std::function<double(double)>& running,
                  const Grid& g) {
        grid = g;
        d = model.d;
        q = &model.rate_matrix;
        const double h = g.h();
        cl.assign(d, std::vector<double>(g.n, 0.0));
        cu.assign(d, std::vector<double>(g.n, 0.0));
        cd.assign(d, std::vector<double>(g.n, 1.0));
        rhs.assign(d, std::vector<double>(g.n, 0.0));
        for (int i = 0; i < d; ++i) {
            for (int k = 1; k + 1 < g.n; ++k) {
                const double x = g.x(k);
                const double sig = model.vol(x, i);
                const double diff = 0.5 * sig * sig / (h * h);
                const double mu = model.hat_drift(x, i);
                const double up = std::max(mu, 0.0) / h;
                const double dn = std::max(-mu, 0.0) / h;
                const double kappa_i = model.d >= 2 ? -(*q)(i, i) : 0.0;
                cl[i][k] = diff + dn;
                cu[i][k] = diff + up;
                cd[i][k] = 2.0 * diff + up + dn + kappa_i - model.drift_x(x, i);
                rhs[i][k] = running(x);
            }
        }
    }
};

double gs_value(const Stencil& st, const std::vector<std::vector<double>>& v, int i, int k) {
    double num = st.rhs[i][k] + st.cl[i][k] * v[i][k - 1] + st.cu[i][k] * v[i][k + 1];
    for (int j = 0; j < st.d; ++j)
        if (j != i) num += (*st.q)(i, j) * v[j][k];
    return num / st.cd[i][k];
}

// One projected SOR pass; returns the sup-norm of the unrelaxed projected
// update, which is exactly the pointwise obstacle-equation residual.
double psor_sweep(const Stencil& st, std::vector<std::vector<double>>& v, double k1, double k2,
                  double omega, bool forward) {
    const int n = st.grid.n;
    double resid = 0.0;
    const int begin = forward ? 1 : n - 2;
    const int end = forward ? n - 1 : 0;
    const int step = forward ? 1 : -1;
    for (int k = begin; k != end; k += step) {
        for (int i = 0; i < st.d; ++i) {
            const double old = v[i][k];
            const double gs = gs_value(st, v, i, k);
            const double projected = std::clamp(gs, k2, k1);
            resid = std::max(resid, std::abs(projected - old));
            v[i][k] = std::clamp(old + omega * (gs - old), k2, k1);
        }
    }
    return resid;
}

double residual_pass(const Stencil& st, const std::vector<std::vector<double>>& v, double k1,
                     double k2) {
    double resid = 0.0;
    for (int k = 1; k + 1 < st.grid.n; ++k)
        for (int i = 0; i < st.d; ++i) {
            const double gs = gs_value(st, v, i, k);
            const double r = std::max(k2 - v[i][k], std::min(k1 - v[i][k], gs - v[i][k]));
            resid = std::max(resid, std::abs(r));
        }
    return resid;
}

// Exact solve of one regime's tridiagonal double-obstacle problem, holding
// the other regimes fixed (their values enter the right-hand side). Primal
// active-set iteration: solve the equality system with contact nodes pinned,
// then exchange nodes violating the bounds or the multiplier signs. Finite
// convergence for this M-matrix structure.
// Returns the sup-norm change of the line values.
double solve_line_lcp(const Stencil& st, std::vector<std::vector<double>>& v, int i, double k1,
                      double k2, std::vector<char>& state, std::vector<double>& scratch) {
    const int n = st.grid.n;
    // state per node: 0 inactive, 1 at k1, 2 at k2
    auto& d = st.cd[i];
    auto& l = st.cl[i];
    auto& u = st.cu[i];

    // coupling source from the other regimes
    std::vector<double>& q = scratch;
    q.resize(n);
    for (int k = 1; k + 1 < n; ++k) {
        double s = st.rhs[i][k];
        for (int j = 0; j < st.d; ++j)
            if (j != i) s += (*st.q)(i, j) * v[j][k];
        q[k] = s;
    }

    std::vector<double> cp(n), dp(n), sol(n);
    for (int pass = 0; pass < 60; ++pass) {
        // Thomas with pinned rows for boundary and contact nodes
        cp[0] = 0.0;
        dp[0] = k1;
        for (int k = 1; k < n; ++k) {
            double dk, lk, uk, qk;
            if (k == n - 1) {
                dk = 1.0;
                lk = 0.0;
                uk = 0.0;
                qk = k2;
            } else if (state[k] == 1) {
                dk = 1.0;
                lk = 0.0;
                uk = 0.0;
                qk = k1;
            } else if (state[k] == 2) {
                dk = 1.0;
                lk = 0.0;
                uk = 0.0;
                qk = k2;
            } else {
                dk = d[k];
                lk = -l[k];
                uk = -u[k];
                qk = q[k];
            }
            const double m = dk - lk * cp[k - 1];
            cp[k] = uk / m;
            dp[k] = (qk - lk * dp[k - 1]) / m;
        }
        sol[n - 1] = dp[n - 1];
        for (int k = n - 2; k >= 0; --k) sol[k] = dp[k] - cp[k] * sol[k + 1];

        // exchange step
        bool changed = false;
        for (int k = 1; k + 1 < n; ++k) {
            if (state[k] == 0) {
                if (sol[k] > k1) {
                    state[k] = 1;
                    changed = true;
                } else if (sol[k] < k2) {
                    state[k] = 2;
                    changed = true;
                }
            } else {
                // multiplier = (M v - q)_k; <= 0 required at k1, >= 0 at k2
                const double mult = d[k] * sol[k] - l[k] * sol[k - 1] - u[k] * sol[k + 1] - q[k];
                if (state[k] == 1 && mult > 0.0) {
                    state[k] = 0;
                    changed = true;
                } else if (state[k] == 2 && mult < 0.0) {
                    state[k] = 0;
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }

    double change = 0.0;
    for (int k = 0; k < n; ++k) {
        const double vv = std::clamp(sol[k], k2, k1);
        change = std::max(change, std::abs(vv - v[i][k]));
        v[i][k] = vv;
    }
    return change;
}

std::vector<std::vector<double>> prolong(const std::vector<std::vector<double>>& coarse,
                                         int n_fine, double k1, double k2) {
    const int d = static_cast<int>(coarse.size());
    std::vector<std::vector<double>> fine(d, std::vector<double>(n_fine));
    for (int i = 0; i < d; ++i) {
        const auto& vc = coarse[i];
        for (size_t k = 0; k < vc.size(); ++k) fine[i][2 * k] = vc[k];
        for (int k = 1; k < n_fine; k += 2)
            fine[i][k] = std::clamp(0.5 * (fine[i][k - 1] + fine[i][k + 1]), k2, k1);
    }
    return fine;
}

DynkinSolution solve_obstacle(const RegimeModel& model, const ProfitSpec& spec,
                              const std::function<double(double)>& running, double theta,
                              const Grid& grid, const VISolveOptions& opts) {
    grid.validate();
    if (model.d < 1) throw DomainError("model has no regimes");
    const double k1 = spec.k1, k2 = spec.k2;
    if (!(0.0 < k2 && k2 < k1)) throw DomainError("need 0 < k2 < k1");
    const double omega = std::clamp(opts.omega, 1.0, 1.8);

    // Coarse-to-fine cascade: grids with (n-1) halved while it stays even.
    std::vector<int> level_n{grid.n};
    int levels = opts.cascade_levels;
    if (levels < 0) levels = 16;
    while (static_cast<int>(level_n.size()) < levels) {
        const int n = level_n.back();
        if ((n - 1) % 2 != 0 || (n - 1) / 2 + 1 < 65) break;
        level_n.push_back((n - 1) / 2 + 1);
    }
    std::reverse(level_n.begin(), level_n.end());

    DynkinSolution sol;
    sol.theta = theta;
    long sweeps_left = opts.max_sweeps;
    std::vector<std::vector<double>> v;
    Stencil st;
    double resid = 0.0;

    for (size_t lvl = 0; lvl < level_n.size(); ++lvl) {
        Grid g{grid.x_lo, grid.x_hi, level_n[lvl]};
        st.assemble(model, running, g);
        if (lvl == 0) {
            // linear ramp between the pinned boundary values
            v.assign(model.d, std::vector<double>(g.n));
            for (int i = 0; i < model.d; ++i)
                for (int k = 0; k < g.n; ++k)
                    v[i][k] = k1 + (k2 - k1) * static_cast<double>(k) / (g.n - 1);
        } else {
            v = prolong(v, g.n, k1, k2);
        }
        for (int i = 0; i < model.d; ++i) {
            v[i][0] = k1;
            v[i][g.n - 1] = k2;
        }

        std::vector<std::vector<char>> states(model.d, std::vector<char>(g.n, 0));
        for (int i = 0; i < model.d; ++i)
            for (int k = 1; k + 1 < g.n; ++k) {
                if (v[i][k] >= k1 - 1e-12)
                    states[i][k] = 1;
                else if (v[i][k] <= k2 + 1e-12)
                    states[i][k] = 2;
            }

        std::vector<double> scratch;
        bool forward = true;
        bool converged = false;
        while (sweeps_left > 0) {
            --sweeps_left;
            double update = 0.0;
            if (opts.backend == VIBackend::line_lcp) {
                for (int i = 0; i < model.d; ++i)
                    update = std::max(update, solve_line_lcp(st, v, i, k1, k2, states[i], scratch));
            } else {
                update = psor_sweep(st, v, k1, k2, omega, forward);
                forward = !forward;
            }
            if (update < opts.tol) {
                resid = residual_pass(st, v, k1, k2);
                if (resid < opts.tol) {
                    converged = true;
                    break;
                }
            }
        }
        sol.sweeps = opts.max_sweeps - sweeps_left;
        if (!converged) {
            resid = residual_pass(st, v, k1, k2);
            throw SolverError("obstacle solve did not converge within sweep budget (residual " +
                                  std::to_string(resid) + ")",
                              resid);
        }
    }

    sol.grid = grid;
    sol.v = std::move(v);
    sol.residual = resid;
    extract_boundaries(sol.v, grid, k1, k2, std::max(100.0 * opts.tol, 1e-8), sol.alpha, sol.beta,
                       opts.check_truncation);
    return sol;
}

}  // namespace

DynkinSolution solve_vi(const RegimeModel& model, const ProfitSpec& spec, double theta,
                        const Grid& grid, const VISolveOptions& opts) {
    if (theta < spec.theta_min) throw DomainError("theta below admissible cutoff");
    auto running = [&spec, theta](double x) { return spec.profit_x(x, theta); };
    DynkinSolution sol = solve_obstacle(model, spec, running, theta, grid, opts);
    compute_lambda(sol, model, spec, theta);
    return sol;
}

DynkinSolution solve_auxiliary_vi(const RegimeModel& model, const ProfitSpec& spec,
                                  const Grid& grid, const VISolveOptions& opts) {
    if (!spec.kappa_limit) throw DomainError("interaction slope limit not provided");
    // The large-theta slope limit must still produce threshold roots;
    // kappa identically zero (or too flat) breaks the bracket construction.
    bool sign_change = false;
    const auto xs = grid.nodes();
    for (int i = 0; i < model.d && !sign_change; ++i) {
        bool pos = false, neg = false;
        for (double x : xs) {
            const double psi = spec.kappa_limit(x) + spec.k1 * model.drift_x(x, i);
            (psi > 0.0 ? pos : neg) = true;
        }
        sign_change = pos && neg;
    }
    if (!sign_change)
        throw DomainError("degenerate interaction slope limit: no threshold root on grid");

    auto running = [&spec](double x) { return spec.kappa_limit(x); };
    DynkinSolution sol =
        solve_obstacle(model, spec, running, std::numeric_limits<double>::infinity(), grid, opts);
    // ergodic constants are not meaningful for the limit problem; leave lam empty
    return sol;
}

void extract_boundaries(const std::vector<std::vector<double>>& v, const Grid& grid, double k1,
                        double k2, double tol, std::vector<double>& alpha,
                        std::vector<double>& beta, bool check_truncation) {
    const int d = static_cast<int>(v.size());
    const int n = grid.n;
    const double h = grid.h();
    alpha.assign(d, 0.0);
    beta.assign(d, 0.0);
    const double c1 = k1 - tol;
    const double c2 = k2 + tol;

    for (int i = 0; i < d; ++i) {
        int ka = -1;
        for (int k = 0; k < n; ++k)
            if (v[i][k] >= c1) ka = k;  // innermost upper contact
        int kb = -1;
        for (int k = n - 1; k >= 0; --k)
            if (v[i][k] <= c2) kb = k;  // innermost lower contact
        if (ka < 0 || kb < 0)
            throw GridError("empty stopping region on grid (regime " + std::to_string(i) + ")");
        if (check_truncation && (ka == 0 || kb == n - 1))
            throw GridError("enlarge truncation: contact set touches grid edge (regime " +
                            std::to_string(i) + ")");

        // Detachment from an obstacle is quadratic (smooth fit): D(x) =
        // k1 - v resp. v - k2 grows like (M/2)(x - contact)^2. The contact
        // point is the zero intercept of a weighted straight-line fit of
        // sqrt(D) against x over a fixed relative detachment window; node
        // weights vanish smoothly at the window edges, so the estimate is a
        // continuous function of the data. A fixed crossing level or a
        // two-node stencil would jump when the active set gains or loses a
        // node. Falls back to linear interpolation of the crossing when the
        // fit is ill-posed or lands away from the contact cell (ramp-like
        // data).
        const double d_lo = 1e-3 * (k1 - k2);
        const double d_hi = 2e-2 * (k1 - k2);
        auto windowed_intercept = [&](int start, int step) {
            double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
            int used = 0;
            for (int kk = start; kk > 0 && kk < n - 1; kk += step) {
                const double det = step > 0 ? k1 - v[i][kk] : v[i][kk] - k2;
                if (det >= d_hi) break;
                if (det <= d_lo) continue;
                const double w = (det - d_lo) * (d_hi - det);
                const double x = grid.x(kk);
                const double y = std::sqrt(det);
                sw += w * w;
                sx += w * w * x;
                sy += w * w * y;
                sxx += w * w * x * x;
                sxy += w * w * x * y;
                ++used;
            }
            if (used < 2) return std::numeric_limits<double>::quiet_NaN();
            const double denom = sw * sxx - sx * sx;
            if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
            const double slope = (sw * sxy - sx * sy) / denom;
            const double icept = (sy * sxx - sx * sxy) / denom;
            if (slope == 0.0) return std::numeric_limits<double>::quiet_NaN();
            return -icept / slope;  // x where the fitted sqrt(D) vanishes
        };

        double a = grid.x(ka);
        {
            const double cand = windowed_intercept(ka + 1, +1);
            if (std::isfinite(cand) && cand >= a - 0.25 * h && cand <= a + 1.25 * h)
                a = std::clamp(cand, a, a + h);
        }
        if (a == grid.x(ka) && ka + 1 < n && v[i][ka] > v[i][ka + 1]) {
            const double frac = (v[i][ka] - c1) / (v[i][ka] - v[i][ka + 1]);
            a += std::clamp(frac, 0.0, 1.0) * h;
        }
        double b = grid.x(kb);
        {
            const double cand = windowed_intercept(kb - 1, -1);
            if (std::isfinite(cand) && cand <= b + 0.25 * h && cand >= b - 1.25 * h)
                b = std::clamp(cand, b - h, b);
        }
        if (b == grid.x(kb) && kb - 1 >= 0 && v[i][kb - 1] > v[i][kb]) {
            const double frac = (v[i][kb - 1] - c2) / (v[i][kb - 1] - v[i][kb]);
            b -= (1.0 - std::clamp(frac, 0.0, 1.0)) * h;
        }
        if (!(a < b))
            throw GridError("contact boundaries collapsed (regime " + std::to_string(i) + ")");
        alpha[i] = a;
        beta[i] = b;
    }
}

double integrate_linear(const std::vector<double>& values, const Grid& grid, double a, double b) {
    if (a == b) return 0.0;
    if (a > b) return -integrate_linear(values, grid, b, a);
    const double h = grid.h();
    auto value_at = [&](double x) {
        const double t = (x - grid.x_lo) / h;
        int k = static_cast<int>(std::floor(t));
        k = std::clamp(k, 0, grid.n - 2);
        const double w = t - k;
        return values[k] * (1.0 - w) + values[k + 1] * w;
    };
    // trapezoid over cell pieces of the linear interpolant (exact)
    double total = 0.0;
    double x = a;
    while (x < b) {
        const int cell = std::clamp(static_cast<int>(std::floor((x - grid.x_lo) / h)), 0, grid.n - 2);
        const double cell_end = std::min(grid.x(cell + 1), b);
        const double next = (cell_end <= x) ? b : cell_end;
        total += 0.5 * (value_at(x) + value_at(next)) * (next - x);
        if (next >= b) break;
        x = next;
    }
    return total;
}

std::vector<double> lambda_per_regime(const DynkinSolution& sol, const RegimeModel& model,
                                      const ProfitSpec& spec, double theta,
                                      std::vector<double>* K_out) {
    const int d = model.d;
    std::vector<double> K(d);
    for (int i = 0; i < d; ++i)
        K[i] = -integrate_linear(sol.v[i], sol.grid, sol.alpha[i], sol.beta[i]);

    std::vector<double> lam(d);
    for (int i = 0; i < d; ++i) {
        double coupling = 0.0;
        for (int j = 0; j < d; ++j) {
            if (j == i) continue;
            const double cross = integrate_linear(sol.v[j], sol.grid, sol.alpha[j], sol.alpha[i]);
            coupling += model.rate_matrix(i, j) * (cross + K[i] - K[j]);
        }
        lam[i] = coupling + model.drift(sol.alpha[i], i) * spec.k1 + spec.profit(sol.alpha[i], theta);
    }
    if (K_out) *K_out = std::move(K);
    return lam;
}

void compute_lambda(DynkinSolution& sol, const RegimeModel& model, const ProfitSpec& spec,
                    double theta) {
    sol.lam = lambda_per_regime(sol, model, spec, theta, &sol.K);
    const auto p = chain_stationary(model.rate_matrix);
    sol.lam_bar = 0.0;
    for (int i = 0; i < model.d; ++i) sol.lam_bar += p[i] * sol.lam[i];
}

ComplementarityReport complementarity_report(const DynkinSolution& sol, const RegimeModel& model,
                                             const ProfitSpec& spec, double obstacle_tol) {
    Stencil st;
    const double theta = sol.theta;
    std::function<double(double)> running;
    if (std::isfinite(theta))
        running = [&spec, theta](double x) { return spec.profit_x(x, theta); };
    else
        running = [&spec](double x) { return spec.kappa_limit(x); };
    st.assemble(model, running, sol.grid);

    ComplementarityReport rep;
    rep.obstacle_tol = obstacle_tol;
    for (int k = 1; k + 1 < sol.grid.n; ++k) {
        for (int i = 0; i < model.d; ++i) {
            const double v = sol.v[i][k];
            const double gs = gs_value(st, sol.v, i, k);
            // A v + r = cd * (gs - v); scale by the local equation magnitude
            const double eq = st.cd[i][k] * (gs - v);
            const double scale = st.cd[i][k] * spec.k1;
            if (v >= spec.k1 - obstacle_tol) {
                ++rep.n_upper;
                rep.max_upper_violation = std::max(rep.max_upper_violation, std::max(0.0, -eq) / scale);
            } else if (v <= spec.k2 + obstacle_tol) {
                ++rep.n_lower;
                rep.max_lower_violation = std::max(rep.max_lower_violation, std::max(0.0, eq) / scale);
            } else {
                ++rep.n_equation;
                rep.max_equation_residual = std::max(rep.max_equation_residual, std::abs(eq) / scale);
            }
        }
    }
    return rep;
}

SmoothFitSlopes smooth_fit_slopes(const DynkinSolution& sol) {
    SmoothFitSlopes out;
    const double h = sol.grid.h();
    const int n = sol.grid.n;
    for (size_t i = 0; i < sol.v.size(); ++i) {
        int ka = std::clamp(static_cast<int>(std::floor((sol.alpha[i] - sol.grid.x_lo) / h)), 0, n - 2);
        int kb = std::clamp(static_cast<int>(std::ceil((sol.beta[i] - sol.grid.x_lo) / h)), 1, n - 1);
        out.at_alpha.push_back((sol.v[i][ka + 1] - sol.v[i][ka]) / h);
        out.at_beta.push_back((sol.v[i][kb] - sol.v[i][kb - 1]) / h);
    }
    return out;
}

namespace {

Grid window_from_roots(const RegimeModel& model, const ProfitSpec& spec,
                       const std::function<double(double, int)>& slope, int n, double margin) {
    double lo_root = std::numeric_limits<double>::infinity();
    double hi_root = -std::numeric_limits<double>::infinity();
    const double x_lo_dom = model.state_interval.first;
    const double x_hi_dom = model.state_interval.second;

    for (int i = 0; i < model.d; ++i) {
        for (double k : {spec.k1, spec.k2}) {
            auto psi = [&](double x) { return slope(x, i) + k * model.drift_x(x, i); };
            // expand a bracket [lo, hi] with psi(lo) > 0 >= psi(hi)
            double lo = std::isfinite(x_lo_dom) ? x_lo_dom + 1e-8 : -1.0;
            double hi = std::isfinite(x_lo_dom) ? std::max(1.0, 2.0 * lo) : 1.0;
            int guard = 0;
            while (psi(hi) > 0.0 && guard++ < 200) hi = std::isfinite(x_lo_dom) ? hi * 2.0 : hi * 2.0 + 1.0;
            guard = 0;
            while (psi(lo) <= 0.0 && guard++ < 200) {
                if (std::isfinite(x_lo_dom))
                    lo = x_lo_dom + (lo - x_lo_dom) * 0.5;
                else
                    lo = lo * 2.0 - 1.0;
            }
            if (psi(lo) <= 0.0 || psi(hi) > 0.0)
                throw DomainError("threshold roots not bracketable; check the sign pattern");
            const auto root = bisect_root(psi, lo, hi);
            if (!root) throw DomainError("threshold root search failed");
            lo_root = std::min(lo_root, *root);
            hi_root = std::max(hi_root, *root);
        }
    }

    const double width = hi_root - lo_root;
    double lo = lo_root - margin * width;
    double hi = hi_root + margin * width;
    if (std::isfinite(x_lo_dom)) lo = std::max(lo, x_lo_dom + 0.02 * width);
    if (std::isfinite(x_hi_dom)) hi = std::min(hi, x_hi_dom - 0.02 * width);
    return Grid{lo, hi, n};
}

}  // namespace

Grid auto_grid(const RegimeModel& model, const ProfitSpec& spec, double theta, int n,
               double margin) {
    if (theta < spec.theta_min) throw DomainError("theta below admissible cutoff");
    auto slope = [&](double x, int) { return spec.profit_x(x, theta); };
    return window_from_roots(model, spec, slope, n, margin);
}

Grid auto_grid_aux(const RegimeModel& model, const ProfitSpec& spec, int n, double margin) {
    if (!spec.kappa_limit) throw DomainError("interaction slope limit not provided");
    auto slope = [&](double x, int) { return spec.kappa_limit(x); };
    return window_from_roots(model, spec, slope, n, margin);
}

namespace {

Grid widen(const Grid& g, const std::pair<double, double>& domain) {
    const double width = g.x_hi - g.x_lo;
    double lo = g.x_lo - 0.5 * width;
    double hi = g.x_hi + width;
    if (std::isfinite(domain.first))
        lo = std::max(lo, domain.first + 0.5 * (g.x_lo - domain.first));
    if (std::isfinite(domain.second))
        hi = std::min(hi, domain.second - 0.5 * (domain.second - g.x_hi));
    return Grid{lo, hi, g.n};
}

template <class Solve>
DynkinSolution solve_widening(Grid g, const std::pair<double, double>& domain, int max_widenings,
                              const Solve& solve) {
    for (int attempt = 0;; ++attempt) {
        try {
            return solve(g);
        } catch (const GridError&) {
            if (attempt >= max_widenings) throw;
            g = widen(g, domain);
        }
    }
}

}  // namespace

DynkinSolution solve_vi_auto(const RegimeModel& model, const ProfitSpec& spec, double theta, int n,
                             const VISolveOptions& opts, double margin, int max_widenings) {
    const Grid g0 = auto_grid(model, spec, theta, n, margin);
    return solve_widening(g0, model.state_interval, max_widenings,
                          [&](const Grid& g) { return solve_vi(model, spec, theta, g, opts); });
}

DynkinSolution solve_auxiliary_vi_auto(const RegimeModel& model, const ProfitSpec& spec, int n,
                                       const VISolveOptions& opts, double margin,
                                       int max_widenings) {
    const Grid g0 = auto_grid_aux(model, spec, n, margin);
    return solve_widening(g0, model.state_interval, max_widenings,
                          [&](const Grid& g) { return solve_auxiliary_vi(model, spec, g, opts); });
}

}  // namespace rsmfg
