#include "rsmfg/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsmfg/chain.hpp"
#include "rsmfg/errors.hpp"

namespace rsmfg {

namespace {

// Block-tridiagonal LU for systems with d x d node blocks. In-block partial
// pivoting; blocks along the band are eliminated in order.
class BlockTridiagSolver {
public:
    BlockTridiagSolver(int n_nodes, int d) : n_(n_nodes), d_(d) {
        diag_.assign(static_cast<size_t>(n_) * d_ * d_, 0.0);
        lower_.assign(static_cast<size_t>(n_) * d_ * d_, 0.0);
        upper_.assign(static_cast<size_t>(n_) * d_ * d_, 0.0);
        rhs_.assign(static_cast<size_t>(n_) * d_, 0.0);
    }

    double& diag(int k, int i, int j) { return diag_[(static_cast<size_t>(k) * d_ + i) * d_ + j]; }
    double& lower(int k, int i, int j) { return lower_[(static_cast<size_t>(k) * d_ + i) * d_ + j]; }
    double& upper(int k, int i, int j) { return upper_[(static_cast<size_t>(k) * d_ + i) * d_ + j]; }
    double& rhs(int k, int i) { return rhs_[static_cast<size_t>(k) * d_ + i]; }

    // Forward elimination D_k <- D_k - L_k D_{k-1}^{-1} U_{k-1}, then back
    // substitution. Throws NumericsError on a singular pivot block.
    std::vector<double> solve() {
        std::vector<Matrix> dinv_u(n_);       // D_k^{-1} U_k after elimination
        std::vector<std::vector<double>> dinv_r(n_);

        for (int k = 0; k < n_; ++k) {
            Matrix dk(d_, d_);
            std::vector<double> rk(d_);
            for (int i = 0; i < d_; ++i) {
                rk[i] = rhs(k, i);
                for (int j = 0; j < d_; ++j) dk(i, j) = diag(k, i, j);
            }
            if (k > 0) {
                // D_k -= L_k * (D_{k-1}^{-1} U_{k-1}); rhs likewise
                for (int i = 0; i < d_; ++i)
                    for (int m = 0; m < d_; ++m) {
                        const double lim = lower(k, i, m);
                        if (lim == 0.0) continue;
                        rk[i] -= lim * dinv_r[k - 1][m];
                        for (int j = 0; j < d_; ++j) dk(i, j) -= lim * dinv_u[k - 1](m, j);
                    }
            }
            // factor dk once: columns of D_k^{-1} U_k plus D_k^{-1} rhs
            Matrix du(d_, d_);
            std::vector<double> col(d_);
            for (int j = 0; j < d_; ++j) {
                for (int i = 0; i < d_; ++i) col[i] = upper(k, i, j);
                std::vector<double> sol;
                try {
                    sol = solve_dense(dk, col);
                } catch (const NumericsError&) {
                    throw NumericsError("degenerate FP system: singular block at node " +
                                        std::to_string(k));
                }
                for (int i = 0; i < d_; ++i) du(i, j) = sol[i];
            }
            std::vector<double> dr;
            try {
                dr = solve_dense(dk, rk);
            } catch (const NumericsError&) {
                throw NumericsError("degenerate FP system: singular block at node " +
                                    std::to_string(k));
            }
            dinv_u[k] = std::move(du);
            dinv_r[k] = std::move(dr);
        }

        std::vector<double> x(static_cast<size_t>(n_) * d_);
        for (int i = 0; i < d_; ++i) x[static_cast<size_t>(n_ - 1) * d_ + i] = dinv_r[n_ - 1][i];
        for (int k = n_ - 2; k >= 0; --k)
            for (int i = 0; i < d_; ++i) {
                double v = dinv_r[k][i];
                for (int j = 0; j < d_; ++j)
                    v -= dinv_u[k](i, j) * x[static_cast<size_t>(k + 1) * d_ + j];
                x[static_cast<size_t>(k) * d_ + i] = v;
            }
        return x;
    }

private:
    int n_, d_;
    std::vector<double> diag_, lower_, upper_, rhs_;
};

}  // namespace

StationaryCDF solve_stationary(const RegimeModel& model, const std::vector<double>& alpha,
                               const std::vector<double>& beta, int mesh_n,
                               double monotonicity_tol) {
    const int d = model.d;
    if (static_cast<int>(alpha.size()) != d || static_cast<int>(beta.size()) != d)
        throw DomainError("boundary vectors must have one entry per regime");
    for (int i = 0; i < d; ++i)
        if (!(alpha[i] < beta[i])) throw DomainError("need alpha_i < beta_i per regime");
    if (mesh_n < 5) throw DomainError("mesh too small");

    const double lo = *std::min_element(alpha.begin(), alpha.end());
    const double hi = *std::max_element(beta.begin(), beta.end());
    Grid grid{lo, hi, mesh_n};
    const double h = grid.h();

    StationaryCDF out;
    out.grid = grid;
    out.p = d >= 2 ? chain_stationary(model.rate_matrix) : std::vector<double>{1.0};
    out.alpha = alpha;
    out.beta = beta;

    // Unknowns at nodes strictly inside each (alpha_i, beta_i). The cells
    // adjacent to the band edges are cut: the Dirichlet values sit at the
    // exact boundary location, so the solution varies continuously with
    // (alpha, beta) instead of stepping by one cell.
    std::vector<int> ia(d), ib(d);           // first/last unknown node per regime
    std::vector<double> h_left(d), h_right(d);
    for (int i = 0; i < d; ++i) {
        ia[i] = static_cast<int>(std::ceil((alpha[i] - lo) / h - 1e-9));
        ib[i] = static_cast<int>(std::floor((beta[i] - lo) / h + 1e-9));
        // boundary coinciding with a node: that node is the Dirichlet point
        if (grid.x(ia[i]) - alpha[i] < 1e-9 * h) ++ia[i];
        if (beta[i] - grid.x(ib[i]) < 1e-9 * h) --ib[i];
        ia[i] = std::max(ia[i], 0);
        ib[i] = std::min(ib[i], mesh_n - 1);
        if (ib[i] - ia[i] < 1)
            throw NumericsError("mesh too coarse: regime band has no interior node");
        h_left[i] = grid.x(ia[i]) - alpha[i];
        h_right[i] = beta[i] - grid.x(ib[i]);
    }

    auto in_band = [&](int k, int j) { return k >= ia[j] && k <= ib[j]; };

    BlockTridiagSolver sys(mesh_n, d);
    for (int k = 0; k < mesh_n; ++k) {
        const double x = grid.x(k);
        for (int i = 0; i < d; ++i) {
            if (!in_band(k, i)) {
                sys.diag(k, i, i) = 1.0;
                sys.rhs(k, i) = (k > ib[i]) ? out.p[i] : 0.0;
                continue;
            }
            const double hl = (k == ia[i]) ? h_left[i] : h;
            const double hr = (k == ib[i]) ? h_right[i] : h;
            const double sig = model.vol(x, i);
            const double s2 = 0.5 * sig * sig;
            const double adv = model.drift(x, i) - model.vol(x, i) * model.vol_x(x, i);
            // nonuniform 3-point weights for mu_xx and mu_x
            const double wl_xx = 2.0 / (hl * (hl + hr));
            const double wr_xx = 2.0 / (hr * (hl + hr));
            const double wc_xx = -(wl_xx + wr_xx);
            const double wl_x = -hr / (hl * (hl + hr));
            const double wr_x = hl / (hr * (hl + hr));
            const double wc_x = (hr - hl) / (hl * hr);

            const double cl = s2 * wl_xx - adv * wl_x;
            const double cr = s2 * wr_xx - adv * wr_x;
            sys.diag(k, i, i) += s2 * wc_xx - adv * wc_x;
            if (k == ia[i])
                sys.rhs(k, i) -= cl * 0.0;  // Dirichlet 0 at alpha_i
            else
                sys.lower(k, i, i) = cl;
            if (k == ib[i])
                sys.rhs(k, i) -= cr * out.p[i];  // Dirichlet p(i) at beta_i
            else
                sys.upper(k, i, i) = cr;

            for (int j = 0; j < d; ++j) {
                const double qji = model.rate_matrix(j, i);
                if (qji == 0.0) continue;
                if (in_band(k, j)) {
                    sys.diag(k, i, j) += qji;
                } else if (k > ib[j]) {
                    sys.rhs(k, i) -= qji * out.p[j];
                }  // else coupling value 0
            }
        }
    }

    const auto solution = sys.solve();
    out.mu.assign(d, std::vector<double>(mesh_n));
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < mesh_n; ++k) {
            double v = solution[static_cast<size_t>(k) * d + i];
            if (!in_band(k, i)) v = (k > ib[i]) ? out.p[i] : 0.0;
            out.mu[i][k] = v;
        }

    // interior residual on the uniform part, relative to the equation scale
    double max_resid = 0.0;
    for (int i = 0; i < d; ++i)
        for (int k = ia[i] + 1; k < ib[i]; ++k) {
            const double x = grid.x(k);
            const double sig = model.vol(x, i);
            const double a2 = 0.5 * sig * sig / (h * h);
            const double adv = (model.drift(x, i) - model.vol(x, i) * model.vol_x(x, i)) / (2.0 * h);
            double r = a2 * (out.mu[i][k + 1] - 2.0 * out.mu[i][k] + out.mu[i][k - 1]) -
                       adv * (out.mu[i][k + 1] - out.mu[i][k - 1]);
            for (int j = 0; j < d; ++j) {
                const double qji = model.rate_matrix(j, i);
                if (qji == 0.0) continue;
                const double coupled = in_band(k, j) ? out.mu[j][k] : (k > ib[j] ? out.p[j] : 0.0);
                r += qji * coupled;
            }
            max_resid = std::max(max_resid, std::abs(r) / (a2 + std::abs(adv) + 1.0));
        }
    out.residual = max_resid;

    double worst_drop = 0.0;
    int worst_i = 0, worst_k = 0;
    for (int i = 0; i < d; ++i)
        for (int k = 0; k + 1 < mesh_n; ++k)
            if (out.mu[i][k] - out.mu[i][k + 1] > worst_drop) {
                worst_drop = out.mu[i][k] - out.mu[i][k + 1];
                worst_i = i;
                worst_k = k;
            }
    if (worst_drop > monotonicity_tol)
        throw NumericsError("monotonicity violation in stationary solve (drop " +
                            std::to_string(worst_drop) + " at regime " + std::to_string(worst_i) +
                            ", x " + std::to_string(grid.x(worst_k)) + ", band [" +
                            std::to_string(alpha[worst_i]) + ", " + std::to_string(beta[worst_i]) +
                            "]); refine the mesh");
    return out;
}

double interaction_moment(const StationaryCDF& law, const ScalarFn& f_map, double* clamped_mass) {
    double moment = 0.0;
    double clamped = 0.0;
    const auto& g = law.grid;
    for (size_t i = 0; i < law.mu.size(); ++i) {
        for (int k = 0; k + 1 < g.n; ++k) {
            double dm = law.mu[i][k + 1] - law.mu[i][k];
            if (dm < 0.0) {
                clamped += -dm;
                dm = 0.0;
            }
            if (dm == 0.0) continue;
            moment += f_map(0.5 * (g.x(k) + g.x(k + 1))) * dm;
        }
    }
    if (clamped_mass) *clamped_mass = clamped;
    return moment;
}

StationaryCheck simulate_stationary_check(const RegimeModel& model, const StationaryCDF& law,
                                          double horizon, double dt, uint64_t seed) {
    const double x0 = 0.5 * (law.alpha[0] + law.beta[0]);
    StationaryCheck chk;
    chk.empirical = occupation_estimate(model, law.alpha, law.beta, x0, 0, horizon, dt, seed,
                                        law.grid.nodes());
    for (size_t i = 0; i < law.mu.size(); ++i)
        for (int k = 0; k < law.grid.n; ++k)
            chk.sup_distance =
                std::max(chk.sup_distance, std::abs(chk.empirical.cdf[i][k] - law.mu[i][k]));
    return chk;
}

}  // namespace rsmfg
