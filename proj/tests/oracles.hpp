// Test-only oracles, kept independent of the solver code paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace testor {

// Composite-Simpson integral of f over [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2 != 0) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int k = 1; k < n; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Stationary law of a one-dimensional diffusion reflected on [lo, hi]:
// density proportional to the speed measure m(x) = 2 / (sigma^2(x) s'(x))
// with scale derivative s'(x) = exp(-int_lo^x 2 b / sigma^2). Tabulated once
// on a fine grid with prefix trapezoid sums.
class SpeedMeasureLaw {
public:
    SpeedMeasureLaw(const std::function<double(double)>& drift,
                    const std::function<double(double)>& vol, double lo, double hi,
                    int table_n = 40001)
        : lo_(lo), hi_(hi), h_((hi - lo) / (table_n - 1)) {
        std::vector<double> ratio(table_n), log_sprime(table_n), dens(table_n);
        for (int k = 0; k < table_n; ++k) {
            const double x = lo_ + k * h_;
            const double v = vol(x);
            ratio[k] = 2.0 * drift(x) / (v * v);
        }
        log_sprime[0] = 0.0;
        for (int k = 1; k < table_n; ++k)
            log_sprime[k] = log_sprime[k - 1] - 0.5 * h_ * (ratio[k - 1] + ratio[k]);
        for (int k = 0; k < table_n; ++k) {
            const double x = lo_ + k * h_;
            const double v = vol(x);
            dens[k] = 2.0 / (v * v * std::exp(log_sprime[k]));
        }
        cdf_.resize(table_n);
        cdf_[0] = 0.0;
        for (int k = 1; k < table_n; ++k)
            cdf_[k] = cdf_[k - 1] + 0.5 * h_ * (dens[k - 1] + dens[k]);
        const double total = cdf_.back();
        for (double& c : cdf_) c /= total;
        dens_ = std::move(dens);
        mass_ = total;
    }

    double cdf(double x) const {
        if (x <= lo_) return 0.0;
        if (x >= hi_) return 1.0;
        const double t = (x - lo_) / h_;
        const size_t k = static_cast<size_t>(t);
        const double w = t - k;
        return cdf_[k] * (1.0 - w) + cdf_[std::min(k + 1, cdf_.size() - 1)] * w;
    }

    // normalized integral of f against the stationary density
    double mean_of(const std::function<double(double)>& f) const {
        double acc = 0.0;
        for (size_t k = 0; k + 1 < dens_.size(); ++k) {
            const double xm = lo_ + (k + 0.5) * h_;
            acc += f(xm) * 0.5 * (dens_[k] + dens_[k + 1]) * h_;
        }
        return acc / mass_;
    }

private:
    double lo_, hi_, h_, mass_ = 1.0;
    std::vector<double> cdf_, dens_;
};

inline std::vector<double> speed_measure_cdf(const std::function<double(double)>& drift,
                                             const std::function<double(double)>& vol, double lo,
                                             double hi, const std::vector<double>& eval_points) {
    const SpeedMeasureLaw law(drift, vol, lo, hi);
    std::vector<double> out;
    out.reserve(eval_points.size());
    for (double x : eval_points) out.push_back(law.cdf(x));
    return out;
}

// Bisection root of g on [lo, hi]; assumes one sign change.
inline double bisect(const std::function<double(double)>& g, double lo, double hi,
                     double tol = 1e-12) {
    double flo = g(lo);
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = g(mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace testor
