#pragma once

#include <vector>

#include "rsmfg/errors.hpp"

namespace rsmfg {

/// Uniform truncation grid inside the state interval.
struct Grid {
    double x_lo = 0.0;
    double x_hi = 1.0;
    int n = 3;

    double h() const { return (x_hi - x_lo) / (n - 1); }
    double x(int k) const { return x_lo + k * h(); }

    std::vector<double> nodes() const {
        std::vector<double> xs(n);
        for (int k = 0; k < n; ++k) xs[k] = x(k);
        return xs;
    }

    void validate() const {
        if (!(x_lo < x_hi)) throw DomainError("grid: x_lo must be below x_hi");
        if (n < 3) throw DomainError("grid: need at least 3 nodes");
    }

    /// Nearest node index to x, clamped to [0, n-1].
    int nearest(double x_val) const {
        int k = static_cast<int>((x_val - x_lo) / h() + 0.5);
        if (k < 0) k = 0;
        if (k > n - 1) k = n - 1;
        return k;
    }
};

}  // namespace rsmfg
