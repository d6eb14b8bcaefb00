#include "rsmfg/chain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsmfg/errors.hpp"

namespace rsmfg {

Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

std::vector<double> solve_dense(Matrix a, std::vector<double> rhs) {
    const int n = a.rows();
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (std::abs(a(piv, col)) < 1e-14) throw NumericsError("singular linear system");
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            std::swap(rhs[col], rhs[piv]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double m = a(r, col) / a(col, col);
            if (m == 0.0) continue;
            for (int j = col; j < n; ++j) a(r, j) -= m * a(col, j);
            rhs[r] -= m * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = rhs[r];
        for (int j = r + 1; j < n; ++j) s -= a(r, j) * x[j];
        x[r] = s / a(r, r);
    }
    return x;
}

bool is_valid_generator(const Matrix& q, std::string* why) {
    const int d = q.rows();
    if (d < 1 || q.cols() != d) {
        if (why) *why = "generator must be square";
        return false;
    }
    if (d == 1) {
        if (std::abs(q(0, 0)) > 1e-12) {
            if (why) *why = "single-regime generator must be zero";
            return false;
        }
        return true;
    }
    for (int i = 0; i < d; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < d; ++j) {
            row_sum += q(i, j);
            if (i != j && q(i, j) < 0.0) {
                if (why) *why = "negative off-diagonal rate";
                return false;
            }
        }
        if (std::abs(row_sum) > 1e-12) {
            if (why) *why = "row sums must vanish";
            return false;
        }
        if (q(i, i) >= 0.0) {
            if (why) *why = "diagonal rates must be negative";
            return false;
        }
    }
    return true;
}

bool is_irreducible(const Matrix& q) {
    const int d = q.rows();
    if (d == 1) return true;
    // reachability closure over the directed graph of positive rates
    std::vector<char> reach(static_cast<size_t>(d) * d, 0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) reach[i * d + j] = (i == j || q(i, j) > 0.0) ? 1 : 0;
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            if (reach[i * d + k])
                for (int j = 0; j < d; ++j)
                    if (reach[k * d + j]) reach[i * d + j] = 1;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (!reach[i * d + j]) return false;
    return true;
}

std::vector<double> chain_stationary(const Matrix& q) {
    const int d = q.rows();
    if (d == 1) return {1.0};
    std::string why;
    if (!is_valid_generator(q, &why) || !is_irreducible(q))
        throw NumericsError("reducible chain: " + (why.empty() ? std::string("not irreducible") : why));

    // p Q = 0 with sum p = 1: transpose, replace the last equation by the
    // normalization row.
    Matrix a(d, d);
    std::vector<double> rhs(d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = q(j, i);
    for (int j = 0; j < d; ++j) a(d - 1, j) = 1.0;
    rhs[d - 1] = 1.0;

    std::vector<double> p;
    try {
        p = solve_dense(a, rhs);
    } catch (const NumericsError&) {
        throw NumericsError("reducible chain: singular stationary system");
    }
    for (double& v : p)
        if (v < 0.0 && v > -1e-12) v = 0.0;
    for (double v : p)
        if (v < 0.0) throw NumericsError("reducible chain: negative stationary mass");
    return p;
}

std::vector<double> chain_rate_proportions(const Matrix& q) {
    const int d = q.rows();
    std::vector<double> k(d);
    double total = 0.0;
    for (int i = 0; i < d; ++i) {
        k[i] = -q(i, i);
        total += k[i];
    }
    if (total <= 0.0) throw NumericsError("degenerate generator: zero total rate");
    for (double& v : k) v /= total;
    return k;
}

Matrix expm(const Matrix& a) {
    const int n = a.rows();
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += std::abs(a(i, j));
        norm = std::max(norm, row);
    }
    int squarings = 0;
    double scale = 1.0;
    while (norm * scale > 0.5) {
        scale *= 0.5;
        ++squarings;
    }
    Matrix b(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b(i, j) = a(i, j) * scale;

    // Taylor series of exp(b); ||b|| <= 0.5 so ~20 terms reach machine precision.
    Matrix result = Matrix::identity(n);
    Matrix term = Matrix::identity(n);
    for (int k = 1; k <= 24; ++k) {
        term = term * b;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) term(i, j) /= static_cast<double>(k);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) result(i, j) += term(i, j);
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

}  // namespace rsmfg
