#pragma once

#include <string>
#include <vector>

namespace rsmfg {

/// Dense d x d matrix in row-major order. Small d (number of regimes), so no
/// sparse machinery is warranted.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

    double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

/// Solve the dense system a * x = rhs by Gaussian elimination with partial
/// pivoting. Throws NumericsError if the matrix is numerically singular.
std::vector<double> solve_dense(Matrix a, std::vector<double> rhs);

/// Checks that q is a conservative generator: rows sum to zero (1e-12),
/// off-diagonal entries nonnegative, diagonal entries negative (d >= 2).
bool is_valid_generator(const Matrix& q, std::string* why = nullptr);

/// True if every state reaches every other state through positive
/// off-diagonal rates.
bool is_irreducible(const Matrix& q);

/// Stationary distribution of the chain with generator q: the unique
/// probability vector p with p Q = 0. Throws NumericsError("reducible chain")
/// for reducible or invalid generators. For d == 1 returns {1}.
std::vector<double> chain_stationary(const Matrix& q);

/// The jump-rate-proportional vector kappa_i / sum_j kappa_j. Coincides with
/// the stationary law only for special generators; exposed so callers can
/// report the gap against chain_stationary.
std::vector<double> chain_rate_proportions(const Matrix& q);

/// Matrix exponential exp(a) by scaling-and-squaring with a Taylor core.
/// Intended for generator matrices scaled by a time step.
Matrix expm(const Matrix& a);

}  // namespace rsmfg
