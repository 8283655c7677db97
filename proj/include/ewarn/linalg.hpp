#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "ewarn/errors.hpp"

namespace ewarn::linalg {

/// Minimal dense row-major matrix. Sized for this library's problems
/// (correlation matrices up to ~25x25, LM normal equations up to ~100x100).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> out(rows);
        for (std::size_t i = 0; i < rows; ++i) out[i] = (*this)(i, j);
        return out;
    }

    bool operator==(const Matrix&) const = default;
};

inline std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    std::vector<double> y(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
/// vectors stores eigenvector j in column j.
struct SymmetricEigen {
    std::vector<double> values;
    Matrix vectors;
};

/// Cyclic Jacobi rotations until the off-diagonal norm vanishes.
/// Deterministic sweep order, so results are reproducible bit-for-bit.
inline SymmetricEigen eigen_symmetric(Matrix a) {
    if (a.rows != a.cols || a.rows == 0) throw InvalidInput("eigen_symmetric: matrix must be square and non-empty");
    const std::size_t n = a.rows;
    Matrix v(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
        return std::sqrt(2.0 * s);
    };

    const double scale = std::max(1.0, std::sqrt(std::inner_product(a.data.begin(), a.data.end(), a.data.begin(), 0.0)));
    for (int sweep = 0; sweep < 100 && off_norm() > 1e-14 * scale; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

/// In-place lower Cholesky factor of a symmetric positive-definite matrix.
/// Returns false (matrix half-overwritten) on a non-positive pivot.
inline bool cholesky_factor(Matrix& a) {
    const std::size_t n = a.rows;
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        a(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / ljj;
        }
    }
    return true;
}

/// Solves L Lᵀ x = b given the lower factor from cholesky_factor.
inline std::vector<double> cholesky_solve(const Matrix& l, std::span<const double> b) {
    const std::size_t n = l.rows;
    std::vector<double> x(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x[k];
        x[i] = s / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

/// One-shot SPD solve; returns false if the factorization fails.
inline bool solve_spd(Matrix a, std::span<const double> b, std::vector<double>& x) {
    if (!cholesky_factor(a)) return false;
    x = cholesky_solve(a, b);
    return true;
}

/// Weighted least squares of y on the columns of the design matrix
/// (normal equations, Cholesky). Throws NumericError when the weighted
/// normal matrix is not positive definite.
inline std::vector<double> weighted_least_squares(const Matrix& design, std::span<const double> y,
                                                  std::span<const double> w) {
    const std::size_t n = design.rows, p = design.cols;
    if (y.size() != n || w.size() != n) throw InvalidInput("weighted_least_squares: size mismatch");
    Matrix ata(p, p, 0.0);
    std::vector<double> atb(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = design.row(i);
        for (std::size_t a = 0; a < p; ++a) {
            const double wa = w[i] * row[a];
            atb[a] += wa * y[i];
            for (std::size_t b = a; b < p; ++b) ata(a, b) += wa * row[b];
        }
    }
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < a; ++b) ata(a, b) = ata(b, a);
    std::vector<double> beta;
    if (!solve_spd(std::move(ata), atb, beta))
        throw NumericError("weighted least squares design is rank deficient");
    return beta;
}

} // namespace ewarn::linalg
