#pragma once

// Multivariate statistics for small dense problems (p <= ~10): column
// standardization, correlation, distances and a cyclic Jacobi eigensolver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "pca_ids/error.hpp"

namespace pca_ids::mvstats {

/// Dense row-major n x p matrix of observations.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) return {};
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) throw DimensionMismatch(m.cols_, rows[i].size());
            std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    void append_row(std::span<const double> r) {
        if (rows_ == 0 && cols_ == 0) cols_ = r.size();
        if (r.size() != cols_) throw DimensionMismatch(cols_, r.size());
        data_.insert(data_.end(), r.begin(), r.end());
        ++rows_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// p x p matrix whose setter writes both triangles, so A(i,j) == A(j,i) exactly.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;
    explicit SymmetricMatrix(std::size_t p) : p_(p), data_(p * p, 0.0) {}

    static SymmetricMatrix identity(std::size_t p) {
        SymmetricMatrix m(p);
        for (std::size_t i = 0; i < p; ++i) m.set(i, i, 1.0);
        return m;
    }

    std::size_t size() const { return p_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * p_ + j]; }

    void set(std::size_t i, std::size_t j, double v) {
        data_[i * p_ + j] = v;
        data_[j * p_ + i] = v;
    }

private:
    std::size_t p_ = 0;
    std::vector<double> data_;
};

struct StandardizationParams {
    std::vector<double> mean;
    std::vector<double> std;
    std::vector<bool> degenerate;  // std == 0

    std::size_t dimension() const { return mean.size(); }
};

/// Eigenvalues sorted descending; vectors[i] is the unit eigenvector for values[i].
struct EigenPairs {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;

    std::size_t dimension() const { return values.size(); }
};

inline StandardizationParams fit_standardizer(const Matrix& data) {
    const std::size_t n = data.rows();
    const std::size_t p = data.cols();
    if (n < 2) throw TooFewRows(n);

    StandardizationParams params;
    params.mean.assign(p, 0.0);
    params.std.assign(p, 0.0);
    params.degenerate.assign(p, false);

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < p; ++k) params.mean[k] += data(i, k);
    for (auto& m : params.mean) m /= static_cast<double>(n);

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < p; ++k) {
            const double d = data(i, k) - params.mean[k];
            params.std[k] += d * d;
        }
    }
    for (std::size_t k = 0; k < p; ++k) {
        params.std[k] = std::sqrt(params.std[k] / static_cast<double>(n - 1));
        params.degenerate[k] = params.std[k] == 0.0;
    }
    return params;
}

/// z_k = (x_k - mean_k) / std_k, with degenerate features mapped to 0.
inline std::vector<double> standardize(std::span<const double> x, const StandardizationParams& params) {
    const std::size_t p = params.dimension();
    if (x.size() != p) throw DimensionMismatch(p, x.size());
    std::vector<double> z(p, 0.0);
    for (std::size_t k = 0; k < p; ++k) {
        if (!params.degenerate[k]) z[k] = (x[k] - params.mean[k]) / params.std[k];
    }
    return z;
}

inline SymmetricMatrix correlation_matrix(const Matrix& data, const StandardizationParams& params) {
    const std::size_t n = data.rows();
    const std::size_t p = data.cols();
    if (n < 2) throw TooFewRows(n);
    if (params.dimension() != p) throw DimensionMismatch(p, params.dimension());

    std::vector<double> cov(p * p, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < p; ++i) {
            const double di = data(r, i) - params.mean[i];
            for (std::size_t j = i + 1; j < p; ++j) cov[i * p + j] += di * (data(r, j) - params.mean[j]);
        }
    }

    SymmetricMatrix R(p);
    for (std::size_t i = 0; i < p; ++i) {
        R.set(i, i, 1.0);
        if (params.degenerate[i]) continue;
        for (std::size_t j = i + 1; j < p; ++j) {
            if (params.degenerate[j]) continue;
            const double c = cov[i * p + j] / static_cast<double>(n - 1);
            R.set(i, j, std::clamp(c / (params.std[i] * params.std[j]), -1.0, 1.0));
        }
    }
    return R;
}

inline constexpr double kJacobiTolerance = 1e-10;
inline constexpr int kJacobiMaxSweeps = 100;

namespace detail {

inline double off_diagonal_norm(const std::vector<double>& a, std::size_t p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            if (i != j) s += a[i * p + j] * a[i * p + j];
    return std::sqrt(s);
}

// Flip so the largest-magnitude component is positive. Near-ties resolve to
// the lowest index so the choice is stable under rounding noise.
inline void fix_sign(std::vector<double>& v) {
    double max_abs = 0.0;
    for (double x : v) max_abs = std::max(max_abs, std::abs(x));
    for (double x : v) {
        if (std::abs(x) >= max_abs - 1e-12) {
            if (x < 0.0)
                for (double& y : v) y = -y;
            return;
        }
    }
}

}  // namespace detail

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below `tol`.
inline EigenPairs eigen_sym(const SymmetricMatrix& A, double tol = kJacobiTolerance,
                            int max_sweeps = kJacobiMaxSweeps) {
    const std::size_t p = A.size();
    std::vector<double> a(p * p);
    std::vector<double> v(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        v[i * p + i] = 1.0;
        for (std::size_t j = 0; j < p; ++j) a[i * p + j] = A(i, j);
    }
    auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * p + j]; };

    int sweep = 0;
    while (detail::off_diagonal_norm(a, p) >= tol) {
        if (sweep++ >= max_sweeps) {
            throw NoConvergence("Jacobi eigensolver did not converge in " +
                                std::to_string(max_sweeps) + " sweeps");
        }
        for (std::size_t k = 0; k + 1 < p; ++k) {
            for (std::size_t l = k + 1; l < p; ++l) {
                const double akl = at(k, l);
                if (akl == 0.0) continue;
                const double theta = (at(l, l) - at(k, k)) / (2.0 * akl);
                const double t = std::abs(theta) > 1e150
                                     ? 0.5 / theta
                                     : std::copysign(1.0, theta) /
                                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t m = 0; m < p; ++m) {
                    const double amk = at(m, k);
                    const double aml = at(m, l);
                    at(m, k) = c * amk - s * aml;
                    at(m, l) = s * amk + c * aml;
                }
                for (std::size_t m = 0; m < p; ++m) {
                    const double akm = at(k, m);
                    const double alm = at(l, m);
                    at(k, m) = c * akm - s * alm;
                    at(l, m) = s * akm + c * alm;
                }
                at(k, l) = 0.0;
                at(l, k) = 0.0;

                for (std::size_t m = 0; m < p; ++m) {
                    const double vmk = v[m * p + k];
                    const double vml = v[m * p + l];
                    v[m * p + k] = c * vmk - s * vml;
                    v[m * p + l] = s * vmk + c * vml;
                }
            }
        }
    }

    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return at(i, i) > at(j, j); });

    EigenPairs pairs;
    pairs.values.reserve(p);
    pairs.vectors.reserve(p);
    for (auto col : order) {
        pairs.values.push_back(at(col, col));
        std::vector<double> e(p);
        for (std::size_t m = 0; m < p; ++m) e[m] = v[m * p + col];
        detail::fix_sign(e);
        pairs.vectors.push_back(std::move(e));
    }
    return pairs;
}

inline double euclidean_sq(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionMismatch(x.size(), y.size());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

inline double mahalanobis_sq(std::span<const double> x, std::span<const double> mean,
                             const SymmetricMatrix& S_inv) {
    const std::size_t p = S_inv.size();
    if (x.size() != p) throw DimensionMismatch(p, x.size());
    if (mean.size() != p) throw DimensionMismatch(p, mean.size());
    std::vector<double> d(p);
    for (std::size_t i = 0; i < p; ++i) d[i] = x[i] - mean[i];
    double s = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < p; ++j) row += S_inv(i, j) * d[j];
        s += d[i] * row;
    }
    return s;
}

/// Principal-component scores y_i = e_i . z, in descending-eigenvalue order.
inline std::vector<double> project(std::span<const double> z, const EigenPairs& pairs) {
    const std::size_t p = pairs.dimension();
    if (z.size() != p) throw DimensionMismatch(p, z.size());
    std::vector<double> y(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        const auto& e = pairs.vectors[i];
        double s = 0.0;
        for (std::size_t k = 0; k < p; ++k) s += e[k] * z[k];
        y[i] = s;
    }
    return y;
}

/// Max |e_i . e_j - delta_ij| over all pairs.
inline double orthonormality_residual(const EigenPairs& pairs) {
    const std::size_t p = pairs.dimension();
    double worst = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < p; ++k) dot += pairs.vectors[i][k] * pairs.vectors[j][k];
            worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
        }
    }
    return worst;
}

/// |sum(lambda) - p|; zero for an exact correlation-matrix spectrum.
inline double trace_residual(const EigenPairs& pairs) {
    const double sum = std::accumulate(pairs.values.begin(), pairs.values.end(), 0.0);
    return std::abs(sum - static_cast<double>(pairs.dimension()));
}

}  // namespace pca_ids::mvstats
