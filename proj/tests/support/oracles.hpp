#pragma once

// Independent reference computations used to check the library. Nothing here
// calls into pca_ids numerics.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace pca_ids::oracle {

using Rows = std::vector<std::vector<double>>;

/// Welford running mean and sample variance, column by column.
inline void streaming_moments(const Rows& data, std::vector<double>& mean, std::vector<double>& sd) {
    const std::size_t p = data.front().size();
    mean.assign(p, 0.0);
    std::vector<double> m2(p, 0.0);
    double n = 0.0;
    for (const auto& row : data) {
        n += 1.0;
        for (std::size_t k = 0; k < p; ++k) {
            const double delta = row[k] - mean[k];
            mean[k] += delta / n;
            m2[k] += delta * (row[k] - mean[k]);
        }
    }
    sd.resize(p);
    for (std::size_t k = 0; k < p; ++k) sd[k] = std::sqrt(m2[k] / (n - 1.0));
}

/// Textbook pairwise Pearson correlation, computed from scratch for each pair.
inline double pearson(const Rows& data, std::size_t i, std::size_t j) {
    const double n = static_cast<double>(data.size());
    double si = 0, sj = 0;
    for (const auto& r : data) {
        si += r[i];
        sj += r[j];
    }
    const double mi = si / n, mj = sj / n;
    double cij = 0, cii = 0, cjj = 0;
    for (const auto& r : data) {
        cij += (r[i] - mi) * (r[j] - mj);
        cii += (r[i] - mi) * (r[i] - mi);
        cjj += (r[j] - mj) * (r[j] - mj);
    }
    return cij / std::sqrt(cii * cjj);
}

/// Gauss-Jordan inverse with partial pivoting.
inline Rows invert(Rows a) {
    const std::size_t n = a.size();
    Rows inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (a[piv][c] == 0.0) throw std::runtime_error("singular");
        std::swap(a[c], a[piv]);
        std::swap(inv[c], inv[piv]);
        const double d = a[c][c];
        for (std::size_t k = 0; k < n; ++k) {
            a[c][k] /= d;
            inv[c][k] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a[r][c];
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < n; ++k) {
                a[r][k] -= f * a[c][k];
                inv[r][k] -= f * inv[c][k];
            }
        }
    }
    return inv;
}

inline double det3(const Rows& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// Roots of det(A - x I) for a symmetric 3x3 matrix, found by scanning for
/// sign changes and bisecting each bracket. Returned descending.
inline std::vector<double> char_cubic_roots(const Rows& A) {
    auto f = [&](double x) {
        Rows m = A;
        for (int i = 0; i < 3; ++i) m[i][i] -= x;
        return det3(m);
    };
    // Gershgorin bound on the spectrum.
    double bound = 0.0;
    for (int i = 0; i < 3; ++i) {
        double s = 0;
        for (int j = 0; j < 3; ++j) s += std::abs(A[i][j]);
        bound = std::max(bound, s);
    }
    const double lo = -bound - 1.0, hi = bound + 1.0;
    const int steps = 200000;
    std::vector<double> roots;
    double x0 = lo, f0 = f(lo);
    for (int s = 1; s <= steps; ++s) {
        const double x1 = lo + (hi - lo) * s / steps;
        const double f1 = f(x1);
        if (f0 == 0.0) roots.push_back(x0);
        else if ((f0 < 0) != (f1 < 0) && f1 != 0.0) {
            double a = x0, b = x1, fa = f0;
            for (int it = 0; it < 200; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = f(m);
                if ((fm < 0) == (fa < 0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    std::sort(roots.rbegin(), roots.rend());
    return roots;
}

/// Null vector of (A - lambda I) for a 3x3 matrix: the largest cross product
/// of two of its rows, normalized.
inline std::vector<double> null_vector3(const Rows& A, double lambda) {
    Rows m = A;
    for (int i = 0; i < 3; ++i) m[i][i] -= lambda;
    auto cross = [](const std::vector<double>& a, const std::vector<double>& b) {
        return std::vector<double>{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
    };
    std::vector<double> best;
    double best_norm = -1;
    for (auto [i, j] : std::array<std::pair<int, int>, 3>{{{0, 1}, {0, 2}, {1, 2}}}) {
        auto c = cross(m[i], m[j]);
        double nrm = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
        if (nrm > best_norm) {
            best_norm = nrm;
            best = c;
        }
    }
    for (auto& x : best) x /= best_norm;
    return best;
}

/// n x p data with random mixing so columns are correlated.
inline Rows correlated_data(std::mt19937_64& rng, std::size_t n, std::size_t p) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Rows mix(p, std::vector<double>(p));
    for (auto& r : mix)
        for (auto& x : r) x = u(rng);
    std::vector<double> scale(p), shift(p);
    for (std::size_t k = 0; k < p; ++k) {
        scale[k] = std::pow(10.0, 3.0 * u(rng));
        shift[k] = 100.0 * u(rng);
    }
    Rows data(n, std::vector<double>(p));
    std::vector<double> latent(p);
    for (auto& row : data) {
        for (auto& l : latent) l = g(rng);
        for (std::size_t k = 0; k < p; ++k) {
            double v = 0;
            for (std::size_t j = 0; j < p; ++j) v += mix[k][j] * latent[j];
            row[k] = shift[k] + scale[k] * v;
        }
    }
    return data;
}

}  // namespace pca_ids::oracle
