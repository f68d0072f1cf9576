#pragma once

// Generalized Gauss-Laguerre rules (weight s^alpha e^-s on [0, inf)) by
// Golub-Welsch: eigenvalues of the Jacobi matrix give the nodes, squared
// first eigenvector components scaled by Gamma(alpha+1) the weights. The
// tridiagonal QL sweep tracks only the first eigenvector row, and weights
// are kept in log form for log-sum-exp consumers.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "famcure/special.hpp"

namespace famcure {

struct QuadratureRule {
    std::vector<double> nodes;       // ascending
    std::vector<double> log_weights; // -inf where the weight underflows
};

namespace detail {

// Implicit-shift QL on a symmetric tridiagonal matrix. d holds the diagonal
// (becomes eigenvalues), e the subdiagonal in e[0..n-2]; z tracks the first
// row of the accumulated rotations.
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z) {
    const int n = static_cast<int>(d.size());
    if (n == 0) return;
    e.push_back(0.0);
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (iter++ == 60) throw std::runtime_error("tridiagonal_ql: too many iterations");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    f = z[i + 1];
                    z[i + 1] = s * z[i] + c * f;
                    z[i] = c * z[i] - s * f;
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    e.pop_back();
}

} // namespace detail

/// n-point generalized Gauss-Laguerre rule with parameter alpha > -1.
inline QuadratureRule gauss_laguerre(int n, double alpha) {
    if (n < 1) throw std::invalid_argument("gauss_laguerre: n must be >= 1");
    if (!(alpha > -1.0)) throw std::invalid_argument("gauss_laguerre: alpha must be > -1");

    std::vector<double> d(n), e(n > 1 ? n - 1 : 0), z(n, 0.0);
    for (int k = 0; k < n; ++k) d[k] = 2.0 * k + 1.0 + alpha;
    for (int k = 1; k < n; ++k) e[k - 1] = std::sqrt(k * (k + alpha));
    z[0] = 1.0;
    detail::tridiagonal_ql(d, e, z);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.log_weights.resize(n);
    const double log_mu0 = std::lgamma(alpha + 1.0);
    for (int k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        rule.nodes[k] = d[j];
        const double az = std::fabs(z[j]);
        rule.log_weights[k] = az > 0.0 ? log_mu0 + 2.0 * std::log(az)
                                       : -std::numeric_limits<double>::infinity();
    }
    return rule;
}

} // namespace famcure
