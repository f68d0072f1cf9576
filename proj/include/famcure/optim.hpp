#pragma once

// Derivative-free simplex search, BFGS polish with central-difference
// gradients, and numeric derivative helpers. All routines minimize.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace famcure {

using Objective = std::function<double(const std::vector<double>&)>;

struct SimplexResult {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    std::size_t n_evals = 0;
    bool stagnated = false;  // spread fell below tol over a full cycle
};

/// Nelder-Mead with standard reflection/expansion/contraction coefficients.
/// Stops when the simplex function spread drops below tol relative to the
/// best value, or when the evaluation budget runs out.
inline SimplexResult nelder_mead(const Objective& f, std::vector<double> x0, double tol,
                                 std::size_t max_evals, double initial_step = 0.25) {
    const std::size_t n = x0.size();
    SimplexResult res;
    std::vector<std::vector<double>> pts(n + 1, x0);
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        pts[i + 1][i] += initial_step * std::max(1.0, std::fabs(x0[i]));
    }
    for (std::size_t i = 0; i <= n; ++i) {
        fv[i] = f(pts[i]);
        ++res.n_evals;
    }

    auto order = [&] {
        std::vector<std::size_t> idx(n + 1);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> p2(n + 1);
        std::vector<double> f2(n + 1);
        for (std::size_t i = 0; i <= n; ++i) { p2[i] = pts[idx[i]]; f2[i] = fv[idx[i]]; }
        pts.swap(p2);
        fv.swap(f2);
    };

    order();
    while (res.n_evals < max_evals) {
        if (std::isfinite(fv[0]) && std::isfinite(fv[n]) &&
            fv[n] - fv[0] <= tol * (1.0 + std::fabs(fv[0]))) {
            res.stagnated = true;
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k];
        }
        for (auto& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + coef * (pts[n][k] - centroid[k]);
            return p;
        };

        const auto xr = blend(-1.0);
        const double fr = f(xr);
        ++res.n_evals;
        if (fr < fv[0]) {
            const auto xe = blend(-2.0);
            const double fe = f(xe);
            ++res.n_evals;
            if (fe < fr) { pts[n] = xe; fv[n] = fe; }
            else { pts[n] = xr; fv[n] = fr; }
        } else if (fr < fv[n - 1]) {
            pts[n] = xr;
            fv[n] = fr;
        } else {
            const bool outside = fr < fv[n];
            const auto xc = blend(outside ? -0.5 : 0.5);
            const double fc = f(xc);
            ++res.n_evals;
            if (fc < std::min(fr, fv[n])) {
                pts[n] = xc;
                fv[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[0][k] + 0.5 * (pts[i][k] - pts[0][k]);
                    fv[i] = f(pts[i]);
                    ++res.n_evals;
                }
            }
        }
        order();
    }
    res.x = pts[0];
    res.f = fv[0];
    return res;
}

/// Central-difference gradient.
inline std::vector<double> numeric_gradient(const Objective& f, const std::vector<double>& x,
                                            double step = 1e-5) {
    std::vector<double> g(x.size());
    std::vector<double> xp = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = step * std::max(1.0, std::fabs(x[i]));
        xp[i] = x[i] + h;
        const double fp = f(xp);
        xp[i] = x[i] - h;
        const double fm = f(xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// Central-difference Hessian at fixed step (row-major, symmetrized).
inline std::vector<double> numeric_hessian_fixed(const Objective& f, const std::vector<double>& x,
                                                 double h) {
    const std::size_t n = x.size();
    std::vector<double> hess(n * n, 0.0);
    const double f0 = f(x);
    std::vector<double> xp = x;
    for (std::size_t i = 0; i < n; ++i) {
        xp[i] = x[i] + h;
        const double fp = f(xp);
        xp[i] = x[i] - h;
        const double fm = f(xp);
        xp[i] = x[i];
        hess[i * n + i] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            xp[i] = x[i] + h; xp[j] = x[j] + h;
            const double fpp = f(xp);
            xp[j] = x[j] - h;
            const double fpm = f(xp);
            xp[i] = x[i] - h; xp[j] = x[j] + h;
            const double fmp = f(xp);
            xp[j] = x[j] - h;
            const double fmm = f(xp);
            xp[i] = x[i]; xp[j] = x[j];
            const double v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            hess[i * n + j] = v;
            hess[j * n + i] = v;
        }
    }
    return hess;
}

/// Central-difference Hessian with one Richardson refinement:
/// H = (4 H(h/2) - H(h)) / 3.
inline std::vector<double> numeric_hessian(const Objective& f, const std::vector<double>& x,
                                           double step = 1e-4) {
    const auto h1 = numeric_hessian_fixed(f, x, step);
    const auto h2 = numeric_hessian_fixed(f, x, 0.5 * step);
    std::vector<double> out(h1.size());
    for (std::size_t i = 0; i < h1.size(); ++i) out[i] = (4.0 * h2[i] - h1[i]) / 3.0;
    return out;
}

struct BfgsResult {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    double grad_max_norm = std::numeric_limits<double>::infinity();
    std::size_t n_evals = 0;
};

/// BFGS polish from a near-optimal point; gradients by central differences.
inline BfgsResult bfgs_polish(const Objective& f, std::vector<double> x0, std::size_t max_iters = 120,
                              double grad_tol = 1e-6) {
    const std::size_t n = x0.size();
    BfgsResult res;
    res.x = std::move(x0);
    res.f = f(res.x);
    ++res.n_evals;
    std::vector<double> hinv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) hinv[i * n + i] = 1.0;

    auto grad = [&](const std::vector<double>& x) {
        res.n_evals += 2 * n;
        return numeric_gradient(f, x);
    };
    std::vector<double> g = grad(res.x);

    auto max_norm = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double e : v) m = std::max(m, std::fabs(e));
        return m;
    };

    for (std::size_t it = 0; it < max_iters; ++it) {
        res.grad_max_norm = max_norm(g);
        if (res.grad_max_norm < grad_tol) break;

        std::vector<double> dir(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) dir[i] -= hinv[i * n + j] * g[j];
        }
        double slope = 0.0;
        for (std::size_t i = 0; i < n; ++i) slope += dir[i] * g[i];
        if (!(slope < 0.0)) {  // reset to steepest descent
            for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
            slope = 0.0;
            for (std::size_t i = 0; i < n; ++i) slope += dir[i] * g[i];
            if (!(slope < 0.0)) break;
        }

        double alpha = 1.0;
        std::vector<double> xn(n);
        double fn = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (std::size_t i = 0; i < n; ++i) xn[i] = res.x[i] + alpha * dir[i];
            fn = f(xn);
            ++res.n_evals;
            if (std::isfinite(fn) && fn <= res.f + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;

        const std::vector<double> gn = grad(xn);
        std::vector<double> s(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = xn[i] - res.x[i];
            y[i] = gn[i] - g[i];
        }
        double sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) sy += s[i] * y[i];
        if (sy > 1e-12) {
            // BFGS inverse update
            std::vector<double> hy(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) hy[i] += hinv[i * n + j] * y[j];
            }
            double yhy = 0.0;
            for (std::size_t i = 0; i < n; ++i) yhy += y[i] * hy[i];
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    hinv[i * n + j] += ((sy + yhy) * s[i] * s[j]) / (sy * sy) -
                                       (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        res.x = xn;
        res.f = fn;
        g = gn;
    }
    res.grad_max_norm = max_norm(g);
    return res;
}

/// Cholesky inverse of a symmetric positive definite matrix (row-major);
/// returns empty when the factorization fails.
inline std::vector<double> spd_inverse(const std::vector<double>& a, std::size_t n) {
    std::vector<double> l(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
            if (i == j) {
                if (!(s > 0.0)) return {};
                l[i * n + i] = std::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    // invert L, then A^-1 = L^-T L^-1
    std::vector<double> li(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        li[i * n + i] = 1.0 / l[i * n + i];
        for (std::size_t j = 0; j < i; ++j) {
            double s = 0.0;
            for (std::size_t k = j; k < i; ++k) s += l[i * n + k] * li[k * n + j];
            li[i * n + j] = -s / l[i * n + i];
        }
    }
    std::vector<double> inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = i; k < n; ++k) s += li[k * n + i] * li[k * n + j];
            inv[i * n + j] = s;
            inv[j * n + i] = s;
        }
    }
    return inv;
}

} // namespace famcure
