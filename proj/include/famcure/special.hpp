#pragma once

// Scalar special functions and summation helpers used across the library:
// regularized incomplete gamma (P, Q, inverse), normal CDF/quantile,
// log-sum-exp and compensated summation.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace famcure {

inline constexpr double kQuantileTol = 1e-12;

inline double log_gamma(double a) { return std::lgamma(a); }

namespace detail {

// Lower incomplete gamma by series, valid for x < a + 1.
inline double gamma_p_series(double a, double x) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int i = 0; i < 600; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw std::runtime_error("gamma_p_series: no convergence");
}

// Upper incomplete gamma by Lentz continued fraction, valid for x >= a + 1.
inline double gamma_q_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 600; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) {
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw std::runtime_error("gamma_q_cf: no convergence");
}

} // namespace detail

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
inline double gamma_p(double a, double x) {
    if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("gamma_p: a must be positive");
    if (!(x >= 0.0)) throw std::invalid_argument("gamma_p: x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return (x < a + 1.0) ? detail::gamma_p_series(a, x) : 1.0 - detail::gamma_q_cf(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double gamma_q(double a, double x) {
    if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("gamma_q: a must be positive");
    if (!(x >= 0.0)) throw std::invalid_argument("gamma_q: x must be nonnegative");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return (x < a + 1.0) ? 1.0 - detail::gamma_p_series(a, x) : detail::gamma_q_cf(a, x);
}

/// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Standard normal quantile (Acklam rational approximation, one Halley refinement).
inline double normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("normal_quantile: u must be in (0,1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double ulow = 0.02425;
    double z;
    if (u < ulow) {
        const double q = std::sqrt(-2.0 * std::log(u));
        z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= 1.0 - ulow) {
        const double q = u - 0.5;
        const double r = q * q;
        z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - u));
        z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(z) - u;
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    const double g = e / pdf;
    z -= g / (1.0 + 0.5 * z * g);
    return z;
}

/// Inverse of gamma_p in x: returns x with P(a, x) = p, to ~1e-12 relative.
inline double gamma_p_inv(double a, double p) {
    if (!(a > 0.0)) throw std::invalid_argument("gamma_p_inv: a must be positive");
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("gamma_p_inv: p must be in [0,1)");
    if (p == 0.0) return 0.0;

    // Wilson-Hilferty starting point, clamped away from zero.
    double x;
    if (a > 0.5) {
        const double z = normal_quantile(p);
        const double t = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a));
        x = a * t * t * t;
        if (!(x > 0.0)) x = a * std::exp((std::log(p) + std::lgamma(a + 1.0)) / a);
    } else {
        x = std::exp((std::log(p) + std::lgamma(a + 1.0)) / a);
    }
    if (!(x > 0.0) || !std::isfinite(x)) x = a;

    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        const double f = gamma_p(a, x) - p;
        if (f > 0.0) hi = x; else lo = x;
        const double logpdf = (a - 1.0) * std::log(x) - x - std::lgamma(a);
        const double df = std::exp(logpdf);
        double step = (df > 0.0) ? f / df : 0.0;
        double xn = x - step;
        if (!(xn > lo) || !(xn < hi) || df == 0.0) {
            xn = std::isinf(hi) ? x * 2.0 : 0.5 * (lo + hi);
        }
        if (std::fabs(xn - x) <= kQuantileTol * std::max(1.0, x)) {
            return xn;
        }
        x = xn;
    }
    return x;
}

/// Quantile of Gamma(shape, rate): smallest x with CDF(x) = p.
inline double gamma_quantile(double shape, double rate, double p) {
    return gamma_p_inv(shape, p) / rate;
}

/// log(sum(exp(v))) with max-shift; empty input or all -inf gives -inf.
inline double log_sum_exp(std::span<const double> v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

/// Neumaier compensated accumulator: deterministic for a fixed input order.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_total(std::span<const double> v) {
    CompensatedSum s;
    for (double x : v) s.add(x);
    return s.value();
}

} // namespace famcure
