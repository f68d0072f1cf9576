#pragma once

// Proper parametric survival distributions for the susceptible fraction.
// Quantiles are on the survival scale: quantile_survival(d, u) returns the
// time t with survival(d, t) = u.

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "famcure/special.hpp"

namespace famcure {

namespace detail {
inline void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}
inline bool pos(double x) { return std::isfinite(x) && x > 0.0; }
} // namespace detail

struct Weibull {
    double shape;
    double scale;
    Weibull(double shape_, double scale_) : shape(shape_), scale(scale_) {
        detail::require(detail::pos(shape) && detail::pos(scale), "Weibull: shape and scale must be positive");
    }
};

struct GammaDist {
    double shape;
    double scale;
    GammaDist(double shape_, double scale_) : shape(shape_), scale(scale_) {
        detail::require(detail::pos(shape) && detail::pos(scale), "GammaDist: shape and scale must be positive");
    }
};

struct Lognormal {
    double mu;     // log-years
    double sigma;  // log-scale sd
    Lognormal(double mu_, double sigma_) : mu(mu_), sigma(sigma_) {
        detail::require(std::isfinite(mu) && detail::pos(sigma), "Lognormal: sigma must be positive");
    }
};

// Two-parameter Gamma shifted by a location threshold: survival is 1 below it.
struct ThreeParamGamma {
    double shape;
    double scale;
    double location;
    ThreeParamGamma(double shape_, double scale_, double location_)
        : shape(shape_), scale(scale_), location(location_) {
        detail::require(detail::pos(shape) && detail::pos(scale), "ThreeParamGamma: shape and scale must be positive");
        detail::require(std::isfinite(location) && location >= 0.0, "ThreeParamGamma: location must be >= 0");
    }
};

using Baseline = std::variant<Weibull, GammaDist, Lognormal, ThreeParamGamma>;

namespace detail {
inline void check_time(double t) {
    if (!(std::isfinite(t) && t >= 0.0)) throw std::invalid_argument("time must be finite and >= 0");
}
} // namespace detail

inline double survival(const Baseline& d, double t) {
    detail::check_time(t);
    return std::visit(
        [t](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Weibull>) {
                return std::exp(-std::pow(t / v.scale, v.shape));
            } else if constexpr (std::is_same_v<T, GammaDist>) {
                return gamma_q(v.shape, t / v.scale);
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                if (t == 0.0) return 1.0;
                return 1.0 - normal_cdf((std::log(t) - v.mu) / v.sigma);
            } else {
                if (t <= v.location) return 1.0;
                return gamma_q(v.shape, (t - v.location) / v.scale);
            }
        },
        d);
}

inline double log_density(const Baseline& d, double t) {
    detail::check_time(t);
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    return std::visit(
        [t](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Weibull>) {
                if (t == 0.0) {
                    if (v.shape == 1.0) return -std::log(v.scale);
                    return v.shape > 1.0 ? -std::numeric_limits<double>::infinity()
                                         : std::numeric_limits<double>::infinity();
                }
                const double z = t / v.scale;
                return std::log(v.shape / v.scale) + (v.shape - 1.0) * std::log(z) - std::pow(z, v.shape);
            } else if constexpr (std::is_same_v<T, GammaDist>) {
                if (t == 0.0) {
                    if (v.shape == 1.0) return -std::log(v.scale);
                    return v.shape > 1.0 ? -std::numeric_limits<double>::infinity()
                                         : std::numeric_limits<double>::infinity();
                }
                const double z = t / v.scale;
                return (v.shape - 1.0) * std::log(z) - z - std::lgamma(v.shape) - std::log(v.scale);
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                if (t == 0.0) return -std::numeric_limits<double>::infinity();
                const double z = (std::log(t) - v.mu) / v.sigma;
                return -std::log(t * v.sigma) - 0.5 * std::log(2.0 * M_PI) - 0.5 * z * z;
            } else {
                if (t <= v.location) return neg_inf;
                const double z = (t - v.location) / v.scale;
                return (v.shape - 1.0) * std::log(z) - z - std::lgamma(v.shape) - std::log(v.scale);
            }
        },
        d);
}

inline double density(const Baseline& d, double t) {
    const double ld = log_density(d, t);
    if (std::isinf(ld) && ld > 0.0) return std::numeric_limits<double>::infinity();
    return std::exp(ld);
}

/// t such that survival(d, t) = u, for u in (0,1).
inline double quantile_survival(const Baseline& d, double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("quantile_survival: u must be in (0,1)");
    return std::visit(
        [u](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Weibull>) {
                return v.scale * std::pow(-std::log(u), 1.0 / v.shape);
            } else if constexpr (std::is_same_v<T, GammaDist>) {
                return v.scale * gamma_p_inv(v.shape, 1.0 - u);
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                return std::exp(v.mu + v.sigma * normal_quantile(1.0 - u));
            } else {
                return v.location + v.scale * gamma_p_inv(v.shape, 1.0 - u);
            }
        },
        d);
}

inline std::string baseline_name(const Baseline& d) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Weibull>) return "weibull";
            else if constexpr (std::is_same_v<T, GammaDist>) return "gamma";
            else if constexpr (std::is_same_v<T, Lognormal>) return "lognormal";
            else return "gamma3";
        },
        d);
}

inline std::vector<double> baseline_params(const Baseline& d) {
    return std::visit(
        [](const auto& v) -> std::vector<double> {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Weibull>) return {v.shape, v.scale};
            else if constexpr (std::is_same_v<T, GammaDist>) return {v.shape, v.scale};
            else if constexpr (std::is_same_v<T, Lognormal>) return {v.mu, v.sigma};
            else return {v.shape, v.scale, v.location};
        },
        d);
}

/// Builds a baseline from its CLI/config name and ordered parameter list:
/// weibull(shape, scale), gamma(shape, scale), lognormal(mu, sigma),
/// gamma3(shape, scale, location).
inline Baseline make_baseline(const std::string& name, const std::vector<double>& params) {
    auto need = [&](std::size_t n) {
        if (params.size() != n) {
            throw std::invalid_argument("baseline '" + name + "' expects " + std::to_string(n) + " parameters");
        }
    };
    if (name == "weibull") { need(2); return Weibull(params[0], params[1]); }
    if (name == "gamma") { need(2); return GammaDist(params[0], params[1]); }
    if (name == "lognormal") { need(2); return Lognormal(params[0], params[1]); }
    if (name == "gamma3") { need(3); return ThreeParamGamma(params[0], params[1], params[2]); }
    throw std::invalid_argument("unknown baseline distribution: " + name);
}

} // namespace famcure
