#pragma once

// Distribution models: Student's t, the quantile-defined heavy-tailed
// family Q_lambda, the unit-second-moment rescaling of t, and the
// reference distributions used as negative controls. Each model bundles
// pdf/cdf/quantile plus support and moment-existence flags so downstream
// code can pick integration strategies and reject invalid moment orders.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfam/numerics.hpp"

namespace qfam {

inline constexpr double kPi = 3.14159265358979323846;

/// Student's t with location mu and scale sigma.
struct StudentTParams {
    double nu;
    double mu = 0.0;
    double sigma = 1.0;
};

/// Quantile family Q(u) = d + c (u - lambda) / (lambda (1-lambda) (1-u)^lambda u^(1-lambda)).
struct QFamilyParams {
    double lambda;
    double c;
    double d = 0.0;
};

inline void validate(const StudentTParams& p) {
    if (!std::isfinite(p.nu) || !(p.nu > 0.0)) {
        throw std::domain_error("student t: nu must be a positive finite number");
    }
    if (!std::isfinite(p.mu)) {
        throw std::domain_error("student t: mu must be finite");
    }
    if (!std::isfinite(p.sigma) || !(p.sigma > 0.0)) {
        throw std::domain_error("student t: sigma must be positive and finite");
    }
}

inline void validate(const QFamilyParams& p) {
    if (!std::isfinite(p.lambda) || !(p.lambda > 0.0 && p.lambda < 1.0)) {
        throw std::domain_error("q-family: lambda must lie strictly inside (0,1)");
    }
    if (!std::isfinite(p.c) || !(p.c > 0.0)) {
        throw std::domain_error("q-family: c must be positive and finite");
    }
    if (!std::isfinite(p.d)) {
        throw std::domain_error("q-family: d must be finite");
    }
}

// ---------------------------------------------------------------------------
// Student's t

inline double t_pdf(const StudentTParams& p, double x) {
    validate(p);
    const double z = (x - p.mu) / p.sigma;
    if (p.nu == 2.0) {
        // Closed form (2 + z^2)^(-3/2), kept as sqrt-and-divide so the result
        // is a fixed IEEE expression; at z = 0 it is exactly 1/(2 sqrt 2).
        const double w = 2.0 + z * z;
        return 1.0 / (w * std::sqrt(w)) / p.sigma;
    }
    const double log_norm = log_gamma(0.5 * (p.nu + 1.0)) - log_gamma(0.5 * p.nu) -
                            0.5 * std::log(kPi * p.nu);
    return std::exp(log_norm - 0.5 * (p.nu + 1.0) * std::log1p(z * z / p.nu)) / p.sigma;
}

inline double t_cdf(const StudentTParams& p, double x) {
    validate(p);
    const double z = (x - p.mu) / p.sigma;
    if (p.nu == 2.0) {
        // Closed form consistent with the nu=2 density (2+z^2)^(-3/2):
        // differentiating 0.5 (1 + z / sqrt(2 + z^2)) recovers it exactly.
        return 0.5 * (1.0 + z / std::sqrt(2.0 + z * z));
    }
    if (z == 0.0) return 0.5;
    const double tail = 0.5 * regularized_incomplete_beta(0.5 * p.nu, 0.5,
                                                          p.nu / (p.nu + z * z));
    return z > 0.0 ? 1.0 - tail : tail;
}

inline double t_quantile(const StudentTParams& p, double u) {
    validate(p);
    if (!(u > 0.0 && u < 1.0)) {
        throw std::domain_error("t_quantile: u must lie strictly inside (0,1)");
    }
    if (u == 0.5) return p.mu;
    if (p.nu == 2.0) {
        const double z = (u - 0.5) * std::sqrt(2.0 / (u * (1.0 - u)));
        return p.mu + p.sigma * z;
    }
    // The inversion's residual tolerance lives in probability space, so keep
    // it proportional to the tail mass: a fixed 1e-13 slack at u ~ 1e-12
    // would leave the returned x with only a couple of correct digits.
    const double f_tol = 2e-13 * std::min(u, 1.0 - u);
    return invert_monotone([&p](double x) { return t_cdf(p, x); }, u,
                           {p.mu - p.sigma, p.mu + p.sigma}, f_tol);
}

// ---------------------------------------------------------------------------
// Unit-variance rescaling of t: density proportional to
// (1 + x^2/(nu-2))^(-(nu+1)/2), defined for nu > 2. It equals the law of
// X * sqrt((nu-2)/nu) for X ~ t_nu and has second moment exactly 1.

inline double z_pdf(double nu, double x) {
    if (!std::isfinite(nu) || !(nu > 2.0)) {
        throw std::domain_error("z_pdf: nu must exceed 2");
    }
    const double log_norm = log_gamma(0.5 * (nu + 1.0)) - log_gamma(0.5 * nu) -
                            0.5 * std::log(kPi * (nu - 2.0));
    return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(x * x / (nu - 2.0)));
}

// ---------------------------------------------------------------------------
// Quantile family

namespace detail {

// Core quantile evaluation given both tails of u. Selecting the algebraic
// form of (u - lambda) by which tail is small keeps full relative accuracy
// at both ends of (0,1).
inline double qfam_quantile_tails(const QFamilyParams& p, double u, double one_minus_u) {
    const double num = (u <= 0.5) ? (u - p.lambda) : ((1.0 - p.lambda) - one_minus_u);
    const double den = p.lambda * (1.0 - p.lambda) * std::pow(one_minus_u, p.lambda) *
                       std::pow(u, 1.0 - p.lambda);
    return p.d + p.c * num / den;
}

}  // namespace detail

/// Quantile of the family at u, with u clamped to [1e-15, 1-1e-15] before
/// evaluation so extreme arguments cannot overflow downstream arithmetic.
inline double qfam_quantile(const QFamilyParams& p, double u) {
    validate(p);
    if (!(u > 0.0 && u < 1.0)) {
        throw std::domain_error("qfam_quantile: u must lie strictly inside (0,1)");
    }
    const double uc = std::min(std::max(u, 1e-15), 1.0 - 1e-15);
    return detail::qfam_quantile_tails(p, uc, 1.0 - uc);
}

/// Derivative Q'(u) = c (1-u)^(-(1+lambda)) u^(-(2-lambda)).
inline double qfam_quantile_derivative(const QFamilyParams& p, double u) {
    validate(p);
    if (!(u > 0.0 && u < 1.0)) {
        throw std::domain_error("qfam_quantile_derivative: u must lie strictly inside (0,1)");
    }
    return p.c * std::pow(1.0 - u, -(1.0 + p.lambda)) * std::pow(u, -(2.0 - p.lambda));
}

struct CdfPdf {
    double cdf;
    double pdf;
};

/// Numerically invert the family quantile: find u with Q(u) = x, then read
/// the density off the derivative, pdf = (1-u)^(1+lambda) u^(2-lambda) / c.
/// The search runs in s = -log(1-u), which resolves both tails of u.
inline CdfPdf qfam_cdf_pdf(const QFamilyParams& p, double x) {
    validate(p);
    if (!std::isfinite(x)) {
        throw std::domain_error("qfam_cdf_pdf: x must be finite");
    }
    const double lam = p.lambda;
    auto quant = [&p, lam](double s) {
        const double one_minus_u = std::exp(-s);
        const double u = -std::expm1(-s);
        const double num = (1.0 - lam) - one_minus_u;  // == u - lambda
        const double den = lam * (1.0 - lam) * std::exp(-lam * s) *
                           std::pow(u, 1.0 - lam);
        return p.d + p.c * num / den;
    };
    auto result_at = [&](double s) {
        const double u = -std::expm1(-s);
        const double pdf = std::exp(-(1.0 + lam) * s) * std::pow(u, 2.0 - lam) / p.c;
        return CdfPdf{u, pdf};
    };

    const double s_center = -std::log1p(-lam);  // Q(s_center) == d up to rounding
    double lo = 0.5 * s_center;
    double hi = s_center + 1.0;
    if (x >= p.d) {
        double step = 1.0;
        while (hi < 700.0 && quant(hi) < x) {
            hi = std::min(hi + step, 700.0);
            step *= 2.0;
        }
        if (quant(hi) < x) return result_at(hi);  // cdf saturated at 1-1e-304
    } else {
        const double floor = std::numeric_limits<double>::min();
        int halvings = 0;
        while (quant(lo) > x && ++halvings <= 1100) lo = std::max(0.5 * lo, floor);
        if (quant(lo) > x) return result_at(lo);  // cdf saturated near 0
    }
    const double tol = 1e-12 * std::max(1.0, std::abs(x));
    const double s = invert_monotone(quant, x, {lo, hi}, tol);
    return result_at(s);
}

// ---------------------------------------------------------------------------
// Distribution models

/// A distribution as the verification layers consume it. `cheap_cdf`
/// selects the truncated-moment strategy: direct integration against the
/// density when cdf/pdf are cheap closed forms, probability-domain
/// integration against the quantile otherwise.
struct DistributionModel {
    std::string name;
    Interval support = whole_line();
    bool has_first_moment = true;
    bool has_second_moment = true;
    bool cheap_cdf = true;
    std::function<double(double)> pdf;
    std::function<double(double)> cdf;
    std::function<double(double)> quantile;
    // Optional tail-stable quantile taking (u, 1-u) separately.
    std::function<double(double, double)> quantile_from_tails;

    double tail_quantile(double u, double one_minus_u) const {
        return quantile_from_tails ? quantile_from_tails(u, one_minus_u) : quantile(u);
    }
};

inline DistributionModel student_t(const StudentTParams& p) {
    validate(p);
    DistributionModel m;
    m.name = "student_t(nu=" + std::to_string(p.nu) + ",mu=" + std::to_string(p.mu) +
             ",sigma=" + std::to_string(p.sigma) + ")";
    m.has_first_moment = p.nu > 1.0;
    m.has_second_moment = p.nu > 2.0;
    m.pdf = [p](double x) { return t_pdf(p, x); };
    m.cdf = [p](double x) { return t_cdf(p, x); };
    m.quantile = [p](double u) { return t_quantile(p, u); };
    // Symmetry about mu keeps the upper tail at full relative precision.
    m.quantile_from_tails = [p](double u, double one_minus_u) {
        return one_minus_u < u ? 2.0 * p.mu - t_quantile(p, one_minus_u)
                               : t_quantile(p, u);
    };
    return m;
}

inline DistributionModel z_distribution(double nu) {
    if (!std::isfinite(nu) || !(nu > 2.0)) {
        throw std::domain_error("z_distribution: nu must exceed 2");
    }
    const double scale = std::sqrt(nu / (nu - 2.0));
    const StudentTParams base{nu, 0.0, 1.0};
    DistributionModel m;
    m.name = "z(nu=" + std::to_string(nu) + ")";
    m.pdf = [nu](double x) { return z_pdf(nu, x); };
    m.cdf = [base, scale](double x) { return t_cdf(base, x * scale); };
    m.quantile = [base, scale](double u) { return t_quantile(base, u) / scale; };
    m.quantile_from_tails = [base, scale](double u, double one_minus_u) {
        return one_minus_u < u ? -t_quantile(base, one_minus_u) / scale
                               : t_quantile(base, u) / scale;
    };
    return m;
}

inline DistributionModel q_family(const QFamilyParams& p) {
    validate(p);
    DistributionModel m;
    m.name = "qfamily(lambda=" + std::to_string(p.lambda) + ",c=" + std::to_string(p.c) +
             ",d=" + std::to_string(p.d) + ")";
    m.has_first_moment = true;    // mean exists and equals d
    m.has_second_moment = false;  // both tails are too heavy for r = 2
    m.cheap_cdf = false;
    m.pdf = [p](double x) { return qfam_cdf_pdf(p, x).pdf; };
    m.cdf = [p](double x) { return qfam_cdf_pdf(p, x).cdf; };
    m.quantile = [p](double u) { return qfam_quantile(p, u); };
    m.quantile_from_tails = [p](double u, double one_minus_u) {
        return detail::qfam_quantile_tails(p, u, one_minus_u);
    };
    return m;
}

inline DistributionModel normal(double mu, double sigma) {
    if (!std::isfinite(mu) || !std::isfinite(sigma) || !(sigma > 0.0)) {
        throw std::domain_error("normal: mu must be finite and sigma positive");
    }
    DistributionModel m;
    m.name = "normal(mu=" + std::to_string(mu) + ",sigma=" + std::to_string(sigma) + ")";
    m.pdf = [mu, sigma](double x) {
        const double z = (x - mu) / sigma;
        return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * kPi));
    };
    m.cdf = [mu, sigma](double x) {
        return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0)));
    };
    m.quantile = [cdf = m.cdf, mu, sigma](double u) {
        if (!(u > 0.0 && u < 1.0)) {
            throw std::domain_error("normal quantile: u must lie strictly inside (0,1)");
        }
        return invert_monotone(cdf, u, {mu - sigma, mu + sigma}, 1e-14);
    };
    m.quantile_from_tails = [q = m.quantile, mu](double u, double one_minus_u) {
        return one_minus_u < u ? 2.0 * mu - q(one_minus_u) : q(u);
    };
    return m;
}

inline DistributionModel uniform(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
        throw std::domain_error("uniform: endpoints must be finite with a < b");
    }
    DistributionModel m;
    m.name = "uniform(a=" + std::to_string(a) + ",b=" + std::to_string(b) + ")";
    m.support = {a, b};
    m.pdf = [a, b](double x) { return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0; };
    m.cdf = [a, b](double x) {
        if (x <= a) return 0.0;
        if (x >= b) return 1.0;
        return (x - a) / (b - a);
    };
    m.quantile = [a, b](double u) {
        if (!(u > 0.0 && u < 1.0)) {
            throw std::domain_error("uniform quantile: u must lie strictly inside (0,1)");
        }
        return a + u * (b - a);
    };
    m.quantile_from_tails = [a, b](double u, double one_minus_u) {
        return one_minus_u < u ? b - one_minus_u * (b - a) : a + u * (b - a);
    };
    return m;
}

/// Exponential(1) shifted to zero mean: X = E - 1 with support [-1, inf).
inline DistributionModel shifted_exponential() {
    DistributionModel m;
    m.name = "shifted_exponential";
    m.support = {-1.0, std::numeric_limits<double>::infinity()};
    m.pdf = [](double x) { return x < -1.0 ? 0.0 : std::exp(-(x + 1.0)); };
    m.cdf = [](double x) { return x < -1.0 ? 0.0 : -std::expm1(-(x + 1.0)); };
    m.quantile = [](double u) {
        if (!(u > 0.0 && u < 1.0)) {
            throw std::domain_error("shifted_exponential quantile: u must lie strictly inside (0,1)");
        }
        return -1.0 - std::log1p(-u);
    };
    m.quantile_from_tails = [](double /*u*/, double one_minus_u) {
        return -1.0 - std::log(one_minus_u);
    };
    return m;
}

// ---------------------------------------------------------------------------
// Sampling and fitting

/// Inverse-transform draws from an explicitly seeded mt19937_64. The
/// uniforms are ((r >> 11) + 0.5) * 2^-53, strictly inside (0,1), so the
/// same seed reproduces the same draws everywhere.
inline std::vector<double> sample(const DistributionModel& dist, std::size_t count,
                                  std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    std::vector<double> out(count);
    for (auto& v : out) {
        const double u = (static_cast<double>(engine() >> 11) + 0.5) * 0x1p-53;
        v = dist.quantile(u);
    }
    return out;
}

/// Least-squares fit of family parameters to a target's quantile function on
/// a u-grid. The search runs in (logit lambda, log c, d), so every visited
/// point is a valid parameter triple. The returned objective never exceeds
/// the initial one.
inline QFamilyParams fit_qfamily(const DistributionModel& target,
                                 const std::vector<double>& u_grid,
                                 const QFamilyParams& initial) {
    validate(initial);
    if (u_grid.size() < 5) {
        throw std::domain_error("fit_qfamily: need at least 5 grid points");
    }
    std::vector<double> targets(u_grid.size());
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
        const double u = u_grid[i];
        if (!(u > 0.0 && u < 1.0)) {
            throw std::domain_error("fit_qfamily: grid values must lie strictly inside (0,1)");
        }
        targets[i] = target.quantile(u);
        if (!std::isfinite(targets[i])) {
            throw std::domain_error("fit_qfamily: target quantile is not finite on the grid");
        }
    }

    auto unpack = [](const std::vector<double>& theta) {
        const double t0 = std::min(std::max(theta[0], -30.0), 30.0);
        const double t1 = std::min(std::max(theta[1], -300.0), 300.0);
        return QFamilyParams{1.0 / (1.0 + std::exp(-t0)), std::exp(t1), theta[2]};
    };
    auto objective = [&](const std::vector<double>& theta) {
        const QFamilyParams p = unpack(theta);
        double sum = 0.0;
        for (std::size_t i = 0; i < u_grid.size(); ++i) {
            const double q = detail::qfam_quantile_tails(p, u_grid[i], 1.0 - u_grid[i]);
            const double diff = q - targets[i];
            sum += diff * diff;
        }
        return sum;
    };

    const std::vector<double> theta0 = {
        std::log(initial.lambda / (1.0 - initial.lambda)), std::log(initial.c), initial.d};
    const std::vector<double> theta = minimize(objective, theta0, 1e-12, 40000);
    return unpack(theta);
}

}  // namespace qfam
