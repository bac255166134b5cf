#pragma once

// Order-statistic machinery: truncated moments of a distribution on either
// side of a threshold, the average conditional moment of the order
// statistics below/above a conditioning value, and the conditional density
// of one order statistic given another. These are the measurable halves of
// the regression identities checked by the characterization layer.

#include <cmath>
#include <stdexcept>
#include <string>

#include "qfam/distributions.hpp"
#include "qfam/numerics.hpp"

namespace qfam {

/// Raised when a requested moment does not exist for the distribution.
class moment_error : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Raised when the conditioning event has probability below 1e-12 on the
/// side being averaged, which makes the conditional moment ill-posed
/// numerically.
class conditioning_error : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

enum class Side { below, above };

/// Which order statistics are averaged: ranks 1..k-1 (below) or k+1..n
/// (above) of a sample of size n, conditioned on the k-th order statistic.
/// r is the moment order of the statistic being averaged.
struct OrderStatContext {
    int n;
    int k;
    int r;
};

namespace detail {

inline void check_moment_exists(const DistributionModel& dist, int r) {
    if (r < 0 || r > 2) {
        throw std::domain_error("truncated_moment: moment order must be 0, 1, or 2");
    }
    if (r >= 1 && !dist.has_first_moment) {
        throw moment_error("truncated_moment: " + dist.name + " has no first moment");
    }
    if (r == 2 && !dist.has_second_moment) {
        throw moment_error("truncated_moment: " + dist.name + " has no second moment");
    }
}

inline double int_pow(double t, int r) {
    double v = 1.0;
    for (int i = 0; i < r; ++i) v *= t;
    return v;
}

// Probability-domain tail integral: \int over the tail of Q(u)^r du with the
// substitution u = p v^K (below) or 1-u = (1-p) w^K (above). The power K
// compresses the integrable endpoint blow-up of Q into a smooth integrand;
// the quantile is evaluated through its tail-stable form so no probability
// is lost to clamping.
inline double tail_integral_probability_domain(const DistributionModel& dist, int r,
                                               double mass, Side side) {
    constexpr double K = 40.0;
    auto integrand = [&dist, r, mass, side](double v) {
        const double tail = mass * std::pow(v, K);
        if (tail <= 0.0) return 0.0;  // underflow deep in the tail: true limit
        const double u = side == Side::below ? tail : 1.0 - tail;
        const double one_minus_u = side == Side::below ? 1.0 - tail : tail;
        const double q = dist.tail_quantile(u, one_minus_u);
        return int_pow(q, r) * K * mass * std::pow(v, K - 1.0);
    };
    return integrate(integrand, {0.0, 1.0}, 1e-11, 1e-13).value;
}

inline double truncated_moment_given_p(const DistributionModel& dist, int r, double x,
                                       double p, Side side) {
    if (dist.cheap_cdf) {
        Interval range = side == Side::below
                             ? Interval{dist.support.lower, std::min(x, dist.support.upper)}
                             : Interval{std::max(x, dist.support.lower), dist.support.upper};
        if (!(range.lower < range.upper)) return 0.0;  // no mass on this side
        auto integrand = [&dist, r](double t) { return int_pow(t, r) * dist.pdf(t); };
        return integrate(integrand, range, 1e-11, 1e-13).value;
    }
    const double mass = side == Side::below ? p : 1.0 - p;
    if (mass <= 0.0) return 0.0;
    return tail_integral_probability_domain(dist, r, mass, side);
}

}  // namespace detail

/// \int t^r dF(t) over (-inf, x] (below) or [x, inf) (above).
inline double truncated_moment(const DistributionModel& dist, int r, double x, Side side) {
    detail::check_moment_exists(dist, r);
    if (!std::isfinite(x)) {
        throw std::domain_error("truncated_moment: x must be finite");
    }
    const double p = dist.cheap_cdf ? 0.0 : dist.cdf(x);  // only the slow path needs it
    return detail::truncated_moment_given_p(dist, r, x, p, side);
}

/// Average r-th conditional moment of the order statistics on one side of
/// the k-th, given X_(k) = x. By the exchangeability argument this equals
/// the truncated moment divided by the tail mass, independent of n, k:
///   below: (1/(k-1)) sum_{i<k} E[X_(i)^r | X_(k)=x] = \int_{-inf}^x t^r dF / F(x)
///   above: (1/(n-k)) sum_{i>k} E[X_(i)^r | X_(k)=x] = \int_x^inf t^r dF / (1-F(x))
inline double avg_cond_moment(const DistributionModel& dist, const OrderStatContext& ctx,
                              double x, Side side) {
    if (ctx.n < 2) {
        throw std::domain_error("avg_cond_moment: sample size n must be at least 2");
    }
    if (ctx.k < 1 || ctx.k > ctx.n) {
        throw std::domain_error("avg_cond_moment: rank k must lie in [1, n]");
    }
    if (side == Side::below && ctx.k < 2) {
        throw std::domain_error("avg_cond_moment: below-side average needs k >= 2");
    }
    if (side == Side::above && ctx.k > ctx.n - 1) {
        throw std::domain_error("avg_cond_moment: above-side average needs k <= n-1");
    }
    if (ctx.r < 1 || ctx.r > 2) {
        throw std::domain_error("avg_cond_moment: moment power r must be 1 or 2");
    }
    detail::check_moment_exists(dist, ctx.r);
    if (!std::isfinite(x)) {
        throw std::domain_error("avg_cond_moment: x must be finite");
    }

    const double p = dist.cdf(x);
    const double mass = side == Side::below ? p : 1.0 - p;
    if (mass < 1e-12) {
        throw conditioning_error("avg_cond_moment: conditioning mass " +
                                 std::to_string(mass) + " is degenerate at x = " +
                                 std::to_string(x));
    }
    return detail::truncated_moment_given_p(dist, ctx.r, x, p, side) / mass;
}

/// Conditional density of X_(j) given X_(k) = x, evaluated at t. For j < k
/// this is the density of the (j)-th of k-1 i.i.d. draws truncated above at
/// x; for j > k, of the (j-k)-th of n-k draws truncated below at x.
inline double cond_density(const DistributionModel& dist, int n, int k, int j, double x,
                           double t) {
    if (n < 2) {
        throw std::domain_error("cond_density: sample size n must be at least 2");
    }
    if (k < 1 || k > n || j < 1 || j > n) {
        throw std::domain_error("cond_density: ranks must lie in [1, n]");
    }
    if (j == k) {
        throw std::domain_error("cond_density: j must differ from the conditioning rank k");
    }
    const double Fx = dist.cdf(x);

    if (j < k) {
        if (Fx < 1e-12) {
            throw conditioning_error("cond_density: F(x) is degenerate below x");
        }
        if (t >= x) return 0.0;
        const double Ft = dist.cdf(t);
        const double gap = std::max(Fx - Ft, 0.0);
        const double log_comb = log_gamma(static_cast<double>(k)) -
                                log_gamma(static_cast<double>(j)) -
                                log_gamma(static_cast<double>(k - j));
        return std::exp(log_comb) * std::pow(Ft, j - 1) * std::pow(gap, k - 1 - j) *
               dist.pdf(t) / std::pow(Fx, k - 1);
    }

    if (1.0 - Fx < 1e-12) {
        throw conditioning_error("cond_density: 1-F(x) is degenerate above x");
    }
    if (t <= x) return 0.0;
    const double Ft = dist.cdf(t);
    const double gap = std::max(Ft - Fx, 0.0);
    const double log_comb = log_gamma(static_cast<double>(n - k + 1)) -
                            log_gamma(static_cast<double>(j - k)) -
                            log_gamma(static_cast<double>(n - j + 1));
    return std::exp(log_comb) * std::pow(gap, j - k - 1) * std::pow(1.0 - Ft, n - j) *
           dist.pdf(t) / std::pow(1.0 - Fx, n - k);
}

}  // namespace qfam
