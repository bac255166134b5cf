#pragma once

// Regression-identity residuals. Each function measures how far a
// distribution is from satisfying one of the order-statistic regression
// identities that pin down the quantile family (first-moment identity) or
// Student's t (second-moment identity), plus the differential-equation
// forms those identities integrate to. A residual near zero across a grid
// is the positive signal; negative controls must produce visibly nonzero
// residuals.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qfam/distributions.hpp"
#include "qfam/order_stats.hpp"

namespace qfam {

/// Grid evaluation of an identity: lhs and rhs per point, their difference,
/// and the max-deviation verdict against a tolerance.
struct ResidualReport {
    std::vector<double> x_grid;
    std::vector<double> lhs;
    std::vector<double> rhs;
    std::vector<double> delta;
    double max_abs_delta = 0.0;
    double tol = 0.0;
    bool passed = false;
};

namespace detail {

inline void check_two_sided_context(const OrderStatContext& ctx) {
    if (ctx.n < 3) {
        throw std::domain_error("characterization: sample size n must be at least 3");
    }
    if (ctx.k < 2 || ctx.k > ctx.n - 1) {
        throw std::domain_error("characterization: rank k must lie in [2, n-1]");
    }
}

template <class Eval>
ResidualReport run_grid(const std::vector<double>& grid, double tol, Eval&& eval) {
    if (grid.empty()) {
        throw std::domain_error("residual grid: need at least one evaluation point");
    }
    if (!(tol > 0.0)) {
        throw std::domain_error("residual grid: tolerance must be positive");
    }
    ResidualReport report;
    report.x_grid = grid;
    report.tol = tol;
    report.lhs.reserve(grid.size());
    report.rhs.reserve(grid.size());
    report.delta.reserve(grid.size());
    for (double x : grid) {
        auto [lhs, rhs] = eval(x);
        report.lhs.push_back(lhs);
        report.rhs.push_back(rhs);
        const double d = lhs - rhs;
        report.delta.push_back(d);
        report.max_abs_delta = std::max(report.max_abs_delta, std::abs(d));
    }
    report.passed = report.max_abs_delta <= tol;
    return report;
}

}  // namespace detail

/// Default verification grid: images of equally spaced probabilities in
/// [1e-4, 1-1e-4] under the distribution's quantile, so every point is
/// comfortably interior while still probing both tails.
inline std::vector<double> quantile_grid(const DistributionModel& dist, int points = 41,
                                         double u_min = 1e-4, double u_max = 1.0 - 1e-4) {
    if (points < 2) {
        throw std::domain_error("quantile_grid: need at least two points");
    }
    if (!(u_min > 0.0 && u_min < u_max && u_max < 1.0)) {
        throw std::domain_error("quantile_grid: need 0 < u_min < u_max < 1");
    }
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) {
        const double u = u_min + (u_max - u_min) * i / (points - 1);
        grid[i] = dist.quantile(u);
    }
    return grid;
}

// ---------------------------------------------------------------------------
// First-moment identity (weighted spacing)

/// Residual of the first-moment regression identity at conditioning value x:
///   lambda (x - m1_below) - (1 - lambda) (m1_above - x)
/// where m1_side is the average conditional first moment of the order
/// statistics on that side of rank k. Identically zero exactly when the
/// parent is a member of the quantile family with asymmetry lambda.
inline double weighted_spacing_residual(const DistributionModel& dist, double lambda,
                                        const OrderStatContext& ctx, double x) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw std::domain_error("weighted_spacing_residual: lambda must lie inside (0,1)");
    }
    detail::check_two_sided_context(ctx);
    const OrderStatContext first{ctx.n, ctx.k, 1};
    const double m1_below = avg_cond_moment(dist, first, x, Side::below);
    const double m1_above = avg_cond_moment(dist, first, x, Side::above);
    return lambda * (x - m1_below) - (1.0 - lambda) * (m1_above - x);
}

inline ResidualReport weighted_spacing_report(const DistributionModel& dist, double lambda,
                                              const OrderStatContext& ctx,
                                              const std::vector<double>& grid, double tol) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw std::domain_error("weighted_spacing_report: lambda must lie inside (0,1)");
    }
    detail::check_two_sided_context(ctx);
    const OrderStatContext first{ctx.n, ctx.k, 1};
    return detail::run_grid(grid, tol, [&](double x) {
        const double m1_below = avg_cond_moment(dist, first, x, Side::below);
        const double m1_above = avg_cond_moment(dist, first, x, Side::above);
        return std::pair<double, double>{lambda * (x - m1_below),
                                         (1.0 - lambda) * (m1_above - x)};
    });
}

// ---------------------------------------------------------------------------
// Second-moment identity

/// Both algebraic routes to the second-moment identity residual. The
/// simplified route is
///   (nu-1) x (m1_above - m1_below) - (nu-2) (m2_above - m2_below);
/// the expanded route evaluates the full quadratic form
///   ((nu-1) x / 2)^2 - (nu-1)(nu-2) x m1 + (nu-2)^2 m2
/// on each side and differences them, which equals (nu-2) times the
/// simplified residual. Both are computed from the same conditional
/// moments, so their gap measures pure algebra/rounding error.
struct SecondMomentEvaluation {
    double residual;        // simplified route
    double expanded_below;  // quadratic form, below side
    double expanded_above;  // quadratic form, above side
    double route_gap;       // |expanded difference / (nu-2) - simplified|
};

inline SecondMomentEvaluation second_moment_evaluate(const DistributionModel& dist,
                                                     double nu, const OrderStatContext& ctx,
                                                     double x) {
    if (!(nu >= 3.0) || std::floor(nu) != nu) {
        throw std::domain_error("second_moment identity: nu must be an integer >= 3");
    }
    detail::check_two_sided_context(ctx);
    const OrderStatContext first{ctx.n, ctx.k, 1};
    const OrderStatContext second{ctx.n, ctx.k, 2};
    const double m1b = avg_cond_moment(dist, first, x, Side::below);
    const double m1a = avg_cond_moment(dist, first, x, Side::above);
    const double m2b = avg_cond_moment(dist, second, x, Side::below);
    const double m2a = avg_cond_moment(dist, second, x, Side::above);

    const double simplified = (nu - 1.0) * x * (m1a - m1b) - (nu - 2.0) * (m2a - m2b);
    auto quadratic = [nu, x](double m1, double m2) {
        const double half = 0.5 * (nu - 1.0) * x;
        return half * half - (nu - 1.0) * (nu - 2.0) * x * m1 +
               (nu - 2.0) * (nu - 2.0) * m2;
    };
    const double below = quadratic(m1b, m2b);
    const double above = quadratic(m1a, m2a);
    const double gap = std::abs((below - above) / (nu - 2.0) - simplified);
    return {simplified, below, above, gap};
}

/// Simplified-route residual; throws if the two algebraic routes disagree
/// by more than 1e-9, which would indicate an arithmetic bug rather than a
/// property of the distribution.
inline double second_moment_residual(const DistributionModel& dist, double nu,
                                     const OrderStatContext& ctx, double x) {
    const SecondMomentEvaluation eval = second_moment_evaluate(dist, nu, ctx, x);
    if (!(eval.route_gap <= 1e-9)) {
        throw convergence_error("second_moment_residual: algebraic routes disagree by " +
                                std::to_string(eval.route_gap));
    }
    return eval.residual;
}

/// Grid report for the second-moment identity. Because both sides grow
/// like x^2 toward the tails, the residuals are also reported divided by
/// (1 + x^2); the pass/fail verdict uses the raw residual only.
struct SecondMomentReport {
    ResidualReport report;
    std::vector<double> delta_normalized;
    double max_abs_delta_normalized = 0.0;
};

inline SecondMomentReport second_moment_report(const DistributionModel& dist, double nu,
                                               const OrderStatContext& ctx,
                                               const std::vector<double>& grid, double tol) {
    if (!(nu >= 3.0) || std::floor(nu) != nu) {
        throw std::domain_error("second_moment identity: nu must be an integer >= 3");
    }
    detail::check_two_sided_context(ctx);
    const OrderStatContext first{ctx.n, ctx.k, 1};
    const OrderStatContext second{ctx.n, ctx.k, 2};
    SecondMomentReport out;
    out.report = detail::run_grid(grid, tol, [&](double x) {
        const double m1b = avg_cond_moment(dist, first, x, Side::below);
        const double m1a = avg_cond_moment(dist, first, x, Side::above);
        const double m2b = avg_cond_moment(dist, second, x, Side::below);
        const double m2a = avg_cond_moment(dist, second, x, Side::above);
        return std::pair<double, double>{(nu - 1.0) * x * (m1a - m1b),
                                         (nu - 2.0) * (m2a - m2b)};
    });
    out.delta_normalized.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double dn = out.report.delta[i] / (1.0 + grid[i] * grid[i]);
        out.delta_normalized.push_back(dn);
        out.max_abs_delta_normalized = std::max(out.max_abs_delta_normalized, std::abs(dn));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Differential-equation residuals

/// Residual of the first-order ODE satisfied by quantile-family members:
///   F(x)^(2-lambda) (1-F(x))^(1+lambda) - c f(x).
inline double quantile_ode_residual(const DistributionModel& dist, double lambda, double c,
                                    double x) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw std::domain_error("quantile_ode_residual: lambda must lie inside (0,1)");
    }
    if (!(c > 0.0)) {
        throw std::domain_error("quantile_ode_residual: c must be positive");
    }
    const double F = dist.cdf(x);
    return std::pow(F, 2.0 - lambda) * std::pow(1.0 - F, 1.0 + lambda) - c * dist.pdf(x);
}

inline ResidualReport quantile_ode_report(const DistributionModel& dist, double lambda,
                                          double c, const std::vector<double>& grid,
                                          double tol) {
    if (!(lambda > 0.0 && lambda < 1.0) || !(c > 0.0)) {
        throw std::domain_error("quantile_ode_report: invalid lambda or c");
    }
    return detail::run_grid(grid, tol, [&](double x) {
        const double F = dist.cdf(x);
        return std::pair<double, double>{
            std::pow(F, 2.0 - lambda) * std::pow(1.0 - F, 1.0 + lambda), dist.pdf(x) * c};
    });
}

/// Residual of the integrated moment equation satisfied by the rescaled
/// unit-variance t distribution:
///   -(nu-1) x A1(x) - (nu-2) (F(x) - A2(x)),
/// with A_r(x) the below-truncated r-th moment of `dist`. Zero for the
/// rescaled t with the same nu; nonzero for other laws.
inline double moment_equation_residual(const DistributionModel& dist, double nu, double x) {
    if (!(nu >= 3.0) || std::floor(nu) != nu) {
        throw std::domain_error("moment_equation_residual: nu must be an integer >= 3");
    }
    const double a1 = truncated_moment(dist, 1, x, Side::below);
    const double a2 = truncated_moment(dist, 2, x, Side::below);
    const double F = dist.cdf(x);
    return -(nu - 1.0) * x * a1 - (nu - 2.0) * (F - a2);
}

inline double moment_equation_residual(double nu, double x) {
    return moment_equation_residual(z_distribution(nu), nu, x);
}

inline ResidualReport moment_equation_report(const DistributionModel& dist, double nu,
                                             const std::vector<double>& grid, double tol) {
    if (!(nu >= 3.0) || std::floor(nu) != nu) {
        throw std::domain_error("moment_equation_report: nu must be an integer >= 3");
    }
    return detail::run_grid(grid, tol, [&](double x) {
        const double a1 = truncated_moment(dist, 1, x, Side::below);
        const double a2 = truncated_moment(dist, 2, x, Side::below);
        const double F = dist.cdf(x);
        return std::pair<double, double>{-(nu - 1.0) * x * a1, (nu - 2.0) * (F - a2)};
    });
}

/// Central-difference slope of the log-density of the rescaled t versus its
/// analytic value -(nu+1) x / (nu - 2 + x^2). Checks that the density
/// actually solves the differential equation the moment identities reduce
/// to, independently of any quadrature.
inline double log_slope_residual(double nu, double x, double h = 1e-5) {
    if (!(nu >= 3.0) || std::floor(nu) != nu) {
        throw std::domain_error("log_slope_residual: nu must be an integer >= 3");
    }
    if (!(h > 0.0)) {
        throw std::domain_error("log_slope_residual: step h must be positive");
    }
    const double fd =
        (std::log(z_pdf(nu, x + h)) - std::log(z_pdf(nu, x - h))) / (2.0 * h);
    const double analytic = -(nu + 1.0) * x / (nu - 2.0 + x * x);
    return fd - analytic;
}

inline ResidualReport log_slope_report(double nu, const std::vector<double>& grid,
                                       double tol, double h = 1e-5) {
    if (!(nu >= 3.0) || std::floor(nu) != nu) {
        throw std::domain_error("log_slope_report: nu must be an integer >= 3");
    }
    return detail::run_grid(grid, tol, [&](double x) {
        const double fd =
            (std::log(z_pdf(nu, x + h)) - std::log(z_pdf(nu, x - h))) / (2.0 * h);
        return std::pair<double, double>{fd, -(nu + 1.0) * x / (nu - 2.0 + x * x)};
    });
}

}  // namespace qfam
