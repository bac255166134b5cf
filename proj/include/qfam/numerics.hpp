#pragma once

// Foundational numerics: special functions, adaptive quadrature over
// possibly unbounded intervals, monotone-function inversion, and a
// derivative-free simplex minimizer. Everything here is a pure function
// of its arguments and safe to call concurrently.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace qfam {

/// Raised when an iterative scheme exhausts its budget without meeting
/// its tolerance.
class convergence_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Raised when bracket expansion fails to straddle the target.
class bracket_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Possibly unbounded interval; endpoints may be +-infinity.
struct Interval {
    double lower;
    double upper;

    bool bounded_below() const { return std::isfinite(lower); }
    bool bounded_above() const { return std::isfinite(upper); }
};

inline Interval whole_line() {
    return {-std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
}

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;  // absolute
    long long evaluations = 0;
};

/// ln Gamma(x) for x > 0.
inline double log_gamma(double x) {
    if (!(x > 0.0)) {
        throw std::domain_error("log_gamma: argument must be positive, got " +
                                std::to_string(x));
    }
    return boost::math::lgamma(x);
}

/// Regularized incomplete beta function I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::domain_error("regularized_incomplete_beta: a and b must be positive");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("regularized_incomplete_beta: x must lie in [0,1], got " +
                                std::to_string(x));
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    return boost::math::ibeta(a, b, x);
}

namespace detail {

// 15-point Kronrod extension of 7-point Gauss-Legendre (positive nodes,
// descending). The embedded Gauss rule uses the odd-indexed Kronrod nodes.
inline constexpr double kGkNodes[8] = {
    0.9914553711208126392069, 0.9491079123427585245262,
    0.8648644233597690727897, 0.7415311855993944398639,
    0.5860872354676911302941, 0.4058451513773971669066,
    0.2077849550078984676007, 0.0};
inline constexpr double kGkWeights[8] = {
    0.0229353220105292249637, 0.0630920926299785532907,
    0.1047900103222501838399, 0.1406532597155259187452,
    0.1690047266392679028266, 0.1903505780647854099133,
    0.2044329400752988924141, 0.2094821410847278280130};
inline constexpr double kGaussWeights[4] = {
    0.1294849661688696932706, 0.2797053914892766679015,
    0.3818300505051189449504, 0.4179591836734693877551};

struct PanelEstimate {
    double value;
    double error;
    double resabs;  // integral of |f|, for roundoff floors
};

template <class F>
PanelEstimate gauss_kronrod_15(F&& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    const double fc = f(center);
    double kronrod = kGkWeights[7] * fc;
    double gauss = kGaussWeights[3] * fc;
    double resabs = kGkWeights[7] * std::abs(fc);
    double fv[15];
    fv[14] = fc;

    for (int j = 0; j < 7; ++j) {
        const double dx = half * kGkNodes[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kronrod += kGkWeights[j] * (f1 + f2);
        resabs += kGkWeights[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) gauss += kGaussWeights[(j - 1) / 2] * (f1 + f2);
    }

    const double mean = 0.5 * kronrod;
    double resasc = kGkWeights[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) {
        resasc += kGkWeights[j] *
                  (std::abs(fv[2 * j] - mean) + std::abs(fv[2 * j + 1] - mean));
    }

    kronrod *= half;
    gauss *= half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);

    // QUADPACK error heuristic: |K15-G7| sharpened by the smoothness proxy.
    double err = std::abs(kronrod - gauss);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    const double eps = std::numeric_limits<double>::epsilon();
    const double tiny = std::numeric_limits<double>::min();
    if (resabs > tiny / (50.0 * eps)) {
        err = std::max(err, 50.0 * eps * resabs);
    }
    return {kronrod, err, resabs};
}

struct Panel {
    double a, b, value, error, resabs;
    bool operator<(const Panel& other) const { return error < other.error; }
};

// Globally adaptive bisection on a finite interval.
template <class F>
QuadratureResult adapt_finite(F&& f, double a, double b, double rel_tol,
                              double abs_tol, long long max_evals) {
    const double eps = std::numeric_limits<double>::epsilon();
    auto first = gauss_kronrod_15(f, a, b);
    long long evals = 15;
    double total_value = first.value;
    double total_error = first.error;
    double total_resabs = first.resabs;

    std::priority_queue<Panel> queue;
    queue.push({a, b, first.value, first.error, first.resabs});

    // Accept at the roundoff floor: per-panel estimates are floored at
    // 50 eps |f|-mass, so no subdivision can push the total below
    // 50 eps * total_resabs. Demanding less than ~2x that is unsatisfiable
    // no matter how the interval is split.
    auto tolerance = [&] {
        return std::max({abs_tol, rel_tol * std::abs(total_value),
                         100.0 * eps * total_resabs});
    };

    while (total_error > tolerance() && evals + 30 <= max_evals && !queue.empty()) {
        Panel worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const double scale = std::max({std::abs(worst.a), std::abs(worst.b), 1.0});
        if (!(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 8.0 * eps * scale) {
            // Too narrow to split. Retire the panel (its contribution stays
            // in the running totals) and keep refining the others.
            continue;
        }
        auto left = gauss_kronrod_15(f, worst.a, mid);
        auto right = gauss_kronrod_15(f, mid, worst.b);
        evals += 30;
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        total_resabs += left.resabs + right.resabs - worst.resabs;
        queue.push({worst.a, mid, left.value, left.error, left.resabs});
        queue.push({mid, worst.b, right.value, right.error, right.resabs});
    }

    if (!std::isfinite(total_value)) {
        throw convergence_error("integrate: integrand produced a non-finite value");
    }
    if (total_error > tolerance()) {
        char detail[96];
        std::snprintf(detail, sizeof(detail), "(error estimate %.3g)", total_error);
        throw convergence_error(
            "integrate: failed to reach tolerance within the evaluation budget " +
            std::string(detail));
    }
    return {total_value, total_error, evals};
}

}  // namespace detail

/// Integrate f over `domain` to max(abs_tol, rel_tol*|I|). Unbounded
/// endpoints are mapped onto a finite interval with the rational
/// transforms t = u/(1-u^2) (doubly infinite) and t = a + u/(1-u)
/// (half lines), which stay smooth for heavy polynomial tails.
template <class F>
QuadratureResult integrate(F&& f, Interval domain, double rel_tol = 1e-10,
                           double abs_tol = 1e-12, long long max_evals = 1'000'000) {
    if (!(domain.lower < domain.upper)) {
        throw std::domain_error("integrate: interval is empty");
    }
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
        throw std::domain_error("integrate: tolerances must be positive");
    }

    if (domain.bounded_below() && domain.bounded_above()) {
        return detail::adapt_finite(f, domain.lower, domain.upper, rel_tol, abs_tol,
                                    max_evals);
    }
    // In each transform, a node rounding onto the singular endpoint maps to
    // an infinite coordinate; a convergent integrand vanishes there, so the
    // guards return the limit instead of evaluating f at infinity.
    if (!domain.bounded_below() && !domain.bounded_above()) {
        auto g = [&f](double u) {
            const double den = 1.0 - u * u;
            const double t = u / den;
            if (!std::isfinite(t)) return 0.0;
            return f(t) * (1.0 + u * u) / (den * den);
        };
        return detail::adapt_finite(g, -1.0, 1.0, rel_tol, abs_tol, max_evals);
    }
    if (domain.bounded_below()) {
        const double a = domain.lower;
        auto g = [&f, a](double u) {
            const double den = 1.0 - u;
            const double t = a + u / den;
            if (!std::isfinite(t)) return 0.0;
            return f(t) / (den * den);
        };
        return detail::adapt_finite(g, 0.0, 1.0, rel_tol, abs_tol, max_evals);
    }
    const double b = domain.upper;
    auto g = [&f, b](double u) {
        const double den = 1.0 - u;
        const double t = b - u / den;
        if (!std::isfinite(t)) return 0.0;
        return f(t) / (den * den);
    };
    QuadratureResult r = detail::adapt_finite(g, 0.0, 1.0, rel_tol, abs_tol, max_evals);
    return r;
}

/// Solve g(x) = target for strictly increasing g. The bracket is expanded
/// geometrically (width doubles, at most 64 times) until it straddles the
/// target, then shrunk by a Brent-style bisection/interpolation hybrid.
template <class G>
double invert_monotone(G&& g, double target, Interval bracket, double tol = 1e-12) {
    if (!(bracket.lower < bracket.upper) || !bracket.bounded_below() ||
        !bracket.bounded_above()) {
        throw std::domain_error("invert_monotone: bracket must be a finite interval");
    }
    double lo = bracket.lower;
    double hi = bracket.upper;
    double flo = g(lo) - target;
    double fhi = g(hi) - target;

    for (int step = 0; (flo > 0.0 || fhi < 0.0); ++step) {
        if (step >= 64) {
            throw bracket_error("invert_monotone: failed to bracket target " +
                                std::to_string(target) + " after 64 doublings");
        }
        const double width = hi - lo;
        if (flo > 0.0) {
            lo -= width;
            flo = g(lo) - target;
        } else {
            hi += width;
            fhi = g(hi) - target;
        }
    }
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;

    // Brent's method on h(x) = g(x) - target.
    const double eps = std::numeric_limits<double>::epsilon();
    double a = lo, b = hi, fa = flo, fb = fhi;
    double c = a, fc = fa, d = b - a, e = d;
    for (int iter = 0; iter < 200; ++iter) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * eps;
        const double xm = 0.5 * (c - b);
        if (std::abs(fb) <= tol || std::abs(xm) <= tol1) return b;

        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = g(b) - target;
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    return b;
}

/// Derivative-free Nelder-Mead minimization for dimension <= 3.
/// Deterministic: the initial simplex and all updates depend only on the
/// inputs. Throws convergence_error when the iteration cap is hit first.
template <class F>
std::vector<double> minimize(F&& objective, std::vector<double> initial,
                             double tol = 1e-10, int max_iter = 20000) {
    const std::size_t dim = initial.size();
    if (dim == 0 || dim > 3) {
        throw std::domain_error("minimize: dimension must be between 1 and 3");
    }
    const double f0 = objective(initial);
    if (!std::isfinite(f0)) {
        throw std::domain_error("minimize: objective not finite at the initial point");
    }

    using Point = std::vector<double>;
    std::vector<Point> simplex;
    std::vector<double> fvals;
    auto build_simplex = [&](const Point& origin) {
        simplex.assign(1, origin);
        fvals.assign(1, objective(origin));
        for (std::size_t i = 0; i < dim; ++i) {
            Point p = origin;
            p[i] += (p[i] != 0.0) ? 0.05 * std::abs(p[i]) : 0.00025;
            simplex.push_back(p);
            fvals.push_back(objective(p));
        }
    };

    auto order = [&] {
        std::vector<std::size_t> idx(simplex.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
        std::vector<Point> s2;
        std::vector<double> f2;
        for (auto i : idx) {
            s2.push_back(simplex[i]);
            f2.push_back(fvals[i]);
        }
        simplex.swap(s2);
        fvals.swap(f2);
    };

    build_simplex(initial);
    int iter = 0;
    for (int restart = 0; restart < 2; ++restart) {
        while (true) {
            order();
            double xspread = 0.0;
            for (std::size_t i = 1; i <= dim; ++i) {
                for (std::size_t j = 0; j < dim; ++j) {
                    xspread = std::max(xspread, std::abs(simplex[i][j] - simplex[0][j]));
                }
            }
            const double fspread = std::abs(fvals[dim] - fvals[0]);
            if (xspread <= tol * (1.0 + std::abs(simplex[0][0])) &&
                fspread <= tol * (1.0 + std::abs(fvals[0]))) {
                break;
            }
            if (++iter > max_iter) {
                throw convergence_error("minimize: iteration cap reached");
            }

            Point centroid(dim, 0.0);
            for (std::size_t i = 0; i < dim; ++i) {
                for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i][j];
            }
            for (auto& c : centroid) c /= static_cast<double>(dim);

            auto affine = [&](double coef) {
                Point p(dim);
                for (std::size_t j = 0; j < dim; ++j) {
                    p[j] = centroid[j] + coef * (simplex[dim][j] - centroid[j]);
                }
                return p;
            };

            Point reflected = affine(-1.0);
            double fr = objective(reflected);
            if (fr < fvals[0]) {
                Point expanded = affine(-2.0);
                double fe = objective(expanded);
                if (fe < fr) {
                    simplex[dim] = expanded;
                    fvals[dim] = fe;
                } else {
                    simplex[dim] = reflected;
                    fvals[dim] = fr;
                }
            } else if (fr < fvals[dim - 1]) {
                simplex[dim] = reflected;
                fvals[dim] = fr;
            } else {
                const bool outside = fr < fvals[dim];
                Point contracted = affine(outside ? -0.5 : 0.5);
                double fcn = objective(contracted);
                if (fcn < std::min(fr, fvals[dim])) {
                    simplex[dim] = contracted;
                    fvals[dim] = fcn;
                } else {
                    for (std::size_t i = 1; i <= dim; ++i) {
                        for (std::size_t j = 0; j < dim; ++j) {
                            simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                        }
                        fvals[i] = objective(simplex[i]);
                    }
                }
            }
        }
        // One polish pass from the best vertex tightens the final digits.
        Point best = simplex[0];
        build_simplex(best);
    }
    order();
    return simplex[0];
}

}  // namespace qfam
