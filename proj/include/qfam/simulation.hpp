#pragma once

// Monte Carlo verification of the conditional-moment identities: simulate
// order statistics, bin replications by the conditioning value, and compare
// per-bin empirical means of a regression statistic against the exact
// conditional expectation evaluated at the bin's mean conditioning value.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qfam/characterization.hpp"
#include "qfam/distributions.hpp"
#include "qfam/order_stats.hpp"

namespace qfam {

/// Raised when a bin ends up with too few replications for a meaningful
/// standard error.
class insufficient_data_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The regression statistic computed from each simulated sample, always as
/// a function of the order statistics and the conditioning value x = X_(k):
///  - below_avg_deviation(r): mean over i<k of (x - X_(i))^r
///  - above_avg_deviation(r): mean over i>k of (X_(i) - x)^r
///  - sample_mean: mean of the whole sample
///  - weighted_spacing(lambda): lambda * below_avg_deviation(1)
///                              - (1-lambda) * above_avg_deviation(1)
struct StatisticKind {
    enum class Family { below_avg_deviation, above_avg_deviation, sample_mean, weighted_spacing };
    Family family = Family::sample_mean;
    int r = 1;
    double lambda = 0.5;

    static StatisticKind below_avg_deviation(int r) {
        return {Family::below_avg_deviation, r, 0.5};
    }
    static StatisticKind above_avg_deviation(int r) {
        return {Family::above_avg_deviation, r, 0.5};
    }
    static StatisticKind sample_mean() { return {Family::sample_mean, 1, 0.5}; }
    static StatisticKind weighted_spacing(double lambda) {
        return {Family::weighted_spacing, 1, lambda};
    }
};

/// Binned empirical regression versus the exact conditional expectation.
/// bin_edges holds the conditioning values at the equal-count bin
/// boundaries (bins+1 entries); bin_centers the per-bin mean conditioning
/// value, which is also where the theoretical curve is evaluated.
struct RegressionEstimate {
    std::vector<double> bin_edges;
    std::vector<double> bin_centers;
    std::vector<long long> counts;
    std::vector<double> empirical_mean;
    std::vector<double> std_err;
    std::vector<double> theoretical;
    std::vector<double> z_scores;
};

/// Verdict of comparing empirical to theoretical bin by bin. Edge bins are
/// excluded: their conditioning values spread over a whole tail, so the
/// single-point theoretical evaluation is biased there by construction.
struct ComparisonSummary {
    int interior_bins = 0;
    int passing_bins = 0;
    double pass_fraction = 0.0;
    bool passed = false;
    std::vector<int> failing_bins;
};

namespace detail {

inline void validate_kind(const StatisticKind& kind, const DistributionModel& dist, int n,
                          int k) {
    using Family = StatisticKind::Family;
    const bool needs_below =
        kind.family == Family::below_avg_deviation || kind.family == Family::weighted_spacing;
    const bool needs_above =
        kind.family == Family::above_avg_deviation || kind.family == Family::weighted_spacing;
    if (needs_below && k < 2) {
        throw std::domain_error("simulate_regression: below-side statistic needs k >= 2");
    }
    if (needs_above && k > n - 1) {
        throw std::domain_error("simulate_regression: above-side statistic needs k <= n-1");
    }
    if (kind.family == Family::weighted_spacing &&
        !(kind.lambda > 0.0 && kind.lambda < 1.0)) {
        throw std::domain_error("simulate_regression: lambda must lie inside (0,1)");
    }
    int r = 1;
    if (kind.family == Family::below_avg_deviation ||
        kind.family == Family::above_avg_deviation) {
        if (kind.r < 1 || kind.r > 2) {
            throw std::domain_error("simulate_regression: deviation order r must be 1 or 2");
        }
        r = kind.r;
    }
    if (!dist.has_first_moment) {
        throw moment_error("simulate_regression: " + dist.name + " has no first moment");
    }
    if (r == 2 && !dist.has_second_moment) {
        throw moment_error("simulate_regression: " + dist.name + " has no second moment");
    }
}

inline double statistic_value(const StatisticKind& kind, const std::vector<double>& sorted,
                              int k) {
    using Family = StatisticKind::Family;
    const int n = static_cast<int>(sorted.size());
    const double x = sorted[k - 1];
    auto below_dev = [&](int r) {
        double sum = 0.0;
        for (int i = 0; i < k - 1; ++i) sum += int_pow(x - sorted[i], r);
        return sum / (k - 1);
    };
    auto above_dev = [&](int r) {
        double sum = 0.0;
        for (int i = k; i < n; ++i) sum += int_pow(sorted[i] - x, r);
        return sum / (n - k);
    };
    switch (kind.family) {
        case Family::below_avg_deviation:
            return below_dev(kind.r);
        case Family::above_avg_deviation:
            return above_dev(kind.r);
        case Family::sample_mean: {
            double sum = 0.0;
            for (double v : sorted) sum += v;
            return sum / n;
        }
        case Family::weighted_spacing:
            return kind.lambda * below_dev(1) - (1.0 - kind.lambda) * above_dev(1);
    }
    throw std::logic_error("statistic_value: unreachable");
}

/// Exact conditional expectation of the statistic given X_(k) = x.
inline double statistic_theory(const StatisticKind& kind, const DistributionModel& dist,
                               int n, int k, double x) {
    using Family = StatisticKind::Family;
    const OrderStatContext first{n, k, 1};
    const OrderStatContext second{n, k, 2};
    switch (kind.family) {
        case Family::below_avg_deviation: {
            const double m1 = avg_cond_moment(dist, first, x, Side::below);
            if (kind.r == 1) return x - m1;
            const double m2 = avg_cond_moment(dist, second, x, Side::below);
            return x * x - 2.0 * x * m1 + m2;
        }
        case Family::above_avg_deviation: {
            const double m1 = avg_cond_moment(dist, first, x, Side::above);
            if (kind.r == 1) return m1 - x;
            const double m2 = avg_cond_moment(dist, second, x, Side::above);
            return m2 - 2.0 * x * m1 + x * x;
        }
        case Family::sample_mean: {
            double total = x;
            if (k >= 2) total += (k - 1) * avg_cond_moment(dist, first, x, Side::below);
            if (k <= n - 1) total += (n - k) * avg_cond_moment(dist, first, x, Side::above);
            return total / n;
        }
        case Family::weighted_spacing: {
            const double m1b = avg_cond_moment(dist, first, x, Side::below);
            const double m1a = avg_cond_moment(dist, first, x, Side::above);
            return kind.lambda * (x - m1b) - (1.0 - kind.lambda) * (m1a - x);
        }
    }
    throw std::logic_error("statistic_theory: unreachable");
}

}  // namespace detail

/// Simulate `replications` samples of size n, condition on X_(k), and bin
/// by the conditioning value into equal-count bins. Deterministic for a
/// fixed seed: identical inputs give identical estimates, and runs that
/// share (seed, dist, n, k, replications, bins) share their bins exactly,
/// so statistics of different kinds can be compared bin by bin.
inline RegressionEstimate simulate_regression(const DistributionModel& dist, int n, int k,
                                              const StatisticKind& kind,
                                              long long replications, std::uint64_t seed,
                                              int bins = 20) {
    if (n < 2) {
        throw std::domain_error("simulate_regression: sample size n must be at least 2");
    }
    if (k < 1 || k > n) {
        throw std::domain_error("simulate_regression: rank k must lie in [1, n]");
    }
    if (bins < 3) {
        throw std::domain_error("simulate_regression: need at least 3 bins");
    }
    if (replications < 10LL * bins) {
        throw insufficient_data_error(
            "simulate_regression: need at least 10 replications per bin");
    }
    detail::validate_kind(kind, dist, n, k);

    std::mt19937_64 engine(seed);
    std::vector<std::pair<double, double>> observations;  // (conditioning value, statistic)
    observations.reserve(static_cast<std::size_t>(replications));
    std::vector<double> draw(n);
    for (long long rep = 0; rep < replications; ++rep) {
        for (auto& v : draw) {
            const double u = (static_cast<double>(engine() >> 11) + 0.5) * 0x1p-53;
            v = dist.quantile(u);
        }
        std::sort(draw.begin(), draw.end());
        observations.emplace_back(draw[k - 1], detail::statistic_value(kind, draw, k));
    }
    std::sort(observations.begin(), observations.end());

    const long long total = replications;
    RegressionEstimate est;
    est.bin_edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b) {
        const long long idx = total * b / bins;
        est.bin_edges[b] = observations[std::min(idx, total - 1)].first;
    }
    for (int b = 0; b < bins; ++b) {
        const long long start = total * b / bins;
        const long long stop = total * (b + 1) / bins;
        const long long count = stop - start;
        if (count < 10) {
            throw insufficient_data_error("simulate_regression: bin " + std::to_string(b) +
                                          " has fewer than 10 replications");
        }
        double sum_x = 0.0, sum_s = 0.0;
        for (long long i = start; i < stop; ++i) {
            sum_x += observations[i].first;
            sum_s += observations[i].second;
        }
        const double mean_x = sum_x / count;
        const double mean_s = sum_s / count;
        double ss = 0.0;
        for (long long i = start; i < stop; ++i) {
            const double diff = observations[i].second - mean_s;
            ss += diff * diff;
        }
        const double sd = std::sqrt(ss / (count - 1));
        const double se = sd / std::sqrt(static_cast<double>(count));
        const double theory = detail::statistic_theory(kind, dist, n, k, mean_x);

        est.bin_centers.push_back(mean_x);
        est.counts.push_back(count);
        est.empirical_mean.push_back(mean_s);
        est.std_err.push_back(se);
        est.theoretical.push_back(theory);
        if (se > 0.0) {
            est.z_scores.push_back((mean_s - theory) / se);
        } else {
            est.z_scores.push_back(mean_s == theory
                                       ? 0.0
                                       : std::numeric_limits<double>::infinity());
        }
    }
    return est;
}

/// Bin-by-bin verdict: an interior bin passes when |z| <= z_threshold, and
/// the whole comparison passes when at least min_pass_fraction of interior
/// bins do.
inline ComparisonSummary compare_report(const RegressionEstimate& est,
                                        double z_threshold = 3.0,
                                        double min_pass_fraction = 0.95) {
    const int bins = static_cast<int>(est.z_scores.size());
    if (bins < 3) {
        throw std::domain_error("compare_report: need at least 3 bins");
    }
    if (!(z_threshold > 0.0) || !(min_pass_fraction > 0.0 && min_pass_fraction <= 1.0)) {
        throw std::domain_error("compare_report: invalid threshold or pass fraction");
    }
    ComparisonSummary summary;
    summary.interior_bins = bins - 2;
    for (int b = 1; b + 1 < bins; ++b) {
        if (std::abs(est.z_scores[b]) <= z_threshold) {
            ++summary.passing_bins;
        } else {
            summary.failing_bins.push_back(b);
        }
    }
    summary.pass_fraction =
        static_cast<double>(summary.passing_bins) / summary.interior_bins;
    summary.passed = summary.pass_fraction >= min_pass_fraction;
    return summary;
}

}  // namespace qfam
