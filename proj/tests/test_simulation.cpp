#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qfam/simulation.hpp"

using Catch::Approx;
using namespace qfam;

TEST_CASE("simulation is deterministic for a fixed seed") {
    const DistributionModel t2 = student_t({2.0});
    const StatisticKind kind = StatisticKind::sample_mean();
    const RegressionEstimate a = simulate_regression(t2, 3, 2, kind, 2000, 77, 10);
    const RegressionEstimate b = simulate_regression(t2, 3, 2, kind, 2000, 77, 10);
    CHECK(a.bin_edges == b.bin_edges);
    CHECK(a.bin_centers == b.bin_centers);
    CHECK(a.counts == b.counts);
    CHECK(a.empirical_mean == b.empirical_mean);
    CHECK(a.std_err == b.std_err);
    CHECK(a.theoretical == b.theoretical);
    CHECK(a.z_scores == b.z_scores);

    const RegressionEstimate c = simulate_regression(t2, 3, 2, kind, 2000, 78, 10);
    CHECK(a.empirical_mean != c.empirical_mean);
}

TEST_CASE("runs sharing a seed share their bins across statistic kinds") {
    const DistributionModel t2 = student_t({2.0});
    const RegressionEstimate mean_run =
        simulate_regression(t2, 3, 2, StatisticKind::sample_mean(), 3000, 5, 12);
    const RegressionEstimate spacing_run = simulate_regression(
        t2, 3, 2, StatisticKind::weighted_spacing(0.5), 3000, 5, 12);
    const RegressionEstimate below_run = simulate_regression(
        t2, 3, 2, StatisticKind::below_avg_deviation(1), 3000, 5, 12);
    CHECK(mean_run.bin_edges == spacing_run.bin_edges);
    CHECK(mean_run.bin_centers == spacing_run.bin_centers);
    CHECK(mean_run.counts == spacing_run.counts);
    CHECK(mean_run.bin_edges == below_run.bin_edges);

    // Bin edges are order statistics of the conditioning values.
    for (std::size_t i = 1; i < mean_run.bin_edges.size(); ++i) {
        CHECK(mean_run.bin_edges[i] >= mean_run.bin_edges[i - 1]);
    }
    long long total = 0;
    for (long long cnt : mean_run.counts) total += cnt;
    CHECK(total == 3000);
}

TEST_CASE("empirical regressions track the exact conditional expectations") {
    const DistributionModel t2 = student_t({2.0});
    const RegressionEstimate mean_run =
        simulate_regression(t2, 3, 2, StatisticKind::sample_mean(), 20000, 31, 10);
    const ComparisonSummary mean_verdict = compare_report(mean_run, 3.0, 0.95);
    CHECK(mean_verdict.interior_bins == 8);
    CHECK(mean_verdict.passed);

    // A family member scores near zero on its own weighted spacing. The
    // below-side deviation has infinite conditional variance here (lower
    // tail index 1/(1-lambda) < 2), which skews the self-normalized
    // z-scores left of Gaussian, so the verdict uses a widened band.
    const DistributionModel member = q_family({0.3, 1.0, 0.0});
    const RegressionEstimate member_run = simulate_regression(
        member, 3, 2, StatisticKind::weighted_spacing(0.3), 20000, 32, 10);
    CHECK(compare_report(member_run, 4.0, 0.8).passed);

    // Light-tailed reference: uniform below-deviation regression, whose
    // exact curve is x/2 at every conditioning value x.
    const DistributionModel u = uniform(0.0, 1.0);
    const RegressionEstimate u_run =
        simulate_regression(u, 3, 2, StatisticKind::below_avg_deviation(1), 20000, 33, 10);
    for (std::size_t b = 1; b + 1 < u_run.theoretical.size(); ++b) {
        CHECK(u_run.theoretical[b] ==
              Approx(u_run.bin_centers[b] / 2.0).margin(1e-10));
        CHECK(std::abs(u_run.empirical_mean[b] - u_run.theoretical[b]) <=
              3.0 * u_run.std_err[b]);
    }
}

TEST_CASE("mirrored deviations agree for a symmetric parent") {
    // For a symmetric law, E[below-dev | X_(k)=x] equals the corresponding
    // above-dev at -x. With a shared seed both runs bin identically, so bin
    // b of one run mirrors bin B-1-b of the other up to sampling noise and
    // the small offset between the mirrored bin centers.
    const DistributionModel t2 = student_t({2.0});
    const int bins = 10;
    const RegressionEstimate below = simulate_regression(
        t2, 3, 2, StatisticKind::below_avg_deviation(1), 50000, 404, bins);
    const RegressionEstimate above = simulate_regression(
        t2, 3, 2, StatisticKind::above_avg_deviation(1), 50000, 404, bins);

    auto below_theory = [&](double x) {
        return x - avg_cond_moment(t2, {3, 2, 1}, x, Side::below);
    };
    for (int b = 1; b + 1 < bins; ++b) {
        const int rev = bins - 1 - b;
        const double cb = below.bin_centers[b];
        const double ca = above.bin_centers[rev];
        const double slope =
            (below_theory(cb + 1e-3) - below_theory(cb - 1e-3)) / 2e-3;
        const double se = std::sqrt(below.std_err[b] * below.std_err[b] +
                                    above.std_err[rev] * above.std_err[rev]);
        const double budget = 3.0 * se + std::abs(slope) * std::abs(cb + ca) + 1e-12;
        CHECK(std::abs(below.empirical_mean[b] - above.empirical_mean[rev]) <= budget);
    }
}

TEST_CASE("squared spacings below and above agree bin by bin at nu = 3") {
    // At nu = 3 the conditional means of (X_(2)-X_(1))^2 and (X_(3)-X_(2))^2
    // given X_(2) = x are equal for every x, so with a shared seed (hence
    // shared bins and draws) the two empirical curves must agree within the
    // combined standard error in every interior bin.
    const DistributionModel t3 = student_t({3.0});
    const int bins = 10;
    const RegressionEstimate below = simulate_regression(
        t3, 3, 2, StatisticKind::below_avg_deviation(2), 50000, 505, bins);
    const RegressionEstimate above = simulate_regression(
        t3, 3, 2, StatisticKind::above_avg_deviation(2), 50000, 505, bins);
    REQUIRE(below.bin_centers == above.bin_centers);

    for (int b = 1; b + 1 < bins; ++b) {
        const double se = std::sqrt(below.std_err[b] * below.std_err[b] +
                                    above.std_err[b] * above.std_err[b]);
        CHECK(std::abs(below.empirical_mean[b] - above.empirical_mean[b]) <= 3.0 * se);
        // The exact curves coincide as well.
        CHECK(below.theoretical[b] == Approx(above.theoretical[b]).margin(1e-7));
    }
}

TEST_CASE("doubling the replications shrinks the error like one over root n") {
    // Root-mean-square deviation from the exact regression, averaged over
    // seeds, should fall by about sqrt(2) when the sample size doubles.
    const DistributionModel u = uniform(0.0, 1.0);
    const StatisticKind kind = StatisticKind::below_avg_deviation(1);
    double rmse_small = 0.0, rmse_large = 0.0;
    for (std::uint64_t seed = 11; seed <= 15; ++seed) {
        for (long long reps : {20000LL, 40000LL}) {
            const RegressionEstimate est = simulate_regression(u, 3, 2, kind, reps, seed, 10);
            double ss = 0.0;
            for (int b = 1; b + 1 < 10; ++b) {
                const double diff = est.empirical_mean[b] - est.theoretical[b];
                ss += diff * diff;
            }
            const double rmse = std::sqrt(ss / 8.0);
            (reps == 20000 ? rmse_small : rmse_large) += rmse / 5.0;
        }
    }
    const double factor = rmse_small / rmse_large;
    CHECK(factor >= 1.2);
    CHECK(factor <= 1.7);
}

TEST_CASE("simulation input validation") {
    const DistributionModel t2 = student_t({2.0});
    const DistributionModel t1 = student_t({1.0});
    const StatisticKind mean = StatisticKind::sample_mean();
    CHECK_THROWS_AS(simulate_regression(t2, 1, 1, mean, 1000, 1), std::domain_error);
    CHECK_THROWS_AS(simulate_regression(t2, 3, 0, mean, 1000, 1), std::domain_error);
    CHECK_THROWS_AS(simulate_regression(t2, 3, 4, mean, 1000, 1), std::domain_error);
    CHECK_THROWS_AS(simulate_regression(t2, 3, 2, mean, 1000, 1, 2), std::domain_error);
    CHECK_THROWS_AS(simulate_regression(t2, 3, 2, mean, 150, 1, 20),
                    insufficient_data_error);
    CHECK_THROWS_AS(
        simulate_regression(t2, 3, 1, StatisticKind::below_avg_deviation(1), 1000, 1),
        std::domain_error);
    CHECK_THROWS_AS(
        simulate_regression(t2, 3, 3, StatisticKind::above_avg_deviation(1), 1000, 1),
        std::domain_error);
    CHECK_THROWS_AS(
        simulate_regression(t2, 3, 2, StatisticKind::below_avg_deviation(0), 1000, 1),
        std::domain_error);
    CHECK_THROWS_AS(
        simulate_regression(t2, 3, 2, StatisticKind::below_avg_deviation(3), 1000, 1),
        std::domain_error);
    CHECK_THROWS_AS(
        simulate_regression(t2, 3, 2, StatisticKind::weighted_spacing(0.0), 1000, 1),
        std::domain_error);
    CHECK_THROWS_AS(simulate_regression(t1, 3, 2, mean, 1000, 1), moment_error);
    CHECK_THROWS_AS(
        simulate_regression(t2, 3, 2, StatisticKind::below_avg_deviation(2), 1000, 1),
        moment_error);
}

TEST_CASE("comparison verdicts count interior bins only") {
    RegressionEstimate est;
    est.z_scores = {9.0, 0.1, -0.2, 4.0, 0.3, -9.0};
    const ComparisonSummary strict = compare_report(est, 3.0, 0.95);
    CHECK(strict.interior_bins == 4);
    CHECK(strict.passing_bins == 3);
    CHECK_FALSE(strict.passed);
    REQUIRE(strict.failing_bins.size() == 1);
    CHECK(strict.failing_bins[0] == 3);

    const ComparisonSummary loose = compare_report(est, 5.0, 0.75);
    CHECK(loose.passed);

    est.z_scores = {100.0, 0.1, 0.2, -50.0};  // huge edge bins are ignored
    CHECK(compare_report(est, 3.0, 0.95).passed);

    est.z_scores = {0.0, 0.0};
    CHECK_THROWS_AS(compare_report(est, 3.0, 0.95), std::domain_error);
    est.z_scores = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(compare_report(est, -1.0, 0.95), std::domain_error);
    CHECK_THROWS_AS(compare_report(est, 3.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(compare_report(est, 3.0, 1.5), std::domain_error);
}
