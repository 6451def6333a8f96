#pragma once

#include <functional>
#include <span>
#include <vector>

namespace flashsim::stats {

struct MeanEstimate {
  double mean = 0;
  double standard_error = 0;
  std::size_t count = 0;
};

MeanEstimate mean_with_error(std::span<const double> samples);

struct TestResult {
  double statistic = 0;
  double p_value = 0;
  std::size_t dof = 0;  // chi-square only
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
TestResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);
/// Asymptotic Kolmogorov tail probability with Stephens' small-sample correction.
double kolmogorov_p_value(double d, std::size_t n);

/// Pearson chi-square goodness of fit of integer counts against expected
/// probabilities. Adjacent bins are merged until every expected count is at
/// least `min_expected`.
TestResult chi_square_test(std::span<const double> counts, std::span<const double> probabilities,
                           double min_expected = 5.0);

/// Total variation distance between two discrete distributions (each is
/// normalized first).
double total_variation(std::span<const double> p, std::span<const double> q);

}  // namespace flashsim::stats
