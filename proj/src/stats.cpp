#include "flashsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace flashsim::stats {

MeanEstimate mean_with_error(std::span<const double> samples) {
  MeanEstimate out;
  out.count = samples.size();
  if (samples.empty()) return out;
  const double n = static_cast<double>(samples.size());
  out.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  if (samples.size() > 1) {
    double ss = 0;
    for (double x : samples) ss += (x - out.mean) * (x - out.mean);
    out.standard_error = std::sqrt(ss / (n - 1) / n);
  }
  return out;
}

double kolmogorov_p_value(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("KS test needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return {d, kolmogorov_p_value(d, samples.size()), 0};
}

TestResult chi_square_test(std::span<const double> counts, std::span<const double> probabilities,
                           double min_expected) {
  if (counts.size() != probabilities.size() || counts.empty())
    throw std::invalid_argument("chi-square: counts and probabilities differ in length");
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double psum = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
  std::vector<double> obs, exp;
  double o = 0, e = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    o += counts[i];
    e += total * probabilities[i] / psum;
    if (e >= min_expected) {
      obs.push_back(o);
      exp.push_back(e);
      o = e = 0;
    }
  }
  if (e > 0 || o > 0) {
    if (exp.empty()) {
      obs.push_back(o);
      exp.push_back(e);
    } else {
      obs.back() += o;
      exp.back() += e;
    }
  }
  double chi2 = 0;
  for (std::size_t i = 0; i < obs.size(); ++i) chi2 += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
  TestResult r;
  r.statistic = chi2;
  r.dof = obs.size() > 1 ? obs.size() - 1 : 1;
  r.p_value = boost::math::gamma_q(0.5 * r.dof, 0.5 * chi2);
  return r;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("total variation: length mismatch");
  const double sp = std::accumulate(p.begin(), p.end(), 0.0);
  const double sq = std::accumulate(q.begin(), q.end(), 0.0);
  double tv = 0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] / sp - q[i] / sq);
  return 0.5 * tv;
}

}  // namespace flashsim::stats
