#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace reflang {

/// Finite sample of reals with a cached sorted order.
class SampleSet {
 public:
  SampleSet() = default;
  explicit SampleSet(std::vector<double> values);

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] bool empty() const { return values_.empty(); }
  [[nodiscard]] bool is_sorted() const { return sorted_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

  /// Sorts in place (stable, idempotent) and returns the sorted values.
  const std::vector<double>& sort();
  [[nodiscard]] std::vector<double> sorted_copy() const;

 private:
  std::vector<double> values_;
  bool sorted_ = false;
};

using Cdf = std::function<double(double)>;

/// sup_x |F_n(x) - F(x)|, checked on both sides of every jump of F_n.
double ks_one_sample(const SampleSet& samples, const Cdf& cdf);

/// sup_x |F_a(x) - F_b(x)| over the pooled points.
double ks_two_sample(const SampleSet& a, const SampleSet& b);

/// Mean |a_(i) - b_(i)| over the sorted order; sizes must match.
double wasserstein1(const SampleSet& a, const SampleSet& b);

/// CDF of |q0 + W_t| (reflected Brownian motion from q0 >= 0 at time t).
/// With q0 = 0 this is the half-normal law 2 Phi(x / sqrt t) - 1.
double half_normal_cdf(double x, double t, double start = 0.0);

/// CDF of |Y| for Y ~ Normal(mean, variance).
double folded_normal_cdf(double x, double mean, double variance);

/// Inverse of a continuous nondecreasing CDF on [lo, hi] by bisection.
double invert_cdf(const Cdf& cdf, double u, double lo, double hi);

struct MeanEstimate {
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  double se = 0.0;        // sqrt(variance / n)
  std::size_t n = 0;
};

MeanEstimate estimate_mean(std::span<const double> values);

/// Empirical quantile with linear interpolation between order statistics
/// (the "type 7" rule). values need not be sorted.
double quantile(std::vector<double> values, double prob);

/// Bootstrap standard error of statistic(resample), with resampling indices
/// drawn from the counter-based stream keyed by seed.
double bootstrap_se(const std::vector<double>& values,
                    const std::function<double(const SampleSet&)>& statistic, int resamples,
                    std::uint64_t seed);

/// Least-squares slope of y on x.
double fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace reflang
