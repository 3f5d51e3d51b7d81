#include "reflang/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "reflang/random.hpp"

namespace reflang {

SampleSet::SampleSet(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("SampleSet: non-finite value");
  }
}

const std::vector<double>& SampleSet::sort() {
  if (!sorted_) {
    std::stable_sort(values_.begin(), values_.end());
    sorted_ = true;
  }
  return values_;
}

std::vector<double> SampleSet::sorted_copy() const {
  std::vector<double> out = values_;
  if (!sorted_) std::stable_sort(out.begin(), out.end());
  return out;
}

double ks_one_sample(const SampleSet& samples, const Cdf& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
  const auto x = samples.sorted_copy();
  const auto n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    const double below = static_cast<double>(i) / n;
    const double above = static_cast<double>(i + 1) / n;
    d = std::max({d, above - f, f - below});
  }
  return d;
}

double ks_two_sample(const SampleSet& a, const SampleSet& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  const auto x = a.sorted_copy();
  const auto y = b.sorted_copy();
  const auto na = static_cast<double>(x.size());
  const auto nb = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double wasserstein1(const SampleSet& a, const SampleSet& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(
        fmt::format("wasserstein1: sample sizes differ ({} vs {})", a.size(), b.size()));
  }
  if (a.empty()) throw std::invalid_argument("wasserstein1: empty sample");
  const auto x = a.sorted_copy();
  const auto y = b.sorted_copy();
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += std::abs(x[i] - y[i]);
  return total / static_cast<double>(x.size());
}

double folded_normal_cdf(double x, double mean, double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("folded_normal_cdf: variance must be > 0");
  if (x <= 0.0) return 0.0;
  const double sd = std::sqrt(variance);
  // Phi((x - m)/sd) - Phi((-x - m)/sd), as a difference of upper tails when
  // both arguments are large so the result keeps its precision.
  const double hi = (x - mean) / sd;
  const double lo = (-x - mean) / sd;
  if (lo > 0.0) return normal_cdf(-lo) - normal_cdf(-hi);
  return normal_cdf(hi) - normal_cdf(lo);
}

double half_normal_cdf(double x, double t, double start) {
  if (!(t > 0.0)) throw std::invalid_argument(fmt::format("half_normal_cdf: t = {} <= 0", t));
  if (start < 0.0) throw std::invalid_argument("half_normal_cdf: start outside the half-line");
  return folded_normal_cdf(x, start, t);
}

double invert_cdf(const Cdf& cdf, double u, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

MeanEstimate estimate_mean(std::span<const double> values) {
  MeanEstimate est;
  est.n = values.size();
  if (values.empty()) return est;
  const double n = static_cast<double>(values.size());
  est.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    est.variance = ss / (n - 1.0);
    est.se = std::sqrt(est.variance / n);
  }
  return est;
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double bootstrap_se(const std::vector<double>& values,
                    const std::function<double(const SampleSet&)>& statistic, int resamples,
                    std::uint64_t seed) {
  if (values.empty() || resamples < 2) {
    throw std::invalid_argument("bootstrap_se: need a sample and at least two resamples");
  }
  const NormalStream stream(seed, 0xB007);
  std::vector<double> stats(static_cast<std::size_t>(resamples));
  std::vector<double> u(values.size());
  std::vector<double> draw(values.size());
  for (int b = 0; b < resamples; ++b) {
    stream.fill_uniform(static_cast<std::uint64_t>(b), 0, 0, u);
    for (std::size_t i = 0; i < values.size(); ++i) {
      auto k = static_cast<std::size_t>(u[i] * static_cast<double>(values.size()));
      draw[i] = values[std::min(k, values.size() - 1)];
    }
    stats[static_cast<std::size_t>(b)] = statistic(SampleSet(draw));
  }
  const auto est = estimate_mean(stats);
  return std::sqrt(est.variance);
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_slope: bad input");
  const auto mx = estimate_mean(x).mean;
  const auto my = estimate_mean(y).mean;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace reflang
