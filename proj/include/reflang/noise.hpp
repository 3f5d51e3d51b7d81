#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "reflang/model.hpp"

namespace reflang {

/// Identifies one Wiener path of an ensemble.
struct NoiseKey {
  std::uint64_t seed = 0;
  std::uint64_t path = 0;
};

/// Wiener increments on a uniform grid over [0, T].
///
/// Level 0 draws N0 independent increments. Level l + 1 splits every level-l
/// increment into two halves with a Brownian bridge, so the two halves sum
/// back to the coarse increment and all levels share one underlying path.
///
/// Each step also carries an auxiliary standard normal per component, used by
/// the exponential integrator to complete the joint law of (dW, OU integral).
/// Additional variates for sub-step splitting are addressed by (step, index).
/// A path built with zero() has all increments and variates equal to zero.
class NoisePath {
 public:
  static NoisePath generate(NoiseKey key, double T, std::size_t coarse_steps, int dim,
                            int level = 0);
  static NoisePath zero(double T, std::size_t steps, int dim);

  /// The same Wiener path on a grid twice as fine.
  [[nodiscard]] NoisePath refined() const;

  [[nodiscard]] std::size_t steps() const { return grid_.size() - 1; }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] int level() const { return level_; }
  [[nodiscard]] double horizon() const { return grid_.back(); }
  [[nodiscard]] double step_size(std::size_t n) const { return grid_[n + 1] - grid_[n]; }
  [[nodiscard]] const std::vector<double>& grid() const { return grid_; }
  [[nodiscard]] const std::optional<NoiseKey>& key() const { return key_; }
  [[nodiscard]] bool silent() const { return !key_.has_value(); }

  [[nodiscard]] Vector increment(std::size_t n) const;
  [[nodiscard]] Vector auxiliary(std::size_t n) const;

  /// W at every grid node, W(0) = 0.
  [[nodiscard]] std::vector<Vector> cumulative() const;

  /// Standard normals for the index-th bridge split inside step n.
  [[nodiscard]] Vector bridge_normal(std::size_t n, std::uint64_t index) const;
  /// Standard normals for the auxiliary variate of the index-th sub-step of step n.
  [[nodiscard]] Vector substep_auxiliary(std::size_t n, std::uint64_t index) const;

 private:
  NoisePath() = default;

  std::optional<NoiseKey> key_;
  int dim_ = 1;
  int level_ = 0;
  std::size_t coarse_steps_ = 0;
  std::vector<double> grid_;
  std::vector<double> dw_;   // steps x dim, row major
  std::vector<double> aux_;  // steps x dim, row major
};

/// Splits a Wiener increment dw over a step of length h at fraction theta.
/// Returns the increment over the first theta * h; the remainder is dw minus it.
Vector bridge_split(const Vector& dw, double h, double theta, const Vector& z);

}  // namespace reflang
