#include "reflang/noise.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "reflang/random.hpp"

namespace reflang {

namespace {

// Address word b: which family of variates. Word c carries the level in its
// top 16 bits and a sub-index below.
enum Channel : std::uint64_t {
  kIncrement = 1,
  kAuxiliary = 2,
  kRefine = 3,
  kBridge = 4,
  kSubstepAux = 5,
};

std::uint64_t level_word(int level, std::uint64_t index) {
  return (static_cast<std::uint64_t>(level) << 48) | (index & 0xFFFFFFFFFFFFULL);
}

std::vector<double> uniform_grid(double T, std::size_t steps) {
  std::vector<double> grid(steps + 1);
  for (std::size_t n = 0; n <= steps; ++n) {
    grid[n] = T * static_cast<double>(n) / static_cast<double>(steps);
  }
  return grid;
}

void draw(const NoiseKey& key, std::uint64_t step, Channel channel, std::uint64_t c,
          double* out, int dim) {
  NormalStream(key.seed, key.path)
      .fill(step, channel, c, std::span<double>(out, static_cast<std::size_t>(dim)));
}

}  // namespace

NoisePath NoisePath::generate(NoiseKey key, double T, std::size_t coarse_steps, int dim,
                              int level) {
  if (coarse_steps == 0 || !(T > 0.0)) throw std::invalid_argument("noise path: empty grid");
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument(fmt::format("noise path: dimension {} unsupported", dim));
  }
  if (level < 0 || level > 30) throw std::invalid_argument("noise path: level out of range");

  NoisePath path;
  path.key_ = key;
  path.dim_ = dim;
  path.level_ = 0;
  path.coarse_steps_ = coarse_steps;
  path.grid_ = uniform_grid(T, coarse_steps);
  const auto d = static_cast<std::size_t>(dim);
  path.dw_.resize(coarse_steps * d);
  path.aux_.resize(coarse_steps * d);
  for (std::size_t n = 0; n < coarse_steps; ++n) {
    const double scale = std::sqrt(path.step_size(n));
    draw(key, n, kIncrement, level_word(0, 0), &path.dw_[n * d], dim);
    for (std::size_t i = 0; i < d; ++i) path.dw_[n * d + i] *= scale;
    draw(key, n, kAuxiliary, level_word(0, 0), &path.aux_[n * d], dim);
  }
  for (int l = 0; l < level; ++l) path = path.refined();
  return path;
}

NoisePath NoisePath::zero(double T, std::size_t steps, int dim) {
  if (steps == 0 || !(T > 0.0)) throw std::invalid_argument("noise path: empty grid");
  NoisePath path;
  path.dim_ = dim;
  path.coarse_steps_ = steps;
  path.grid_ = uniform_grid(T, steps);
  path.dw_.assign(steps * static_cast<std::size_t>(dim), 0.0);
  path.aux_ = path.dw_;
  return path;
}

NoisePath NoisePath::refined() const {
  NoisePath fine;
  fine.key_ = key_;
  fine.dim_ = dim_;
  fine.level_ = level_ + 1;
  fine.coarse_steps_ = coarse_steps_;
  const std::size_t n_fine = 2 * steps();
  fine.grid_ = uniform_grid(horizon(), n_fine);
  const auto d = static_cast<std::size_t>(dim_);
  fine.dw_.assign(n_fine * d, 0.0);
  fine.aux_.assign(n_fine * d, 0.0);
  if (silent()) return fine;

  std::vector<double> z(d);
  for (std::size_t n = 0; n < steps(); ++n) {
    const double h = step_size(n);
    draw(*key_, n, kRefine, level_word(fine.level_, 0), z.data(), dim_);
    for (std::size_t i = 0; i < d; ++i) {
      const double coarse = dw_[n * d + i];
      const double first = 0.5 * coarse + 0.5 * std::sqrt(h) * z[i];
      fine.dw_[2 * n * d + i] = first;
      fine.dw_[(2 * n + 1) * d + i] = coarse - first;
    }
  }
  for (std::size_t n = 0; n < n_fine; ++n) {
    draw(*key_, n, kAuxiliary, level_word(fine.level_, 0), &fine.aux_[n * d], dim_);
  }
  return fine;
}

Vector NoisePath::increment(std::size_t n) const {
  return Eigen::Map<const Eigen::VectorXd>(&dw_[n * static_cast<std::size_t>(dim_)], dim_);
}

Vector NoisePath::auxiliary(std::size_t n) const {
  return Eigen::Map<const Eigen::VectorXd>(&aux_[n * static_cast<std::size_t>(dim_)], dim_);
}

std::vector<Vector> NoisePath::cumulative() const {
  std::vector<Vector> w(steps() + 1);
  w[0] = Vector::Zero(dim_);
  for (std::size_t n = 0; n < steps(); ++n) w[n + 1] = w[n] + increment(n);
  return w;
}

Vector NoisePath::bridge_normal(std::size_t n, std::uint64_t index) const {
  Vector z = Vector::Zero(dim_);
  if (!silent()) draw(*key_, n, kBridge, level_word(level_, index), z.data(), dim_);
  return z;
}

Vector NoisePath::substep_auxiliary(std::size_t n, std::uint64_t index) const {
  Vector z = Vector::Zero(dim_);
  if (!silent()) draw(*key_, n, kSubstepAux, level_word(level_, index), z.data(), dim_);
  return z;
}

Vector bridge_split(const Vector& dw, double h, double theta, const Vector& z) {
  if (theta >= 1.0) return dw;
  if (theta <= 0.0) return Vector::Zero(dw.size());
  return theta * dw + std::sqrt(theta * (1.0 - theta) * h) * z;
}

}  // namespace reflang
