#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace reflang {

/// Philox4x64-10 block function. The output is a pure function of
/// (counter, key), so every noise draw is addressable.
struct Philox4x64 {
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Counter block(Counter counter, Key key);
};

/// Maps 64 random bits to the open interval (0, 1) using the top 52 bits;
/// the results are the midpoints k + 1/2 of 2^52 equal cells.
double to_open_unit(std::uint64_t bits);

/// Standard normal CDF, 0.5 * erfc(-x / sqrt(2)).
double normal_cdf(double x);

/// Inverse standard normal CDF. Acklam's rational approximation followed by
/// one Halley correction against erfc, giving close to full double precision
/// on (0, 1). Throws std::domain_error outside (0, 1).
double inverse_normal_cdf(double u);

/// Addressable Gaussian stream: key = (seed, stream id), and each draw is
/// located by a three-word address. Four variates come out of one block.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

  /// Fills `out` with standard normals for address (a, b, c). Entry i uses
  /// block i / 4 of that address; the result does not depend on out.size()
  /// beyond truncation.
  void fill(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::span<double> out) const;

  /// Same address scheme, uniform (0, 1) variates.
  void fill_uniform(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                    std::span<double> out) const;

 private:
  Philox4x64::Key key_;
};

}  // namespace reflang
