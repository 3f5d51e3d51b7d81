#include <doctest.h>

#include <cmath>

#include "reflang/noise.hpp"

using namespace reflang;

TEST_SUITE("noise") {

TEST_CASE("refined halves sum to the coarse increment") {
  const auto coarse = NoisePath::generate({7, 3}, 1.0, 16, 2);
  const auto fine = coarse.refined();
  REQUIRE(fine.steps() == 32);
  CHECK(fine.level() == 1);
  for (std::size_t n = 0; n < coarse.steps(); ++n) {
    const Vector sum = fine.increment(2 * n) + fine.increment(2 * n + 1);
    CHECK((sum - coarse.increment(n)).cwiseAbs().maxCoeff() < 1e-15);
  }
  const auto w_coarse = coarse.cumulative();
  const auto w_fine = fine.cumulative();
  for (std::size_t n = 0; n <= coarse.steps(); ++n) {
    CHECK((w_coarse[n] - w_fine[2 * n]).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("a generated level equals repeated refinement") {
  const auto a = NoisePath::generate({1, 9}, 2.0, 10, 1, 3);
  const auto b = NoisePath::generate({1, 9}, 2.0, 10, 1).refined().refined().refined();
  REQUIRE(a.steps() == 80);
  for (std::size_t n = 0; n < a.steps(); ++n) {
    CHECK(a.increment(n)[0] == b.increment(n)[0]);
    CHECK(a.auxiliary(n)[0] == b.auxiliary(n)[0]);
  }
  CHECK(a.step_size(0) == doctest::Approx(0.025));
  CHECK(a.horizon() == 2.0);
}

TEST_CASE("paths are keyed by seed and index") {
  const auto a = NoisePath::generate({5, 0}, 1.0, 4, 1);
  const auto b = NoisePath::generate({5, 1}, 1.0, 4, 1);
  const auto c = NoisePath::generate({6, 0}, 1.0, 4, 1);
  const auto again = NoisePath::generate({5, 0}, 1.0, 4, 1);
  CHECK(a.increment(0)[0] != b.increment(0)[0]);
  CHECK(a.increment(0)[0] != c.increment(0)[0]);
  CHECK(a.increment(3)[0] == again.increment(3)[0]);
  CHECK(a.bridge_normal(2, 1)[0] == again.bridge_normal(2, 1)[0]);
  CHECK(a.bridge_normal(2, 1)[0] != a.bridge_normal(2, 2)[0]);
}

TEST_CASE("increment variance matches the step at every level") {
  for (int level : {0, 2}) {
    const auto w = NoisePath::generate({11, 0}, 1.0, 20000 >> level, 1, level);
    double ss = 0.0;
    double aux = 0.0;
    for (std::size_t n = 0; n < w.steps(); ++n) {
      ss += w.increment(n)[0] * w.increment(n)[0];
      aux += w.auxiliary(n)[0] * w.auxiliary(n)[0];
    }
    const double n = static_cast<double>(w.steps());
    CAPTURE(level);
    CHECK(ss == doctest::Approx(1.0).epsilon(4.0 * std::sqrt(2.0 / n)));
    CHECK(aux / n == doctest::Approx(1.0).epsilon(4.0 * std::sqrt(2.0 / n)));
  }
}

TEST_CASE("silent path") {
  const auto z = NoisePath::zero(1.0, 8, 3);
  CHECK(z.silent());
  CHECK(z.increment(5).isZero());
  CHECK(z.refined().increment(9).isZero());
  CHECK(z.bridge_normal(1, 0).isZero());
}

TEST_CASE("bridge split") {
  Vector dw(1), z(1);
  dw << 0.8;
  z << 1.0;
  CHECK(bridge_split(dw, 0.01, 1.0, z)[0] == 0.8);
  CHECK(bridge_split(dw, 0.01, 0.0, z)[0] == 0.0);
  CHECK(bridge_split(dw, 0.01, 0.25, z)[0] == doctest::Approx(0.2 + std::sqrt(0.25 * 0.75 * 0.01)));
}

TEST_CASE("invalid grids") {
  CHECK_THROWS_AS(NoisePath::generate({0, 0}, 1.0, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(NoisePath::generate({0, 0}, 1.0, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(NoisePath::generate({0, 0}, -1.0, 4, 1), std::invalid_argument);
}

}
