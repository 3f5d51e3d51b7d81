#include <doctest.h>

#include <cmath>

#include "reflang/model.hpp"

using namespace reflang;

TEST_SUITE("model") {

TEST_CASE("zero drift with identity diffusion") {
  const auto f = make_field("zero-drift-identity", {{"r", {1}}});
  CHECK(f.dim() == 1);
  CHECK(f.zero_drift());
  CHECK(f.identity_diffusion());
  Vector q(1);
  q << 3.7;
  CHECK(f.drift(q)[0] == 0.0);
  CHECK(f.diffusion()(0, 0) == 1.0);
  CHECK(f.lipschitz() == 0.0);
}

TEST_CASE("constant drift in two dimensions") {
  const auto f = make_field("constant-drift", {{"r", {2}}, {"c", {-1, 0}}});
  Vector q(2);
  q << 5, -2;
  const Vector b = f.drift(q);
  CHECK(b[0] == -1.0);
  CHECK(b[1] == 0.0);
  CHECK(f.diffusion().isIdentity());
}

TEST_CASE("tanh drift and its Lipschitz constant") {
  const auto f = make_field("tanh-drift", {{"r", {1}}, {"a", {2}}});
  Vector q(1);
  q << 0.3;
  CHECK(f.drift(q)[0] == doctest::Approx(2.0 * std::tanh(0.3)).epsilon(1e-15));
  CHECK(f.lipschitz() == 2.0);
  // The sup of |b'| is attained at 0: a finite-difference slope there.
  const double h = 1e-6;
  Vector a(1), b(1);
  a << -h;
  b << h;
  CHECK((f.drift(b)[0] - f.drift(a)[0]) / (2 * h) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("linear drift Lipschitz constant is the spectral norm") {
  const auto f = make_field("linear-drift", {{"r", {2}}, {"A", {0, 2, 0, 0}}, {"c", {1, 1}}});
  CHECK(f.lipschitz() == doctest::Approx(2.0));
  Vector q(2);
  q << 1, 3;
  CHECK(f.drift(q)[0] == 7.0);
  CHECK(f.drift(q)[1] == 1.0);
}

TEST_CASE("constant diffusion") {
  const auto f = make_field("zero-drift-identity", {{"r", {2}}, {"sigma", {2, 0, 1, 1}}});
  CHECK_FALSE(f.identity_diffusion());
  Vector v(2);
  v << 1, 1;
  CHECK(f.apply_diffusion(v)[0] == 2.0);
  CHECK(f.apply_diffusion(v)[1] == 2.0);
}

TEST_CASE("catalog errors") {
  CHECK_THROWS_AS(make_field("quadratic", {{"r", {1}}}), std::invalid_argument);
  CHECK_THROWS_AS(make_field("zero-drift-identity", {}), std::invalid_argument);
  CHECK_THROWS_AS(make_field("zero-drift-identity", {{"r", {0}}}), std::invalid_argument);
  CHECK_THROWS_AS(make_field("zero-drift-identity", {{"r", {1.5}}}), std::invalid_argument);
  CHECK_THROWS_AS(make_field("constant-drift", {{"r", {2}}, {"c", {1}}}), std::invalid_argument);
  CHECK_THROWS_AS(make_field("constant-drift", {{"r", {1}}}), std::invalid_argument);
  CHECK_THROWS_AS(make_field("zero-drift-identity", {{"r", {1}}, {"c", {1}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_field("zero-drift-identity", {{"r", {2}}, {"sigma", {1, 1, 1, 1}}}),
                  std::invalid_argument);
  CHECK(field_catalog().size() == 4);
}

TEST_CASE("reflected start must lie in the half-space off the origin") {
  CHECK_NOTHROW(validate_reflected_start(make_state({0.0}, {0.1})));
  CHECK_NOTHROW(validate_reflected_start(make_state({0.5}, {0.0})));
  CHECK_THROWS_AS(validate_reflected_start(make_state({0.0}, {0.0})), std::invalid_argument);
  CHECK_THROWS_AS(validate_reflected_start(make_state({-0.1}, {1.0})), std::invalid_argument);
  CHECK_NOTHROW(validate_reflected_start(make_state({0.0, 0.0}, {1.0, 0.0})));
  CHECK_THROWS_AS(make_state({1.0, 2.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("grid size") {
  SimParams p;
  p.T = 1.0;
  p.dt = 1e-5;
  CHECK(p.steps() == 100000);
  p.dt = 0.3;
  CHECK_THROWS_AS(p.steps(), std::invalid_argument);
  p.dt = 0.25;
  p.mu = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

}
