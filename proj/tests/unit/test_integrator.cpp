#include <doctest.h>

#include <cmath>

#include "reflang/integrator.hpp"
#include "reflang/stats.hpp"

using namespace reflang;

namespace {

const FieldSpec kFree1 = make_field("zero-drift-identity", {{"r", {1}}});
const FieldSpec kFree2 = make_field("zero-drift-identity", {{"r", {2}}});

Vector v1(double x) {
  Vector v(1);
  v << x;
  return v;
}

}  // namespace

TEST_SUITE("integrator") {

TEST_CASE("homogeneous decay is exact") {
  const auto s = make_state({1.0}, {-4.0});
  const auto next = step_langevin(s, kFree1, 0.5, 0.01, v1(0.0), v1(0.0));
  CHECK(next.p[0] == doctest::Approx(-4.0 * std::exp(-0.02)).epsilon(1e-15));
  CHECK(next.t == 0.01);
}

TEST_CASE("deterministic free flow") {
  // mu p' = -p: p = -4 e^{-2t}, q = 1 - 2 (1 - e^{-2t}).
  SimParams params;
  params.mu = 0.5;
  params.dt = 1e-5;
  params.T = 0.25;
  const auto noise = NoisePath::zero(params.T, params.steps(), 1);
  const auto traj = simulate_free(make_state({1.0}, {-4.0}), kFree1, params, noise);
  const auto& end = traj.states.back();
  CHECK(end.t == doctest::Approx(0.25));
  CHECK(end.p[0] == doctest::Approx(-2.42612).epsilon(1e-5));
  CHECK(end.q[0] == doctest::Approx(0.21306).epsilon(1e-4));
  for (std::size_t n = 0; n < traj.size(); n += 997) {
    const double t = traj.time(n);
    CHECK(std::abs(traj.states[n].p[0] + 4.0 * std::exp(-2.0 * t)) < 1e-8);
    CHECK(std::abs(traj.states[n].q[0] - (1.0 - 2.0 * (1.0 - std::exp(-2.0 * t)))) < 1e-8);
  }
}

TEST_CASE("one-step trajectory is one step") {
  SimParams params;
  params.mu = 0.3;
  params.dt = 0.1;
  params.T = 0.1;
  const auto noise = NoisePath::generate({4, 4}, 0.1, 1, 1);
  const auto init = make_state({0.2}, {1.0});
  const auto traj = simulate_free(init, kFree1, params, noise);
  const auto once = step_langevin(init, kFree1, 0.3, 0.1, noise.increment(0), noise.auxiliary(0));
  CHECK(traj.states.back().q[0] == once.q[0]);
  CHECK(traj.states.back().p[0] == once.p[0]);
}

TEST_CASE("overdamped steps") {
  CHECK(step_overdamped(v1(1.0), kFree1, 0.1, v1(0.3))[0] == doctest::Approx(1.3));
  const auto pull = make_field("constant-drift", {{"r", {1}}, {"c", {-1}}});
  CHECK(step_overdamped(v1(1.0), pull, 0.1, v1(0.0))[0] == doctest::Approx(0.9));
}

TEST_CASE("overdamped Brownian variance") {
  const std::size_t n = 4000;
  std::vector<double> qT(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto noise = NoisePath::generate({21, i}, 1.0, 50, 1);
    qT[i] = simulate_overdamped(v1(0.0), kFree1, noise).back()[0];
  }
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = qT[i] * qT[i];
  const auto m = estimate_mean(sq);
  CHECK(std::abs(m.mean - 1.0) < 3.0 * m.se);
}

TEST_CASE("one-step joint law of the exponential scheme") {
  // From p = 0 with b = 0: Var p' = (1 - e^2) / (2 mu), Cov(p', dW) = 1 - e.
  const double mu = 0.1;
  const double h = 0.05;
  const std::size_t n = 40000;
  std::vector<double> pp(n), cross(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto noise = NoisePath::generate({31, i}, h, 1, 1);
    const auto s =
        step_langevin(make_state({0.0}, {0.0}), kFree1, mu, h, noise.increment(0), noise.auxiliary(0));
    pp[i] = s.p[0] * s.p[0];
    cross[i] = s.p[0] * noise.increment(0)[0];
  }
  const double e = std::exp(-h / mu);
  const auto var = estimate_mean(pp);
  const auto cov = estimate_mean(cross);
  CHECK(std::abs(var.mean - (1 - e * e) / (2 * mu)) < 4 * var.se);
  CHECK(std::abs(cov.mean - (1 - e)) < 4 * cov.se);
}

TEST_CASE("small-step coefficients stay consistent") {
  for (double x : {1e-9, 1e-4, 0.049, 0.051, 3.0}) {
    const OuCoefficients c(1.0, x);
    CAPTURE(x);
    CHECK(c.residual_sd >= 0.0);
    // Var I = (1/2)(1 - e^2) = regression^2 h + residual^2.
    const double var = 0.5 * -std::expm1(-2 * x);
    CHECK(c.regression * c.regression * x + c.residual_sd * c.residual_sd ==
          doctest::Approx(var).epsilon(1e-10));
  }
}

TEST_CASE("momentum second moment") {
  // E|p_1|^2 = (r / (2 mu))(1 - e^{-2/mu}) = 10 for mu = 0.1, r = 2.
  SimParams params;
  params.mu = 0.1;
  params.dt = 0.05;
  params.T = 1.0;
  const std::size_t n = 4000;
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto noise = NoisePath::generate({41, i}, 1.0, params.steps(), 2);
    const auto traj = simulate_free(make_state({0.0, 0.0}, {0.0, 0.0}), kFree2, params, noise);
    sq[i] = traj.states.back().p.squaredNorm();
  }
  const auto m = estimate_mean(sq);
  CHECK(std::abs(m.mean - 10.0 * -std::expm1(-20.0)) < 4 * m.se);
}

TEST_CASE("small mass approaches the overdamped law") {
  const auto field = make_field("tanh-drift", {{"r", {1}}, {"a", {-2}}});
  const std::size_t n = 2000;
  std::vector<double> ks;
  for (double mu : {0.5, 0.1, 0.02}) {
    SimParams params;
    params.mu = mu;
    params.dt = mu / 20;
    params.T = 1.0;
    std::vector<double> lang(n), over(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto noise = NoisePath::generate({51, i}, 1.0, params.steps(), 1);
      lang[i] = simulate_free(make_state({0.5}, {0.0}), field, params, noise).states.back().q[0];
      over[i] = simulate_overdamped(v1(0.5), field, noise).back()[0];
    }
    ks.push_back(ks_two_sample(SampleSet(lang), SampleSet(over)));
  }
  CAPTURE(ks[0]);
  CAPTURE(ks[1]);
  CAPTURE(ks[2]);
  CHECK(ks[0] > ks[1]);
  CHECK(ks[1] > ks[2]);
}

TEST_CASE("step guards") {
  CHECK_THROWS_AS(check_step(0.1, 0.02, Scheme::euler), std::invalid_argument);
  CHECK_NOTHROW(check_step(0.1, 0.01, Scheme::euler));
  CHECK_NOTHROW(check_step(0.1, 0.02, Scheme::exponential));
  CHECK_THROWS_AS(check_step(0.0, 0.01, Scheme::exponential), std::invalid_argument);

  SimParams params;
  params.dt = 0.1;
  params.T = 1.0;
  const auto noise = NoisePath::zero(1.0, 10, 2);
  CHECK_THROWS_AS(simulate_free(make_state({0.0}, {0.0}), kFree1, params, noise),
                  std::invalid_argument);
}

TEST_CASE("Euler agrees with the exponential scheme for small steps") {
  SimParams params;
  params.mu = 0.5;
  params.dt = 1e-4;
  params.T = 0.5;
  const auto noise = NoisePath::generate({61, 0}, params.T, params.steps(), 1);
  const auto init = make_state({1.0}, {0.5});
  const auto a = simulate_free(init, kFree1, params, noise, Scheme::exponential);
  const auto b = simulate_free(init, kFree1, params, noise, Scheme::euler);
  CHECK(std::abs(a.states.back().q[0] - b.states.back().q[0]) < 1e-2);
}

}
