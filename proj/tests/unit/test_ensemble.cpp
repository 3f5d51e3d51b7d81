#include <doctest.h>

#include <cmath>

#include "reflang/ensemble.hpp"

using namespace reflang;

namespace {

EnsembleConfig base(Mode mode, double mu, double dt, std::size_t n, std::uint64_t seed) {
  EnsembleConfig c;
  c.mode = mode;
  c.field = make_field("zero-drift-identity", {{"r", {1}}});
  c.init = make_state({0.5}, {0.0});
  c.params.mu = mu;
  c.params.dt = dt;
  c.params.T = 1.0;
  c.params.n_paths = n;
  c.params.seed = seed;
  return c;
}

}  // namespace

TEST_SUITE("ensemble") {

TEST_CASE("one path is the single-path simulator") {
  auto c = base(Mode::reflected, 0.1, 0.005, 1, 17);
  c.keep_paths = 1;
  const auto sum = run_ensemble(c);
  const auto noise = NoisePath::generate({17, 0}, 1.0, 200, 1);
  const auto traj = simulate_reflected(c.init, c.field, c.params, noise);
  REQUIRE(sum.trajectories.size() == 1);
  CHECK(sum.final_marginal()[0] == traj.states.back().q[0]);
  CHECK(sum.trajectories[0].events.size() == traj.events.size());
  CHECK(sum.event_count.mean == static_cast<double>(traj.events.size()));

  c.mode = Mode::limit;
  const auto lim = run_ensemble(c);
  const auto sol = simulate_limit(c.init.q, c.field, c.params, noise);
  REQUIRE(lim.limit_paths.size() == 1);
  CHECK(lim.final_marginal()[0] == sol.q.back()[0]);
}

TEST_CASE("results do not depend on the worker count") {
  for (Mode mode : {Mode::free, Mode::reflected, Mode::folded, Mode::limit}) {
    auto c = base(mode, 0.1, 0.01, 37, 5);
    c.sample_times = {0.5, 1.0};
    c.threads = 1;
    const auto a = run_ensemble(c);
    c.threads = 4;
    const auto b = run_ensemble(c);
    CAPTURE(to_string(mode));
    CHECK(a.q_marginals == b.q_marginals);
    CHECK(a.sup_mu_p_sq.mean == b.sup_mu_p_sq.mean);
    CHECK(a.event_count.mean == b.event_count.mean);
    CHECK(a.psi_final.mean == b.psi_final.mean);
  }
}

TEST_CASE("failures name the lowest failing path for any worker count") {
  auto c = base(Mode::reflected, 0.05, 0.01, 20, 3);
  c.init = make_state({0.05}, {0.0});
  c.reflect.max_events = 0;
  std::size_t first = 0;
  try {
    run_ensemble(c);
    FAIL("expected a failure");
  } catch (const PathError& e) {
    first = e.path();
    CHECK(std::string(e.what()).find("path") != std::string::npos);
  }
  c.threads = 3;
  try {
    run_ensemble(c);
    FAIL("expected a failure");
  } catch (const PathError& e) {
    CHECK(e.path() == first);
  }
}

TEST_CASE("sample times must be grid nodes") {
  auto c = base(Mode::free, 0.1, 0.01, 2, 1);
  c.sample_times = {0.123};
  CHECK_THROWS_AS(run_ensemble(c), std::invalid_argument);
  c.sample_times = {0.0, 0.25};
  CHECK(run_ensemble(c).q_marginals.size() == 2);
}

TEST_CASE("refinement levels share Wiener paths") {
  auto c = base(Mode::free, 0.1, 0.01, 1, 9);
  c.level = 1;
  const auto a = make_noise(c, 0);
  const auto b = NoisePath::generate({9, 0}, 1.0, 50, 1).refined();
  CHECK(a.steps() == 100);
  CHECK(a.increment(7)[0] == b.increment(7)[0]);
  c.level = 3;
  CHECK_THROWS_AS(make_noise(c, 0), std::invalid_argument);
}

TEST_CASE("moment formula") {
  CHECK(momentum_moment_rhs(1.0, 0.1, 2, 0.0) == doctest::Approx(10.0 * -std::expm1(-20.0)));
  CHECK(momentum_moment_rhs(0.0, 0.1, 2, 3.5) == 3.5);
  CHECK(momentum_moment_rhs(1e3, 0.1, 2, 3.5) == doctest::Approx(10.0));
}

TEST_CASE("moment check on a small ensemble") {
  auto c = base(Mode::free, 0.1, 0.05, 4000, 77);
  c.field = make_field("zero-drift-identity", {{"r", {2}}});
  c.init = make_state({0.0, 0.0}, {0.0, 0.0});
  c.sample_times = {0.05, 0.2, 1.0};
  for (const auto& row : moment_bound_check(c)) {
    CAPTURE(row.t);
    CHECK(row.within);
  }
  c.field = make_field("constant-drift", {{"r", {2}}, {"c", {1, 0}}});
  CHECK_THROWS_AS(moment_bound_check(c), std::invalid_argument);
}

TEST_CASE("running momentum maximum") {
  auto c = base(Mode::reflected, 0.1, 0.01, 1000, 13);
  const auto rows = sup_momentum_moment(c, {0.5, 0.1, 0.02});
  REQUIRE(rows.size() == 3);
  CHECK(strictly_decreasing(rows));
  for (const auto& row : rows) {
    CAPTURE(row.mu);
    CHECK(row.estimate.mean < sup_moment_scale(row.mu, 1, 1.0));
    CHECK(row.dt == doctest::Approx(row.mu / 20));
  }

  // From p0 = 0 the maximum over a horizon h << mu is E|mu p_h|^2 ~ h.
  for (double h : {1e-3, 1e-4}) {
    c.params.T = h;
    c.params.dt = h;
    const auto tiny = sup_momentum_moment(c, {0.5}, 0.5 / h);
    CAPTURE(h);
    CHECK(tiny[0].estimate.mean == doctest::Approx(h).epsilon(0.15));
  }
}

TEST_CASE("half-normal convergence on a short table") {
  auto c = base(Mode::reflected, 0.1, 0.01, 5000, 23);
  c.init = make_state({0.0}, {0.1});
  const auto table = convergence_study(c, {0.02});
  CHECK(table.analytic_reference);
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].ks < 0.05);
  CHECK(table.rows[0].ks_se > 0.0);
  CHECK(table.rows[0].ks_se < 0.02);
}

TEST_CASE("same-mu ensembles sit at the two-sample noise floor") {
  auto c = base(Mode::reflected, 0.1, 0.005, 4000, 31);
  c.first_path = 0;
  const auto a = run_ensemble(c);
  c.first_path = 4000;
  const auto b = run_ensemble(c);
  const double ks = ks_two_sample(SampleSet(a.final_marginal()), SampleSet(b.final_marginal()));
  CHECK(ks < 1.63 * std::sqrt(2.0 / 4000));
}

TEST_CASE("non-analytic drift converges to the simulated limit") {
  auto c = base(Mode::reflected, 0.1, 0.01, 2000, 41);
  c.field = make_field("tanh-drift", {{"r", {1}}, {"a", {-1}}});
  ConvergenceOptions opts;
  opts.reference_paths = 4000;
  opts.bootstrap = 50;
  const auto table = convergence_study(c, {0.5, 0.1, 0.02}, opts);
  CHECK_FALSE(table.analytic_reference);
  CHECK(table.reference_dt == doctest::Approx(1e-4));
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0].w1 > table.rows[1].w1);
  CHECK(table.rows[0].w1 > table.rows[2].w1);
  CHECK(table.w1_nonincreasing());
}

TEST_CASE("occupancy shrinks with the box") {
  auto c = base(Mode::reflected, 0.1, 1e-3, 300, 51);
  const auto res = occupancy_study(c, {0.4, 0.2});
  REQUIRE(res.occupation.size() == 2);
  CHECK(res.occupation[0].mean > res.occupation[1].mean);
  CHECK(res.slope > 1.0);
  CHECK_THROWS_AS(occupancy_study(c, {0.4}), std::invalid_argument);
  CHECK_THROWS_AS(occupancy_study(c, {0.4, 1.5}), std::invalid_argument);
}

TEST_CASE("event census") {
  auto c = base(Mode::reflected, 0.05, 2.5e-3, 300, 61);
  const auto census = event_census(c);
  CHECK(census.mean > 0.0);
  CHECK(census.mean_refined >= census.mean * 0.5);
}

TEST_CASE("decomposition study") {
  auto c = base(Mode::reflected, 0.1, 1e-4, 8, 71);
  const auto rows = decomposition_study(c);
  REQUIRE(rows.size() == 8);
  for (const auto& row : rows) {
    CAPTURE(row.path);
    CHECK(row.report.passed());
    CHECK(row.residual <= 10 * 1e-4 * row.max_abs_p);
  }
}

}
