// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "reflang/cli/config.hpp"
#include "reflang/cli/output.hpp"
#include "reflang/cli/run.hpp"
#include "reflang/ensemble.hpp"
#include "reflang/random.hpp"

using namespace reflang;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, fmt::format("exception: {}", e.what())};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out.pass) ++failures;
  fmt::print("[{}] criterion {}: {} | {} | {:.1f} s\n", out.pass ? "PASS" : "FAIL", id, name,
             out.detail, secs);
  std::fflush(stdout);
}

const FieldSpec& free_field(int r) {
  static const FieldSpec one = make_field("zero-drift-identity", {{"r", {1}}});
  static const FieldSpec two = make_field("zero-drift-identity", {{"r", {2}}});
  return r == 1 ? one : two;
}

EnsembleConfig config(Mode mode, double mu, double dt, std::size_t n, std::uint64_t seed,
                      PhaseState init) {
  EnsembleConfig c;
  c.mode = mode;
  c.field = free_field(init.dim());
  c.init = std::move(init);
  c.params.mu = mu;
  c.params.dt = dt;
  c.params.T = 1.0;
  c.params.n_paths = n;
  c.params.seed = seed;
  return c;
}

Outcome deterministic_bounce() {
  const auto start = std::chrono::steady_clock::now();
  SimParams params;
  params.mu = 0.5;
  params.dt = 1e-5;
  params.T = 1.0;
  const auto noise = NoisePath::zero(1.0, params.steps(), 1);
  const auto traj = simulate_reflected(make_state({1.0}, {-4.0}), free_field(1), params, noise);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (traj.events.size() != 1) return {false, fmt::format("{} events", traj.events.size())};
  const auto& ev = traj.events[0];
  const double q1 = traj.states.back().q[0];
  const bool ok = std::abs(ev.tau - std::numbers::ln2 / 2) <= 1e-4 &&
                  std::abs(ev.p_plus[0] - 2.0) <= 1e-4 && std::abs(q1 - 0.729327) <= 1e-4 &&
                  secs < 1.0;
  return {ok, fmt::format("tau={:.7f} (ln2/2={:.7f}) p+={:.7f} q(1)={:.7f} sim={:.3f}s", ev.tau,
                          std::numbers::ln2 / 2, ev.p_plus[0], q1, secs)};
}

Outcome skorohod_exactness() {
  const auto start = std::chrono::steady_clock::now();
  std::size_t failed = 0;
  std::size_t not_fixed = 0;
  std::size_t not_monotone = 0;
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const int r = 1 + static_cast<int>(k % 3);
    const NormalStream s(k, 0xACCE);
    const std::size_t nodes = 50 + k % 150;
    std::vector<double> z(static_cast<std::size_t>(r));
    std::vector<double> u(1);
    std::vector<double> t(nodes);
    std::vector<Vector> w(nodes);
    s.fill_uniform(0, 1, 0, u);
    Vector x = Vector::Zero(r);
    x[0] = u[0];
    for (std::size_t n = 0; n < nodes; ++n) {
      t[n] = static_cast<double>(n) / static_cast<double>(nodes - 1);
      w[n] = x;
      s.fill(n, 0, 0, z);
      for (int i = 0; i < r; ++i) x[i] += 0.2 * z[static_cast<std::size_t>(i)];
    }
    const auto sol = skorohod_map(t, w);
    if (!verify_skorohod(sol, 0.0).passed()) ++failed;
    const auto again = skorohod_map(t, sol.q);
    bool fixed = true;
    for (std::size_t n = 0; n < nodes; ++n) {
      fixed = fixed && again.phi[n][0] == 0.0 && (again.q[n] - sol.q[n]).isZero();
    }
    if (!fixed) ++not_fixed;
    auto raised = w;
    for (std::size_t n = 0; n < nodes; ++n) raised[n][0] += 0.05 * static_cast<double>(n % 5);
    const auto hi = skorohod_map(t, raised);
    for (std::size_t n = 0; n < nodes; ++n) {
      if (hi.phi[n][0] > sol.phi[n][0]) {
        ++not_monotone;
        break;
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {failed == 0 && not_fixed == 0 && not_monotone == 0 && secs < 5.0,
          fmt::format("1000 paths: {} condition failures, {} idempotence failures, {} "
                      "comparison failures, {:.2f}s",
                      failed, not_fixed, not_monotone, secs)};
}

Outcome moment_curve() {
  auto c = config(Mode::free, 0.1, 0.01, 100'000, 31, make_state({0.0, 0.0}, {0.0, 0.0}));
  c.sample_times = {0.05, 0.2, 1.0};
  bool ok = true;
  std::string detail;
  for (const auto& row : moment_bound_check(c)) {
    ok = ok && row.within;
    detail += fmt::format("t={:g}: {:.4f} vs {:.4f} (z={:+.2f}) ", row.t, row.empirical, row.rhs,
                          row.z);
  }
  return {ok, detail};
}

Outcome sup_moment_trend() {
  auto c = config(Mode::reflected, 0.5, 0.025, 5000, 41, make_state({0.5}, {0.0}));
  const auto rows = sup_momentum_moment(c, {0.5, 0.1, 0.02}, 20.0);
  const bool decreasing = strictly_decreasing(rows, 2.0);
  const bool small = rows.back().estimate.mean < 0.1;
  std::string detail;
  bool stable = true;
  for (const auto& row : rows) {
    stable = stable && row.stable;
    detail += fmt::format("mu={:g}: {:.4f}+-{:.4f} (dt/2: {:.4f}, scale {:.3f}) ", row.mu,
                          row.estimate.mean, row.estimate.se, row.refined.mean,
                          sup_moment_scale(row.mu, 1, 1.0));
  }
  detail += fmt::format("decreasing={} final<0.1={} refinement-stable={} (informational)", decreasing,
                        small, stable);
  return {decreasing && small, detail};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

const char* kConvergeConfig = R"(mode = "converge"
field = "zero-drift-identity"
r = 1
T = 1.0
seed = 51
n_paths = 5000
q0 = [0.0]
p0 = [0.1]
mu_list = [0.5, 0.1, 0.02]
dt_ratio = 20
bootstrap = 200
)";

fs::path workdir() {
  const fs::path dir = fs::temp_directory_path() / "reflang-acceptance";
  fs::create_directories(dir);
  return dir;
}

Outcome converge_table() {
  const auto cfg = cli::parse_config_text(kConvergeConfig, "acceptance-converge");
  cli::RunOptions opts;
  opts.out = workdir() / "converge-t1";
  fs::remove_all(opts.out);
  const auto res = cli::run(cli::Command::converge, cfg, opts);
  if (res.status != cli::kOk) return {false, res.message};
  const auto rows = read_csv(opts.out / "convergence.csv");
  if (rows.size() != 4 || rows[0][1] != "ks") return {false, "unexpected convergence.csv"};
  std::vector<double> ks, se;
  std::string detail;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ks.push_back(std::stod(rows[i][1]));
    se.push_back(std::stod(rows[i][2]));
    detail += fmt::format("mu={:g}: KS={:.4f}+-{:.4f} ", std::stod(rows[i][0]), ks.back(), se.back());
  }
  bool nonincreasing = true;
  for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
    nonincreasing = nonincreasing && ks[i + 1] <= ks[i] + 2.0 * std::hypot(se[i], se[i + 1]);
  }
  return {nonincreasing && ks.back() < 0.05, detail};
}

Outcome construction_equivalence() {
  const std::size_t n = 5000;
  auto c = config(Mode::folded, 0.2, 2e-4, n, 61, make_state({0.5}, {0.0}));
  const auto folded = run_ensemble(c);
  c.mode = Mode::reflected;
  c.params.seed = 62;
  const auto recursive = run_ensemble(c);
  const double ks = ks_two_sample(SampleSet(folded.final_marginal()),
                                  SampleSet(recursive.final_marginal()));
  const double limit = 1.63 * std::sqrt(2.0 / static_cast<double>(n));
  return {ks < limit, fmt::format("KS={:.4f} < {:.4f}", ks, limit)};
}

Outcome decomposition_refinement() {
  auto c = config(Mode::reflected, 0.1, 1e-4, 100, 71, make_state({0.5}, {0.0}));
  const auto coarse = decomposition_study(c);
  c.params.dt = 5e-5;
  c.level = 1;
  const auto fine = decomposition_study(c);
  double a = 0.0, b = 0.0;
  bool conditions = true;
  for (const auto& row : coarse) {
    a += row.residual;
    conditions = conditions && row.report.passed();
  }
  for (const auto& row : fine) {
    b += row.residual;
    conditions = conditions && row.report.passed();
  }
  const double ratio = b / a;
  return {ratio >= 0.4 && ratio <= 0.6,
          fmt::format("mean residual {:.3e} -> {:.3e}, ratio {:.3f}; Skorohod checks at 5 dt "
                      "max|p|: {}",
                      a / 100, b / 100, ratio, conditions ? "pass" : "fail")};
}

Outcome occupation_scaling() {
  auto c = config(Mode::reflected, 0.1, 1e-4, 10'000, 81, make_state({0.5}, {0.0}));
  const auto res = occupancy_study(c, {0.4, 0.2, 0.1});
  std::string detail;
  for (std::size_t k = 0; k < res.deltas.size(); ++k) {
    detail += fmt::format("delta={:g}: {:.3e} ", res.deltas[k], res.occupation[k].mean);
  }
  detail += fmt::format("slope={:.3f}", res.slope);
  return {res.slope >= 2.0, detail};
}

Outcome determinism() {
  const auto cfg = cli::parse_config_text(kConvergeConfig, "acceptance-converge");
  cli::RunOptions opts;
  opts.threads = 3;
  opts.out = workdir() / "converge-t3";
  fs::remove_all(opts.out);
  const auto res = cli::run(cli::Command::converge, cfg, opts);
  if (res.status != cli::kOk) return {false, res.message};
  const fs::path other = workdir() / "converge-t1";
  std::size_t compared = 0;
  for (const auto& f : res.outputs) {
    if (!f.name.ends_with(".csv")) continue;
    if (cli::sha256_file(other / f.name) != f.sha256) {
      return {false, fmt::format("{} differs between 1 and 3 threads", f.name)};
    }
    ++compared;
  }

  auto sim = cli::parse_config_text(R"(mode = "reflected"
mu = 0.05
dt = 2.5e-3
seed = 91
n_paths = 400
q0 = [0.2]
keep_paths = 5
)");
  cli::RunOptions one, four;
  one.out = workdir() / "simulate-t1";
  four.out = workdir() / "simulate-t4";
  four.threads = 4;
  const auto a = cli::run(cli::Command::simulate, sim, one);
  const auto b = cli::run(cli::Command::simulate, sim, four);
  if (a.status != cli::kOk || b.status != cli::kOk) return {false, "simulate failed"};
  for (std::size_t i = 0; i < a.outputs.size(); ++i) {
    if (a.outputs[i].sha256 != b.outputs[i].sha256) {
      return {false, fmt::format("{} differs between 1 and 4 threads", a.outputs[i].name)};
    }
    ++compared;
  }
  return {true, fmt::format("{} files byte-identical across thread counts", compared)};
}

}  // namespace

int main() {
  report(1, "deterministic reflection oracle", deterministic_bounce);
  report(2, "Skorohod map exactness", skorohod_exactness);
  report(3, "free-space momentum second moment", moment_curve);
  report(4, "running momentum maximum decreases with mu", sup_moment_trend);
  report(5, "q1(T) converges to the half-normal law", converge_table);
  report(6, "folded and recursive constructions agree in law", construction_equivalence);
  report(7, "decomposition residual halves with dt", decomposition_refinement);
  report(8, "occupation-time scaling near the origin", occupation_scaling);
  report(9, "thread-count independent outputs", determinism);
  fmt::print("{} of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
