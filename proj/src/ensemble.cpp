#include "reflang/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace reflang {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::free: return "free";
    case Mode::reflected: return "reflected";
    case Mode::folded: return "folded";
    case Mode::limit: return "limit";
  }
  return "?";
}

PathError::PathError(std::size_t path, const std::string& what)
    : std::runtime_error(fmt::format("path {}: {}", path, what)), path_(path) {}

namespace {

struct PathSummary {
  std::vector<double> q1;
  std::vector<double> p_sq;
  double sup_mu_p_sq = 0.0;
  std::size_t events = 0;
  double psi_final = 0.0;
  double min_origin_sq = std::numeric_limits<double>::infinity();
  std::size_t folded_steps = 0;
  std::optional<Trajectory> traj;
  std::optional<SkorohodSolution> limit;
};

std::vector<std::size_t> sample_indices(const EnsembleConfig& config, std::size_t steps) {
  std::vector<double> times = config.sample_times;
  if (times.empty()) times.push_back(config.params.T);
  std::vector<std::size_t> idx;
  idx.reserve(times.size());
  for (double t : times) {
    const double pos = t / config.params.dt;
    const double k = std::round(pos);
    if (k < 0 || k > static_cast<double>(steps) || std::abs(pos - k) > 1e-9 * std::max(1.0, k)) {
      throw std::invalid_argument(fmt::format("sample time {} is not a grid node", t));
    }
    idx.push_back(static_cast<std::size_t>(k));
  }
  return idx;
}

std::size_t coarse_steps(const EnsembleConfig& config) {
  const std::size_t steps = config.params.steps();
  const std::size_t factor = std::size_t{1} << config.level;
  if (steps % factor != 0) {
    throw std::invalid_argument(
        fmt::format("{} steps cannot come from {} bridge refinements", steps, config.level));
  }
  return steps / factor;
}

void validate(const EnsembleConfig& config) {
  config.params.validate();
  if (config.level < 0 || config.level > 20) throw std::invalid_argument("level out of range");
  if (config.init.dim() != config.field.dim()) {
    throw std::invalid_argument("initial state and field dimensions differ");
  }
}

PathSummary run_path(const EnsembleConfig& config, std::size_t i,
                     const std::vector<std::size_t>& idx) {
  const NoisePath noise = make_noise(config, i);
  PathSummary out;
  const bool keep = i < config.keep_paths;

  if (config.mode == Mode::limit) {
    SkorohodSolution sol = simulate_limit(config.init.q, config.field, config.params, noise);
    for (std::size_t k : idx) {
      out.q1.push_back(sol.q[k][0]);
      out.p_sq.push_back(0.0);
    }
    out.psi_final = sol.phi.back()[0];
    if (keep) out.limit = std::move(sol);
    return out;
  }

  Trajectory traj;
  switch (config.mode) {
    case Mode::free:
      traj = simulate_free(config.init, config.field, config.params, noise, config.scheme);
      break;
    case Mode::reflected: {
      ReflectOptions opts = config.reflect;
      opts.scheme = config.scheme;
      traj = simulate_reflected(config.init, config.field, config.params, noise, opts);
      break;
    }
    case Mode::folded: {
      ReflectOptions opts = config.reflect;
      opts.scheme = config.scheme;
      traj = simulate_folded(config.init, config.field, config.params, noise, opts);
      break;
    }
    case Mode::limit:
      break;
  }

  const double mu = config.params.mu;
  for (std::size_t k : idx) {
    out.q1.push_back(traj.states[k].q[0]);
    out.p_sq.push_back(traj.states[k].p.squaredNorm());
  }
  for (const auto& s : traj.states) {
    out.sup_mu_p_sq = std::max(out.sup_mu_p_sq, mu * mu * s.p.squaredNorm());
    out.min_origin_sq = std::min(out.min_origin_sq, s.q[0] * s.q[0] + s.p[0] * s.p[0]);
  }
  out.events = traj.events.size();
  out.psi_final = traj.psi.back();
  out.folded_steps = traj.folded_steps;
  if (keep) out.traj = std::move(traj);
  return out;
}

}  // namespace

NoisePath make_noise(const EnsembleConfig& config, std::size_t path) {
  return NoisePath::generate({config.params.seed, config.first_path + path}, config.params.T,
                             coarse_steps(config), config.field.dim(), config.level);
}

EnsembleSummary run_ensemble(const EnsembleConfig& config) {
  validate(config);
  const auto idx = sample_indices(config, config.params.steps());
  const std::size_t n = config.params.n_paths;

  auto paths = parallel_map<PathSummary>(
      n, config.threads, [&](std::size_t i) { return run_path(config, i, idx); });

  EnsembleSummary sum;
  sum.mode = config.mode;
  sum.mu = config.params.mu;
  sum.dt = config.params.dt;
  sum.T = config.params.T;
  sum.n_paths = n;
  sum.sample_times = config.sample_times;
  if (sum.sample_times.empty()) sum.sample_times = {config.params.T};

  sum.q_marginals.assign(idx.size(), std::vector<double>(n));
  std::vector<std::vector<double>> p_sq(idx.size(), std::vector<double>(n));
  std::vector<double> sup(n), events(n), psi(n);
  sum.min_origin_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = paths[i];
    for (std::size_t k = 0; k < idx.size(); ++k) {
      sum.q_marginals[k][i] = p.q1[k];
      p_sq[k][i] = p.p_sq[k];
    }
    sup[i] = p.sup_mu_p_sq;
    events[i] = static_cast<double>(p.events);
    psi[i] = p.psi_final;
    sum.min_origin_sq = std::min(sum.min_origin_sq, p.min_origin_sq);
    sum.folded_steps += p.folded_steps;
    sum.event_count_max = std::max(sum.event_count_max, p.events);
    if (p.traj) sum.trajectories.push_back(std::move(*p.traj));
    if (p.limit) sum.limit_paths.push_back(std::move(*p.limit));
  }
  for (const auto& v : p_sq) sum.p_sq.push_back(estimate_mean(v));
  sum.sup_mu_p_sq = estimate_mean(sup);
  sum.event_count = estimate_mean(events);
  sum.event_count_p50 = quantile(events, 0.5);
  sum.event_count_p99 = quantile(events, 0.99);
  sum.psi_final = estimate_mean(psi);
  return sum;
}

double momentum_moment_rhs(double t, double mu, int r, double p0_sq) {
  const double decay = std::exp(-2.0 * t / mu);
  return decay * p0_sq + static_cast<double>(r) / (2.0 * mu) * (-std::expm1(-2.0 * t / mu));
}

std::vector<MomentRow> moment_bound_check(const EnsembleConfig& config) {
  if (!config.field.zero_drift() || !config.field.identity_diffusion()) {
    throw std::invalid_argument("moment_bound_check: needs zero drift and identity diffusion");
  }
  EnsembleConfig free_config = config;
  free_config.mode = Mode::free;
  const auto sum = run_ensemble(free_config);
  std::vector<MomentRow> rows;
  for (std::size_t k = 0; k < sum.sample_times.size(); ++k) {
    MomentRow row;
    row.t = sum.sample_times[k];
    row.empirical = sum.p_sq[k].mean;
    row.se = sum.p_sq[k].se;
    row.rhs = momentum_moment_rhs(row.t, config.params.mu, config.field.dim(),
                                  config.init.p.squaredNorm());
    if (row.se > 0.0) {
      row.z = (row.empirical - row.rhs) / row.se;
      row.within = std::abs(row.z) <= 4.0;
    } else {
      row.within = std::abs(row.empirical - row.rhs) <= 1e-12 * (1.0 + row.rhs);
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

// dt = mu / ratio, rounded so that T is a whole number of steps.
double study_dt(double mu, double T, double ratio) {
  const double steps = std::ceil(T * ratio / mu - 1e-9);
  return T / steps;
}

}  // namespace

std::vector<SupMomentRow> sup_momentum_moment(const EnsembleConfig& config,
                                              const std::vector<double>& mu_list,
                                              double dt_ratio) {
  std::vector<SupMomentRow> rows;
  for (double mu : mu_list) {
    EnsembleConfig c = config;
    c.params.mu = mu;
    c.params.dt = study_dt(mu, c.params.T, dt_ratio);
    c.level = 0;
    c.sample_times.clear();
    c.keep_paths = 0;
    SupMomentRow row;
    row.mu = mu;
    row.dt = c.params.dt;
    row.estimate = run_ensemble(c).sup_mu_p_sq;
    c.params.dt /= 2.0;
    c.level = 1;
    row.refined = run_ensemble(c).sup_mu_p_sq;
    row.stable = row.estimate.mean > 0.0 &&
                 std::abs(row.refined.mean / row.estimate.mean - 1.0) <= 0.1;
    rows.push_back(row);
  }
  return rows;
}

bool strictly_decreasing(const std::vector<SupMomentRow>& rows, double k) {
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const auto& a = rows[i].estimate;
    const auto& b = rows[i + 1].estimate;
    if (!(a.mean - b.mean > k * std::hypot(a.se, b.se))) return false;
  }
  return true;
}

double sup_moment_scale(double mu, int r, double T) {
  return 4.0 * mu * (static_cast<double>(r) / 2.0) * (1.0 + std::log(T / mu));
}

namespace {

bool nonincreasing(const std::vector<ConvergenceRow>& rows, double k, bool use_ks) {
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double a = use_ks ? rows[i].ks : rows[i].w1;
    const double b = use_ks ? rows[i + 1].ks : rows[i + 1].w1;
    const double sa = use_ks ? rows[i].ks_se : rows[i].w1_se;
    const double sb = use_ks ? rows[i + 1].ks_se : rows[i + 1].w1_se;
    if (b > a + k * std::hypot(sa, sb)) return false;
  }
  return true;
}

// n points of the reference law at probabilities (i + 1/2) / n.
std::vector<double> reference_quantiles(const Cdf& cdf, std::size_t n, double hi) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    out[i] = invert_cdf(cdf, u, 0.0, hi);
  }
  return out;
}

std::vector<double> empirical_quantiles(std::vector<double> sample, std::size_t n) {
  std::sort(sample.begin(), sample.end());
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    auto k = static_cast<std::size_t>(u * static_cast<double>(sample.size()));
    out[i] = sample[std::min(k, sample.size() - 1)];
  }
  return out;
}

}  // namespace

bool ConvergenceTable::ks_nonincreasing(double k) const { return nonincreasing(rows, k, true); }
bool ConvergenceTable::w1_nonincreasing(double k) const { return nonincreasing(rows, k, false); }

ConvergenceTable convergence_study(const EnsembleConfig& config, const std::vector<double>& mu_list,
                                   const ConvergenceOptions& options) {
  if (mu_list.empty()) throw std::invalid_argument("convergence_study: empty mu list");
  const double T = config.params.T;
  ConvergenceTable table;

  std::vector<double> dts;
  for (double mu : mu_list) dts.push_back(study_dt(mu, T, options.dt_ratio));

  Cdf reference_cdf;
  SampleSet reference_sample;
  if (config.field.zero_drift() && config.field.identity_diffusion()) {
    table.analytic_reference = true;
    const double start = config.init.q[0];
    reference_cdf = [T, start](double x) { return half_normal_cdf(x, T, start); };
  } else {
    EnsembleConfig ref = config;
    ref.mode = Mode::limit;
    ref.params.dt = *std::min_element(dts.begin(), dts.end()) / 10.0;
    ref.params.n_paths = options.reference_paths;
    ref.params.seed = config.params.seed + options.reference_seed_offset;
    ref.level = 0;
    ref.sample_times.clear();
    ref.keep_paths = 0;
    table.reference_dt = ref.params.dt;
    reference_sample = SampleSet(run_ensemble(ref).final_marginal());
    reference_sample.sort();
  }

  for (std::size_t m = 0; m < mu_list.size(); ++m) {
    EnsembleConfig c = config;
    c.params.mu = mu_list[m];
    c.params.dt = dts[m];
    c.level = 0;
    c.sample_times.clear();
    c.keep_paths = 0;
    const auto sum = run_ensemble(c);
    const auto& qT = sum.final_marginal();

    ConvergenceRow row;
    row.mu = mu_list[m];
    row.dt = dts[m];
    row.sup_mu_p_sq = sum.sup_mu_p_sq;
    row.events = sum.event_count;
    row.psi_final = sum.psi_final;

    std::function<double(const SampleSet&)> ks;
    std::function<double(const SampleSet&)> w1;
    if (table.analytic_reference) {
      const double hi = config.init.q[0] + 40.0 * std::sqrt(T);
      auto ref_q = std::make_shared<SampleSet>(reference_quantiles(reference_cdf, qT.size(), hi));
      ks = [&reference_cdf](const SampleSet& s) { return ks_one_sample(s, reference_cdf); };
      w1 = [ref_q](const SampleSet& s) { return wasserstein1(s, *ref_q); };
    } else {
      auto ref_q = std::make_shared<SampleSet>(
          empirical_quantiles(reference_sample.values(), qT.size()));
      ks = [&reference_sample](const SampleSet& s) { return ks_two_sample(s, reference_sample); };
      w1 = [ref_q](const SampleSet& s) { return wasserstein1(s, *ref_q); };
    }
    const SampleSet sample(qT);
    row.ks = ks(sample);
    row.w1 = w1(sample);
    const std::uint64_t boot_seed = config.params.seed ^ (0xB0075ULL + m);
    row.ks_se = bootstrap_se(qT, ks, options.bootstrap, boot_seed);
    row.w1_se = bootstrap_se(qT, w1, options.bootstrap, boot_seed);
    table.rows.push_back(row);
  }
  return table;
}

OccupancyResult occupancy_study(const EnsembleConfig& config, const std::vector<double>& deltas) {
  if (deltas.size() < 2) throw std::invalid_argument("occupancy_study: need two or more deltas");
  validate(config);
  if (config.mode != Mode::reflected && config.mode != Mode::folded &&
      config.mode != Mode::free) {
    throw std::invalid_argument("occupancy_study: needs a Langevin mode");
  }
  for (double d : deltas) {
    if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument(fmt::format("delta {} outside (0, 1)", d));
  }

  const auto per_path = parallel_map<std::vector<double>>(
      config.params.n_paths, config.threads, [&](std::size_t i) {
        const NoisePath noise = make_noise(config, i);
        ReflectOptions opts = config.reflect;
        opts.scheme = config.scheme;
        Trajectory traj;
        if (config.mode == Mode::reflected) {
          traj = simulate_reflected(config.init, config.field, config.params, noise, opts);
        } else if (config.mode == Mode::folded) {
          traj = simulate_folded(config.init, config.field, config.params, noise, opts);
        } else {
          traj = simulate_free(config.init, config.field, config.params, noise, config.scheme);
        }
        std::vector<double> occ;
        for (double d : deltas) occ.push_back(occupation_time(traj, d));
        return occ;
      });

  OccupancyResult res;
  res.deltas = deltas;
  std::vector<double> log_d, log_occ;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    std::vector<double> v(per_path.size());
    for (std::size_t i = 0; i < per_path.size(); ++i) v[i] = per_path[i][k];
    res.occupation.push_back(estimate_mean(v));
    log_d.push_back(std::log(deltas[k]));
    log_occ.push_back(std::log(res.occupation.back().mean));
  }
  res.slope = fit_slope(log_d, log_occ);
  return res;
}

EventCensus event_census(const EnsembleConfig& config) {
  EnsembleConfig c = config;
  c.mode = Mode::reflected;
  c.keep_paths = 0;
  const auto coarse = run_ensemble(c);
  c.params.dt /= 2.0;
  c.level += 1;
  const auto fine = run_ensemble(c);
  EventCensus census;
  census.p99 = coarse.event_count_p99;
  census.p99_refined = fine.event_count_p99;
  census.mean = coarse.event_count.mean;
  census.mean_refined = fine.event_count.mean;
  census.stable = census.p99 > 0.0 && std::abs(census.p99_refined / census.p99 - 1.0) <= 0.2;
  return census;
}

std::vector<DecompositionRow> decomposition_study(const EnsembleConfig& config,
                                                  double tol_factor) {
  validate(config);
  ReflectOptions opts = config.reflect;
  opts.scheme = config.scheme;
  struct Item {
    Decomposition d;
    Trajectory traj;
    double max_abs_p = 0.0;
  };
  auto items = parallel_map<Item>(config.params.n_paths, config.threads, [&](std::size_t i) {
    const NoisePath noise = make_noise(config, i);
    Item item;
    item.traj = simulate_reflected(config.init, config.field, config.params, noise, opts);
    item.d = decompose(item.traj, config.field, config.params.mu, noise);
    for (const auto& s : item.traj.states) {
      item.max_abs_p = std::max(item.max_abs_p, s.p.cwiseAbs().maxCoeff());
    }
    return item;
  });
  double p_scale = 0.0;
  for (const auto& it : items) p_scale = std::max(p_scale, it.max_abs_p);
  const double tol = tol_factor * config.params.dt * p_scale;

  std::vector<DecompositionRow> rows;
  for (std::size_t i = 0; i < items.size(); ++i) {
    DecompositionRow row;
    row.path = i;
    row.residual = items[i].d.residual;
    row.max_abs_p = items[i].max_abs_p;
    row.report = verify_skorohod(items[i].d.as_skorohod(items[i].traj), tol);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace reflang
