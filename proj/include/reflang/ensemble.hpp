#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflang/integrator.hpp"
#include "reflang/reflector.hpp"
#include "reflang/skorohod.hpp"
#include "reflang/stats.hpp"

namespace reflang {

enum class Mode { free, reflected, folded, limit };

std::string to_string(Mode mode);

/// A path failed; the message carries the path index.
class PathError : public std::runtime_error {
 public:
  PathError(std::size_t path, const std::string& what);
  [[nodiscard]] std::size_t path() const { return path_; }

 private:
  std::size_t path_;
};

struct EnsembleConfig {
  Mode mode = Mode::reflected;
  FieldSpec field;
  PhaseState init;
  SimParams params;  // params.dt is the step actually used
  Scheme scheme = Scheme::exponential;
  /// Bridge refinements between the noise's base grid and params.dt. Runs at
  /// level l and l + 1 with the same seed see the same Wiener paths.
  int level = 0;
  std::vector<double> sample_times;  // grid nodes; empty means {T}
  std::size_t threads = 1;
  std::size_t keep_paths = 0;     // trajectories retained in the summary
  std::uint64_t first_path = 0;   // noise stream of path i is first_path + i
  ReflectOptions reflect;
};

/// Runs f(i) for i in [0, n) on `threads` workers and returns the results in
/// index order. The first failure (lowest index) is rethrown as PathError.
template <class Result>
std::vector<Result> parallel_map(std::size_t n, std::size_t threads,
                                 const std::function<Result(std::size_t)>& f);

struct EnsembleSummary {
  Mode mode = Mode::reflected;
  double mu = 0.0;
  double dt = 0.0;
  double T = 0.0;
  std::size_t n_paths = 0;
  std::vector<double> sample_times;
  std::vector<std::vector<double>> q_marginals;  // q1 per sample time, path order
  std::vector<MeanEstimate> p_sq;                // E|p_t|^2 per sample time
  MeanEstimate sup_mu_p_sq;                      // E max_n |mu p_n|^2
  MeanEstimate event_count;
  double event_count_p50 = 0.0;
  double event_count_p99 = 0.0;
  std::size_t event_count_max = 0;
  MeanEstimate psi_final;
  double min_origin_sq = 0.0;  // min over paths and nodes of q1^2 + p1^2
  std::size_t folded_steps = 0;
  std::vector<Trajectory> trajectories;  // first keep_paths paths (not limit mode)
  std::vector<SkorohodSolution> limit_paths;  // first keep_paths paths (limit mode)

  [[nodiscard]] const std::vector<double>& final_marginal() const { return q_marginals.back(); }
};

/// Builds path i's noise for the configuration.
NoisePath make_noise(const EnsembleConfig& config, std::size_t path);

EnsembleSummary run_ensemble(const EnsembleConfig& config);

/// e^{-2t/mu} |p0|^2 + (r / (2 mu)) (1 - e^{-2t/mu}).
double momentum_moment_rhs(double t, double mu, int r, double p0_sq);

struct MomentRow {
  double t = 0.0;
  double empirical = 0.0;
  double se = 0.0;
  double rhs = 0.0;
  double z = 0.0;
  bool within = false;  // |z| <= 4
};

/// Free-space E|p_t|^2 against the closed form; zero drift and identity
/// diffusion only.
std::vector<MomentRow> moment_bound_check(const EnsembleConfig& config);

struct SupMomentRow {
  double mu = 0.0;
  double dt = 0.0;
  MeanEstimate estimate;
  MeanEstimate refined;  // same paths at dt / 2
  bool stable = false;   // |refined / estimate - 1| <= 0.1
};

/// E[max_n |mu p_n|^2] per mu with dt = mu / dt_ratio, plus the dt/2 rerun.
std::vector<SupMomentRow> sup_momentum_moment(const EnsembleConfig& config,
                                              const std::vector<double>& mu_list,
                                              double dt_ratio = 20.0);

/// rows[i].estimate exceeds rows[i + 1].estimate by more than k combined
/// standard errors for every i.
bool strictly_decreasing(const std::vector<SupMomentRow>& rows, double k = 2.0);

/// 4 mu (r / 2)(1 + ln(T / mu)): the running-max scale for zero drift.
double sup_moment_scale(double mu, int r, double T);

struct ConvergenceOptions {
  double dt_ratio = 20.0;  // dt = mu / dt_ratio
  int bootstrap = 200;
  std::size_t reference_paths = 50'000;
  std::uint64_t reference_seed_offset = 0x5EED;
};

struct ConvergenceRow {
  double mu = 0.0;
  double dt = 0.0;
  double ks = 0.0;
  double ks_se = 0.0;
  double w1 = 0.0;
  double w1_se = 0.0;
  MeanEstimate sup_mu_p_sq;
  MeanEstimate events;
  MeanEstimate psi_final;
};

struct ConvergenceTable {
  bool analytic_reference = false;
  double reference_dt = 0.0;
  std::vector<ConvergenceRow> rows;

  /// ks (or w1) never rises by more than k combined bootstrap errors.
  [[nodiscard]] bool ks_nonincreasing(double k = 2.0) const;
  [[nodiscard]] bool w1_nonincreasing(double k = 2.0) const;
};

/// Distance of the q1(T) marginal to the reflected limit for each mu.
/// With zero drift and identity diffusion the reference is the analytic law
/// of reflected Brownian motion from q1(0); otherwise a simulate_limit
/// ensemble with dt one decade below the smallest study dt.
ConvergenceTable convergence_study(const EnsembleConfig& config, const std::vector<double>& mu_list,
                                   const ConvergenceOptions& options = {});

struct OccupancyResult {
  std::vector<double> deltas;
  std::vector<MeanEstimate> occupation;
  double slope = 0.0;  // d log(occupation) / d log(delta)
};

OccupancyResult occupancy_study(const EnsembleConfig& config, const std::vector<double>& deltas);

struct EventCensus {
  double p99 = 0.0;
  double p99_refined = 0.0;
  double mean = 0.0;
  double mean_refined = 0.0;
  bool stable = false;  // |p99_refined / p99 - 1| <= 0.2
};

/// Reflection counts at dt and dt / 2 over the same Wiener paths.
EventCensus event_census(const EnsembleConfig& config);

struct DecompositionRow {
  std::size_t path = 0;
  double residual = 0.0;
  double max_abs_p = 0.0;
  SkorohodReport report;
};

/// Decomposes every reflected path of the configuration and checks (q, Phi)
/// against the Skorohod conditions at tolerance tol_factor * dt * max|p|
/// (max over the ensemble).
std::vector<DecompositionRow> decomposition_study(const EnsembleConfig& config,
                                                  double tol_factor = 5.0);

}  // namespace reflang

#include "reflang/parallel.inl"
