#include "reflang/skorohod.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace reflang {

SkorohodSolution skorohod_map(const std::vector<double>& t, const std::vector<Vector>& w) {
  if (t.size() != w.size() || w.empty()) {
    throw std::invalid_argument("skorohod_map: time and path lengths differ or are empty");
  }
  if (!(w[0][0] >= 0.0)) {
    throw std::invalid_argument(fmt::format("skorohod_map: w1(0) = {} is negative", w[0][0]));
  }
  const auto r = w[0].size();
  SkorohodSolution sol;
  sol.t = t;
  sol.w = w;
  sol.q.resize(w.size());
  sol.phi.resize(w.size());
  sol.total_variation.resize(w.size());

  double push = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    push = std::max(push, -w[n][0]);
    sol.phi[n] = Vector::Zero(r);
    sol.phi[n][0] = push;
    sol.q[n] = w[n] + sol.phi[n];
    sol.total_variation[n] = push;
  }
  return sol;
}

SkorohodSolution simulate_limit(const Vector& q0, const FieldSpec& field, const SimParams& params,
                                const NoisePath& noise) {
  if (!field.identity_diffusion()) {
    throw std::invalid_argument("simulate_limit: requires the identity diffusion");
  }
  if (q0.size() != field.dim() || noise.dim() != field.dim()) {
    throw std::invalid_argument("simulate_limit: dimension mismatch");
  }
  if (!(q0[0] >= 0.0)) {
    throw std::invalid_argument(fmt::format("simulate_limit: q1(0) = {} is negative", q0[0]));
  }
  if (std::abs(noise.horizon() - params.T) > 1e-12 * params.T) {
    throw std::invalid_argument("simulate_limit: noise horizon differs from T");
  }

  const std::size_t steps = noise.steps();
  SkorohodSolution sol;
  sol.t = noise.grid();
  sol.w.resize(steps + 1);
  sol.q.resize(steps + 1);
  sol.phi.resize(steps + 1);
  sol.total_variation.resize(steps + 1);

  // Stepwise projection max(0, q + b dt + dW) written as the Skorohod
  // recurrence on the unconstrained part, so that q = w + phi holds exactly.
  Vector w = q0;
  double push = 0.0;
  sol.w[0] = w;
  sol.phi[0] = Vector::Zero(q0.size());
  sol.q[0] = q0;
  sol.total_variation[0] = 0.0;
  for (std::size_t n = 0; n < steps; ++n) {
    w += field.drift(sol.q[n]) * noise.step_size(n) + noise.increment(n);
    push = std::max(push, -w[0]);
    sol.w[n + 1] = w;
    sol.phi[n + 1] = Vector::Zero(q0.size());
    sol.phi[n + 1][0] = push;
    sol.q[n + 1] = w + sol.phi[n + 1];
    sol.total_variation[n + 1] = push;
  }
  return sol;
}

SkorohodReport verify_skorohod(const SkorohodSolution& sol, double tol) {
  SkorohodReport rep;
  for (std::size_t n = 0; n < sol.size(); ++n) {
    rep.max_additivity =
        std::max(rep.max_additivity, (sol.q[n] - (sol.w[n] + sol.phi[n])).cwiseAbs().maxCoeff());
    // Leaving the half-space counts against complementarity too.
    rep.max_complementarity = std::max(rep.max_complementarity, -sol.q[n][0]);
    for (Eigen::Index i = 1; i < sol.phi[n].size(); ++i) {
      rep.max_monotonicity = std::max(rep.max_monotonicity, std::abs(sol.phi[n][i]));
    }
    if (n == 0) {
      rep.max_monotonicity = std::max(rep.max_monotonicity, std::abs(sol.phi[0][0]));
      continue;
    }
    const double growth = sol.phi[n][0] - sol.phi[n - 1][0];
    rep.max_monotonicity = std::max(rep.max_monotonicity, -growth);
    if (growth > 0.0) {
      rep.max_complementarity = std::max(rep.max_complementarity, sol.q[n][0]);
    }
  }
  rep.additivity = rep.max_additivity <= tol;
  rep.monotonicity = rep.max_monotonicity <= tol;
  rep.complementarity = rep.max_complementarity <= tol;
  return rep;
}

SkorohodSolution Decomposition::as_skorohod(const Trajectory& traj) const {
  SkorohodSolution sol;
  sol.t = t;
  sol.w.resize(t.size());
  sol.q.resize(t.size());
  sol.phi = Phi;
  sol.total_variation.resize(t.size());
  for (std::size_t n = 0; n < t.size(); ++n) {
    sol.w[n] = H[n] + X[n];
    sol.q[n] = traj.states[n].q;
    sol.total_variation[n] = Phi[n][0];
  }
  return sol;
}

Decomposition decompose(const Trajectory& traj, const FieldSpec& field, double mu,
                        const NoisePath& noise) {
  if (traj.size() != noise.steps() + 1 || traj.psi.size() != traj.size()) {
    throw std::invalid_argument(fmt::format("decompose: trajectory has {} nodes, noise grid {}",
                                            traj.size(), noise.steps() + 1));
  }
  for (std::size_t n = 0; n < traj.size(); ++n) {
    if (std::abs(traj.time(n) - noise.grid()[n]) > 1e-12 * (1.0 + noise.horizon())) {
      throw std::invalid_argument(fmt::format("decompose: grid mismatch at node {}", n));
    }
  }

  const auto r = traj.states[0].q.size();
  const Vector base = traj.states[0].q + mu * traj.states[0].p;
  Decomposition d;
  d.t = noise.grid();
  d.H.resize(traj.size());
  d.X.resize(traj.size());
  d.Phi.resize(traj.size());

  Vector drift_integral = Vector::Zero(r);
  Vector w = Vector::Zero(r);
  for (std::size_t n = 0; n < traj.size(); ++n) {
    if (n > 0) {
      drift_integral += field.drift(traj.states[n - 1].q) * noise.step_size(n - 1);
      w += noise.increment(n - 1);
    }
    d.H[n] = base - mu * traj.states[n].p;
    d.X[n] = drift_integral + field.apply_diffusion(w);
    d.Phi[n] = Vector::Zero(r);
    d.Phi[n][0] = traj.psi[n];
    const Vector gap = traj.states[n].q - (d.H[n] + d.X[n] + d.Phi[n]);
    d.residual = std::max(d.residual, gap.norm());
  }
  return d;
}

}  // namespace reflang
