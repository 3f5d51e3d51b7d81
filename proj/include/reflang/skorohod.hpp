#pragma once

#include <vector>

#include "reflang/integrator.hpp"

namespace reflang {

/// Discrete solution (q, phi, |phi|) of the half-space Skorohod problem for
/// the input path w, all sampled on the grid t.
struct SkorohodSolution {
  std::vector<double> t;
  std::vector<Vector> w;
  std::vector<Vector> q;
  std::vector<Vector> phi;
  std::vector<double> total_variation;

  [[nodiscard]] std::size_t size() const { return t.size(); }
};

/// Half-space Skorohod map: phi1_n = max(phi1_{n-1}, -w1_n), phi1_0 = 0,
/// q = w + phi. Throws std::invalid_argument if w1(0) < 0.
SkorohodSolution skorohod_map(const std::vector<double>& t, const std::vector<Vector>& w);

/// Reflected SDE q = q0 + int b(q) ds + W + Phi. Euler step followed by the
/// Skorohod correction; w holds the unconstrained part q0 + int b(q) + W.
/// Identity diffusion only.
SkorohodSolution simulate_limit(const Vector& q0, const FieldSpec& field, const SimParams& params,
                                const NoisePath& noise);

struct SkorohodReport {
  bool additivity = false;       // |q - (w + phi)| <= tol
  bool monotonicity = false;     // phi1 nondecreasing, phi2.. = 0
  bool complementarity = false;  // q1 >= -tol, and phi1 grows only where q1 <= tol
  double max_additivity = 0.0;
  double max_monotonicity = 0.0;
  double max_complementarity = 0.0;  // largest q1 where phi1 grew, or -q1

  [[nodiscard]] bool passed() const { return additivity && monotonicity && complementarity; }
};

SkorohodReport verify_skorohod(const SkorohodSolution& sol, double tol);

/// q = H + X + Phi for a reflected Langevin trajectory, where
///   H = q0 + mu p0 - mu p_t,  X = int b(q) ds + Sigma W_t,  Phi = psi_t e1.
struct Decomposition {
  std::vector<double> t;
  std::vector<Vector> H;
  std::vector<Vector> X;
  std::vector<Vector> Phi;
  double residual = 0.0;  // max_n |q_n - (H_n + X_n + Phi_n)|

  /// (w = H + X, q, Phi) as a Skorohod problem instance.
  [[nodiscard]] SkorohodSolution as_skorohod(const Trajectory& traj) const;
};

/// Drift integral by the left-endpoint rule. Throws std::invalid_argument
/// when the trajectory and noise grids differ.
Decomposition decompose(const Trajectory& traj, const FieldSpec& field, double mu,
                        const NoisePath& noise);

}  // namespace reflang
