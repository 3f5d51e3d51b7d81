#pragma once

#include <cstddef>
#include <vector>

#include "reflang/model.hpp"
#include "reflang/noise.hpp"

namespace reflang {

/// Momentum flip at the boundary q1 = 0.
struct ReflectionEvent {
  double tau = 0.0;
  Vector p_minus;
  Vector p_plus;
  double psi_increment = 0.0;  // mu * (-2 p_minus[0]) for the inward normal e1
};

struct Trajectory {
  std::vector<PhaseState> states;  // one per grid node
  std::vector<ReflectionEvent> events;
  std::vector<double> psi;  // accumulated local time at each node

  /// Crossings that could not be localised inside a step and were resolved
  /// by folding the end-of-step state (see simulate_reflected).
  std::size_t folded_steps = 0;

  [[nodiscard]] std::size_t size() const { return states.size(); }
  [[nodiscard]] double time(std::size_t n) const { return states[n].t; }
};

enum class Scheme {
  exponential,  // exact OU update of p with b(q) frozen over the step
  euler,        // explicit Euler-Maruyama, requires dt <= mu / 10
};

/// Coefficients of the frozen-drift OU step of length h for mass mu.
///
/// Over one step, with I = int_0^h exp(-(h - s) / mu) dW_s:
///   p' = p e + b (1 - e) + Sigma I / mu,   e = exp(-h / mu)
///   Var I = (mu / 2)(1 - e^2),   Cov(I, dW) = mu (1 - e)
/// I is drawn as (Cov / h) dW + sqrt(Var I - Cov^2 / h) * aux.
struct OuCoefficients {
  double h = 0.0;
  double decay = 1.0;        // e
  double one_minus = 0.0;    // 1 - e
  double regression = 0.0;   // Cov / h
  double residual_sd = 0.0;  // sqrt(Var I - Cov^2 / h)

  OuCoefficients(double mu, double h);
};

/// Advances (q, p) by dt with the given drift vector and scaled noise.
/// noise_dw and noise_aux are applied through Sigma by the caller; see
/// step_langevin for the common case.
PhaseState advance(const PhaseState& s, const Vector& drift, const Matrix* sigma, double mu,
                   const OuCoefficients& c, const Vector& dw, const Vector& aux);

/// One step of mu dp = (b(q) - p) dt + Sigma dW, dq = p dt.
/// Exponential scheme: exact OU for p, trapezoid for q.
/// Euler scheme: p' = p + ((b - p) dt + Sigma dW) / mu, q' = q + p dt; aux is unused.
PhaseState step_langevin(const PhaseState& s, const FieldSpec& field, double mu, double dt,
                         const Vector& dw, const Vector& aux = Vector(),
                         Scheme scheme = Scheme::exponential);

/// Euler-Maruyama step of dq = b(q) dt + Sigma dW.
Vector step_overdamped(const Vector& q, const FieldSpec& field, double dt, const Vector& dw);

/// Free-space Langevin trajectory on the noise grid.
Trajectory simulate_free(const PhaseState& init, const FieldSpec& field, const SimParams& params,
                         const NoisePath& noise, Scheme scheme = Scheme::exponential);

/// Overdamped trajectory q_n on the noise grid (no boundary).
std::vector<Vector> simulate_overdamped(const Vector& q0, const FieldSpec& field,
                                        const NoisePath& noise);

/// Checks that noise, field and state agree on dimension and that the noise
/// grid covers [0, params.T]. Throws std::invalid_argument otherwise.
void check_consistency(const PhaseState& init, const FieldSpec& field, const SimParams& params,
                       const NoisePath& noise);

/// Throws unless mu > 0, dt > 0, and for the Euler scheme dt <= mu / 10.
void check_step(double mu, double dt, Scheme scheme);

}  // namespace reflang
