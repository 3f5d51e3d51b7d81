#pragma once

#include <optional>
#include <stdexcept>

#include "reflang/integrator.hpp"

namespace reflang {

/// |q1| below this counts as on the boundary.
inline constexpr double kBoundaryTolerance = 1e-12;

struct ReflectOptions {
  std::size_t max_events = 1'000'000;
  /// Crossings resolved inside one grid step before the step is folded.
  std::size_t max_substeps = 64;
  Scheme scheme = Scheme::exponential;
};

/// Raised when a path exceeds ReflectOptions::max_events.
class EventStorm : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fraction theta in (0, 1] of the step at which the linear interpolant of q1
/// reaches zero, when before.q1 > 0 and after.q1 <= 0.
std::optional<double> detect_crossing(const PhaseState& before, const PhaseState& after);

/// Elastic reflection at q1 = 0: q1 set to 0, p1 negated, everything else kept.
/// Requires |q1| < kBoundaryTolerance.
PhaseState reflect(const PhaseState& state);

/// Local-time increment mu * (-2 p_minus . e1) of a flip.
double psi_increment(double mu, const Vector& p_minus);

/// Langevin process with elastic reflection. Within a step whose trial end
/// point leaves the half-space, the step is cut at the interpolated crossing
/// (the Wiener increment is split by a Brownian bridge), the momentum flipped,
/// and the remainder re-scanned for further crossings.
Trajectory simulate_reflected(const PhaseState& init, const FieldSpec& field,
                              const SimParams& params, const NoisePath& noise,
                              const ReflectOptions& options = {});

/// Integrates the sign-folded system in the whole space, where the first
/// momentum equation carries sgn(q1) on drift and noise and drifts are
/// evaluated at |q| (sgn(0) = +1), then returns (|q1|, q2.., sgn(q1) p1, p2..).
/// Events are reconstructed from sign changes of q1. Identity diffusion only.
Trajectory simulate_folded(const PhaseState& init, const FieldSpec& field,
                           const SimParams& params, const NoisePath& noise,
                           const ReflectOptions& options = {});

/// Grid time spent with |q1| <= delta^2 / 2 and |p1| <= delta / 2
/// (left-endpoint rule). delta must lie in (0, 1).
double occupation_time(const Trajectory& traj, double delta);

/// sgn with sgn(0) = +1.
inline double sign_of(double x) { return x >= 0.0 ? 1.0 : -1.0; }

}  // namespace reflang
