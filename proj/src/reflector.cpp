#include "reflang/reflector.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace reflang {

namespace {

// First zero in (0, 1] of the cubic Hermite interpolant of q1 on a step that
// starts on the boundary (q1 = 0, p1 >= 0) and ends below it.
double hermite_crossing(const PhaseState& before, const PhaseState& after, double h) {
  const double q0 = before.q[0];
  const double m0 = h * before.p[0];
  const double q1 = after.q[0];
  const double m1 = h * after.p[0];
  auto value = [&](double x) {
    const double x2 = x * x;
    const double x3 = x2 * x;
    return (2 * x3 - 3 * x2 + 1) * q0 + (x3 - 2 * x2 + x) * m0 + (-2 * x3 + 3 * x2) * q1 +
           (x3 - x2) * m1;
  };
  constexpr int kScan = 64;
  double lo = 0.0;
  double hi = 1.0;
  for (int k = 1; k <= kScan; ++k) {
    const double x = static_cast<double>(k) / kScan;
    if (value(x) <= 0.0) {
      hi = x;
      break;
    }
    lo = x;
  }
  for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (value(mid) <= 0.0 ? hi : lo) = mid;
  }
  return hi;
}

class Stepper {
 public:
  Stepper(const FieldSpec& field, double mu, Scheme scheme)
      : field_(field),
        mu_(mu),
        scheme_(scheme),
        sigma_(field.identity_diffusion() ? nullptr : &field.diffusion()) {}

  PhaseState operator()(const PhaseState& s, double h, const Vector& dw, const Vector& aux,
                        const OuCoefficients* cached = nullptr) const {
    if (scheme_ == Scheme::euler) {
      return step_langevin(s, field_, mu_, h, dw, aux, Scheme::euler);
    }
    const Vector b = field_.drift(s.q);
    if (cached != nullptr) return advance(s, b, sigma_, mu_, *cached, dw, aux);
    return advance(s, b, sigma_, mu_, OuCoefficients(mu_, h), dw, aux);
  }

 private:
  const FieldSpec& field_;
  double mu_;
  Scheme scheme_;
  const Matrix* sigma_;
};

void push_event(Trajectory& traj, double& psi, double tau, const Vector& p_minus, double mu,
                const ReflectOptions& options) {
  if (traj.events.size() >= options.max_events) {
    throw EventStorm(fmt::format("more than {} reflections before t = {}", options.max_events, tau));
  }
  ReflectionEvent ev;
  ev.tau = tau;
  ev.p_minus = p_minus;
  ev.p_plus = p_minus;
  ev.p_plus[0] = -p_minus[0];
  ev.psi_increment = psi_increment(mu, p_minus);
  psi += ev.psi_increment;
  traj.events.push_back(std::move(ev));
}

}  // namespace

std::optional<double> detect_crossing(const PhaseState& before, const PhaseState& after) {
  const double a = before.q[0];
  const double b = after.q[0];
  if (!(a > 0.0) || b > 0.0) return std::nullopt;
  const double theta = a / (a - b);
  return std::min(1.0, theta);
}

PhaseState reflect(const PhaseState& state) {
  if (!(std::abs(state.q[0]) < kBoundaryTolerance)) {
    throw std::invalid_argument(fmt::format("reflect: q1 = {} is not on the boundary", state.q[0]));
  }
  PhaseState out = state;
  out.q[0] = 0.0;
  out.p[0] = -state.p[0];
  return out;
}

double psi_increment(double mu, const Vector& p_minus) { return mu * (-2.0 * p_minus[0]); }

Trajectory simulate_reflected(const PhaseState& init, const FieldSpec& field,
                              const SimParams& params, const NoisePath& noise,
                              const ReflectOptions& options) {
  check_consistency(init, field, params, noise);
  check_step(params.mu, params.dt, options.scheme);
  validate_reflected_start(init);

  const double mu = params.mu;
  const Stepper step(field, mu, options.scheme);
  const OuCoefficients full(mu, noise.step_size(0));

  Trajectory traj;
  traj.states.reserve(noise.steps() + 1);
  traj.psi.reserve(noise.steps() + 1);
  PhaseState s = init;
  s.t = noise.grid()[0];
  double psi = 0.0;
  traj.states.push_back(s);
  traj.psi.push_back(psi);

  for (std::size_t n = 0; n < noise.steps(); ++n) {
    const double t_end = noise.grid()[n + 1];
    double remaining = noise.step_size(n);
    Vector dw = noise.increment(n);
    Vector aux = noise.auxiliary(n);
    bool whole = true;

    for (std::uint64_t j = 0;; ++j) {
      PhaseState trial = step(s, remaining, dw, aux, whole ? &full : nullptr);
      trial.t = s.t + remaining;
      if (trial.q[0] > 0.0) {
        s = trial;
        break;
      }
      if (j >= options.max_substeps) {
        // Could not localise the crossings: fold the end point instead.
        ++traj.folded_steps;
        if (trial.q[0] < 0.0) {
          Vector p_minus = trial.p;
          p_minus[0] = -std::abs(trial.p[0]);
          push_event(traj, psi, t_end, p_minus, mu, options);
          trial.q[0] = -trial.q[0];
          trial.p[0] = -trial.p[0];
        }
        s = trial;
        break;
      }

      const double theta =
          s.q[0] > 0.0 ? *detect_crossing(s, trial) : hermite_crossing(s, trial, remaining);
      PhaseState mid;
      Vector dw_first;
      if (theta >= 1.0) {
        mid = trial;
        dw_first = dw;
      } else {
        dw_first = bridge_split(dw, remaining, theta, noise.bridge_normal(n, j));
        mid = step(s, theta * remaining, dw_first, noise.substep_auxiliary(n, 2 * j));
        mid.t = s.t + theta * remaining;
      }
      mid.q[0] = 0.0;
      if (mid.p[0] < 0.0) {
        push_event(traj, psi, mid.t, mid.p, mu, options);
        mid = reflect(mid);
      }
      if (theta >= 1.0) {
        s = mid;
        break;
      }
      remaining -= theta * remaining;
      dw -= dw_first;
      aux = noise.substep_auxiliary(n, 2 * j + 1);
      whole = false;
      s = mid;
    }
    s.t = t_end;
    traj.states.push_back(s);
    traj.psi.push_back(psi);
  }
  return traj;
}

Trajectory simulate_folded(const PhaseState& init, const FieldSpec& field,
                           const SimParams& params, const NoisePath& noise,
                           const ReflectOptions& options) {
  check_consistency(init, field, params, noise);
  check_step(params.mu, params.dt, options.scheme);
  validate_reflected_start(init);
  if (!field.identity_diffusion()) {
    throw std::invalid_argument("simulate_folded: requires the identity diffusion");
  }

  const double mu = params.mu;
  const OuCoefficients coeffs(mu, noise.step_size(0));
  auto fold = [](const PhaseState& u) {
    PhaseState out = u;
    out.q[0] = std::abs(u.q[0]);
    out.p[0] = sign_of(u.q[0]) * u.p[0];
    return out;
  };

  Trajectory traj;
  traj.states.reserve(noise.steps() + 1);
  traj.psi.reserve(noise.steps() + 1);
  PhaseState u = init;
  u.t = noise.grid()[0];
  double psi = 0.0;
  traj.states.push_back(fold(u));
  traj.psi.push_back(psi);

  for (std::size_t n = 0; n < noise.steps(); ++n) {
    const double h = noise.step_size(n);
    const double sgn = sign_of(u.q[0]);
    Vector q_abs = u.q;
    q_abs[0] = std::abs(q_abs[0]);
    Vector b = field.drift(q_abs);
    b[0] *= sgn;
    Vector dw = noise.increment(n);
    dw[0] *= sgn;

    PhaseState next;
    if (options.scheme == Scheme::euler) {
      next.p = u.p + ((b - u.p) * h + dw) / mu;
      next.q = u.q + u.p * h;
    } else {
      Vector aux = noise.auxiliary(n);
      aux[0] *= sgn;
      next = advance(u, b, nullptr, mu, coeffs, dw, aux);
    }
    next.t = noise.grid()[n + 1];

    if (sign_of(next.q[0]) != sgn) {
      const double theta = u.q[0] / (u.q[0] - next.q[0]);
      const double p_cross = u.p[0] + theta * (next.p[0] - u.p[0]);
      Vector p_minus = u.p + theta * (next.p - u.p);
      p_minus[0] = -std::abs(p_cross);
      push_event(traj, psi, u.t + theta * h, p_minus, mu, options);
    }
    u = next;
    traj.states.push_back(fold(u));
    traj.psi.push_back(psi);
  }
  return traj;
}

double occupation_time(const Trajectory& traj, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument(fmt::format("occupation_time: delta = {} not in (0, 1)", delta));
  }
  const double q_half = 0.5 * delta * delta;
  const double p_half = 0.5 * delta;
  double total = 0.0;
  for (std::size_t n = 0; n + 1 < traj.size(); ++n) {
    const auto& s = traj.states[n];
    if (std::abs(s.q[0]) <= q_half && std::abs(s.p[0]) <= p_half) {
      total += traj.time(n + 1) - traj.time(n);
    }
  }
  return total;
}

}  // namespace reflang
