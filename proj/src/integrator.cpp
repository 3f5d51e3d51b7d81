#include "reflang/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace reflang {

namespace {

// (1 - e^{-2x}) / 2 - (1 - e^{-x})^2 / x, the conditional variance of the OU
// integral divided by mu. The two terms agree to O(x^3), so small x uses the
// Taylor series instead.
double ou_conditional_variance(double x) {
  if (x < 0.05) {
    return x * x * x *
           (1.0 / 12.0 +
            x * (-1.0 / 12.0 +
                 x * (17.0 / 360.0 +
                      x * (-7.0 / 360.0 + x * (43.0 / 6720.0 + x * (-107.0 / 60480.0))))));
  }
  const double one_minus = -std::expm1(-x);
  return -0.5 * std::expm1(-2.0 * x) - one_minus * one_minus / x;
}

}  // namespace

OuCoefficients::OuCoefficients(double mu, double step) : h(step) {
  const double x = step / mu;
  decay = std::exp(-x);
  one_minus = -std::expm1(-x);
  regression = mu * one_minus / step;
  residual_sd = std::sqrt(std::max(0.0, mu * ou_conditional_variance(x)));
}

void check_step(double mu, double dt, Scheme scheme) {
  if (!(mu > 0.0)) throw std::invalid_argument(fmt::format("mu = {} must be positive", mu));
  if (!(dt > 0.0)) throw std::invalid_argument(fmt::format("dt = {} must be positive", dt));
  if (scheme == Scheme::euler && dt > mu / 10.0 * (1.0 + 1e-12)) {
    throw std::invalid_argument(
        fmt::format("explicit scheme needs dt <= mu / 10 (dt = {}, mu = {})", dt, mu));
  }
}

PhaseState advance(const PhaseState& s, const Vector& drift, const Matrix* sigma, double mu,
                   const OuCoefficients& c, const Vector& dw, const Vector& aux) {
  Vector integral = c.regression * dw;
  if (aux.size() == dw.size()) integral += c.residual_sd * aux;
  if (sigma != nullptr) integral = (*sigma) * integral;

  PhaseState out;
  out.t = s.t + c.h;
  out.p = c.decay * s.p + c.one_minus * drift + integral / mu;
  out.q = s.q + 0.5 * c.h * (s.p + out.p);
  return out;
}

PhaseState step_langevin(const PhaseState& s, const FieldSpec& field, double mu, double dt,
                         const Vector& dw, const Vector& aux, Scheme scheme) {
  check_step(mu, dt, scheme);
  if (dw.size() != s.dim() || field.dim() != s.dim()) {
    throw std::invalid_argument("step_langevin: dimension mismatch");
  }
  const Vector b = field.drift(s.q);
  if (scheme == Scheme::euler) {
    PhaseState out;
    out.t = s.t + dt;
    out.p = s.p + ((b - s.p) * dt + field.apply_diffusion(dw)) / mu;
    out.q = s.q + s.p * dt;
    return out;
  }
  const Matrix* sigma = field.identity_diffusion() ? nullptr : &field.diffusion();
  return advance(s, b, sigma, mu, OuCoefficients(mu, dt), dw, aux);
}

Vector step_overdamped(const Vector& q, const FieldSpec& field, double dt, const Vector& dw) {
  if (!(dt > 0.0)) throw std::invalid_argument(fmt::format("dt = {} must be positive", dt));
  return q + field.drift(q) * dt + field.apply_diffusion(dw);
}

void check_consistency(const PhaseState& init, const FieldSpec& field, const SimParams& params,
                       const NoisePath& noise) {
  if (init.q.size() != init.p.size() || init.dim() != field.dim() ||
      noise.dim() != field.dim()) {
    throw std::invalid_argument(fmt::format("dimension mismatch: state {}, field {}, noise {}",
                                            init.dim(), field.dim(), noise.dim()));
  }
  if (std::abs(noise.horizon() - params.T) > 1e-12 * params.T) {
    throw std::invalid_argument(
        fmt::format("noise horizon {} differs from T = {}", noise.horizon(), params.T));
  }
  if (std::abs(noise.step_size(0) - params.dt) > 1e-9 * params.dt) {
    throw std::invalid_argument(
        fmt::format("noise step {} differs from dt = {}", noise.step_size(0), params.dt));
  }
}

Trajectory simulate_free(const PhaseState& init, const FieldSpec& field, const SimParams& params,
                         const NoisePath& noise, Scheme scheme) {
  check_consistency(init, field, params, noise);
  check_step(params.mu, params.dt, scheme);

  Trajectory traj;
  traj.states.reserve(noise.steps() + 1);
  traj.psi.assign(noise.steps() + 1, 0.0);
  PhaseState s = init;
  s.t = noise.grid()[0];
  traj.states.push_back(s);

  const Matrix* sigma = field.identity_diffusion() ? nullptr : &field.diffusion();
  const OuCoefficients coeffs(params.mu, noise.step_size(0));
  for (std::size_t n = 0; n < noise.steps(); ++n) {
    if (scheme == Scheme::exponential) {
      s = advance(s, field.drift(s.q), sigma, params.mu, coeffs, noise.increment(n),
                  noise.auxiliary(n));
    } else {
      s = step_langevin(s, field, params.mu, noise.step_size(n), noise.increment(n), Vector(),
                        scheme);
    }
    s.t = noise.grid()[n + 1];
    traj.states.push_back(s);
  }
  return traj;
}

std::vector<Vector> simulate_overdamped(const Vector& q0, const FieldSpec& field,
                                        const NoisePath& noise) {
  if (q0.size() != field.dim() || noise.dim() != field.dim()) {
    throw std::invalid_argument("simulate_overdamped: dimension mismatch");
  }
  std::vector<Vector> q(noise.steps() + 1);
  q[0] = q0;
  for (std::size_t n = 0; n < noise.steps(); ++n) {
    q[n + 1] = step_overdamped(q[n], field, noise.step_size(n), noise.increment(n));
  }
  return q;
}

}  // namespace reflang
