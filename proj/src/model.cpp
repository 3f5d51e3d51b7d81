#include "reflang/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace reflang {

PhaseState make_state(const Vector& q, const Vector& p, double t) {
  if (q.size() != p.size() || q.size() < 1 || q.size() > kMaxDim) {
    throw std::invalid_argument(
        fmt::format("phase state: q has {} and p has {} components", q.size(), p.size()));
  }
  return PhaseState{q, p, t};
}

PhaseState make_state(std::initializer_list<double> q, std::initializer_list<double> p,
                      double t) {
  Vector qv(static_cast<Eigen::Index>(q.size()));
  Vector pv(static_cast<Eigen::Index>(p.size()));
  Eigen::Index i = 0;
  for (double v : q) qv[i++] = v;
  i = 0;
  for (double v : p) pv[i++] = v;
  return make_state(qv, pv, t);
}

void validate_reflected_start(const PhaseState& s) {
  if (!(s.q[0] >= 0.0)) {
    throw std::invalid_argument(fmt::format("initial q1 = {} lies outside the half-space", s.q[0]));
  }
  if (s.q[0] * s.q[0] + s.p[0] * s.p[0] == 0.0) {
    throw std::invalid_argument("initial (q1, p1) is the phase-space origin");
  }
}

Vector FieldSpec::drift(const Vector& q) const {
  switch (drift_kind_) {
    case DriftKind::zero:
      return Vector::Zero(dim_);
    case DriftKind::constant:
      return offset_;
    case DriftKind::linear:
      return linear_ * q + offset_;
    case DriftKind::tanh:
      return scale_.cwiseProduct(q.array().tanh().matrix());
  }
  return Vector::Zero(dim_);
}

Vector FieldSpec::apply_diffusion(const Vector& v) const {
  if (diffusion_kind_ == DiffusionKind::identity) return v;
  return sigma_ * v;
}

namespace {

const std::vector<double>& require(const ParamMap& params, std::string_view key,
                                   std::string_view field) {
  auto it = params.find(key);
  if (it == params.end()) {
    throw std::invalid_argument(fmt::format("field '{}': missing parameter '{}'", field, key));
  }
  return it->second;
}

Vector to_vector(const std::vector<double>& v, int r, std::string_view key,
                 std::string_view field) {
  if (static_cast<int>(v.size()) != r) {
    throw std::invalid_argument(fmt::format("field '{}': parameter '{}' has {} entries, r = {}",
                                            field, key, v.size(), r));
  }
  Vector out(r);
  for (int i = 0; i < r; ++i) out[i] = v[static_cast<std::size_t>(i)];
  return out;
}

Matrix to_matrix(const std::vector<double>& v, int r, std::string_view key,
                 std::string_view field) {
  if (static_cast<int>(v.size()) != r * r) {
    throw std::invalid_argument(fmt::format(
        "field '{}': parameter '{}' has {} entries, expected r*r = {}", field, key, v.size(), r * r));
  }
  Matrix m(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) m(i, j) = v[static_cast<std::size_t>(i * r + j)];
  return m;
}

}  // namespace

const std::vector<std::string>& field_catalog() {
  static const std::vector<std::string> names{"zero-drift-identity", "constant-drift",
                                              "linear-drift", "tanh-drift"};
  return names;
}

FieldSpec make_field(std::string_view name, const ParamMap& params) {
  FieldSpec f;
  f.name_ = std::string(name);

  const auto& rv = require(params, "r", name);
  if (rv.size() != 1 || rv[0] != std::floor(rv[0]) || rv[0] < 1 || rv[0] > kMaxDim) {
    throw std::invalid_argument(
        fmt::format("field '{}': r must be an integer in [1, {}]", name, kMaxDim));
  }
  const int r = static_cast<int>(rv[0]);
  f.dim_ = r;
  f.offset_ = Vector::Zero(r);
  f.scale_ = Vector::Zero(r);
  f.linear_ = Matrix::Zero(r, r);

  std::vector<std::string_view> allowed{"r", "sigma"};
  if (name == "zero-drift-identity") {
    f.drift_kind_ = DriftKind::zero;
  } else if (name == "constant-drift") {
    f.drift_kind_ = DriftKind::constant;
    f.offset_ = to_vector(require(params, "c", name), r, "c", name);
    allowed.push_back("c");
  } else if (name == "linear-drift") {
    f.drift_kind_ = DriftKind::linear;
    f.linear_ = to_matrix(require(params, "A", name), r, "A", name);
    if (auto it = params.find("c"); it != params.end()) {
      f.offset_ = to_vector(it->second, r, "c", name);
    }
    // Operator 2-norm of A.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(f.linear_));
    f.lipschitz_ = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    allowed.insert(allowed.end(), {"A", "c"});
  } else if (name == "tanh-drift") {
    f.drift_kind_ = DriftKind::tanh;
    const auto& a = require(params, "a", name);
    if (a.size() == 1) {
      f.scale_ = Vector::Constant(r, a[0]);
    } else {
      f.scale_ = to_vector(a, r, "a", name);
    }
    // d/dq a tanh(q) = a sech^2(q) peaks at q = 0; the Jacobian is diagonal.
    f.lipschitz_ = f.scale_.cwiseAbs().maxCoeff();
    allowed.push_back("a");
  } else {
    throw std::invalid_argument(fmt::format("unknown field '{}'", name));
  }

  for (const auto& [key, value] : params) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw std::invalid_argument(
          fmt::format("field '{}': parameter '{}' does not apply", name, key));
    }
  }

  if (auto it = params.find("sigma"); it != params.end()) {
    f.diffusion_kind_ = DiffusionKind::constant;
    f.sigma_ = to_matrix(it->second, r, "sigma", name);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd(f.sigma_));
    if (lu.rank() < r) {
      throw std::invalid_argument(fmt::format("field '{}': sigma is rank deficient", name));
    }
  } else {
    f.diffusion_kind_ = DiffusionKind::identity;
    f.sigma_ = Matrix::Identity(r, r);
  }
  return f;
}

std::size_t SimParams::steps() const {
  if (!(dt > 0.0) || !(T > 0.0)) {
    throw std::invalid_argument(fmt::format("dt = {} and T = {} must be positive", dt, T));
  }
  const double n = T / dt;
  const double rounded = std::round(n);
  if (rounded < 1.0 || std::abs(n - rounded) > 1e-9 * rounded) {
    throw std::invalid_argument(fmt::format("T = {} is not a multiple of dt = {}", T, dt));
  }
  return static_cast<std::size_t>(rounded);
}

void SimParams::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument(fmt::format("mu = {} must be positive", mu));
  if (n_paths < 1) throw std::invalid_argument("n_paths must be at least 1");
  (void)steps();
}

}  // namespace reflang
