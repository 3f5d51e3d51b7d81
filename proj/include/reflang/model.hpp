#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace reflang {

/// Largest phase-space dimension r supported. Vectors are stack allocated.
inline constexpr int kMaxDim = 8;

using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Position/momentum pair at time t. Coordinate 0 is the reflected one
/// (the half-space is q[0] >= 0).
struct PhaseState {
  Vector q;
  Vector p;
  double t = 0.0;

  [[nodiscard]] int dim() const { return static_cast<int>(q.size()); }
};

PhaseState make_state(const Vector& q, const Vector& p, double t = 0.0);
PhaseState make_state(std::initializer_list<double> q, std::initializer_list<double> p,
                      double t = 0.0);

/// Throws std::invalid_argument unless q[0] >= 0 and (q[0], p[0]) is not the
/// phase-space origin.
void validate_reflected_start(const PhaseState& s);

enum class DriftKind { zero, constant, linear, tanh };
enum class DiffusionKind { identity, constant };

using ParamMap = std::map<std::string, std::vector<double>, std::less<>>;

/// Drift b(q) and constant diffusion Sigma from a fixed catalog of globally
/// Lipschitz forms. Immutable once built by make_field.
class FieldSpec {
 public:
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] DriftKind drift_kind() const { return drift_kind_; }
  [[nodiscard]] DiffusionKind diffusion_kind() const { return diffusion_kind_; }

  [[nodiscard]] Vector drift(const Vector& q) const;
  [[nodiscard]] const Matrix& diffusion() const { return sigma_; }

  /// Sigma * v, skipping the product for the identity.
  [[nodiscard]] Vector apply_diffusion(const Vector& v) const;

  /// Global Lipschitz constant of the drift in the Euclidean norm.
  [[nodiscard]] double lipschitz() const { return lipschitz_; }

  [[nodiscard]] bool zero_drift() const { return drift_kind_ == DriftKind::zero; }
  [[nodiscard]] bool identity_diffusion() const {
    return diffusion_kind_ == DiffusionKind::identity;
  }

 private:
  friend FieldSpec make_field(std::string_view name, const ParamMap& params);

  std::string name_;
  int dim_ = 1;
  DriftKind drift_kind_ = DriftKind::zero;
  DiffusionKind diffusion_kind_ = DiffusionKind::identity;
  Vector offset_;  // c for constant/linear
  Matrix linear_;  // A for linear
  Vector scale_;   // a for tanh
  Matrix sigma_;
  double lipschitz_ = 0.0;
};

/// Catalog:
///   "zero-drift-identity"  b = 0
///   "constant-drift"       b = c                    (param "c", length r)
///   "linear-drift"         b = A q + c              (param "A" r*r row-major, optional "c")
///   "tanh-drift"           b_i = a_i tanh(q_i)      (param "a", length 1 or r)
/// Every entry takes "r" (dimension) and an optional "sigma" (r*r row-major,
/// full rank); without "sigma" the diffusion is the identity.
FieldSpec make_field(std::string_view name, const ParamMap& params);

/// Names accepted by make_field.
const std::vector<std::string>& field_catalog();

struct SimParams {
  double mu = 1.0;
  double dt = 1e-3;
  double T = 1.0;
  std::uint64_t seed = 0;
  std::size_t n_paths = 1;

  /// Number of grid steps T/dt; throws if T is not an integer multiple of dt.
  [[nodiscard]] std::size_t steps() const;
  void validate() const;
};

}  // namespace reflang
