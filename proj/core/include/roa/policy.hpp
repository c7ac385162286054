#pragma once

#include <array>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "roa/state.hpp"

namespace roa {

/// Index of each loose-saturation parameter inside SatParams.
enum class SatParam : int { kUpper = 0, kLower = 1, kUpperSlope = 2, kLowerSlope = 3 };

inline constexpr int kNumSatParams = 4;
std::string_view sat_param_name(SatParam p);

/// Loose saturation: identity on [b, a], slope m_a above a, slope m_b below b.
struct SatParams {
  double a = 0.2;
  double b = -0.2;
  double m_a = 0.0;
  double m_b = 0.0;
  std::array<bool, kNumSatParams> trainable{true, true, false, false};

  double get(SatParam p) const;
  void set(SatParam p, double value);

  /// Indices of the trainable entries, in (a, b, m_a, m_b) order.
  std::vector<SatParam> trainable_params() const;
  int num_trainable() const;

  /// Throws std::invalid_argument unless b <= a and both slopes are non-negative.
  void validate() const;
};

double sat(double z, const SatParams& psi);

/// d sat / d z. At the kinks z == a and z == b the identity branch is used.
double sat_slope(double z, const SatParams& psi);

/// Partial derivatives of sat(z) w.r.t. (a, b, m_a, m_b); identity branch at kinks.
std::array<double, kNumSatParams> sat_param_partials(double z, const SatParams& psi);

/// pi(x; psi) = SAT_psi(-K x). The LQR sign convention u = -K x is folded in here.
struct SatPolicy {
  Eigen::RowVector2d K = Eigen::RowVector2d::Zero();
  SatParams psi;
  double crop_radius = 0.1;

  void validate() const;
};

/// Pre-saturation feedback z = -K x.
double policy_feedback(const StateVec& x, const SatPolicy& pol);
double policy_eval(const StateVec& x, const SatPolicy& pol);

/// Gradient of the control w.r.t. the trainable entries of psi, in trainable_params() order.
Eigen::VectorXd policy_grad_psi(const StateVec& x, const SatPolicy& pol);

/// Clamp each trainable entry of `proposed` to within `crop_radius` of `old_psi`,
/// then restore b <= a (b projected down to a) and non-negative slopes.
/// Frozen entries keep their old value.
SatParams crop_update(const SatParams& old_psi, const SatParams& proposed, double crop_radius);

}  // namespace roa
