#include "roa/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace roa {

std::string_view sat_param_name(SatParam p) {
  switch (p) {
    case SatParam::kUpper:
      return "a";
    case SatParam::kLower:
      return "b";
    case SatParam::kUpperSlope:
      return "m_a";
    case SatParam::kLowerSlope:
      return "m_b";
  }
  return "?";
}

double SatParams::get(SatParam p) const {
  switch (p) {
    case SatParam::kUpper:
      return a;
    case SatParam::kLower:
      return b;
    case SatParam::kUpperSlope:
      return m_a;
    case SatParam::kLowerSlope:
      return m_b;
  }
  return 0.0;
}

void SatParams::set(SatParam p, double value) {
  switch (p) {
    case SatParam::kUpper:
      a = value;
      break;
    case SatParam::kLower:
      b = value;
      break;
    case SatParam::kUpperSlope:
      m_a = value;
      break;
    case SatParam::kLowerSlope:
      m_b = value;
      break;
  }
}

std::vector<SatParam> SatParams::trainable_params() const {
  std::vector<SatParam> out;
  for (int i = 0; i < kNumSatParams; ++i) {
    if (trainable[i]) out.push_back(static_cast<SatParam>(i));
  }
  return out;
}

int SatParams::num_trainable() const {
  return static_cast<int>(std::count(trainable.begin(), trainable.end(), true));
}

void SatParams::validate() const {
  if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(m_a) && std::isfinite(m_b))) {
    throw std::invalid_argument("saturation parameters must be finite");
  }
  if (b > a) {
    throw std::invalid_argument("saturation requires b <= a (got a=" + std::to_string(a) +
                                ", b=" + std::to_string(b) + ")");
  }
  if (m_a < 0.0 || m_b < 0.0) {
    throw std::invalid_argument("saturation slopes must be non-negative");
  }
}

double sat(double z, const SatParams& psi) {
  if (z > psi.a) return psi.a + psi.m_a * (z - psi.a);
  if (z < psi.b) return psi.b + psi.m_b * (z - psi.b);
  return z;
}

double sat_slope(double z, const SatParams& psi) {
  if (z > psi.a) return psi.m_a;
  if (z < psi.b) return psi.m_b;
  return 1.0;
}

std::array<double, kNumSatParams> sat_param_partials(double z, const SatParams& psi) {
  std::array<double, kNumSatParams> d{0.0, 0.0, 0.0, 0.0};
  if (z > psi.a) {
    d[0] = 1.0 - psi.m_a;
    d[2] = z - psi.a;
  } else if (z < psi.b) {
    d[1] = 1.0 - psi.m_b;
    d[3] = z - psi.b;
  }
  return d;
}

void SatPolicy::validate() const {
  if (!K.allFinite()) throw std::invalid_argument("policy gain K must be finite");
  if (!(crop_radius > 0.0)) throw std::invalid_argument("crop_radius must be > 0");
  psi.validate();
}

double policy_feedback(const StateVec& x, const SatPolicy& pol) {
  return -(pol.K(0) * x.theta + pol.K(1) * x.omega);
}

double policy_eval(const StateVec& x, const SatPolicy& pol) {
  return sat(policy_feedback(x, pol), pol.psi);
}

Eigen::VectorXd policy_grad_psi(const StateVec& x, const SatPolicy& pol) {
  const auto all = sat_param_partials(policy_feedback(x, pol), pol.psi);
  const auto params = pol.psi.trainable_params();
  Eigen::VectorXd g(static_cast<Eigen::Index>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    g(static_cast<Eigen::Index>(i)) = all[static_cast<int>(params[i])];
  }
  return g;
}

SatParams crop_update(const SatParams& old_psi, const SatParams& proposed, double crop_radius) {
  if (!(crop_radius > 0.0)) throw std::invalid_argument("crop_radius must be > 0");
  SatParams out = old_psi;
  for (SatParam p : old_psi.trainable_params()) {
    const double lo = old_psi.get(p) - crop_radius;
    const double hi = old_psi.get(p) + crop_radius;
    out.set(p, std::clamp(proposed.get(p), lo, hi));
  }
  if (out.b > out.a) out.b = out.a;
  out.m_a = std::max(out.m_a, 0.0);
  out.m_b = std::max(out.m_b, 0.0);
  return out;
}

}  // namespace roa
