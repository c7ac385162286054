#pragma once

#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "roa/state.hpp"

namespace roa {

/// Any scalar function of the state usable as a Lyapunov candidate.
class LyapunovCandidate {
 public:
  virtual ~LyapunovCandidate() = default;

  virtual double value(const StateVec& x) const = 0;
  virtual Eigen::Vector2d grad_x(const StateVec& x) const = 0;
  /// Column-wise evaluation; the default loops over value().
  virtual Eigen::VectorXd values(const Eigen::Matrix2Xd& xs) const;
  /// Column-wise gradients; the default loops over grad_x().
  virtual Eigen::Matrix2Xd grads_x(const Eigen::Matrix2Xd& xs) const;
};

/// V(x) = x' P x.
class QuadraticLyapunov final : public LyapunovCandidate {
 public:
  explicit QuadraticLyapunov(const Eigen::Matrix2d& p = Eigen::Matrix2d::Identity()) : p_(p) {}

  double value(const StateVec& x) const override;
  Eigen::Vector2d grad_x(const StateVec& x) const override;

 private:
  Eigen::Matrix2d p_;
};

/// One layer of trivial-nullspace weights: W = [G1' G1 + eps I; G2].
struct PDLayerParams {
  Eigen::MatrixXd g1;  ///< q x d_in
  Eigen::MatrixXd g2;  ///< (d_out - d_in) x d_in
  double eps = 0.01;

  int in_dim() const { return static_cast<int>(g1.cols()); }
  int out_dim() const { return in_dim() + static_cast<int>(g2.rows()); }
};

/// Effective weight matrix of a layer. Throws std::invalid_argument on inconsistent shapes
/// or non-positive eps.
Eigen::MatrixXd build_weight(const PDLayerParams& layer);

/// Gradient of a scalar w.r.t. every free parameter of a PDLyapunovNet, laid out like its layers.
struct ParamGrad {
  std::vector<Eigen::MatrixXd> g1;
  std::vector<Eigen::MatrixXd> g2;

  double squared_norm() const;
  bool all_finite() const;
};

/// Gradient of a scalar net output w.r.t. input and parameters.
struct TapeGradient {
  Eigen::Vector2d d_input = Eigen::Vector2d::Zero();
  ParamGrad d_params;
};

/// Activations of a batched forward pass, kept for the reverse sweep.
struct ForwardTape {
  std::vector<Eigen::MatrixXd> weights;      ///< effective W per layer
  std::vector<Eigen::MatrixXd> activations;  ///< h_0 = input, h_l = tanh(W_l h_{l-1})
  Eigen::VectorXd values;                    ///< V per column

  const Eigen::MatrixXd& features() const { return activations.back(); }
};

/// Positive-definite Lyapunov candidate V(x) = v(x)' v(x), where v is a bias-free tanh
/// perceptron whose weights all have trivial nullspace, so V(0) = 0 and V(x) > 0 elsewhere.
class PDLyapunovNet final : public LyapunovCandidate {
 public:
  PDLyapunovNet() = default;
  explicit PDLyapunovNet(std::vector<PDLayerParams> layers);

  /// Widths {2, 64, 64, 64} by default; entries uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static PDLyapunovNet random(std::mt19937_64& rng, const std::vector<int>& widths = {2, 64, 64, 64},
                              double eps = 0.01);

  const std::vector<PDLayerParams>& layers() const { return layers_; }
  std::vector<PDLayerParams>& mutable_layers() { return layers_; }
  int num_params() const;

  Eigen::VectorXd features(const StateVec& x) const;
  double value(const StateVec& x) const override;
  Eigen::Vector2d grad_x(const StateVec& x) const override;
  ParamGrad grad_params(const StateVec& x) const;
  TapeGradient gradient(const StateVec& x) const;

  Eigen::VectorXd values(const Eigen::Matrix2Xd& xs) const override;
  Eigen::Matrix2Xd grads_x(const Eigen::Matrix2Xd& xs) const override;

  ForwardTape forward(const Eigen::Matrix2Xd& xs) const;
  /// Reverse sweep for the scalar sum_j dvalues(j) * V(x_j). Parameter gradients are summed
  /// over columns; input gradients are returned per column in `d_inputs` when non-null.
  ParamGrad backward(const ForwardTape& tape, const Eigen::VectorXd& dvalues,
                     Eigen::Matrix2Xd* d_inputs = nullptr) const;

  ParamGrad zero_grad() const;
  /// theta <- theta - lr * grad.
  void sgd_step(const ParamGrad& grad, double lr);

  /// All free parameters flattened layer by layer (g1 then g2, column-major).
  Eigen::VectorXd flat_params() const;
  void set_flat_params(const Eigen::VectorXd& flat);
  static Eigen::VectorXd flatten(const ParamGrad& grad);

  /// Text checkpoint; see README for the format.
  void save(std::ostream& out) const;
  static PDLyapunovNet load(std::istream& in);
  void save_file(const std::string& path) const;
  static PDLyapunovNet load_file(const std::string& path);

 private:
  std::vector<PDLayerParams> layers_;
};

}  // namespace roa
