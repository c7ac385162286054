#include "roa/lyapunov_net.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "roa/text_io.hpp"

namespace roa {

namespace {

constexpr std::string_view kCheckpointMagic = "roa-lyapunov-net";
constexpr int kCheckpointVersion = 1;

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  const double* data = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (i > 0) out << ' ';
    out << format_double(data[i]);
  }
  out << '\n';
}

Eigen::MatrixXd read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  double* data = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error("checkpoint: truncated matrix data");
    const auto v = parse_double(tok);
    if (!v) throw std::runtime_error("checkpoint: malformed number '" + tok + "'");
    data[i] = *v;
  }
  return m;
}

}  // namespace

Eigen::VectorXd LyapunovCandidate::values(const Eigen::Matrix2Xd& xs) const {
  Eigen::VectorXd out(xs.cols());
  for (Eigen::Index j = 0; j < xs.cols(); ++j) out(j) = value(StateVec::from(xs.col(j)));
  return out;
}

Eigen::Matrix2Xd LyapunovCandidate::grads_x(const Eigen::Matrix2Xd& xs) const {
  Eigen::Matrix2Xd out(2, xs.cols());
  for (Eigen::Index j = 0; j < xs.cols(); ++j) out.col(j) = grad_x(StateVec::from(xs.col(j)));
  return out;
}

double QuadraticLyapunov::value(const StateVec& x) const {
  const Eigen::Vector2d v = x.vec();
  return v.dot(p_ * v);
}

Eigen::Vector2d QuadraticLyapunov::grad_x(const StateVec& x) const { return (p_ + p_.transpose()) * x.vec(); }

Eigen::MatrixXd build_weight(const PDLayerParams& layer) {
  const auto d_in = layer.g1.cols();
  if (d_in == 0) throw std::invalid_argument("build_weight: layer has zero input width");
  if (layer.g1.rows() < 1) throw std::invalid_argument("build_weight: G1 needs at least one row");
  if (layer.g2.rows() > 0 && layer.g2.cols() != d_in) {
    throw std::invalid_argument("build_weight: G1 and G2 column counts differ");
  }
  if (!(layer.eps > 0.0)) throw std::invalid_argument("build_weight: eps must be > 0");
  Eigen::MatrixXd w(d_in + layer.g2.rows(), d_in);
  w.topRows(d_in) = layer.g1.transpose() * layer.g1;
  w.topRows(d_in).diagonal().array() += layer.eps;
  if (layer.g2.rows() > 0) w.bottomRows(layer.g2.rows()) = layer.g2;
  return w;
}

double ParamGrad::squared_norm() const {
  double s = 0.0;
  for (const auto& m : g1) s += m.squaredNorm();
  for (const auto& m : g2) s += m.squaredNorm();
  return s;
}

bool ParamGrad::all_finite() const {
  for (const auto& m : g1) {
    if (!m.allFinite()) return false;
  }
  for (const auto& m : g2) {
    if (!m.allFinite()) return false;
  }
  return true;
}

PDLyapunovNet::PDLyapunovNet(std::vector<PDLayerParams> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("PDLyapunovNet: at least one layer required");
  if (layers_.front().in_dim() != 2) throw std::invalid_argument("PDLyapunovNet: input width must be 2");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    (void)build_weight(layers_[i]);
    if (i > 0 && layers_[i].in_dim() != layers_[i - 1].out_dim()) {
      throw std::invalid_argument("PDLyapunovNet: layer widths do not chain");
    }
  }
}

PDLyapunovNet PDLyapunovNet::random(std::mt19937_64& rng, const std::vector<int>& widths, double eps) {
  if (widths.size() < 2 || widths.front() != 2) {
    throw std::invalid_argument("PDLyapunovNet::random: widths must start at 2 and have >= 2 entries");
  }
  std::vector<PDLayerParams> layers;
  for (std::size_t i = 1; i < widths.size(); ++i) {
    const int d_in = widths[i - 1];
    const int d_out = widths[i];
    if (d_out < d_in) throw std::invalid_argument("PDLyapunovNet::random: widths must be non-contracting");
    const double s = 1.0 / std::sqrt(static_cast<double>(d_in));
    std::uniform_real_distribution<double> dist(-s, s);
    PDLayerParams layer;
    layer.eps = eps;
    layer.g1.resize(d_in, d_in);
    layer.g2.resize(d_out - d_in, d_in);
    for (Eigen::Index k = 0; k < layer.g1.size(); ++k) layer.g1.data()[k] = dist(rng);
    for (Eigen::Index k = 0; k < layer.g2.size(); ++k) layer.g2.data()[k] = dist(rng);
    layers.push_back(std::move(layer));
  }
  return PDLyapunovNet(std::move(layers));
}

int PDLyapunovNet::num_params() const {
  int n = 0;
  for (const auto& l : layers_) n += static_cast<int>(l.g1.size() + l.g2.size());
  return n;
}

ForwardTape PDLyapunovNet::forward(const Eigen::Matrix2Xd& xs) const {
  ForwardTape tape;
  tape.weights.reserve(layers_.size());
  tape.activations.reserve(layers_.size() + 1);
  tape.activations.emplace_back(xs);
  for (const auto& layer : layers_) {
    tape.weights.push_back(build_weight(layer));
    tape.activations.push_back((tape.weights.back() * tape.activations.back()).array().tanh().matrix());
  }
  tape.values = tape.activations.back().colwise().squaredNorm().transpose();
  return tape;
}

ParamGrad PDLyapunovNet::backward(const ForwardTape& tape, const Eigen::VectorXd& dvalues,
                                  Eigen::Matrix2Xd* d_inputs) const {
  ParamGrad grad;
  grad.g1.resize(layers_.size());
  grad.g2.resize(layers_.size());
  // dV/dh_L = 2 h_L, scaled per column.
  Eigen::MatrixXd dh = 2.0 * tape.activations.back() * dvalues.asDiagonal();
  for (std::size_t idx = layers_.size(); idx-- > 0;) {
    const Eigen::MatrixXd& h = tape.activations[idx + 1];
    const Eigen::MatrixXd& h_prev = tape.activations[idx];
    const Eigen::MatrixXd da = (dh.array() * (1.0 - h.array().square())).matrix();
    const Eigen::MatrixXd dw = da * h_prev.transpose();
    const PDLayerParams& layer = layers_[idx];
    const auto d_in = layer.in_dim();
    const Eigen::MatrixXd top = dw.topRows(d_in);
    grad.g1[idx] = layer.g1 * (top + top.transpose());
    grad.g2[idx] = dw.bottomRows(layer.g2.rows());
    if (idx > 0 || d_inputs != nullptr) dh = tape.weights[idx].transpose() * da;
  }
  if (d_inputs != nullptr) *d_inputs = dh;
  return grad;
}

Eigen::VectorXd PDLyapunovNet::features(const StateVec& x) const {
  Eigen::Matrix2Xd xs(2, 1);
  xs.col(0) = x.vec();
  return forward(xs).features().col(0);
}

double PDLyapunovNet::value(const StateVec& x) const { return features(x).squaredNorm(); }

Eigen::VectorXd PDLyapunovNet::values(const Eigen::Matrix2Xd& xs) const {
  // Chunked so the activations of large grids stay cache-sized.
  constexpr Eigen::Index kChunk = 512;
  Eigen::VectorXd out(xs.cols());
  for (Eigen::Index start = 0; start < xs.cols(); start += kChunk) {
    const Eigen::Index n = std::min(kChunk, xs.cols() - start);
    Eigen::MatrixXd h = xs.middleCols(start, n);
    for (const auto& layer : layers_) h = (build_weight(layer) * h).array().tanh().matrix();
    out.segment(start, n) = h.colwise().squaredNorm().transpose();
  }
  return out;
}

Eigen::Matrix2Xd PDLyapunovNet::grads_x(const Eigen::Matrix2Xd& xs) const {
  const ForwardTape tape = forward(xs);
  Eigen::Matrix2Xd d_inputs;
  (void)backward(tape, Eigen::VectorXd::Ones(xs.cols()), &d_inputs);
  return d_inputs;
}

Eigen::Vector2d PDLyapunovNet::grad_x(const StateVec& x) const { return gradient(x).d_input; }

ParamGrad PDLyapunovNet::grad_params(const StateVec& x) const { return gradient(x).d_params; }

TapeGradient PDLyapunovNet::gradient(const StateVec& x) const {
  Eigen::Matrix2Xd xs(2, 1);
  xs.col(0) = x.vec();
  const ForwardTape tape = forward(xs);
  Eigen::Matrix2Xd d_inputs;
  TapeGradient out;
  out.d_params = backward(tape, Eigen::VectorXd::Ones(1), &d_inputs);
  out.d_input = d_inputs.col(0);
  return out;
}

ParamGrad PDLyapunovNet::zero_grad() const {
  ParamGrad g;
  for (const auto& l : layers_) {
    g.g1.push_back(Eigen::MatrixXd::Zero(l.g1.rows(), l.g1.cols()));
    g.g2.push_back(Eigen::MatrixXd::Zero(l.g2.rows(), l.g2.cols()));
  }
  return g;
}

void PDLyapunovNet::sgd_step(const ParamGrad& grad, double lr) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i].g1 -= lr * grad.g1[i];
    layers_[i].g2 -= lr * grad.g2[i];
  }
}

Eigen::VectorXd PDLyapunovNet::flat_params() const {
  Eigen::VectorXd flat(num_params());
  Eigen::Index at = 0;
  for (const auto& l : layers_) {
    flat.segment(at, l.g1.size()) = l.g1.reshaped();
    at += l.g1.size();
    flat.segment(at, l.g2.size()) = l.g2.reshaped();
    at += l.g2.size();
  }
  return flat;
}

void PDLyapunovNet::set_flat_params(const Eigen::VectorXd& flat) {
  if (flat.size() != num_params()) throw std::invalid_argument("set_flat_params: size mismatch");
  Eigen::Index at = 0;
  for (auto& l : layers_) {
    l.g1.reshaped() = flat.segment(at, l.g1.size());
    at += l.g1.size();
    l.g2.reshaped() = flat.segment(at, l.g2.size());
    at += l.g2.size();
  }
}

Eigen::VectorXd PDLyapunovNet::flatten(const ParamGrad& grad) {
  Eigen::Index n = 0;
  for (std::size_t i = 0; i < grad.g1.size(); ++i) n += grad.g1[i].size() + grad.g2[i].size();
  Eigen::VectorXd flat(n);
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < grad.g1.size(); ++i) {
    flat.segment(at, grad.g1[i].size()) = grad.g1[i].reshaped();
    at += grad.g1[i].size();
    flat.segment(at, grad.g2[i].size()) = grad.g2[i].reshaped();
    at += grad.g2[i].size();
  }
  return flat;
}

void PDLyapunovNet::save(std::ostream& out) const {
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "layers " << layers_.size() << '\n';
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    out << "layer " << i << " eps " << format_double(l.eps) << " g1 " << l.g1.rows() << ' ' << l.g1.cols()
        << " g2 " << l.g2.rows() << ' ' << l.g2.cols() << '\n';
    write_matrix(out, l.g1);
    write_matrix(out, l.g2);
  }
}

PDLyapunovNet PDLyapunovNet::load(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kCheckpointMagic) {
    throw std::runtime_error("checkpoint: missing '" + std::string(kCheckpointMagic) + "' header");
  }
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  std::string tok;
  std::size_t n_layers = 0;
  if (!(in >> tok >> n_layers) || tok != "layers") throw std::runtime_error("checkpoint: expected 'layers N'");
  std::vector<PDLayerParams> layers(n_layers);
  for (std::size_t i = 0; i < n_layers; ++i) {
    std::size_t idx = 0;
    std::string eps_tok, k_eps, k_g1, k_g2;
    Eigen::Index r1 = 0, c1 = 0, r2 = 0, c2 = 0;
    if (!(in >> tok >> idx >> k_eps >> eps_tok >> k_g1 >> r1 >> c1 >> k_g2 >> r2 >> c2) || tok != "layer" ||
        idx != i || k_eps != "eps" || k_g1 != "g1" || k_g2 != "g2") {
      throw std::runtime_error("checkpoint: malformed header for layer " + std::to_string(i));
    }
    const auto eps = parse_double(eps_tok);
    if (!eps) throw std::runtime_error("checkpoint: malformed eps for layer " + std::to_string(i));
    layers[i].eps = *eps;
    layers[i].g1 = read_matrix(in, r1, c1);
    layers[i].g2 = read_matrix(in, r2, c2);
  }
  return PDLyapunovNet(std::move(layers));
}

void PDLyapunovNet::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  save(out);
}

PDLyapunovNet PDLyapunovNet::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  return load(in);
}

}  // namespace roa
