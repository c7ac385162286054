#include "roa/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "roa/text_io.hpp"

namespace roa {

namespace {

using Check = std::function<bool(double)>;

struct Entry {
  std::string name;
  std::string doc;
  std::function<void(RedesignConfig&, const std::string&)> set;
  std::function<std::string(const RedesignConfig&)> get;
};

// Setters throw std::invalid_argument with a message; set_config_value attaches the key.
template <class Access>
Entry real(std::string name, std::string doc, Access access, Check ok, std::string rule) {
  Entry e{std::move(name), std::move(doc), {}, {}};
  e.set = [access, ok, rule](RedesignConfig& c, const std::string& v) {
    const auto d = parse_double(v);
    if (!d || !std::isfinite(*d)) throw std::invalid_argument("expected a finite number, got '" + v + "'");
    if (!ok(*d)) throw std::invalid_argument("value " + v + " violates " + rule);
    access(c) = *d;
  };
  e.get = [access](const RedesignConfig& c) { return format_double(access(const_cast<RedesignConfig&>(c))); };
  return e;
}

template <class T, class Access>
Entry integer(std::string name, std::string doc, Access access, long long lo, long long hi) {
  Entry e{std::move(name), std::move(doc), {}, {}};
  e.set = [access, lo, hi](RedesignConfig& c, const std::string& v) {
    const auto i = parse_int(v);
    if (!i) throw std::invalid_argument("expected an integer, got '" + v + "'");
    if (*i < lo || *i > hi) {
      throw std::invalid_argument("value " + v + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    access(c) = static_cast<T>(*i);
  };
  e.get = [access](const RedesignConfig& c) { return std::to_string(access(const_cast<RedesignConfig&>(c))); };
  return e;
}

template <class Access>
Entry boolean(std::string name, std::string doc, Access access) {
  Entry e{std::move(name), std::move(doc), {}, {}};
  e.set = [access](RedesignConfig& c, const std::string& v) {
    if (v == "true" || v == "1") {
      access(c) = true;
    } else if (v == "false" || v == "0") {
      access(c) = false;
    } else {
      throw std::invalid_argument("expected true or false, got '" + v + "'");
    }
  };
  e.get = [access](const RedesignConfig& c) {
    return std::string(access(const_cast<RedesignConfig&>(c)) ? "true" : "false");
  };
  return e;
}

const Check kPositive = [](double x) { return x > 0.0; };
const Check kNonNegative = [](double x) { return x >= 0.0; };
const Check kAboveOne = [](double x) { return x > 1.0; };
const Check kAtLeastOne = [](double x) { return x >= 1.0; };
const Check kUnit = [](double x) { return x >= 0.0 && x <= 1.0; };
const Check kAny = [](double) { return true; };
constexpr long long kMaxCount = std::numeric_limits<int>::max();

#define ACC(expr) [](RedesignConfig& c) -> auto& { return c.expr; }

std::vector<Entry> make_entries() {
  std::vector<Entry> e;
  e.push_back(integer<std::uint64_t>("seed", "RNG seed for initialization and sampling", ACC(seed), 0,
                                     std::numeric_limits<long long>::max()));
  e.push_back(integer<int>("phases", "policy update phases", ACC(phases), 0, 10000));
  Entry out{"out", "output directory", {}, {}};
  out.set = [](RedesignConfig& c, const std::string& v) {
    if (v.empty()) throw std::invalid_argument("output directory must be non-empty");
    c.out = v;
  };
  out.get = [](const RedesignConfig& c) { return c.out; };
  e.push_back(out);
  Entry variant{"variant", "trainable saturation parameters: thresholds (a, b) or slopes (m_a, m_b)", {}, {}};
  variant.set = [](RedesignConfig& c, const std::string& v) { c.variant = parse_variant(v); };
  variant.get = [](const RedesignConfig& c) { return std::string(variant_name(c.variant)); };
  e.push_back(variant);
  e.push_back(boolean("monot", "keep the monotonicity term (false sets lambda_monot to 0)", ACC(monot)));
  e.push_back(boolean("heatmaps", "write per-phase PPM heatmaps and oracle masks", ACC(heatmaps)));

  e.push_back(real("g", "gravity-like coefficient in dw = (g/l) sin(theta) + ...", ACC(pendulum.g), kAny, "any"));
  e.push_back(real("l", "pendulum length", ACC(pendulum.l), kPositive, "> 0"));
  e.push_back(real("inertia", "moment of inertia", ACC(pendulum.inertia), kPositive, "> 0"));
  e.push_back(real("mu_f", "friction coefficient", ACC(pendulum.mu_f), kNonNegative, ">= 0"));
  e.push_back(real("dt", "Euler time step", ACC(pendulum.dt), kPositive, "> 0"));

  e.push_back(real("theta_min", "grid lower angle bound", ACC(grid.theta_min), kAny, "any"));
  e.push_back(real("theta_max", "grid upper angle bound", ACC(grid.theta_max), kAny, "any"));
  e.push_back(real("omega_min", "grid lower angular velocity bound", ACC(grid.omega_min), kAny, "any"));
  e.push_back(real("omega_max", "grid upper angular velocity bound", ACC(grid.omega_max), kAny, "any"));
  e.push_back(integer<int>("n_theta", "grid cells along theta", ACC(grid.n_theta), 2, 100000));
  e.push_back(integer<int>("n_omega", "grid cells along omega", ACC(grid.n_omega), 2, 100000));

  e.push_back(integer<int>("oracle_k_max", "oracle steps allowed to reach the ball", ACC(oracle.k_max), 1, kMaxCount));
  e.push_back(real("oracle_ball_radius", "oracle convergence radius", ACC(oracle.ball_radius), kPositive, "> 0"));
  e.push_back(integer<int>("oracle_confirm_steps", "steps the oracle rollout must then stay within twice the radius",
                           ACC(oracle.confirm_steps), 0, kMaxCount));
  e.push_back(real("safety_factor", "divergence box in multiples of the grid half-extent",
                   ACC(oracle.safety_factor), kAtLeastOne, ">= 1"));

  e.push_back(real("pretrain_lr", "pretraining learning rate", ACC(pretrain.lr), kPositive, "> 0"));
  e.push_back(integer<int>("pretrain_steps", "pretraining SGD steps", ACC(pretrain.steps), 0, kMaxCount));
  e.push_back(integer<int>("pretrain_batch", "grid cells per pretraining step", ACC(pretrain.batch), 1, kMaxCount));
  e.push_back(real("pretrain_coeff_theta", "pretraining target coefficient of theta^2",
                   ACC(pretrain.coeff_theta), kPositive, "> 0"));
  e.push_back(real("pretrain_coeff_omega", "pretraining target coefficient of omega^2",
                   ACC(pretrain.coeff_omega), kPositive, "> 0"));

  e.push_back(integer<int>("n_init", "samples per batch in phase 1", ACC(n_init), 1, kMaxCount));
  e.push_back(integer<int>("n_increment", "samples added after each policy update", ACC(n_increment), 0, kMaxCount));

  e.push_back(real("gamma_r", "RoA gap multiplier", ACC(roa.gamma), kAboveOne, "> 1"));
  e.push_back(real("beta_r", "RoA weight of gap samples", ACC(roa.beta), kUnit, "[0, 1]"));
  e.push_back(integer<int>("m_iterations", "RoA growth iterations per phase", ACC(roa.iterations), 0, kMaxCount));
  e.push_back(integer<int>("l_r", "RoA labeling rollout length", ACC(roa.rollout_steps), 1, kMaxCount));
  e.push_back(real("lambda_roa", "weight of the decrease term", ACC(roa.lambda_roa), kNonNegative, ">= 0"));
  e.push_back(real("lambda_monot", "weight of the monotonicity term", ACC(roa.lambda_monot), kNonNegative, ">= 0"));
  e.push_back(real("lr_roa", "RoA learning rate", ACC(roa.lr), kPositive, "> 0"));
  e.push_back(integer<int>("sgd_steps_roa", "SGD steps per growth iteration", ACC(roa.sgd_steps), 0, kMaxCount));
  e.push_back(real("c_bar", "target level inside the RoA loss", ACC(roa.c_bar), kPositive, "> 0"));

  e.push_back(real("gamma_p", "policy gap multiplier", ACC(policy.gamma), kAboveOne, "> 1"));
  e.push_back(real("beta_p", "policy weight of gap samples", ACC(policy.beta), kUnit, "[0, 1]"));
  e.push_back(integer<int>("l_p", "policy rollout length", ACC(policy.rollout_steps), 0, kMaxCount));
  e.push_back(real("lambda_u", "weight of end states outside the estimate", ACC(policy.lambda_u), kAtLeastOne,
                   ">= 1"));
  e.push_back(real("lr_policy", "policy learning rate", ACC(policy.lr), kPositive, "> 0"));
  e.push_back(integer<int>("sgd_steps_policy", "policy SGD steps per phase", ACC(policy.sgd_steps), 0, kMaxCount));

  e.push_back(real("lqr_q_theta", "LQR state weight on theta", ACC(lqr_q_theta), kPositive, "> 0"));
  e.push_back(real("lqr_q_omega", "LQR state weight on omega", ACC(lqr_q_omega), kPositive, "> 0"));
  e.push_back(real("lqr_r", "LQR input weight", ACC(lqr_r), kPositive, "> 0"));
  e.push_back(real("sat_a", "initial upper threshold", ACC(psi0.a), kAny, "any"));
  e.push_back(real("sat_b", "initial lower threshold", ACC(psi0.b), kAny, "any"));
  e.push_back(real("sat_m_a", "initial upper slope", ACC(psi0.m_a), kNonNegative, ">= 0"));
  e.push_back(real("sat_m_b", "initial lower slope", ACC(psi0.m_b), kNonNegative, ">= 0"));
  e.push_back(real("crop_radius", "per-phase bound on each saturation parameter change", ACC(crop_radius),
                   kPositive, "> 0"));

  e.push_back(integer<int>("net_width", "hidden width of the Lyapunov net", ACC(net_width), 2, 4096));
  e.push_back(integer<int>("net_depth", "tanh layers of the Lyapunov net", ACC(net_depth), 1, 64));
  e.push_back(real("net_eps", "positive-definiteness margin of the first layer", ACC(net_eps), kPositive, "> 0"));
  return e;
}

#undef ACC

const std::vector<Entry>& entries() {
  static const std::vector<Entry> e = make_entries();
  return e;
}

const Entry* find_entry(const std::string& key) {
  for (const Entry& e : entries()) {
    if (e.name == key) return &e;
  }
  return nullptr;
}

// Cross-field checks; returns the offending key and message, or an empty key.
std::pair<std::string, std::string> cross_check(const RedesignConfig& c) {
  if (!(c.grid.theta_max > c.grid.theta_min)) return {"theta_max", "theta_max must exceed theta_min"};
  if (!(c.grid.omega_max > c.grid.omega_min)) return {"omega_max", "omega_max must exceed omega_min"};
  if (!(c.grid.theta_min < 0.0 && c.grid.theta_max > 0.0)) return {"theta_min", "grid must contain theta = 0"};
  if (!(c.grid.omega_min < 0.0 && c.grid.omega_max > 0.0)) return {"omega_min", "grid must contain omega = 0"};
  if (!(c.psi0.b <= c.psi0.a)) return {"sat_b", "sat_b must not exceed sat_a"};
  return {};
}

}  // namespace

const char* variant_name(Variant v) { return v == Variant::kThresholds ? "thresholds" : "slopes"; }

Variant parse_variant(const std::string& s) {
  if (s == "thresholds") return Variant::kThresholds;
  if (s == "slopes") return Variant::kSlopes;
  throw std::invalid_argument("variant must be 'thresholds' or 'slopes', got '" + s + "'");
}

RoaEstHyper RedesignConfig::roa_hyper(int phase) const {
  RoaEstHyper h = roa;
  h.n_samples = samples_for_phase(phase);
  h.safety_factor = oracle.safety_factor;
  if (!monot) h.lambda_monot = 0.0;
  return h;
}

PolicyUpdHyper RedesignConfig::policy_hyper(int phase) const {
  PolicyUpdHyper h = policy;
  h.n_samples = samples_for_phase(phase);
  h.safety_factor = oracle.safety_factor;
  return h;
}

std::vector<int> RedesignConfig::net_widths() const {
  std::vector<int> w{2};
  for (int i = 0; i < net_depth; ++i) w.push_back(net_width);
  return w;
}

SatPolicy RedesignConfig::initial_policy() const {
  SatPolicy pol;
  pol.K = pendulum_lqr_gain(pendulum, lqr_q_theta, lqr_q_omega, lqr_r);
  pol.psi = psi0;
  const bool thresholds = variant == Variant::kThresholds;
  pol.psi.trainable = {thresholds, thresholds, !thresholds, !thresholds};
  pol.crop_radius = crop_radius;
  return pol;
}

void RedesignConfig::validate() const {
  const auto [key, msg] = cross_check(*this);
  if (!key.empty()) throw ConfigError("<config>", 0, key, msg);
}

ConfigError::ConfigError(const std::string& source, int line, const std::string& key, const std::string& what)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": key '" + key +
                         "': " + what),
      key_(key),
      line_(line) {}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const Entry& e : entries()) k.push_back({e.name, e.doc});
    return k;
  }();
  return keys;
}

void set_config_value(RedesignConfig& cfg, const std::string& key, const std::string& value) {
  const Entry* e = find_entry(key);
  if (e == nullptr) throw ConfigError("<config>", 0, key, "unknown key");
  try {
    e->set(cfg, value);
  } catch (const std::invalid_argument& err) {
    throw ConfigError("<config>", 0, key, err.what());
  }
}

std::string get_config_value(const RedesignConfig& cfg, const std::string& key) {
  const Entry* e = find_entry(key);
  if (e == nullptr) throw ConfigError("<config>", 0, key, "unknown key");
  return e->get(cfg);
}

RedesignConfig parse_config(std::istream& in, const std::string& source) {
  RedesignConfig cfg;
  std::map<std::string, int> line_of;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source, line_no, std::string(line), "expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    const Entry* e = find_entry(key);
    if (e == nullptr) throw ConfigError(source, line_no, key, "unknown key");
    if (const auto prev = line_of.find(key); prev != line_of.end()) {
      throw ConfigError(source, line_no, key, "duplicate key (first set on line " + std::to_string(prev->second) + ")");
    }
    try {
      e->set(cfg, value);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(source, line_no, key, err.what());
    }
    line_of[key] = line_no;
  }
  const auto [key, msg] = cross_check(cfg);
  if (!key.empty()) {
    const auto it = line_of.find(key);
    throw ConfigError(source, it == line_of.end() ? 0 : it->second, key, msg);
  }
  return cfg;
}

RedesignConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

std::string dump_config(const RedesignConfig& cfg) {
  std::ostringstream os;
  os << "# roa redesign config\n";
  for (const Entry& e : entries()) os << "# " << e.doc << "\n" << e.name << " = " << e.get(cfg) << "\n";
  return os.str();
}

}  // namespace roa
