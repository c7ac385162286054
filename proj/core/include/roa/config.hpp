#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "roa/dynamics.hpp"
#include "roa/grid.hpp"
#include "roa/policy.hpp"
#include "roa/policy_updater.hpp"
#include "roa/pretrain.hpp"
#include "roa/roa_estimator.hpp"
#include "roa/roa_oracle.hpp"

namespace roa {

enum class Variant { kThresholds, kSlopes };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& s);

/// Everything a redesign run depends on. Defaults are the published hyperparameters.
struct RedesignConfig {
  PendulumParams pendulum;
  GridDomain grid;
  OracleOptions oracle;
  PretrainOptions pretrain;
  RoaEstHyper roa;
  PolicyUpdHyper policy;

  int n_init = 10;       ///< batch size in phase 1, for both samplers
  int n_increment = 10;  ///< added after every policy update
  bool monot = true;     ///< false forces lambda_monot = 0

  double lqr_q_theta = 1.0;
  double lqr_q_omega = 1.0;
  double lqr_r = 1.0;
  SatParams psi0;
  double crop_radius = 0.1;

  int net_width = 64;
  int net_depth = 3;
  double net_eps = 0.01;

  std::uint64_t seed = 0;
  int phases = 20;
  std::string out = "out";
  Variant variant = Variant::kThresholds;
  bool heatmaps = true;

  /// Batch size N used in phase n (1-based).
  int samples_for_phase(int n) const { return n_init + (n - 1) * n_increment; }
  RoaEstHyper roa_hyper(int phase) const;
  PolicyUpdHyper policy_hyper(int phase) const;
  std::vector<int> net_widths() const;
  /// LQR gain, psi0 and the variant's trainable set.
  SatPolicy initial_policy() const;

  /// Cross-field checks; throws ConfigError naming the first offending key.
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& key, const std::string& what);
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

struct ConfigKey {
  std::string name;
  std::string doc;
};

/// Every accepted key with a one-line description, in dump order.
const std::vector<ConfigKey>& config_keys();

/// Sets one key from its textual value. Throws ConfigError (line 0) on an unknown key, a
/// malformed value or a value outside the key's range.
void set_config_value(RedesignConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const RedesignConfig& cfg, const std::string& key);

/// key = value lines; '#' starts a comment; blank lines ignored; later keys override earlier.
RedesignConfig parse_config(std::istream& in, const std::string& source = "<config>");
RedesignConfig parse_config_file(const std::string& path);

/// Every key with its doc comment; parse_config(dump_config(c)) reproduces c.
std::string dump_config(const RedesignConfig& cfg);

}  // namespace roa
