#pragma once

#include <functional>
#include <string>
#include <vector>

#include "roa/config.hpp"
#include "roa/grid.hpp"
#include "roa/policy.hpp"
#include "roa/policy_updater.hpp"
#include "roa/roa_estimator.hpp"

namespace roa {

/// Everything one phase produced, kept in memory for callers that check run-level properties.
struct PhaseRecord {
  int phase = 0;
  SatPolicy policy;              ///< policy the estimate was learned for
  LevelSetEstimate estimate;     ///< after estimate_roa
  RoaMask oracle;                ///< true RoA of `policy`
  std::vector<GrowthIteration> growth;
  SatPolicy updated;             ///< policy after update_policy
  SignalDiagnostics diagnostics;
  double policy_loss_before = 0.0;
  double policy_loss_after = 0.0;
  double oracle_fraction_after = 0.0;  ///< true RoA fraction of `updated`
  double est_outside_oracle = 0.0;     ///< cells in S_c(V) outside `oracle`, as a fraction
};

struct RedesignResult {
  double pretrain_initial_mse = 0.0;
  double pretrain_final_mse = 0.0;
  SatPolicy initial_policy;
  LevelSetEstimate initial_estimate;  ///< pretrained net with its line-searched level
  double initial_oracle_fraction = 0.0;
  std::vector<PhaseRecord> phases;
};

/// Called after every completed phase.
using PhaseObserver = std::function<void(const PhaseRecord&)>;

/// Pretrain, then `cfg.phases` rounds of RoA estimation and policy update. Writes into
/// cfg.out: config.txt, metrics.csv, timing.csv, checkpoints/, and with cfg.heatmaps set
/// heatmaps/ and masks/. Files are flushed as the run goes so a failure leaves everything
/// produced so far; the exception is then rethrown.
RedesignResult run_redesign(const RedesignConfig& cfg, const PhaseObserver& observer = {});

/// Pretraining only: writes config.txt, metrics.csv (pretrain row) and checkpoints/net_pretrain.txt.
RedesignResult run_pretrain(const RedesignConfig& cfg);

/// True RoA of the configured initial policy.
RoaMask oracle_for_config(const RedesignConfig& cfg);

}  // namespace roa
