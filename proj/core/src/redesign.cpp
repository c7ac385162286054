#include "roa/redesign.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "roa/heatmap.hpp"
#include "roa/metrics.hpp"
#include "roa/pretrain.hpp"
#include "roa/roa_oracle.hpp"
#include "roa/text_io.hpp"

namespace roa {

namespace fs = std::filesystem;

namespace {

std::string phase_tag(int n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d", n);
  return buf;
}

void psi_columns(MetricsRow& row, const SatParams& psi) {
  row.a = psi.a;
  row.b = psi.b;
  row.m_a = psi.m_a;
  row.m_b = psi.m_b;
}

struct Outputs {
  fs::path root;
  MetricsWriter metrics;
  std::ofstream timing;

  explicit Outputs(const RedesignConfig& cfg)
      : root(prepare(cfg)), metrics((root / "metrics.csv").string()), timing(root / "timing.csv") {
    timing << "stage,seconds\n";
  }

  static fs::path prepare(const RedesignConfig& cfg) {
    const fs::path root(cfg.out);
    fs::create_directories(root / "checkpoints");
    if (cfg.heatmaps) {
      fs::create_directories(root / "heatmaps");
      fs::create_directories(root / "masks");
    }
    std::ofstream(root / "config.txt", std::ios::binary) << dump_config(cfg);
    return root;
  }

  void time(const std::string& stage, std::chrono::steady_clock::time_point since) {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
    timing << stage << ',' << format_double(s) << '\n';
    timing.flush();
  }

  std::string checkpoint(const std::string& name) const { return (root / "checkpoints" / name).string(); }
  std::string heatmap(const std::string& name) const { return (root / "heatmaps" / name).string(); }
  std::string mask(const std::string& name) const { return (root / "masks" / name).string(); }
};

void write_phase_images(const Outputs& out, const RedesignConfig& cfg, const std::string& tag, const RoaMask& oracle,
                        const LevelSetEstimate& est) {
  const GridField v = evaluate_on_grid(est.net, cfg.grid);
  const RoaMask estimate = band_mask(v, -std::numeric_limits<double>::infinity(), est.c);
  const RoaMask gap = band_mask(v, est.c, cfg.roa.gamma * est.c);
  write_overlay_ppm(oracle, estimate, gap, out.heatmap("roa_" + tag + ".ppm"));
  write_field_ppm(v, out.heatmap("value_" + tag + ".ppm"));
  write_mask_pgm(oracle, out.mask("oracle_" + tag + ".pgm"));
  write_mask_csv(oracle, out.mask("oracle_" + tag + ".csv"));
  write_mask_pgm(estimate, out.mask("estimate_" + tag + ".pgm"));
}

PretrainResult do_pretrain(const RedesignConfig& cfg, std::mt19937_64& rng) {
  const PDLyapunovNet init = PDLyapunovNet::random(rng, cfg.net_widths(), cfg.net_eps);
  return pretrain_quadratic(init, cfg.grid, cfg.pretrain, rng);
}

}  // namespace

RoaMask oracle_for_config(const RedesignConfig& cfg) {
  cfg.validate();
  return true_roa(closed_loop(cfg.initial_policy(), cfg.pendulum), cfg.grid, cfg.oracle);
}

RedesignResult run_pretrain(const RedesignConfig& cfg) {
  cfg.validate();
  Outputs out(cfg);
  std::mt19937_64 rng(cfg.seed);
  const auto t0 = std::chrono::steady_clock::now();
  const PretrainResult pre = do_pretrain(cfg, rng);
  pre.net.save_file(out.checkpoint("net_pretrain.txt"));
  MetricsRow row;
  row.kind = "pretrain";
  row.pretrain_mse = pre.final_mse;
  out.metrics.write(row);
  out.time("pretrain", t0);

  RedesignResult res;
  res.pretrain_initial_mse = pre.initial_mse;
  res.pretrain_final_mse = pre.final_mse;
  res.initial_policy = cfg.initial_policy();
  res.initial_estimate = {pre.net, 0.0};
  return res;
}

RedesignResult run_redesign(const RedesignConfig& cfg, const PhaseObserver& observer) {
  cfg.validate();
  Outputs out(cfg);
  std::mt19937_64 rng(cfg.seed);
  RedesignResult res;

  auto t0 = std::chrono::steady_clock::now();
  const PretrainResult pre = do_pretrain(cfg, rng);
  res.pretrain_initial_mse = pre.initial_mse;
  res.pretrain_final_mse = pre.final_mse;
  pre.net.save_file(out.checkpoint("net_pretrain.txt"));
  {
    MetricsRow row;
    row.kind = "pretrain";
    row.pretrain_mse = pre.final_mse;
    out.metrics.write(row);
  }
  out.time("pretrain", t0);

  t0 = std::chrono::steady_clock::now();
  SatPolicy pol = cfg.initial_policy();
  res.initial_policy = pol;
  PendulumClosedLoop f_cur = closed_loop(pol, cfg.pendulum);
  res.initial_estimate = initial_estimate(pre.net, f_cur, cfg.grid);
  RoaMask oracle_cur = true_roa(f_cur, cfg.grid, cfg.oracle);
  res.initial_oracle_fraction = oracle_cur.fraction();
  {
    const GridField v = evaluate_on_grid(res.initial_estimate.net, cfg.grid);
    MetricsRow row;
    row.kind = "baseline";
    row.estimated_fraction = sublevel_fraction(v, res.initial_estimate.c);
    row.oracle_fraction = res.initial_oracle_fraction;
    row.c = res.initial_estimate.c;
    psi_columns(row, pol.psi);
    out.metrics.write(row);
  }
  if (cfg.heatmaps) write_phase_images(out, cfg, "00", oracle_cur, res.initial_estimate);
  out.time("baseline", t0);

  LevelSetEstimate prev = res.initial_estimate;
  PendulumClosedLoop f_prev = f_cur;

  for (int n = 1; n <= cfg.phases; ++n) {
    t0 = std::chrono::steady_clock::now();
    const std::string tag = phase_tag(n);
    PhaseRecord rec;
    rec.phase = n;
    rec.policy = pol;
    const RoaEstHyper rh = cfg.roa_hyper(n);
    const GrowthObserver log_growth = [&](const GrowthIteration& it, const LevelSetEstimate&) {
      MetricsRow row;
      row.kind = "growth";
      row.phase = n;
      row.iteration = it.iteration;
      row.n_samples = rh.n_samples;
      row.estimated_fraction = it.estimated_fraction;
      row.c = it.c;
      row.loss_inside = it.final_loss.inside;
      row.loss_outside = it.final_loss.outside;
      row.loss_decrease = it.final_loss.decrease;
      row.loss_monot = it.final_loss.monot;
      row.loss_total = it.final_loss.total();
      row.loss_initial = it.initial_loss.total();
      row.n_in = it.n_in;
      row.n_out = it.n_out;
      row.gap_empty = it.gap_empty;
      out.metrics.write(row);
    };

    RoaEstimateResult est;
    try {
      est = estimate_roa(prev, f_prev, f_cur, rh, cfg.grid, rng, log_growth);
    } catch (...) {
      prev.net.save_file(out.checkpoint("net_failed_phase_" + tag + ".txt"));
      throw;
    }
    rec.estimate = est.estimate;
    rec.growth = est.iterations;
    rec.oracle = oracle_cur;
    est.estimate.net.save_file(out.checkpoint("net_phase_" + tag + ".txt"));
    const GridField v = evaluate_on_grid(rec.estimate.net, cfg.grid);
    rec.est_outside_oracle =
        difference_measure(band_mask(v, -std::numeric_limits<double>::infinity(), rec.estimate.c), oracle_cur);
    if (cfg.heatmaps) write_phase_images(out, cfg, tag, oracle_cur, rec.estimate);

    const PolicyUpdateResult upd = update_policy(pol, rec.estimate, cfg.pendulum, cfg.policy_hyper(n), cfg.grid, rng);
    rec.updated = upd.policy;
    rec.diagnostics = upd.diagnostics;
    rec.policy_loss_before = upd.loss_before;
    rec.policy_loss_after = upd.loss_after;

    const PendulumClosedLoop f_next = closed_loop(upd.policy, cfg.pendulum);
    RoaMask oracle_next = true_roa(f_next, cfg.grid, cfg.oracle);
    rec.oracle_fraction_after = oracle_next.fraction();
    {
      MetricsRow row;
      row.kind = "policy";
      row.phase = n;
      row.n_samples = cfg.policy_hyper(n).n_samples;
      row.estimated_fraction = sublevel_fraction(v, rec.estimate.c);
      row.oracle_fraction = rec.oracle_fraction_after;
      row.c = rec.estimate.c;
      psi_columns(row, upd.policy.psi);
      row.policy_loss_before = upd.loss_before;
      row.policy_loss_after = upd.loss_after;
      row.grad_norm_final = upd.diagnostics.grad_norm_final;
      row.grad_norm_psi = upd.diagnostics.grad_norm_psi;
      row.weak_signal = upd.diagnostics.weak_signal;
      row.gap_empty = upd.batch.gap_empty;
      row.est_outside_oracle = rec.est_outside_oracle;
      row.oracle_sym_diff = sym_diff_measure(oracle_next, oracle_cur);
      out.metrics.write(row);
    }
    out.time("phase_" + tag, t0);

    prev = rec.estimate;
    f_prev = f_cur;
    pol = upd.policy;
    f_cur = f_next;
    oracle_cur = std::move(oracle_next);
    res.phases.push_back(std::move(rec));
    if (observer) observer(res.phases.back());
  }
  if (cfg.heatmaps && cfg.phases > 0) {
    write_mask_pgm(oracle_cur, out.mask("oracle_final.pgm"));
    write_mask_csv(oracle_cur, out.mask("oracle_final.csv"));
  }
  return res;
}

}  // namespace roa
