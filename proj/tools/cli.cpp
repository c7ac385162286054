#include "cli.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "roa/config.hpp"
#include "roa/metrics.hpp"
#include "roa/redesign.hpp"
#include "roa/roa_oracle.hpp"
#include "roa/text_io.hpp"

namespace roa {

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string variant;
  bool no_monot = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key=value configuration file");
  cmd->add_option("--seed", f.seed, "RNG seed (overrides the config)");
  cmd->add_option("--out", f.out, "output directory (overrides the config)");
  cmd->add_option("--variant", f.variant, "trainable saturation parameters")
      ->check(CLI::IsMember({"thresholds", "slopes"}));
  cmd->add_flag("--no-monot", f.no_monot, "drop the monotonicity term (lambda_monot = 0)");
}

RedesignConfig resolve_config(const CommonFlags& f) {
  RedesignConfig cfg = f.config.empty() ? RedesignConfig{} : parse_config_file(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.out = f.out;
  if (!f.variant.empty()) cfg.variant = parse_variant(f.variant);
  if (f.no_monot) cfg.monot = false;
  cfg.validate();
  return cfg;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lyapunov-based region-of-attraction estimation and policy redesign", "roa"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::string metrics_path;

  CLI::App* pretrain = app.add_subcommand("pretrain", "fit the Lyapunov net to a quadratic and save it");
  CLI::App* run = app.add_subcommand("run", "pretrain, then alternate RoA estimation and policy updates");
  CLI::App* oracle = app.add_subcommand("oracle", "print the true RoA fraction of the configured initial policy");
  CLI::App* report = app.add_subcommand("report", "regenerate figure CSVs from OUT/metrics.csv");
  for (CLI::App* cmd : {pretrain, run, oracle, report}) add_common(cmd, flags);
  report->add_option("--metrics", metrics_path, "metrics file to read (default OUT/metrics.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "roa: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    const RedesignConfig cfg = resolve_config(flags);
    if (*pretrain) {
      const RedesignResult res = run_pretrain(cfg);
      out << "pretrain mse " << format_double(res.pretrain_initial_mse) << " -> "
          << format_double(res.pretrain_final_mse) << "\n";
    } else if (*run) {
      const RedesignResult res = run_redesign(cfg, [&out](const PhaseRecord& p) {
        out << "phase " << p.phase << ": c " << format_double(p.estimate.c) << ", oracle fraction "
            << format_double(p.oracle_fraction_after) << "\n";
        out.flush();
      });
      out << "initial oracle fraction " << format_double(res.initial_oracle_fraction) << "\n";
      const double final_fraction =
          res.phases.empty() ? res.initial_oracle_fraction : res.phases.back().oracle_fraction_after;
      out << "final oracle fraction " << format_double(final_fraction) << "\n";
    } else if (*oracle) {
      const RoaMask mask = oracle_for_config(cfg);
      out << format_double(mask_measure(mask)) << "\n";
      if (!flags.out.empty()) {
        std::filesystem::create_directories(cfg.out);
        write_mask_pgm(mask, (std::filesystem::path(cfg.out) / "oracle.pgm").string());
        write_mask_csv(mask, (std::filesystem::path(cfg.out) / "oracle.csv").string());
      }
    } else if (*report) {
      const std::string path =
          metrics_path.empty() ? (std::filesystem::path(cfg.out) / "metrics.csv").string() : metrics_path;
      const MetricsTable table = read_metrics(path);
      for (const std::string& f : write_report(table, (std::filesystem::path(cfg.out) / "figures").string())) {
        out << f << "\n";
      }
    }
  } catch (const std::exception& e) {
    err << "roa: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace roa
