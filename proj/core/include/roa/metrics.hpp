#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace roa {

inline constexpr const char* kMetricsVersionLine = "# roa-metrics v1";

/// One CSV row. Unset fields are written as empty cells.
///
/// kind is one of
///   pretrain  - after pretraining (phase 0)
///   baseline  - initial estimate and oracle of the initial policy (phase 0)
///   growth    - one RoA growth iteration (phase n, iteration m)
///   policy    - one policy update (phase n); oracle_fraction is that of the updated policy,
///               est_outside_oracle compares the phase's estimate with the pre-update oracle.
struct MetricsRow {
  std::string kind;
  int phase = 0;
  int iteration = 0;
  std::optional<int> n_samples;
  std::optional<double> estimated_fraction;
  std::optional<double> oracle_fraction;
  std::optional<double> c;
  std::optional<double> loss_inside, loss_outside, loss_decrease, loss_monot, loss_total;
  std::optional<double> loss_initial;
  std::optional<int> n_in, n_out;
  std::optional<bool> gap_empty;
  std::optional<double> a, b, m_a, m_b;
  std::optional<double> policy_loss_before, policy_loss_after;
  std::optional<double> grad_norm_final, grad_norm_psi;
  std::optional<bool> weak_signal;
  std::optional<double> est_outside_oracle;
  std::optional<double> oracle_sym_diff;
  std::optional<double> pretrain_mse;
};

const std::vector<std::string>& metrics_columns();

/// Appends rows to a CSV file, flushing after each one so partial runs keep their log.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& path);
  void write(const MetricsRow& row);

 private:
  std::ofstream out_;
};

std::string format_metrics_row(const MetricsRow& row);

/// A parsed metrics file; cells kept as text.
struct MetricsTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column_index(const std::string& name) const;  ///< throws if absent
  /// Rows of the given kind (all rows for an empty kind).
  std::vector<std::size_t> rows_of(const std::string& kind) const;
  /// Numeric values of a column over the given rows; empty cells become NaN.
  std::vector<double> values(const std::string& column, const std::vector<std::size_t>& rows) const;
};

/// Throws std::runtime_error on a missing or wrong version line or a ragged row.
MetricsTable read_metrics(const std::string& path);

/// Regenerates the figure data from a metrics log alone:
///   fig_fraction_trace.csv  step,phase,iteration,estimated_fraction,oracle_fraction
///   fig_level_trace.csv     step,phase,iteration,c
///   fig_psi_trace.csv       phase,a,b,m_a,m_b,oracle_fraction
/// Returns the written paths.
std::vector<std::string> write_report(const MetricsTable& table, const std::string& out_dir);

}  // namespace roa
