#include "roa/metrics.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "roa/text_io.hpp"

namespace roa {

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }
std::string cell(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }
std::string cell(const std::optional<bool>& v) { return v ? (*v ? "1" : "0") : std::string(); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

std::string opt_cell(double v) { return std::isnan(v) ? std::string() : format_double(v); }

}  // namespace

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols{
      "kind",          "phase",          "iteration",          "n_samples",         "estimated_fraction",
      "oracle_fraction", "c",            "loss_inside",        "loss_outside",      "loss_decrease",
      "loss_monot",    "loss_total",     "loss_initial",       "n_in",              "n_out",
      "gap_empty",     "a",              "b",                  "m_a",               "m_b",
      "policy_loss_before", "policy_loss_after", "grad_norm_final", "grad_norm_psi", "weak_signal",
      "est_outside_oracle", "oracle_sym_diff", "pretrain_mse"};
  return cols;
}

std::string format_metrics_row(const MetricsRow& r) {
  const std::vector<std::string> cells{
      r.kind,          std::to_string(r.phase), std::to_string(r.iteration), cell(r.n_samples),
      cell(r.estimated_fraction), cell(r.oracle_fraction), cell(r.c), cell(r.loss_inside),
      cell(r.loss_outside), cell(r.loss_decrease), cell(r.loss_monot), cell(r.loss_total),
      cell(r.loss_initial), cell(r.n_in), cell(r.n_out), cell(r.gap_empty), cell(r.a), cell(r.b),
      cell(r.m_a), cell(r.m_b), cell(r.policy_loss_before), cell(r.policy_loss_after),
      cell(r.grad_norm_final), cell(r.grad_norm_psi), cell(r.weak_signal), cell(r.est_outside_oracle),
      cell(r.oracle_sym_diff), cell(r.pretrain_mse)};
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) line += ',';
    line += cells[i];
  }
  return line;
}

MetricsWriter::MetricsWriter(const std::string& path) : out_(open_out(path)) {
  out_ << kMetricsVersionLine << '\n';
  const auto& cols = metrics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i > 0 ? "," : "") << cols[i];
  out_ << '\n';
  out_.flush();
}

void MetricsWriter::write(const MetricsRow& row) {
  out_ << format_metrics_row(row) << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("failed writing metrics row");
}

int MetricsTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  throw std::runtime_error("metrics column '" + name + "' not found");
}

std::vector<std::size_t> MetricsTable::rows_of(const std::string& kind) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (kind.empty() || rows[i][0] == kind) out.push_back(i);
  }
  return out;
}

std::vector<double> MetricsTable::values(const std::string& column, const std::vector<std::size_t>& idx) const {
  const auto col = static_cast<std::size_t>(column_index(column));
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    const std::string& s = rows[i][col];
    const auto v = s.empty() ? std::nullopt : parse_double(s);
    out.push_back(v ? *v : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

MetricsTable read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line) != kMetricsVersionLine) {
    throw std::runtime_error(path + ": first line must be '" + kMetricsVersionLine + "'");
  }
  MetricsTable t;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header row");
  t.columns = split_csv(line);
  if (t.columns.empty() || t.columns[0] != "kind") throw std::runtime_error(path + ": bad header row");
  int line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != t.columns.size()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(t.columns.size()) + " cells, got " + std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

std::vector<std::string> write_report(const MetricsTable& t, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto path = [&out_dir](const char* name) { return (std::filesystem::path(out_dir) / name).string(); };
  std::vector<std::string> written;

  const auto growth = t.rows_of("growth");
  const auto phase_col = static_cast<std::size_t>(t.column_index("phase"));
  const auto iter_col = static_cast<std::size_t>(t.column_index("iteration"));
  const auto est = t.values("estimated_fraction", growth);
  const auto lvl = t.values("c", growth);

  // Oracle fraction in force during phase n: the baseline for n = 1, else the oracle after update n - 1.
  std::vector<double> oracle_for_phase;
  for (std::size_t i : t.rows_of("baseline")) oracle_for_phase = t.values("oracle_fraction", {i});
  const auto policy = t.rows_of("policy");
  const auto policy_oracle = t.values("oracle_fraction", policy);
  oracle_for_phase.insert(oracle_for_phase.end(), policy_oracle.begin(), policy_oracle.end());

  {
    auto f = open_out(path("fig_fraction_trace.csv"));
    f << "step,phase,iteration,estimated_fraction,oracle_fraction\n";
    for (std::size_t k = 0; k < growth.size(); ++k) {
      const auto& row = t.rows[growth[k]];
      const auto phase = parse_int(row[phase_col]).value_or(0);
      const double oracle = (phase >= 1 && static_cast<std::size_t>(phase) <= oracle_for_phase.size())
                                ? oracle_for_phase[static_cast<std::size_t>(phase - 1)]
                                : std::numeric_limits<double>::quiet_NaN();
      f << k + 1 << ',' << row[phase_col] << ',' << row[iter_col] << ',' << opt_cell(est[k]) << ','
        << opt_cell(oracle) << '\n';
    }
    written.push_back(path("fig_fraction_trace.csv"));
  }
  {
    auto f = open_out(path("fig_level_trace.csv"));
    f << "step,phase,iteration,c\n";
    for (std::size_t k = 0; k < growth.size(); ++k) {
      const auto& row = t.rows[growth[k]];
      f << k + 1 << ',' << row[phase_col] << ',' << row[iter_col] << ',' << opt_cell(lvl[k]) << '\n';
    }
    written.push_back(path("fig_level_trace.csv"));
  }
  {
    auto f = open_out(path("fig_psi_trace.csv"));
    f << "phase,a,b,m_a,m_b,oracle_fraction\n";
    std::vector<std::size_t> rows = t.rows_of("baseline");
    rows.insert(rows.end(), policy.begin(), policy.end());
    const auto a = t.values("a", rows), b = t.values("b", rows), ma = t.values("m_a", rows),
               mb = t.values("m_b", rows), orc = t.values("oracle_fraction", rows);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      f << t.rows[rows[k]][phase_col] << ',' << opt_cell(a[k]) << ',' << opt_cell(b[k]) << ',' << opt_cell(ma[k])
        << ',' << opt_cell(mb[k]) << ',' << opt_cell(orc[k]) << '\n';
    }
    written.push_back(path("fig_psi_trace.csv"));
  }
  return written;
}

}  // namespace roa
