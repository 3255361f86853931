#include "mkv/artifacts.hpp"

#include <fstream>

#include <fmt/format.h>

#include "mkv/error.hpp"

#ifndef MKV_VERSION
#define MKV_VERSION "0.1.0-unknown"
#endif

namespace mkv {

std::string version() { return MKV_VERSION; }

void Table::add_row(std::vector<std::string> row) {
  require(row.size() == columns.size(), ErrorKind::InvalidArgument,
          fmt::format("table {}: row has {} cells, expected {}", name, row.size(), columns.size()));
  rows.push_back(std::move(row));
}

std::string cell(double value) { return fmt::format("{:.17g}", value); }
std::string cell(std::size_t value) { return fmt::format("{}", value); }

std::string format_csv(const Table& table) {
  std::string out = fmt::format("{}\n", fmt::join(table.columns, ","));
  for (const auto& row : table.rows) out += fmt::format("{}\n", fmt::join(row, ","));
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::InvalidArgument, "write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  write_text(path, value.dump(2) + "\n");
}

Table series_table(std::string name, const DistanceSeries& series) {
  series.validate();
  Table table{std::move(name), {"t", "value", "stderr"}, {}};
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    table.add_row({cell(series.times[k]), cell(series.values[k]), cell(series.std_error[k])});
  }
  return table;
}

Table moment_long_table(std::string name, const std::vector<RunRecord>& runs) {
  Table table{std::move(name), {"t", "replica", "metric_name", "value"}, {}};
  for (const auto& run : runs) {
    const auto replica = cell(static_cast<std::size_t>(run.replica));
    for (const auto& m : moment_track(run)) {
      table.add_row({cell(m.t), replica, "mean_abs", cell(m.mean_abs)});
      table.add_row({cell(m.t), replica, "max_abs", cell(m.max_abs)});
    }
  }
  return table;
}

nlohmann::json to_json(const VerificationReport& report) {
  return {{"pass", report.pass},
          {"max_violation", report.max_violation},
          {"arg_x", report.arg_x},
          {"arg_y", report.arg_y}};
}

nlohmann::json to_json(const DecayFit& fit) {
  return {{"rate", fit.rate},
          {"intercept", fit.intercept},
          {"plateau", fit.plateau},
          {"plateau_stderr", fit.plateau_stderr},
          {"r2", fit.r2},
          {"window_lo", fit.window_lo},
          {"window_hi", fit.window_hi},
          {"window_samples", fit.window_samples}};
}

nlohmann::json to_json(const RateBundle& b) {
  return {{"c1", b.c1},
          {"c2", b.c2},
          {"lambda0_star", b.lambda0_star},
          {"lambda0_dstar", b.lambda0_dstar},
          {"lambda_star", b.lambda_star},
          {"lambda3_star", b.lambda3_star},
          {"noise_sq", b.noise_sq}};
}

}  // namespace mkv
