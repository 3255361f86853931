#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mkv/metrics.hpp"
#include "mkv/rates.hpp"
#include "mkv/report.hpp"

namespace mkv {

/// "<semver>-<git describe>" baked in at configure time.
std::string version();

/// A CSV table of preformatted cells. Written as series_<name>.csv.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string file_name() const { return "series_" + name + ".csv"; }
};

/// Shortest-round-trip-safe decimal rendering used in every CSV cell.
std::string cell(double value);
std::string cell(std::size_t value);

std::string format_csv(const Table& table);
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

/// (t, value, stderr) rows.
Table series_table(std::string name, const DistanceSeries& series);

/// Long format (t, replica, metric_name, value) with mean_abs and max_abs per snapshot.
Table moment_long_table(std::string name, const std::vector<RunRecord>& runs);

nlohmann::json to_json(const VerificationReport& report);
nlohmann::json to_json(const DecayFit& fit);
nlohmann::json to_json(const RateBundle& bundle);

}  // namespace mkv
