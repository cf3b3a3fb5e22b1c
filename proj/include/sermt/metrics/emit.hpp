#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sermt/metrics/scenario.hpp"

namespace sermt::metrics {

enum class Format { Csv, Svg };

/// `sweep_value,defense,drop_pct,throughput,avg_bp`; fixed precision so
/// equal tables give byte-identical files.
void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Line chart of one metric against the sweep value, one series per defense
/// setting. A series with a single point gets a marker and no line.
struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  double (*value)(const Metrics&) = nullptr;
};
void write_svg(std::ostream& out, const std::vector<SweepRow>& rows, const ChartSpec& chart);

/// Charts for a sweep: packet drop for malicious counts, battery use for intervals.
ChartSpec chart_for(Vary vary);

/// Writes to `path`; throws RuntimeFault when the table is empty or the
/// path cannot be written.
void emit(const std::vector<SweepRow>& rows, Format format, const std::filesystem::path& path, Vary vary);

std::string summary(const Metrics& m);

}  // namespace sermt::metrics
