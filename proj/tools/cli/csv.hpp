#pragma once

// Trajectory CSV: one header row, comma-separated numeric rows with 17
// significant digits, optional trailing comment lines starting with '#'.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaplygin/dynamics.hpp"

namespace chaplygin::cli {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  /// Comment lines without the leading '#'.
  std::vector<std::string> comments;

  /// Index of a named column or -1.
  long column(const std::string& name) const;
};

/// 17 significant digits, '.' decimal separator, independent of the locale.
std::string format_number(double v);

/// Column names t, s1..sr, p1..pr, H, liouville_residual [, tau].
std::vector<std::string> trajectory_columns(Index r, bool with_tau);

/// Writes the trajectory with the given per-sample residual channel; footer
/// lines are written as "# <line>".
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const std::vector<double>& liouville, bool with_tau,
                          const std::vector<std::string>& footer);

/// Parses a CSV file. Throws CsvError on I/O failure, ragged rows or
/// non-numeric fields.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace chaplygin::cli
