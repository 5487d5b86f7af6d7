#include "csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace chaplygin::cli {

long CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<long>(i);
  }
  return -1;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::vector<std::string> trajectory_columns(Index r, bool with_tau) {
  std::vector<std::string> cols{"t"};
  for (Index i = 1; i <= r; ++i) cols.push_back("s" + std::to_string(i));
  for (Index i = 1; i <= r; ++i) cols.push_back("p" + std::to_string(i));
  cols.emplace_back("H");
  cols.emplace_back("liouville_residual");
  if (with_tau) cols.emplace_back("tau");
  return cols;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const std::vector<double>& liouville, bool with_tau,
                          const std::vector<std::string>& footer) {
  if (liouville.size() != traj.samples.size()) {
    throw CsvError("residual channel length differs from sample count");
  }
  const Index r = traj.samples.empty() ? 0 : traj.samples.front().state.dim();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CsvError("cannot open " + path.string() + " for writing");

  const auto cols = trajectory_columns(r, with_tau);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const Sample& smp = traj.samples[k];
    out << format_number(smp.t);
    for (Index i = 0; i < r; ++i) out << ',' << format_number(smp.state.s(i));
    for (Index i = 0; i < r; ++i) out << ',' << format_number(smp.state.p(i));
    out << ',' << format_number(smp.H) << ',' << format_number(liouville[k]);
    if (with_tau) out << ',' << format_number(smp.tau.value_or(smp.t));
    out << '\n';
  }
  for (const auto& line : footer) out << "# " << line << '\n';
  if (!out) throw CsvError("write failed for " + path.string());
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) parts.push_back(cur);
  if (!line.empty() && line.back() == ',') parts.emplace_back();
  return parts;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      table.comments.push_back(line.size() > 1 && line[1] == ' ' ? line.substr(2) : line.substr(1));
      continue;
    }
    auto fields = split(line);
    if (!have_header) {
      for (const auto& f : fields) {
        if (f.empty()) throw CsvError("empty column name in header");
      }
      table.columns = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.columns.size()) {
      throw CsvError("line " + std::to_string(lineno) + ": expected " +
                     std::to_string(table.columns.size()) + " fields, got " +
                     std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw CsvError("line " + std::to_string(lineno) + ": non-numeric field '" + f + "'");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw CsvError(path.string() + " has no header row");
  return table;
}

}  // namespace chaplygin::cli
