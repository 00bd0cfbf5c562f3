#include "nesgd/persist.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nesgd/errors.hpp"

namespace nesgd {

namespace {

constexpr std::size_t kColumnCount = std::size(kTrajectoryColumns);

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(line);
  while (std::getline(is, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_real(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw FormatError("malformed number '" + text + "' in " + what);
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw FormatError("malformed integer '" + text + "' in " + what);
  }
  return v;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_trajectory_csv(const TrajectoryRecord& record, std::ostream& out) {
  out << "# config_hash=" << record.config_hash << "\n";
  out << "# seed=" << record.seed << "\n";
  for (const auto& [key, value] : record.constants) {
    out << "# " << key << "=" << format_real(value) << "\n";
  }
  for (std::size_t i = 0; i < kColumnCount; ++i) {
    out << (i ? "," : "") << kTrajectoryColumns[i];
  }
  out << "\n";
  for (const TrajectoryRow& row : record.rows) {
    out << row.k << ',' << format_real(row.f) << ',' << format_real(row.f_gap) << ','
        << format_real(row.criterion) << ',' << format_real(row.R_x) << ','
        << format_real(row.momentum_err) << ',' << format_real(row.step_norm) << "\n";
  }
}

void write_trajectory_csv(const TrajectoryRecord& record, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  write_trajectory_csv(record, out);
}

TrajectoryRecord read_trajectory_csv(std::istream& in) {
  TrajectoryRecord rec;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (!have_header && line.rfind("#", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw FormatError("malformed metadata at " + where);
      const auto key_start = line.find_first_not_of(" #");
      const std::string key = line.substr(key_start, eq - key_start);
      const std::string value = line.substr(eq + 1);
      if (key == "config_hash") {
        rec.config_hash = value;
      } else if (key == "seed") {
        rec.seed = parse_unsigned(value, where);
      } else {
        rec.constants[key] = parse_real(value, where);
      }
      continue;
    }
    if (!have_header) {
      const std::vector<std::string> cols = split(line, ',');
      for (std::size_t i = 0; i < kColumnCount; ++i) {
        if (i >= cols.size() || cols[i] != kTrajectoryColumns[i]) {
          throw FormatError(std::string("trajectory CSV is missing column '") +
                            kTrajectoryColumns[i] + "'");
        }
      }
      if (cols.size() != kColumnCount) {
        throw FormatError("trajectory CSV has unexpected column '" + cols[kColumnCount] + "'");
      }
      have_header = true;
      continue;
    }
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != kColumnCount) {
      throw FormatError("expected " + std::to_string(kColumnCount) + " fields at " + where);
    }
    TrajectoryRow row;
    row.k = static_cast<std::int64_t>(parse_unsigned(cells[0], where));
    row.f = parse_real(cells[1], where);
    row.f_gap = parse_real(cells[2], where);
    row.criterion = parse_real(cells[3], where);
    row.R_x = parse_real(cells[4], where);
    row.momentum_err = parse_real(cells[5], where);
    row.step_norm = parse_real(cells[6], where);
    if (!rec.rows.empty() && row.k <= rec.rows.back().k) {
      throw FormatError("iteration index not increasing at " + where);
    }
    rec.rows.push_back(row);
  }
  if (!have_header) {
    throw FormatError(std::string("trajectory CSV is missing column '") + kTrajectoryColumns[0] +
                      "'");
  }
  rec.iterations = rec.rows.empty() ? 0 : rec.rows.back().k;
  return rec;
}

TrajectoryRecord read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return read_trajectory_csv(in);
}

void write_json(const nlohmann::json& doc, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << "\n";
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

}  // namespace nesgd
