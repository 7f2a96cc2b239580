#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "landscape/errors.hpp"
#include "landscape/format.hpp"
#include "landscape/model.hpp"

namespace landscape {

using Json = nlohmann::json;  ///< keys serialize sorted -> canonical output

inline constexpr const char* kToolVersion = "1.0.0";

/// A CSV document with string cells; numeric cells should be formatted with
/// format_double/format_int so output is locale-free and round-trippable.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  explicit CsvTable(std::vector<std::string> columns)
      : header(std::move(columns)) {}

  void add(std::vector<std::string> row) {
    if (row.size() != header.size())
      throw InvalidParams("CsvTable: row width " + std::to_string(row.size()) +
                          " does not match header width " +
                          std::to_string(header.size()));
    rows.push_back(std::move(row));
  }

  std::string to_string() const {
    std::string out;
    auto join = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    join(header);
    for (const auto& row : rows) join(row);
    return out;
  }
};

/// Fixed-width uniform histogram; values outside [lo, hi] are clamped into
/// the boundary bins so total mass equals the number of adds.
struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<long long> counts;

  Histogram(int bins, double lo_, double hi_)
      : lo(lo_), hi(hi_), counts(static_cast<std::size_t>(bins), 0) {
    if (bins < 1 || !(hi_ > lo_))
      throw InvalidParams("Histogram: need bins >= 1 and hi > lo");
  }

  void add(double x) {
    const int bins = static_cast<int>(counts.size());
    int idx = static_cast<int>((x - lo) / (hi - lo) * bins);
    idx = std::max(0, std::min(bins - 1, idx));
    ++counts[static_cast<std::size_t>(idx)];
  }

  double bin_left(int i) const {
    return lo + (hi - lo) * i / static_cast<double>(counts.size());
  }
  double bin_right(int i) const {
    return lo + (hi - lo) * (i + 1) / static_cast<double>(counts.size());
  }

  CsvTable to_csv() const {
    CsvTable table({"bin_left", "bin_right", "count"});
    for (int i = 0; i < static_cast<int>(counts.size()); ++i)
      table.add({format_double(bin_left(i)), format_double(bin_right(i)),
                 format_int(counts[static_cast<std::size_t>(i)])});
    return table;
  }

  Json to_json() const {
    Json j;
    j["lo"] = lo;
    j["hi"] = hi;
    j["counts"] = counts;
    return j;
  }
};

/// 64-bit FNV-1a over a byte string.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Deterministic hex digest of a JSON value (canonical dump, sorted keys).
inline std::string config_hash(const Json& value) {
  static const char* hex = "0123456789abcdef";
  std::uint64_t h = fnv1a64(value.dump());
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[h & 0xF];
    h >>= 4;
  }
  return out;
}

inline Json matrix_to_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Mat matrix_from_json(const Json& rows) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_array())
    throw ConfigError("matrix_from_json: expected a non-empty array of arrays");
  Mat m(static_cast<Eigen::Index>(rows.size()),
        static_cast<Eigen::Index>(rows[0].size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols())
      throw ConfigError("matrix_from_json: ragged rows");
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ConfigError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw ConfigError("failed writing " + path.string());
}

/// A fully assembled experiment result: the JSON document plus the CSV
/// side-tables, and the overall assertion verdict that drives exit codes.
struct ExperimentReport {
  Json document;
  std::vector<std::pair<std::string, CsvTable>> csv_files;
  bool ok = true;
};

/// Persists report.json and every CSV under out_dir (created if missing).
inline void write_report(const ExperimentReport& report,
                         const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir / "report.json", report.document.dump(2) + "\n");
  for (const auto& [name, table] : report.csv_files)
    write_text_file(out_dir / name, table.to_string());
}

}  // namespace landscape
