#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "acsparse/discretization.hpp"

namespace acsparse::cli {

/// Shortest form is not used on purpose: 17 significant digits always.
std::string format_real(double v);

struct FieldRecord {
  int row = 0;
  int col = 0;
  int t_index = 0;
  double value = 0.0;
};

/// CSV with header `row,col,t_index,value`; rows are bulk rows, boundary
/// fields use the bulk row of their ring.
void write_field_csv(const std::filesystem::path& path, const std::vector<FieldRecord>& records);
std::vector<FieldRecord> read_field_csv(const std::filesystem::path& path);

std::vector<FieldRecord> records_of(const Mesh& mesh, const std::vector<BulkField>& fields);
std::vector<FieldRecord> records_of(const Mesh& mesh, const std::vector<BoundaryField>& fields);
std::vector<FieldRecord> records_of(const Mesh& mesh, const Trajectory& traj);
std::vector<FieldRecord> records_of(const Mesh& mesh, const AdjointTrajectory& traj);

/// Sidecar `<csv>.desc` with mesh and grid parameters.
void write_descriptor(const std::filesystem::path& csv_path, const std::string& kind,
                      const Mesh& mesh, const TimeGrid& grid, int time_entries);

/// Human-readable report: `[section]` headers, `key = value` lines in
/// insertion order, and whitespace-separated tables.
class StructuredReport {
 public:
  void section(const std::string& name);
  void put(const std::string& key, const std::string& value);
  void put(const std::string& key, double value);
  void put(const std::string& key, long long value);
  void put(const std::string& key, int value) { put(key, static_cast<long long>(value)); }
  void put(const std::string& key, bool value);
  void put(const std::string& key, const std::vector<double>& values);
  void table(const std::string& name, const std::vector<std::string>& header,
             const std::vector<std::vector<double>>& rows);
  const std::string& str() const { return text_; }
  void write(const std::filesystem::path& path) const;

 private:
  std::string text_;
};

std::string sha256_hex(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace acsparse::cli
