#include "acsparse/cli/serialize.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "acsparse/errors.hpp"

namespace acsparse::cli {

std::string format_real(double v) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

void write_field_csv(const std::filesystem::path& path, const std::vector<FieldRecord>& records) {
  std::string text = "row,col,t_index,value\n";
  for (const auto& r : records) {
    text += std::to_string(r.row) + ',' + std::to_string(r.col) + ',' + std::to_string(r.t_index) +
            ',' + format_real(r.value) + '\n';
  }
  write_text(path, text);
}

std::vector<FieldRecord> read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "row,col,t_index,value") throw InvalidArgument(path.string() + ": bad header");
  std::vector<FieldRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    FieldRecord r;
    char c1 = 0;
    char c2 = 0;
    char c3 = 0;
    std::istringstream ss(line);
    if (!(ss >> r.row >> c1 >> r.col >> c2 >> r.t_index >> c3) || c1 != ',' || c2 != ',' ||
        c3 != ',')
      throw InvalidArgument(path.string() + ": malformed line '" + line + "'");
    std::string rest;
    ss >> rest;
    r.value = std::stod(rest);
    out.push_back(r);
  }
  return out;
}

std::vector<FieldRecord> records_of(const Mesh& mesh, const std::vector<BulkField>& fields) {
  std::vector<FieldRecord> out;
  for (std::size_t t = 0; t < fields.size(); ++t)
    for (int row = 0; row < mesh.rows(); ++row)
      for (int col = 0; col < mesh.n_x(); ++col)
        out.push_back({row, col, static_cast<int>(t), fields[t].at(mesh, row, col)});
  return out;
}

std::vector<FieldRecord> records_of(const Mesh& mesh, const std::vector<BoundaryField>& fields) {
  std::vector<FieldRecord> out;
  for (std::size_t t = 0; t < fields.size(); ++t)
    for (int ring = 0; ring < 2; ++ring)
      for (int col = 0; col < mesh.n_x(); ++col)
        out.push_back({mesh.ring_row(ring), col, static_cast<int>(t), fields[t].at(mesh, ring, col)});
  return out;
}

std::vector<FieldRecord> records_of(const Mesh& mesh, const Trajectory& traj) {
  std::vector<BulkField> f;
  for (const auto& s : traj.states) f.push_back(s.bulk());
  return records_of(mesh, f);
}

std::vector<FieldRecord> records_of(const Mesh& mesh, const AdjointTrajectory& traj) {
  return records_of(mesh, Trajectory{traj.states});
}

void write_descriptor(const std::filesystem::path& csv_path, const std::string& kind,
                      const Mesh& mesh, const TimeGrid& grid, int time_entries) {
  StructuredReport r;
  r.put("file", csv_path.filename().string());
  r.put("kind", kind);
  r.put("n_x", mesh.n_x());
  r.put("n_y", mesh.n_y());
  r.put("rows", mesh.rows());
  r.put("circumference", mesh.circumference());
  r.put("height", mesh.height());
  r.put("dx", mesh.dx());
  r.put("dy", mesh.dy());
  r.put("final_time", grid.final_time());
  r.put("n_t", grid.n_t());
  r.put("dt", grid.dt());
  r.put("time_entries", time_entries);
  std::filesystem::path desc = csv_path;
  desc += ".desc";
  r.write(desc);
}

void StructuredReport::section(const std::string& name) {
  if (!text_.empty()) text_ += '\n';
  text_ += '[' + name + "]\n";
}

void StructuredReport::put(const std::string& key, const std::string& value) {
  text_ += key + " = " + value + '\n';
}

void StructuredReport::put(const std::string& key, double value) { put(key, format_real(value)); }

void StructuredReport::put(const std::string& key, long long value) {
  put(key, std::to_string(value));
}

void StructuredReport::put(const std::string& key, bool value) {
  put(key, std::string(value ? "true" : "false"));
}

void StructuredReport::put(const std::string& key, const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ", ";
    s += format_real(values[i]);
  }
  put(key, s);
}

void StructuredReport::table(const std::string& name, const std::vector<std::string>& header,
                             const std::vector<std::vector<double>>& rows) {
  text_ += "table " + name + " =";
  for (const auto& h : header) text_ += ' ' + h;
  text_ += '\n';
  for (const auto& row : rows) {
    text_ += ' ';
    for (double v : row) text_ += ' ' + format_real(v);
    text_ += '\n';
  }
}

void StructuredReport::write(const std::filesystem::path& path) const { write_text(path, text_); }

std::string sha256_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string() + " for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw Error("sha256 initialisation failed");
  std::array<char, 8192> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

}  // namespace acsparse::cli
