#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "koopqg/field.hpp"
#include "koopqg/qg_model.hpp"

namespace kqg::io {

// Binary snapshot container, little-endian:
//   magic "WLND" | u32 version | u32 nx | u32 ny | f64 time | u8 kind
//   | nx*ny f64 row-major (x fastest)
// Files hold one record or several concatenated ones.
inline constexpr std::uint32_t kContainerVersion = 1;

void write_record(std::ostream& os, const Field2D& f, double time);
Field2D read_record(std::istream& is, double& time);

void save_trajectory(const std::filesystem::path& path, const qg::Trajectory& traj);
qg::Trajectory load_trajectory(const std::filesystem::path& path,
                               double dx, double dy);

void save_field(const std::filesystem::path& path, const Field2D& f, double time);
Field2D load_field(const std::filesystem::path& path, double dx, double dy,
                   double* time = nullptr);

/// Matrices reuse the container with kind=Matrix, nx=cols, ny=rows, dx=dy=1.
void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double (bit-exact on reload).
std::string format_double(double v);
double parse_double(const std::string& s);

/// CSV with a "# config_hash=..." comment line, then a header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::uint64_t config_hash,
            const std::vector<std::string>& columns);
  ~CsvWriter();
  void row(const std::vector<double>& values);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

void save_matrix_csv(const std::filesystem::path& path, std::uint64_t config_hash,
                     const Eigen::MatrixXd& m);

/// UTF-8 "key = value" manifests; insertion order preserved on write.
class Manifest {
 public:
  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double v);
  void set_u64(const std::string& key, std::uint64_t v);
  const std::string& get(const std::string& key) const;  // throws missing_artifact
  bool has(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;

  void save(const std::filesystem::path& path) const;
  static Manifest load(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace kqg::io
