#include "koopqg/snapshot_io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "koopqg/errors.hpp"

namespace kqg::io {

namespace {

constexpr char kMagic[4] = {'W', 'L', 'N', 'D'};

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw missing_artifact("snapshot container: truncated record");
  return v;
}

void check_open_out(const std::ofstream& os, const std::filesystem::path& p) {
  if (!os) throw std::runtime_error("cannot write file: " + p.string());
}

void check_open_in(const std::ifstream& is, const std::filesystem::path& p) {
  if (!is) throw missing_artifact("cannot read file: " + p.string());
}

}  // namespace

void write_record(std::ostream& os, const Field2D& f, double time) {
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kContainerVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.nx()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.ny()));
  put<double>(os, time);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(f.kind()));
  os.write(reinterpret_cast<const char*>(f.data()),
           static_cast<std::streamsize>(f.size() * sizeof(double)));
}

Field2D read_record(std::istream& is, double& time) {
  char magic[4];
  is.read(magic, 4);
  if (!is) throw missing_artifact("snapshot container: truncated header");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw missing_artifact("snapshot container: bad magic");
  const auto version = get<std::uint32_t>(is);
  if (version != kContainerVersion)
    throw missing_artifact("snapshot container: unsupported version");
  const auto nx = get<std::uint32_t>(is);
  const auto ny = get<std::uint32_t>(is);
  time = get<double>(is);
  const auto kind = get<std::uint8_t>(is);
  // dx/dy are grid metadata the caller reattaches; placeholder spacing here.
  Field2D f(static_cast<int>(nx), static_cast<int>(ny), 1.0, 1.0,
            static_cast<FieldKind>(kind));
  is.read(reinterpret_cast<char*>(f.data()),
          static_cast<std::streamsize>(f.size() * sizeof(double)));
  if (!is) throw missing_artifact("snapshot container: truncated payload");
  return f;
}

namespace {

Field2D with_spacing(Field2D f, double dx, double dy) {
  Field2D out(f.nx(), f.ny(), dx, dy, f.kind());
  std::memcpy(out.data(), f.data(), f.size() * sizeof(double));
  return out;
}

}  // namespace

void save_trajectory(const std::filesystem::path& path, const qg::Trajectory& traj) {
  std::ofstream os(path, std::ios::binary);
  check_open_out(os, path);
  for (std::size_t i = 0; i < traj.states.size(); ++i)
    write_record(os, traj.states[i], traj.times[i]);
}

qg::Trajectory load_trajectory(const std::filesystem::path& path,
                               double dx, double dy) {
  std::ifstream is(path, std::ios::binary);
  check_open_in(is, path);
  qg::Trajectory traj;
  while (is.peek() != std::char_traits<char>::eof()) {
    double t = 0.0;
    traj.states.push_back(with_spacing(read_record(is, t), dx, dy));
    traj.times.push_back(t);
  }
  return traj;
}

void save_field(const std::filesystem::path& path, const Field2D& f, double time) {
  std::ofstream os(path, std::ios::binary);
  check_open_out(os, path);
  write_record(os, f, time);
}

Field2D load_field(const std::filesystem::path& path, double dx, double dy,
                   double* time) {
  std::ifstream is(path, std::ios::binary);
  check_open_in(is, path);
  double t = 0.0;
  Field2D f = with_spacing(read_record(is, t), dx, dy);
  if (time) *time = t;
  return f;
}

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  Field2D f(static_cast<int>(m.cols()), static_cast<int>(m.rows()), 1.0, 1.0,
            FieldKind::Matrix);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      f.at(static_cast<int>(c), static_cast<int>(r)) = m(r, c);
  save_field(path, f, 0.0);
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
  const Field2D f = load_field(path, 1.0, 1.0);
  Eigen::MatrixXd m(f.ny(), f.nx());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = f.at(static_cast<int>(c), static_cast<int>(r));
  return m;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{})
    throw config_error("cannot parse number: '" + s + "'");
  return v;
}

struct CsvWriter::Impl {
  std::ofstream os;
};

CsvWriter::CsvWriter(const std::filesystem::path& path, std::uint64_t config_hash,
                     const std::vector<std::string>& columns)
    : impl_(std::make_unique<Impl>()) {
  impl_->os.open(path);
  if (!impl_->os) throw std::runtime_error("cannot write file: " + path.string());
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(config_hash));
  impl_->os << "# config_hash=" << hex << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i)
    impl_->os << columns[i] << (i + 1 < columns.size() ? "," : "");
  impl_->os << "\n";
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i)
    impl_->os << format_double(values[i]) << (i + 1 < values.size() ? "," : "");
  impl_->os << "\n";
}

void save_matrix_csv(const std::filesystem::path& path, std::uint64_t config_hash,
                     const Eigen::MatrixXd& m) {
  std::vector<std::string> cols;
  cols.reserve(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    cols.push_back("c" + std::to_string(c));
  CsvWriter w(path, config_hash, cols);
  std::vector<double> row(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row[static_cast<std::size_t>(c)] = m(r, c);
    w.row(row);
  }
}

void Manifest::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) { v = value; return; }
  }
  entries_.emplace_back(key, value);
}

void Manifest::set_double(const std::string& key, double v) {
  set(key, format_double(v));
}

void Manifest::set_u64(const std::string& key, std::uint64_t v) {
  set(key, std::to_string(v));
}

const std::string& Manifest::get(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw missing_artifact("manifest: missing key '" + key + "'");
}

bool Manifest::has(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return true;
  }
  return false;
}

double Manifest::get_double(const std::string& key) const {
  return parse_double(get(key));
}

std::uint64_t Manifest::get_u64(const std::string& key) const {
  return std::stoull(get(key));
}

void Manifest::save(const std::filesystem::path& path) const {
  std::ofstream os(path);
  check_open_out(os, path);
  for (const auto& [k, v] : entries_) os << k << " = " << v << "\n";
}

Manifest Manifest::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  check_open_in(is, path);
  Manifest m;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw missing_artifact("manifest " + path.string() + ": bad line '" + line + "'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    m.entries_.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return m;
}

}  // namespace kqg::io
