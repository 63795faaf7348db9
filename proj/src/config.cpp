#include "koopqg/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "koopqg/errors.hpp"
#include "koopqg/snapshot_io.hpp"

namespace kqg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<double> parse_list(const std::string& value, const std::string& where) {
  std::vector<double> out;
  // "start:step:end" ranges (inclusive) or comma-separated values.
  if (value.find(':') != std::string::npos) {
    std::stringstream ss(value);
    std::string a, b, c;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') ||
        !std::getline(ss, c))
      throw config_error(where + ": expected start:step:end");
    const double start = io::parse_double(trim(a));
    const double step = io::parse_double(trim(b));
    const double end = io::parse_double(trim(c));
    if (!(step > 0)) throw config_error(where + ": range step must be > 0");
    for (double t = start; t <= end + 0.5 * step; t += step)
      out.push_back(start + step * static_cast<double>(out.size()));
    return out;
  }
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(io::parse_double(trim(item)));
  if (out.empty()) throw config_error(where + ": empty list");
  return out;
}

bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw config_error(where + ": expected true/false");
}

std::uint64_t parse_u64(const std::string& v, const std::string& where) {
  try {
    return std::stoull(v);
  } catch (...) {
    throw config_error(where + ": expected unsigned integer");
  }
}

int parse_int(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw config_error("");
    return x;
  } catch (...) {
    throw config_error(where + ": expected integer");
  }
}

/// Assign one key; throws config_error mentioning `where` on any problem.
void assign(RunConfig& cfg, const std::string& key, const std::string& value,
            const std::string& where) {
  auto num = [&] { return io::parse_double(value); };

  if (key == "model.rossby") cfg.model.rossby = num();
  else if (key == "model.munk_ratio") cfg.model.munk_ratio = num();
  else if (key == "model.domain_L") cfg.model.domain_L = num();
  else if (key == "model.nx") cfg.model.nx = parse_int(value, where);
  else if (key == "model.ny") cfg.model.ny = parse_int(value, where);
  else if (key == "model.dt") cfg.model.dt = num();
  else if (key == "model.forcing") cfg.model.forcing = num();
  else if (key == "model.divergence_guard") cfg.model.divergence_guard = num();
  else if (key == "ensemble.p") cfg.ensemble.p = parse_int(value, where);
  else if (key == "ensemble.p_test") cfg.ensemble.p_test = parse_int(value, where);
  else if (key == "ensemble.n_pod") cfg.ensemble.n_pod = parse_int(value, where);
  else if (key == "ensemble.spin_up") cfg.ensemble.spin_up = num();
  else if (key == "ensemble.horizon") cfg.ensemble.horizon = num();
  else if (key == "ensemble.output_every") cfg.ensemble.output_every = num();
  else if (key == "ensemble.seed_train") cfg.ensemble.seed_train = parse_u64(value, where);
  else if (key == "ensemble.seed_test") cfg.ensemble.seed_test = parse_u64(value, where);
  else if (key == "ensemble.base_time") cfg.ensemble.base_time = num();
  else if (key == "ensemble.base_noise") cfg.ensemble.base_noise = num();
  else if (key == "ensemble.base_seed") cfg.ensemble.base_seed = parse_u64(value, where);
  else if (key == "ensemble.pod_snapshots") cfg.ensemble.pod_snapshots = parse_int(value, where);
  else if (key == "ensemble.pod_stride") cfg.ensemble.pod_stride = num();
  else if (key == "kernel.family") {
    if (value == "empirical") cfg.kernel.family = KernelFamily::Empirical;
    else if (value == "gaussian") cfg.kernel.family = KernelFamily::Gaussian;
    else throw config_error(where + ": kernel.family must be empirical or gaussian");
  }
  else if (key == "kernel.ell_G") cfg.kernel.ell_g = num();
  else if (key == "kernel.jitter_rel") cfg.kernel.jitter_rel = num();
  else if (key == "kernel.center_anomalies")
    cfg.kernel.center_anomalies = parse_bool(value, where);
  else if (key == "kernel.measure_norm") {
    if (value == "none") cfg.kernel.measure_norm = MeasureNorm::None;
    else if (value == "one_over_p") cfg.kernel.measure_norm = MeasureNorm::OneOverP;
    else throw config_error(where + ": kernel.measure_norm must be none or one_over_p");
  }
  else if (key == "lyapunov.C") cfg.lyapunov.amplification = num();
  else if (key == "lyapunov.sigma_threshold") cfg.lyapunov.sigma_threshold = num();
  else if (key == "assim.columns") cfg.assim.column_positions = parse_list(value, where);
  else if (key == "assim.obs_times") cfg.assim.obs_times = parse_list(value, where);
  else if (key == "assim.noise_frac") cfg.assim.noise_frac = num();
  else if (key == "assim.ell_loc") cfg.assim.ell_loc = num();
  else if (key == "assim.alpha") cfg.assim.alpha = num();
  else if (key == "assim.seed") cfg.assim.seed = parse_u64(value, where);
  else if (key == "assim.single_time") cfg.assim_single_time = num();
  else if (key == "io.output_dir") cfg.io.output_dir = value;
  else throw config_error(where + ": unknown key '" + key + "'");
}

void validate(const RunConfig& cfg) {
  cfg.model.validate();
  if (cfg.ensemble.p < 2 || cfg.ensemble.p_test < 2)
    throw config_error("ensemble.p and ensemble.p_test must be >= 2");
  if (cfg.ensemble.n_pod < 1) throw config_error("ensemble.n_pod must be >= 1");
  if (cfg.ensemble.spin_up < 0) throw config_error("ensemble.spin_up must be >= 0");
  if (!(cfg.ensemble.horizon > 0)) throw config_error("ensemble.horizon must be > 0");
  if (!(cfg.kernel.ell_g > 0)) throw config_error("kernel.ell_G must be > 0");
  if (cfg.kernel.jitter_rel < 0) throw config_error("kernel.jitter_rel must be >= 0");
  if (!(cfg.lyapunov.amplification > 1))
    throw config_error("lyapunov.C must be > 1");
  cfg.assim.validate(cfg.model.domain_L);
}

}  // namespace

RunConfig::RunConfig() {
  for (int k = 0; k <= 12; ++k) assim.obs_times.push_back(0.01 * k);
}

RunConfig parse_config(const std::filesystem::path& path,
                       const std::vector<std::string>& overrides) {
  std::ifstream is(path);
  if (!is) throw config_error("cannot open config file: " + path.string());

  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error(where + ": expected 'section.key = value'");
    assign(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw config_error("override '" + ov + "': expected section.key=value");
    assign(cfg, trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)),
           "override '" + ov + "'");
  }
  validate(cfg);
  return cfg;
}

RunConfig default_config_with_overrides(const std::vector<std::string>& overrides) {
  RunConfig cfg;
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw config_error("override '" + ov + "': expected section.key=value");
    assign(cfg, trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)),
           "override '" + ov + "'");
  }
  validate(cfg);
  return cfg;
}

std::string canonical_section(const RunConfig& cfg, const std::string& section) {
  std::ostringstream os;
  auto kv = [&os](const std::string& k, const std::string& v) {
    os << k << " = " << v << "\n";
  };
  auto kd = [&](const std::string& k, double v) { kv(k, io::format_double(v)); };
  auto ki = [&](const std::string& k, long long v) { kv(k, std::to_string(v)); };

  if (section == "model") {
    kd("model.rossby", cfg.model.rossby);
    kd("model.munk_ratio", cfg.model.munk_ratio);
    kd("model.domain_L", cfg.model.domain_L);
    ki("model.nx", cfg.model.nx);
    ki("model.ny", cfg.model.ny);
    kd("model.dt", cfg.model.dt);
    kd("model.forcing", cfg.model.forcing);
    kd("model.divergence_guard", cfg.model.divergence_guard);
  } else if (section == "ensemble") {
    ki("ensemble.p", cfg.ensemble.p);
    ki("ensemble.p_test", cfg.ensemble.p_test);
    ki("ensemble.n_pod", cfg.ensemble.n_pod);
    kd("ensemble.spin_up", cfg.ensemble.spin_up);
    kd("ensemble.horizon", cfg.ensemble.horizon);
    kd("ensemble.output_every", cfg.ensemble.output_every);
    ki("ensemble.seed_train", static_cast<long long>(cfg.ensemble.seed_train));
    ki("ensemble.seed_test", static_cast<long long>(cfg.ensemble.seed_test));
    kd("ensemble.base_time", cfg.ensemble.base_time);
    kd("ensemble.base_noise", cfg.ensemble.base_noise);
    ki("ensemble.base_seed", static_cast<long long>(cfg.ensemble.base_seed));
    ki("ensemble.pod_snapshots", cfg.ensemble.pod_snapshots);
    kd("ensemble.pod_stride", cfg.ensemble.pod_stride);
  } else if (section == "kernel") {
    kv("kernel.family",
       cfg.kernel.family == KernelFamily::Empirical ? "empirical" : "gaussian");
    kd("kernel.ell_G", cfg.kernel.ell_g);
    kd("kernel.jitter_rel", cfg.kernel.jitter_rel);
    kv("kernel.center_anomalies", cfg.kernel.center_anomalies ? "true" : "false");
    kv("kernel.measure_norm",
       cfg.kernel.measure_norm == MeasureNorm::OneOverP ? "one_over_p" : "none");
  } else if (section == "lyapunov") {
    kd("lyapunov.C", cfg.lyapunov.amplification);
    kd("lyapunov.sigma_threshold", cfg.lyapunov.sigma_threshold);
  } else if (section == "assim") {
    std::ostringstream cols, times;
    for (std::size_t i = 0; i < cfg.assim.column_positions.size(); ++i)
      cols << (i ? "," : "") << io::format_double(cfg.assim.column_positions[i]);
    for (std::size_t i = 0; i < cfg.assim.obs_times.size(); ++i)
      times << (i ? "," : "") << io::format_double(cfg.assim.obs_times[i]);
    kv("assim.columns", cols.str());
    kv("assim.obs_times", times.str());
    kd("assim.noise_frac", cfg.assim.noise_frac);
    kd("assim.ell_loc", cfg.assim.ell_loc);
    kd("assim.alpha", cfg.assim.alpha);
    ki("assim.seed", static_cast<long long>(cfg.assim.seed));
    kd("assim.single_time", cfg.assim_single_time);
  } else {
    throw std::invalid_argument("canonical_section: unknown section " + section);
  }
  return os.str();
}

std::uint64_t config_hash(const RunConfig& cfg,
                          const std::vector<std::string>& sections) {
  std::vector<std::string> sorted = sections;
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const auto& s : sorted) {
    for (char c : canonical_section(cfg, s)) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace kqg
