#include "koopqg/ensemble.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "koopqg/errors.hpp"
#include "koopqg/rng.hpp"
#include "koopqg/snapshot_io.hpp"

namespace kqg {

std::vector<const Field2D*> EnsembleSet::states_at(std::size_t k) const {
  std::vector<const Field2D*> out;
  out.reserve(members.size());
  for (const auto& m : members) out.push_back(&m.states.at(k));
  return out;
}

PodBasis compute_pod(const std::vector<Field2D>& snapshots, int n_modes) {
  const int K = static_cast<int>(snapshots.size());
  if (K < 2) throw std::invalid_argument("compute_pod: need at least 2 snapshots");
  if (n_modes > K) throw std::invalid_argument("compute_pod: n_modes exceeds snapshot count");

  PodBasis pod;
  pod.mean = snapshots[0];
  for (int k = 1; k < K; ++k) pod.mean = axpy(pod.mean, 1.0, snapshots[k]);
  for (std::size_t i = 0; i < pod.mean.size(); ++i) pod.mean.data()[i] /= K;

  std::vector<Field2D> anomalies;
  anomalies.reserve(K);
  for (const auto& s : snapshots) anomalies.push_back(axpy(s, -1.0, pod.mean));

  // Snapshot method: C_kl = <a_k, a_l>/K, eigen-decomposed at size K x K.
  Eigen::MatrixXd C(K, K);
  for (int k = 0; k < K; ++k)
    for (int l = k; l < K; ++l)
      C(k, l) = C(l, k) = inner(anomalies[k], anomalies[l]) / K;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
  if (eig.info() != Eigen::Success)
    throw numerical_error("compute_pod: eigensolver failed");

  const double lmax = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  int kept = 0;
  for (int m = 0; m < n_modes; ++m) {
    const int idx = K - 1 - m;  // Eigen sorts ascending
    const double lambda = eig.eigenvalues()(idx);
    if (lambda <= 1e-12 * lmax) break;
    Field2D mode = pod.mean;  // reuse grid metadata
    for (std::size_t i = 0; i < mode.size(); ++i) mode.data()[i] = 0.0;
    for (int k = 0; k < K; ++k)
      mode = axpy(mode, eig.eigenvectors()(k, idx), anomalies[k]);
    const double nrm = std::sqrt(norm2(mode));
    for (std::size_t i = 0; i < mode.size(); ++i) mode.data()[i] /= nrm;
    pod.modes.push_back(std::move(mode));
    pod.eigenvalues.push_back(lambda);
    ++kept;
  }
  if (kept < n_modes)
    std::fprintf(stderr,
                 "[koopqg] compute_pod: rank deficiency, returning %d of %d modes\n",
                 kept, n_modes);
  return pod;
}

std::vector<Field2D> generate_members(const Field2D& base, const PodBasis& pod,
                                      int p, std::uint64_t seed,
                                      double amplitude) {
  if (pod.modes.empty() || pod.eigenvalues[0] <= 0.0)
    throw std::invalid_argument("generate_members: leading POD eigenvalue is zero");
  std::vector<Field2D> members;
  members.reserve(p);
  const double l1 = pod.eigenvalues[0];
  for (int j = 0; j < p; ++j) {
    Field2D m = base;
    for (std::size_t i = 0; i < pod.modes.size(); ++i) {
      const double sigma = std::sqrt(amplitude * pod.eigenvalues[i] / l1);
      const double c = sigma * rng::gaussian(rng::mix(seed, j, i));
      m = axpy(m, c, pod.modes[i]);
    }
    members.push_back(std::move(m));
  }
  return members;
}

EnsembleSet spin_up_and_record(const std::vector<Field2D>& members,
                               const qg::ModelParams& params, double t_spin,
                               double horizon, double output_every) {
  if (t_spin < 0) throw std::invalid_argument("spin_up_and_record: t_spin < 0");
  const int p = static_cast<int>(members.size());

  std::vector<qg::Trajectory> trajs(p);
  std::vector<Field2D> tends(p);
  std::vector<char> ok(p, 0);

#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < p; ++j) {
    try {
      Field2D anchor = members[j];
      if (t_spin > 0) {
        qg::Trajectory spin = qg::integrate(anchor, params, t_spin, t_spin);
        anchor = spin.states.back();
      }
      tends[j] = qg::flow_tendency(anchor, params);
      trajs[j] = qg::integrate(anchor, params, horizon, output_every);
      ok[j] = 1;
    } catch (const numerical_error& e) {
      std::fprintf(stderr, "[koopqg] member %d dropped: %s\n", j, e.what());
    }
  }

  EnsembleSet set;
  set.params = params;
  for (int j = 0; j < p; ++j) {
    if (!ok[j]) continue;
    set.members.push_back(std::move(trajs[j]));
    set.initial_tendencies.push_back(std::move(tends[j]));
  }
  if (set.members.size() < 2)
    throw numerical_error("spin_up_and_record: fewer than 2 members survived");
  return set;
}

void save_ensemble(const std::filesystem::path& dir, const std::string& name,
                   const EnsembleSet& set, std::uint64_t config_hash) {
  const auto sub = dir / name;
  std::filesystem::create_directories(sub);

  io::Manifest man;
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(config_hash));
  man.set("config_hash", hex);
  man.set("role", set.role == EnsembleRole::Training ? "training" : "test");
  man.set_u64("p", set.members.size());
  man.set_u64("seed", set.seed);
  man.set_u64("nx", set.params.nx);
  man.set_u64("ny", set.params.ny);
  {
    std::ostringstream ts;
    const auto& times = set.times();
    for (std::size_t i = 0; i < times.size(); ++i)
      ts << (i ? "," : "") << io::format_double(times[i]);
    man.set("times", ts.str());
  }
  for (int j = 0; j < set.p(); ++j) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "member_%03d.wlnd", j);
    const std::string mfile = buf;
    std::snprintf(buf, sizeof(buf), "tendency_%03d.wlnd", j);
    const std::string tfile = buf;
    io::save_trajectory(sub / mfile, set.members[j]);
    io::save_field(sub / tfile, set.initial_tendencies[j], 0.0);
    man.set("member_file." + std::to_string(j), name + "/" + mfile);
    man.set("tendency_file." + std::to_string(j), name + "/" + tfile);
  }
  man.save(dir / (name + "_manifest.txt"));
}

EnsembleSet load_ensemble(const std::filesystem::path& dir, const std::string& name,
                          const qg::ModelParams& params, std::uint64_t config_hash) {
  const auto manifest_path = dir / (name + "_manifest.txt");
  if (!std::filesystem::exists(manifest_path))
    throw missing_artifact("ensemble manifest not found: " + manifest_path.string() +
                           " (run the `ensemble` subcommand first)");
  const io::Manifest man = io::Manifest::load(manifest_path);

  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(config_hash));
  if (man.get("config_hash") != hex)
    throw missing_artifact("ensemble manifest " + manifest_path.string() +
                           ": config_hash mismatch (expected " + hex + ", found " +
                           man.get("config_hash") + "); re-run upstream subcommands");

  EnsembleSet set;
  set.params = params;
  set.seed = man.get_u64("seed");
  set.role = man.get("role") == "training" ? EnsembleRole::Training
                                           : EnsembleRole::Test;
  const int p = static_cast<int>(man.get_u64("p"));
  for (int j = 0; j < p; ++j) {
    const auto mfile = dir / man.get("member_file." + std::to_string(j));
    const auto tfile = dir / man.get("tendency_file." + std::to_string(j));
    set.members.push_back(io::load_trajectory(mfile, params.dx(), params.dy()));
    set.initial_tendencies.push_back(
        io::load_field(tfile, params.dx(), params.dy()));
  }
  return set;
}

}  // namespace kqg
