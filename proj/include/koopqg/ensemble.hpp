#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "koopqg/field.hpp"
#include "koopqg/qg_model.hpp"

namespace kqg {

/// Orthonormal snapshot-POD basis of q anomalies under the discrete L2
/// inner product. Eigenvalues are the anomaly covariance eigenvalues,
/// sorted descending.
struct PodBasis {
  std::vector<Field2D> modes;      // unit norm, mutually orthogonal
  std::vector<double> eigenvalues; // non-increasing, >= 0
  Field2D mean;
};

enum class EnsembleRole { Training, Test };

struct EnsembleSet {
  std::vector<qg::Trajectory> members;       // shared output times and grid
  std::vector<Field2D> initial_tendencies;   // dq/dt of the discrete flow at t0
  std::uint64_t seed = 0;
  qg::ModelParams params;
  EnsembleRole role = EnsembleRole::Training;

  int p() const { return static_cast<int>(members.size()); }
  const std::vector<double>& times() const { return members.front().times; }
  /// Member states at output time index k, as column fields.
  std::vector<const Field2D*> states_at(std::size_t k) const;
};

/// Snapshot-method POD of mean-removed snapshots. Rank-deficient sets yield
/// fewer than n_modes modes (with a stderr diagnostic).
PodBasis compute_pod(const std::vector<Field2D>& snapshots, int n_modes);

/// member_j = base + sum_i c_ij mode_i with
/// c_ij ~ N(0, amplitude * lambda_i/lambda_1); each draw is a pure function
/// of (seed, j, i).
std::vector<Field2D> generate_members(const Field2D& base, const PodBasis& pod,
                                      int p, std::uint64_t seed,
                                      double amplitude = 10.0);

/// Integrate each member for t_spin (discarded), re-anchor at t0 = 0, then
/// record to `horizon` every `output_every`; capture flow tendencies at t0.
/// Diverging members are dropped with a diagnostic.
EnsembleSet spin_up_and_record(const std::vector<Field2D>& members,
                               const qg::ModelParams& params, double t_spin,
                               double horizon, double output_every);

/// key=value manifest + one trajectory container and one tendency record per
/// member. config_hash is checked on load.
void save_ensemble(const std::filesystem::path& dir, const std::string& name,
                   const EnsembleSet& set, std::uint64_t config_hash);
EnsembleSet load_ensemble(const std::filesystem::path& dir, const std::string& name,
                          const qg::ModelParams& params, std::uint64_t config_hash);

}  // namespace kqg
