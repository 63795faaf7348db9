#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

#include "koopqg/ensemble.hpp"
#include "koopqg/forecast.hpp"

namespace kqg {

/// Synthetic satellite-swath geometry: vertical grid columns sampled south to
/// north, west column first.
struct ObservationSetup {
  std::vector<double> column_positions{0.3, 0.7};  // x locations in [0,L]
  std::vector<double> obs_times;                   // must match ensemble output times
  double noise_frac = 0.10;   // noise std as a fraction of the signal RMS
  double ell_loc = 0.05;      // localization length for R
  double alpha = 10.0;        // regularization weight
  std::uint64_t seed = 0;

  void validate(double domain_L) const;
};

struct ObservationSeries {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> values;              // one m-vector per time
  std::vector<std::pair<double, double>> locations; // (x, y) per component
  double sigma = 0.0;                               // applied noise std
};

/// Sample locations after snapping columns to the grid.
std::vector<std::pair<double, double>> observation_locations(
    const Field2D& grid_like, const ObservationSetup& setup);

/// Linear sampling of the field along the swath columns.
Eigen::VectorXd observe(const Field2D& field, const ObservationSetup& setup);

/// Noisy swath samples of the truth at setup.obs_times; noise std is
/// noise_frac times the RMS of the observed signal over all times, drawn
/// deterministically from setup.seed.
ObservationSeries synthesize_observations(const qg::Trajectory& truth,
                                          const ObservationSetup& setup);

/// R = (time-averaged member covariance of the observed vectors) Schur
/// exp(-r_ij^2/ell_loc^2), jittered to positive definiteness.
Eigen::MatrixXd build_R(const EnsembleSet& train, const ObservationSetup& setup);

/// Quadratic EnOI cost
///   J = 1/(2T) sum_t |H X_t beta - y_t|^2_{R^-1} + alpha^2/2 |beta - mean|^2
/// evaluated directly from the ensemble (used by gradient checks).
double enoi_cost(const Eigen::VectorXd& beta, const ObservationSeries& obs,
                 const EnsembleSet& train, const Eigen::MatrixXd& R,
                 const ObservationSetup& setup);

/// Normal-equation minimizer of enoi_cost; constant-in-time coefficients.
ReconstructionCoefficients enoi_solve(const ObservationSeries& obs,
                                      const EnsembleSet& train,
                                      const Eigen::MatrixXd& R,
                                      const ObservationSetup& setup);

/// Least-squares best constant coefficients against a known truth
/// (reference baseline for the DA error curves).
Eigen::VectorXd best_constant_coefficients(const qg::Trajectory& truth,
                                           const EnsembleSet& train);

struct DaErrorCurves {
  std::vector<double> times;
  std::vector<double> series;     // mean error, swath time series DA
  std::vector<double> single;     // mean error, single-time DA
  std::vector<double> best_const; // mean error, best constant-coefficient oracle
  std::vector<double> ensavg;     // mean error, ensemble average
};

/// Mean squared-L2 estimation errors over the test ensemble for the two DA
/// benchmarks plus baselines; evaluation times are setup.obs_times.
DaErrorCurves da_error_curves(const EnsembleSet& test, const EnsembleSet& train,
                              const ObservationSetup& setup, double single_time);

}  // namespace kqg
