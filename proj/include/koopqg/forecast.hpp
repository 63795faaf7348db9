#pragma once

#include <Eigen/Dense>

#include <vector>

#include "koopqg/ensemble.hpp"
#include "koopqg/koopman.hpp"

namespace kqg {

/// Constant-in-time combination coefficients for one reconstructed
/// trajectory; computed once at the anchor time and reused for every t.
struct ReconstructionCoefficients {
  Eigen::VectorXd beta;
  KernelSpec kernel;
  double anchor_time = 0.0;
};

/// beta = (K + eps I)^{-1} k(new_q0, members at t0).
ReconstructionCoefficients regression_coefficients(const Field2D& new_q0,
                                                   const EnsembleSet& ensemble,
                                                   const GramSystem& gram,
                                                   const KernelSpec& spec);

/// sum_i beta_i X_t^{(i)} from the stored snapshots (nearest time, with a
/// diagnostic when the requested time is off-grid).
Field2D reconstruct(const Eigen::VectorXd& beta, const EnsembleSet& ensemble,
                    double t);

/// Projector P = pinv(Ktilde) Ktilde onto the span of the Koopman modes still
/// inside their predictability time at t: retained = { l : ln(C)/|w_l| >= t }.
Eigen::MatrixXd lyapunov_projector(const KoopmanSpectrum& spec, double t,
                                   double C, double pinv_tol = 1e-10);

/// Literal filtered coefficients pinv(Ktilde) Ktilde beta; the mean-anchored
/// variant mean + P(beta - mean) keeps the t->infinity limit at the ensemble
/// average instead of the zero-mode projection.
Eigen::VectorXd filtered_coefficients(const Eigen::VectorXd& beta,
                                      const KoopmanSpectrum& spec,
                                      const GramSystem& gram, double t, double C,
                                      bool mean_anchor = false);

struct ErrorCurveOptions {
  double amplification = 1e3;  // C for the Lyapunov filter
  bool mean_anchor = false;
  double pinv_tol = 1e-10;
};

/// Per-time error statistics over the test ensemble (field-norm^2 units).
struct ErrorCurves {
  std::vector<double> times;
  std::vector<double> mean_plain, std_plain;
  std::vector<double> mean_filtered, std_filtered;
  std::vector<double> mean_ensavg, std_ensavg;
  std::vector<double> projection;  // mean optimal per-time projection error
};

/// Squared-L2 error curves of plain reconstruction, Lyapunov-filtered
/// reconstruction, ensemble mean, and the per-time optimal projection
/// baseline. `koop` may be null to skip the filtered curve.
ErrorCurves error_curves(const EnsembleSet& test, const EnsembleSet& train,
                         const GramSystem& gram, const KernelSpec& spec,
                         const KoopmanSpectrum* koop,
                         const ErrorCurveOptions& options = {});

}  // namespace kqg
