#pragma once

#include <Eigen/Dense>

#include <vector>

#include "koopqg/ensemble.hpp"
#include "koopqg/field.hpp"

namespace kqg {

enum class KernelFamily { Empirical, Gaussian };
enum class MeasureNorm { None, OneOverP };

struct KernelSpec {
  KernelFamily family = KernelFamily::Empirical;
  double ell_g = 1.0;              // Gaussian length scale
  bool center_anomalies = false;   // anomaly-matrix variant of the empirical kernel
  double jitter_rel = 1e-10;       // Tikhonov jitter relative to trace(K)/p
  MeasureNorm measure_norm = MeasureNorm::OneOverP;

  double measure_scale(int p) const {
    return measure_norm == MeasureNorm::OneOverP ? 1.0 / p : 1.0;
  }
};

/// Raw kernel value. Empirical: discrete-L2 <a,b>. Gaussian:
/// exp(-|a-b|^2/ell_G^2) (the positive-definite sign choice).
double kernel_eval(const Field2D& a, const Field2D& b, const KernelSpec& spec);

/// Centered variant: fields replaced by anomalies about `ensemble_mean`; the
/// empirical kernel additionally carries the anomaly-matrix 1/(p-1) scale.
double kernel_eval(const Field2D& a, const Field2D& b, const KernelSpec& spec,
                   const Field2D& ensemble_mean, int p);

/// Gram matrix K at the anchor time plus the regularized algebra shared by
/// every downstream solve. All operators derive from one symmetric
/// eigen-decomposition of K; the jitter escalates x10 from jitter_rel up to
/// 1e-6 relative before aborting with a conditioning report.
class GramSystem {
 public:
  GramSystem(Eigen::MatrixXd K, const KernelSpec& spec);

  const Eigen::MatrixXd& K() const { return K_; }
  double epsilon() const { return eps_; }
  double measure_scale() const { return ms_; }
  int p() const { return static_cast<int>(K_.rows()); }

  /// (K + eps I)^{-1} rhs
  Eigen::MatrixXd solve_regularized(const Eigen::MatrixXd& rhs) const;
  Eigen::VectorXd solve_regularized(const Eigen::VectorXd& rhs) const;

  /// Symmetric PSD square root of K (eigenvalues below 1e-12*lambda_max
  /// clamped to zero).
  const Eigen::MatrixXd& sqrt() const { return sqrt_; }
  /// (K * measure_scale)^{1/2}
  Eigen::MatrixXd scaled_sqrt() const;

  /// L = K*measure_scale + eps I (scaled) or K + eps I (unscaled), and its
  /// symmetric roots.
  Eigen::MatrixXd l_matrix(bool scaled) const;
  Eigen::MatrixXd l_sqrt(bool scaled) const;
  Eigen::MatrixXd l_inv_sqrt(bool scaled) const;

  const Eigen::VectorXd& eigenvalues() const { return eval_; }  // ascending

 private:
  Eigen::MatrixXd K_;
  Eigen::VectorXd eval_;
  Eigen::MatrixXd evec_;
  Eigen::MatrixXd sqrt_;
  double eps_ = 0.0;
  double ms_ = 1.0;
};

GramSystem gram_matrix(const std::vector<const Field2D*>& members,
                       const KernelSpec& spec);
GramSystem gram_matrix(const EnsembleSet& set, const KernelSpec& spec);

/// Generator matrix M_ij = (-d/ds k(., X_j))(X_i) along the flow direction:
/// Empirical: <dX_j/dt, X_i>; Gaussian carries the radial derivative factor.
Eigen::MatrixXd generator_matrix(const std::vector<const Field2D*>& members,
                                 const std::vector<const Field2D*>& tendencies,
                                 const KernelSpec& spec);
Eigen::MatrixXd generator_matrix(const EnsembleSet& set, const KernelSpec& spec);

/// k(new_member, X_i) for all members.
Eigen::VectorXd kernel_vector(const Field2D& new_member,
                              const std::vector<const Field2D*>& members,
                              const KernelSpec& spec);
Eigen::VectorXd kernel_vector(const Field2D& new_member, const EnsembleSet& set,
                              const KernelSpec& spec);

/// Eigen-based Moore-Penrose pseudo-inverse of a symmetric PSD matrix,
/// discarding eigenvalues below tol_rel * lambda_max.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& m, double tol_rel = 1e-10);

/// Relative Frobenius drift of the Gram matrix re-evaluated from member
/// states at output-time index k versus the anchor-time Gram. Diagnostic
/// only: time discretization breaks the exact isometry.
double isometry_drift(const EnsembleSet& set, const KernelSpec& spec,
                      std::size_t time_index);

}  // namespace kqg
