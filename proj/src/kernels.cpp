#include "koopqg/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "koopqg/errors.hpp"
#include "koopqg/stacking.hpp"

namespace kqg {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd centered(const MatrixXd& m) {
  return m.colwise() - m.rowwise().mean();
}

/// Pairwise squared discrete-L2 distances from the raw inner-product matrix.
MatrixXd squared_distances(const MatrixXd& dots) {
  const VectorXd d = dots.diagonal();
  MatrixXd sq = (-2.0 * dots).colwise() + d;
  sq.rowwise() += d.transpose();
  return sq.cwiseMax(0.0);
}

std::vector<const Field2D*> pointers(const std::vector<Field2D>& fields) {
  std::vector<const Field2D*> out;
  out.reserve(fields.size());
  for (const auto& f : fields) out.push_back(&f);
  return out;
}

}  // namespace

double kernel_eval(const Field2D& a, const Field2D& b, const KernelSpec& spec) {
  if (!a.same_grid(b)) throw std::invalid_argument("kernel_eval: grid mismatch");
  switch (spec.family) {
    case KernelFamily::Empirical:
      return inner(a, b);
    case KernelFamily::Gaussian: {
      const Field2D diff = axpy(a, -1.0, b);
      return std::exp(-norm2(diff) / (spec.ell_g * spec.ell_g));
    }
  }
  throw std::invalid_argument("kernel_eval: unknown family");
}

double kernel_eval(const Field2D& a, const Field2D& b, const KernelSpec& spec,
                   const Field2D& ensemble_mean, int p) {
  if (!spec.center_anomalies) return kernel_eval(a, b, spec);
  const Field2D ac = axpy(a, -1.0, ensemble_mean);
  const Field2D bc = axpy(b, -1.0, ensemble_mean);
  const double v = kernel_eval(ac, bc, spec);
  return spec.family == KernelFamily::Empirical ? v / (p - 1) : v;
}

GramSystem::GramSystem(Eigen::MatrixXd K, const KernelSpec& spec) {
  const Eigen::Index p = K.rows();
  if (p < 1 || K.cols() != p) throw std::invalid_argument("GramSystem: K not square");
  const double knorm = K.norm();
  if (knorm > 0 && (K - K.transpose()).norm() > 1e-12 * knorm)
    throw numerical_error("GramSystem: kernel matrix is not symmetric");
  K_ = 0.5 * (K + K.transpose());
  ms_ = spec.measure_scale(static_cast<int>(p));

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(K_);
  if (eig.info() != Eigen::Success)
    throw numerical_error("GramSystem: eigensolver failed");
  eval_ = eig.eigenvalues();
  evec_ = eig.eigenvectors();

  const double lmax = std::max(eval_.maxCoeff(), 0.0);
  const double trace_rel = K_.trace() / p;

  // K must be PSD up to round-off (Mercer); flag anything beyond that.
  if (eval_.minCoeff() < -1e-10 * std::max(lmax, 1e-300))
    std::fprintf(stderr,
                 "[koopqg] GramSystem: eigenvalue %.3g below PSD tolerance "
                 "(lambda_max %.3g)\n", eval_.minCoeff(), lmax);

  eps_ = spec.jitter_rel * trace_rel;
  const double eps_cap = 1e-6 * trace_rel;
  while (eval_.minCoeff() + eps_ <= 1e-15 * std::max(lmax, 1e-300)) {
    eps_ = eps_ == 0.0 ? 1e-14 * trace_rel : eps_ * 10.0;
    if (eps_ > eps_cap) {
      std::ostringstream msg;
      msg << "GramSystem: factorization failed after jitter escalation"
          << " (lambda_min=" << eval_.minCoeff() << ", lambda_max=" << lmax
          << ", trace/p=" << trace_rel << ")";
      throw numerical_error(msg.str());
    }
  }

  VectorXd clamped = eval_;
  for (Eigen::Index i = 0; i < p; ++i) {
    if (clamped(i) < 1e-12 * lmax) clamped(i) = std::max(clamped(i), 0.0);
  }
  sqrt_ = evec_ * clamped.cwiseSqrt().asDiagonal() * evec_.transpose();
}

Eigen::MatrixXd GramSystem::solve_regularized(const Eigen::MatrixXd& rhs) const {
  const VectorXd inv = (eval_.array() + eps_).inverse().matrix();
  return evec_ * (inv.asDiagonal() * (evec_.transpose() * rhs));
}

Eigen::VectorXd GramSystem::solve_regularized(const Eigen::VectorXd& rhs) const {
  return solve_regularized(Eigen::MatrixXd(rhs)).col(0);
}

Eigen::MatrixXd GramSystem::scaled_sqrt() const {
  return std::sqrt(ms_) * sqrt_;
}

Eigen::MatrixXd GramSystem::l_matrix(bool scaled) const {
  const double s = scaled ? ms_ : 1.0;
  return s * K_ + eps_ * MatrixXd::Identity(K_.rows(), K_.cols());
}

Eigen::MatrixXd GramSystem::l_sqrt(bool scaled) const {
  const double s = scaled ? ms_ : 1.0;
  const VectorXd d = (s * eval_.array() + eps_).cwiseMax(0.0).sqrt().matrix();
  return evec_ * d.asDiagonal() * evec_.transpose();
}

Eigen::MatrixXd GramSystem::l_inv_sqrt(bool scaled) const {
  const double s = scaled ? ms_ : 1.0;
  const VectorXd d = (s * eval_.array() + eps_).cwiseMax(1e-300).rsqrt().matrix();
  return evec_ * d.asDiagonal() * evec_.transpose();
}

GramSystem gram_matrix(const std::vector<const Field2D*>& members,
                       const KernelSpec& spec) {
  const int p = static_cast<int>(members.size());
  if (p < 1) throw std::invalid_argument("gram_matrix: empty member list");
  MatrixXd Q = stack_weighted(members);
  // Centering cancels inside the Gaussian's pairwise differences, so it only
  // acts on the empirical kernel.
  if (spec.center_anomalies && spec.family == KernelFamily::Empirical)
    Q = centered(Q);
  MatrixXd dots = Q.transpose() * Q;

  MatrixXd K;
  switch (spec.family) {
    case KernelFamily::Empirical:
      K = spec.center_anomalies && p > 1 ? MatrixXd(dots / (p - 1)) : dots;
      break;
    case KernelFamily::Gaussian:
      K = (-squared_distances(dots) / (spec.ell_g * spec.ell_g)).array().exp();
      break;
  }
  return GramSystem(std::move(K), spec);
}

GramSystem gram_matrix(const EnsembleSet& set, const KernelSpec& spec) {
  return gram_matrix(set.states_at(0), spec);
}

Eigen::MatrixXd generator_matrix(const std::vector<const Field2D*>& members,
                                 const std::vector<const Field2D*>& tendencies,
                                 const KernelSpec& spec) {
  if (members.size() != tendencies.size())
    throw std::invalid_argument("generator_matrix: tendencies misaligned with members");
  const int p = static_cast<int>(members.size());
  MatrixXd Q = stack_weighted(members);
  MatrixXd T = stack_weighted(tendencies);
  if (spec.center_anomalies && spec.family == KernelFamily::Empirical) {
    Q = centered(Q);
    T = centered(T);
  }

  switch (spec.family) {
    case KernelFamily::Empirical: {
      // M_ij = <dX_j/dt, X_i>
      MatrixXd M = Q.transpose() * T;
      if (spec.center_anomalies && p > 1) M /= (p - 1);
      return M;
    }
    case KernelFamily::Gaussian: {
      const double il2 = 1.0 / (spec.ell_g * spec.ell_g);
      const MatrixXd dots = Q.transpose() * Q;
      const MatrixXd expfac = (-squared_distances(dots) * il2).array().exp();
      // <dX_j/dt, X_i - X_j> = (Q^t T)_ij - <X_j, dX_j/dt>
      const MatrixXd qt = Q.transpose() * T;
      MatrixXd M(p, p);
      for (int j = 0; j < p; ++j) {
        const double self = qt(j, j);
        for (int i = 0; i < p; ++i)
          M(i, j) = -2.0 * il2 * (qt(i, j) - self) * expfac(i, j);
      }
      return M;
    }
  }
  throw std::invalid_argument("generator_matrix: unknown family");
}

Eigen::MatrixXd generator_matrix(const EnsembleSet& set, const KernelSpec& spec) {
  return generator_matrix(set.states_at(0), pointers(set.initial_tendencies), spec);
}

Eigen::VectorXd kernel_vector(const Field2D& new_member,
                              const std::vector<const Field2D*>& members,
                              const KernelSpec& spec) {
  const int p = static_cast<int>(members.size());
  VectorXd v(p);
  if (spec.center_anomalies) {
    Field2D mean = *members[0];
    for (int j = 1; j < p; ++j) mean = axpy(mean, 1.0, *members[j]);
    for (std::size_t i = 0; i < mean.size(); ++i) mean.data()[i] /= p;
    for (int j = 0; j < p; ++j)
      v(j) = kernel_eval(new_member, *members[j], spec, mean, p);
  } else {
    for (int j = 0; j < p; ++j) v(j) = kernel_eval(new_member, *members[j], spec);
  }
  return v;
}

Eigen::VectorXd kernel_vector(const Field2D& new_member, const EnsembleSet& set,
                              const KernelSpec& spec) {
  return kernel_vector(new_member, set.states_at(0), spec);
}

Eigen::MatrixXd pinv(const Eigen::MatrixXd& m, double tol_rel) {
  if (m.rows() != m.cols()) throw std::invalid_argument("pinv: matrix not square");
  const MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw numerical_error("pinv: eigensolver failed");
  const double lmax = eig.eigenvalues().cwiseAbs().maxCoeff();
  VectorXd inv = VectorXd::Zero(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (std::abs(eig.eigenvalues()(i)) > tol_rel * lmax)
      inv(i) = 1.0 / eig.eigenvalues()(i);
  }
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

double isometry_drift(const EnsembleSet& set, const KernelSpec& spec,
                      std::size_t time_index) {
  const GramSystem g0 = gram_matrix(set.states_at(0), spec);
  const GramSystem gt = gram_matrix(set.states_at(time_index), spec);
  return (gt.K() - g0.K()).norm() / g0.K().norm();
}

}  // namespace kqg
