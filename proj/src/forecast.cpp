#include "koopqg/forecast.hpp"

#include <cmath>
#include <map>

#include "koopqg/errors.hpp"
#include "koopqg/stacking.hpp"

namespace kqg {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

/// Number of modes still predictable at t; modes are sorted by |omega|
/// ascending, so the retained set is a prefix.
Eigen::Index retained_count(const KoopmanSpectrum& spec, double t, double C) {
  Eigen::Index r = 0;
  for (Eigen::Index l = 0; l < spec.omegas.size(); ++l) {
    const double w = std::abs(spec.omegas(l));
    const bool keep = w == 0.0 || std::log(C) / w >= t;
    if (keep) ++r; else break;
  }
  return r;
}

MatrixXd projector_for_count(const KoopmanSpectrum& spec, Eigen::Index r,
                             double pinv_tol) {
  const Eigen::Index p = spec.psi0.rows();
  if (r == 0) return MatrixXd::Zero(p, p);
  const MatrixXcd psi = spec.psi0.leftCols(r);
  // Pairing makes psi psi^H real up to round-off; the real part is enforced
  // and symmetrized before the pseudo-inverse.
  const MatrixXd ktilde = (psi * psi.adjoint()).real();
  return pinv(ktilde, pinv_tol) * ktilde;
}

}  // namespace

ReconstructionCoefficients regression_coefficients(const Field2D& new_q0,
                                                   const EnsembleSet& ensemble,
                                                   const GramSystem& gram,
                                                   const KernelSpec& spec) {
  if (gram.p() != ensemble.p())
    throw std::invalid_argument("regression_coefficients: gram/ensemble size mismatch");
  ReconstructionCoefficients out;
  out.kernel = spec;
  out.anchor_time = ensemble.times().front();
  out.beta = gram.solve_regularized(kernel_vector(new_q0, ensemble, spec));
  return out;
}

Field2D reconstruct(const Eigen::VectorXd& beta, const EnsembleSet& ensemble,
                    double t) {
  if (beta.size() != ensemble.p())
    throw std::invalid_argument("reconstruct: beta size mismatch");
  const std::size_t k = ensemble.members.front().index_of_time(t);
  Field2D out = ensemble.members[0].states[k];
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = 0.0;
  for (int j = 0; j < ensemble.p(); ++j)
    out = axpy(out, beta(j), ensemble.members[j].states[k]);
  return out;
}

Eigen::MatrixXd lyapunov_projector(const KoopmanSpectrum& spec, double t,
                                   double C, double pinv_tol) {
  return projector_for_count(spec, retained_count(spec, t, C), pinv_tol);
}

Eigen::VectorXd filtered_coefficients(const Eigen::VectorXd& beta,
                                      const KoopmanSpectrum& spec,
                                      const GramSystem& gram, double t, double C,
                                      bool mean_anchor) {
  if (beta.size() != gram.p())
    throw std::invalid_argument("filtered_coefficients: beta size mismatch");
  const MatrixXd P = lyapunov_projector(spec, t, C);
  if (!mean_anchor) return P * beta;
  const VectorXd mean = VectorXd::Constant(beta.size(), 1.0 / beta.size());
  return mean + P * (beta - mean);
}

ErrorCurves error_curves(const EnsembleSet& test, const EnsembleSet& train,
                         const GramSystem& gram, const KernelSpec& spec,
                         const KoopmanSpectrum* koop,
                         const ErrorCurveOptions& options) {
  const auto& times = train.times();
  if (test.times() != times)
    throw std::invalid_argument("error_curves: ensembles do not share output times");
  const int p = train.p();
  const int pt = test.p();

  // Constant-in-time coefficients, one column per test member, computed once
  // at the anchor time; every later time reuses them.
  MatrixXd B(p, pt);
  for (int j = 0; j < pt; ++j)
    B.col(j) = regression_coefficients(test.members[j].states[0], train, gram, spec).beta;

  ErrorCurves out;
  out.times = times;
  const std::size_t nt = times.size();
  out.mean_plain.resize(nt); out.std_plain.resize(nt);
  out.mean_filtered.resize(nt); out.std_filtered.resize(nt);
  out.mean_ensavg.resize(nt); out.std_ensavg.resize(nt);
  out.projection.resize(nt);

  std::map<Eigen::Index, MatrixXd> filtered_B_cache;

  auto stats = [&](const VectorXd& errs, double& mean, double& sd) {
    mean = errs.mean();
    sd = pt > 1 ? std::sqrt((errs.array() - mean).square().sum() / (pt - 1)) : 0.0;
  };

  for (std::size_t k = 0; k < nt; ++k) {
    const MatrixXd A = stack_weighted(train.states_at(k));
    const MatrixXd X = stack_weighted(test.states_at(k));

    auto sq_errors = [&](const MatrixXd& recon) {
      return VectorXd((recon - X).colwise().squaredNorm());
    };

    stats(sq_errors(A * B), out.mean_plain[k], out.std_plain[k]);

    if (koop) {
      const Eigen::Index r = retained_count(*koop, times[k], options.amplification);
      auto it = filtered_B_cache.find(r);
      if (it == filtered_B_cache.end()) {
        const MatrixXd P = projector_for_count(*koop, r, options.pinv_tol);
        MatrixXd Bf = P * B;
        if (options.mean_anchor) {
          const VectorXd mean = VectorXd::Constant(p, 1.0 / p);
          Bf += (mean - P * mean).rowwise().replicate(pt);
        }
        it = filtered_B_cache.emplace(r, std::move(Bf)).first;
      }
      stats(sq_errors(A * it->second), out.mean_filtered[k], out.std_filtered[k]);
    } else {
      out.mean_filtered[k] = out.std_filtered[k] = 0.0;
    }

    const VectorXd ens_mean = A.rowwise().mean();
    stats(sq_errors(ens_mean.rowwise().replicate(pt)), out.mean_ensavg[k],
          out.std_ensavg[k]);

    // Optimal per-time projection: least squares on the member Gram at t.
    const MatrixXd G = A.transpose() * A;
    const MatrixXd rhs = A.transpose() * X;
    const MatrixXd alpha = pinv(G, options.pinv_tol) * rhs;
    out.projection[k] = sq_errors(A * alpha).mean();
  }
  return out;
}

}  // namespace kqg
