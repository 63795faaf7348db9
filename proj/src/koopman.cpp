#include "koopqg/koopman.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "koopqg/errors.hpp"

namespace kqg {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

GeneratorAssembly assemble_generator(const Eigen::MatrixXd& M,
                                     const GramSystem& gram) {
  if (M.rows() != gram.K().rows() || M.cols() != gram.K().cols())
    throw std::invalid_argument("assemble_generator: shape mismatch");
  // F = M (K+eps I)^{-1}; computed as solve on the transpose since K is symmetric.
  const MatrixXd F = gram.solve_regularized(MatrixXd(M.transpose())).transpose();
  const double fnorm = F.norm();
  GeneratorAssembly out;
  out.S = 0.5 * (F - F.transpose());
  out.asymmetry = fnorm > 0 ? (F + F.transpose()).norm() / fnorm : 0.0;
  return out;
}

namespace {

/// Rotate v so its first component with |v_k| > 1e-12 |v| is real positive.
void normalize_phase(VectorXcd& v) {
  const double tol = 1e-12 * v.norm();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double a = std::abs(v(k));
    if (a > tol) {
      v *= std::conj(v(k)) / a;
      return;
    }
  }
}

bool lex_less(const VectorXcd& a, const VectorXcd& b) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a(k).real() != b(k).real()) return a(k).real() < b(k).real();
    if (a(k).imag() != b(k).imag()) return a(k).imag() < b(k).imag();
  }
  return false;
}

}  // namespace

KoopmanSpectrum spectrum(const Eigen::MatrixXd& S, const GramSystem& gram,
                         const KernelSpec& spec) {
  if (spec.measure_scale(gram.p()) != gram.measure_scale())
    throw std::invalid_argument("spectrum: measure_norm mismatch");
  const Eigen::Index p = S.rows();
  const double snorm = S.norm();
  if (snorm > 0 && (S + S.transpose()).norm() > 1e-10 * snorm)
    throw std::invalid_argument("spectrum: input is not skew-symmetric");

  const MatrixXcd H = std::complex<double>(0.0, 1.0) * S.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(H);
  if (eig.info() != Eigen::Success)
    throw numerical_error("spectrum: eigensolver did not converge");

  VectorXd omega = -eig.eigenvalues();
  MatrixXcd V = eig.eigenvectors();
  for (Eigen::Index l = 0; l < p; ++l) {
    VectorXcd col = V.col(l);
    normalize_phase(col);
    V.col(l) = col;
  }

  std::vector<Eigen::Index> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double aa = std::abs(omega(a)), ab = std::abs(omega(b));
    if (aa != ab) return aa < ab;
    if (omega(a) != omega(b)) return omega(a) > omega(b);  // + before -
    return lex_less(V.col(a), V.col(b));
  });

  KoopmanSpectrum out;
  out.measure_scale = gram.measure_scale();
  out.omegas.resize(p);
  out.V.resize(p, p);
  for (Eigen::Index l = 0; l < p; ++l) {
    out.omegas(l) = omega(order[l]);
    out.V.col(l) = V.col(order[l]);
  }
  out.psi0 = gram.scaled_sqrt() * out.V;
  return out;
}

Eigen::MatrixXcd propagate_eigenfunctions(const KoopmanSpectrum& spec, double t) {
  MatrixXcd out = spec.psi0;
  for (Eigen::Index l = 0; l < out.cols(); ++l)
    out.col(l) *= std::exp(std::complex<double>(0.0, spec.omegas(l) * t));
  return out;
}

TangentLinear tangent_linear_matrix(const Eigen::MatrixXd& S,
                                    const GramSystem& gram,
                                    const KernelSpec& spec) {
  if (spec.measure_scale(gram.p()) != gram.measure_scale())
    throw std::invalid_argument("tangent_linear_matrix: measure_norm mismatch");
  TangentLinear out;
  out.T = gram.l_inv_sqrt(true) * S * gram.l_sqrt(true);
  out.T_adjoint = -out.T;
  return out;
}

}  // namespace kqg
