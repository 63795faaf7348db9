#pragma once

#include <Eigen/Dense>

#include "koopqg/kernels.hpp"

namespace kqg {

/// Generator spectrum at the anchor time. Eigenvalues are i*omega with the
/// omegas in +/- pairs (plus zeros for odd p); V is unitary; column l of
/// psi0 holds the l-th eigenfunction evaluated at the p members,
/// psi0 = (K*measure_scale)^{1/2} V.
struct KoopmanSpectrum {
  Eigen::VectorXd omegas;
  Eigen::MatrixXcd V;
  Eigen::MatrixXcd psi0;
  double measure_scale = 1.0;
};

struct GeneratorAssembly {
  Eigen::MatrixXd S;   // skew part of M (K+eps I)^{-1}
  double asymmetry;    // |F + F^t| / |F|, a discretization-quality diagnostic
};

GeneratorAssembly assemble_generator(const Eigen::MatrixXd& M,
                                     const GramSystem& gram);

/// Diagonalize the Hermitian matrix i*S; eigenvalues mu are real and
/// omega = -mu. Modes are sorted by |omega| ascending with the + member of
/// each pair first; eigenvector phases are fixed by making the first
/// above-noise component real positive.
KoopmanSpectrum spectrum(const Eigen::MatrixXd& S, const GramSystem& gram,
                         const KernelSpec& spec);

/// Column l multiplied by exp(i omega_l t); moduli are preserved.
Eigen::MatrixXcd propagate_eigenfunctions(const KoopmanSpectrum& spec, double t);

/// Ensemble tangent-linear matrix T = L^{-1/2} S L^{1/2} with
/// L = K*measure_scale + eps I, acting on vectors of observable evaluations
/// at the members; the adjoint is -T.
struct TangentLinear {
  Eigen::MatrixXd T;
  Eigen::MatrixXd T_adjoint;
};

TangentLinear tangent_linear_matrix(const Eigen::MatrixXd& S,
                                    const GramSystem& gram,
                                    const KernelSpec& spec);

}  // namespace kqg
