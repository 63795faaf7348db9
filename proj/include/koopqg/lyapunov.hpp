#pragma once

#include <vector>

#include "koopqg/koopman.hpp"

namespace kqg {

/// Finite-time Lyapunov exponents and times. Three routes: singular values
/// of the tangent-linear matrix (global), per-mode KMLE, and |omega_l|.
/// kmle uses the configured measure normalization; kmle_alt the other one,
/// so the constant log-offset between the two conventions is visible in the
/// exported data.
struct LyapunovReport {
  std::vector<double> global_sigmas;   // descending, > threshold
  std::vector<double> kmle;
  std::vector<double> kmle_alt;
  std::vector<double> modal_sigmas;    // |omega_l|, spectrum order
  std::vector<double> times_global;
  std::vector<double> times_kmle;
  std::vector<double> times_modal;
  double amplification = 1e3;          // C in T = ln(C)/sigma
};

/// Singular values of T, descending, filtered by sigma > threshold.
std::vector<double> global_spectrum(const Eigen::MatrixXd& T, double threshold = 1e-5);

/// KMLE_l = |omega_l| * |L^{-1/2} psi_l|_2 (top singular value of the rank-1
/// modal matrix, rooted). `scaled` selects L = K*ms + eps I vs K + eps I.
std::vector<double> kmle(const KoopmanSpectrum& spec, const GramSystem& gram,
                         bool scaled = true);

std::vector<double> modal_sigma(const KoopmanSpectrum& spec);

/// T = ln(C)/sigma; sigma = 0 maps to +infinity so slow modes never drop out.
double lyapunov_time(double sigma, double C);

LyapunovReport lyapunov_report(const KoopmanSpectrum& spec, const GramSystem& gram,
                               const Eigen::MatrixXd& T, double C = 1e3,
                               double sigma_threshold = 1e-5);

}  // namespace kqg
