#include "koopqg/lyapunov.hpp"

#include <cmath>
#include <limits>

namespace kqg {

std::vector<double> global_spectrum(const Eigen::MatrixXd& T, double threshold) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(T);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double s = svd.singularValues()(i);  // Eigen returns descending
    if (s > threshold) out.push_back(s);
  }
  return out;
}

std::vector<double> kmle(const KoopmanSpectrum& spec, const GramSystem& gram,
                         bool scaled) {
  const Eigen::MatrixXd linv = gram.l_inv_sqrt(scaled);
  std::vector<double> out;
  out.reserve(spec.omegas.size());
  for (Eigen::Index l = 0; l < spec.omegas.size(); ++l) {
    const Eigen::VectorXcd v = linv * spec.psi0.col(l);
    out.push_back(std::abs(spec.omegas(l)) * v.norm());
  }
  return out;
}

std::vector<double> modal_sigma(const KoopmanSpectrum& spec) {
  std::vector<double> out;
  out.reserve(spec.omegas.size());
  for (Eigen::Index l = 0; l < spec.omegas.size(); ++l)
    out.push_back(std::abs(spec.omegas(l)));
  return out;
}

double lyapunov_time(double sigma, double C) {
  if (sigma < 0) throw std::invalid_argument("lyapunov_time: sigma < 0");
  if (sigma == 0.0) return std::numeric_limits<double>::infinity();
  return std::log(C) / sigma;
}

LyapunovReport lyapunov_report(const KoopmanSpectrum& spec, const GramSystem& gram,
                               const Eigen::MatrixXd& T, double C,
                               double sigma_threshold) {
  LyapunovReport rep;
  rep.amplification = C;
  rep.global_sigmas = global_spectrum(T, sigma_threshold);
  rep.kmle = kmle(spec, gram, true);
  rep.kmle_alt = kmle(spec, gram, false);
  rep.modal_sigmas = modal_sigma(spec);
  for (double s : rep.global_sigmas) rep.times_global.push_back(lyapunov_time(s, C));
  for (double s : rep.kmle) rep.times_kmle.push_back(lyapunov_time(s, C));
  for (double s : rep.modal_sigmas) rep.times_modal.push_back(lyapunov_time(s, C));
  return rep;
}

}  // namespace kqg
