#include "koopqg/assimilation.hpp"

#include <cmath>
#include <sstream>

#include "koopqg/errors.hpp"
#include "koopqg/kernels.hpp"
#include "koopqg/rng.hpp"
#include "koopqg/stacking.hpp"

namespace kqg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::vector<int> column_indices(const Field2D& f, const ObservationSetup& setup) {
  std::vector<int> cols;
  for (double x : setup.column_positions) {
    const int ic = static_cast<int>(std::lround(x / f.dx()));
    if (ic < 0 || ic >= f.nx())
      throw std::invalid_argument("observation column outside the domain");
    cols.push_back(ic);
  }
  std::sort(cols.begin(), cols.end());  // west column first
  return cols;
}

/// m x p matrix of observed training members at output-time index k.
MatrixXd observed_members(const EnsembleSet& train, std::size_t k,
                          const ObservationSetup& setup) {
  const int p = train.p();
  MatrixXd H(static_cast<Eigen::Index>(setup.column_positions.size()) *
                 train.members[0].states[0].ny(),
             p);
  for (int j = 0; j < p; ++j)
    H.col(j) = observe(train.members[j].states[k], setup);
  return H;
}

}  // namespace

void ObservationSetup::validate(double domain_L) const {
  for (double x : column_positions) {
    if (x < 0 || x > domain_L)
      throw config_error("assim column position outside [0, L]");
  }
  if (noise_frac < 0) throw config_error("assim noise_frac must be >= 0");
  if (!(ell_loc > 0)) throw config_error("assim ell_loc must be > 0");
  if (alpha < 0) throw config_error("assim alpha must be >= 0");
  if (obs_times.empty()) throw config_error("assim obs_times is empty");
}

std::vector<std::pair<double, double>> observation_locations(
    const Field2D& grid_like, const ObservationSetup& setup) {
  std::vector<std::pair<double, double>> locs;
  for (int ic : column_indices(grid_like, setup)) {
    for (int iy = 0; iy < grid_like.ny(); ++iy)
      locs.emplace_back(grid_like.x(ic), grid_like.y(iy));
  }
  return locs;
}

Eigen::VectorXd observe(const Field2D& field, const ObservationSetup& setup) {
  const auto cols = column_indices(field, setup);
  VectorXd out(static_cast<Eigen::Index>(cols.size()) * field.ny());
  Eigen::Index k = 0;
  for (int ic : cols)
    for (int iy = 0; iy < field.ny(); ++iy) out(k++) = field.at(ic, iy);
  return out;
}

ObservationSeries synthesize_observations(const qg::Trajectory& truth,
                                          const ObservationSetup& setup) {
  ObservationSeries out;
  out.times = setup.obs_times;
  out.locations = observation_locations(truth.states.front(), setup);

  std::vector<VectorXd> clean;
  double sumsq = 0.0;
  std::size_t count = 0;
  for (double t : setup.obs_times) {
    clean.push_back(observe(truth.at_time(t), setup));
    sumsq += clean.back().squaredNorm();
    count += clean.back().size();
  }
  out.sigma = setup.noise_frac * std::sqrt(sumsq / count);

  for (std::size_t k = 0; k < clean.size(); ++k) {
    VectorXd y = clean[k];
    for (Eigen::Index i = 0; i < y.size(); ++i)
      y(i) += out.sigma * rng::gaussian(rng::mix(setup.seed, k, i));
    out.values.push_back(std::move(y));
  }
  return out;
}

Eigen::MatrixXd build_R(const EnsembleSet& train, const ObservationSetup& setup) {
  const int p = train.p();
  if (p < 2) throw std::invalid_argument("build_R: need at least 2 members");

  MatrixXd cbar;
  for (double t : setup.obs_times) {
    const std::size_t k = train.members[0].index_of_time(t);
    MatrixXd Y = observed_members(train, k, setup);
    Y.colwise() -= VectorXd(Y.rowwise().mean());
    const MatrixXd C = (Y * Y.transpose()) / (p - 1);
    cbar = cbar.size() == 0 ? C : MatrixXd(cbar + C);
  }
  cbar /= static_cast<double>(setup.obs_times.size());

  const auto locs = observation_locations(train.members[0].states[0], setup);
  const double il2 = 1.0 / (setup.ell_loc * setup.ell_loc);
  MatrixXd R(cbar.rows(), cbar.cols());
  for (Eigen::Index i = 0; i < R.rows(); ++i) {
    for (Eigen::Index j = 0; j < R.cols(); ++j) {
      const double dx = locs[i].first - locs[j].first;
      const double dy = locs[i].second - locs[j].second;
      R(i, j) = cbar(i, j) * std::exp(-(dx * dx + dy * dy) * il2);
    }
  }

  // Jitter escalation mirrors the Gram policy: x10 from 1e-10 relative.
  const double tr = R.trace() / R.rows();
  double eps = 1e-10 * tr;
  const double cap = 1e-6 * tr;
  while (true) {
    const MatrixXd Rj = R + eps * MatrixXd::Identity(R.rows(), R.cols());
    if (Eigen::LLT<MatrixXd>(Rj).info() == Eigen::Success) return Rj;
    eps *= 10.0;
    if (eps > cap)
      throw numerical_error("build_R: covariance not positive definite after jitter escalation");
  }
}

double enoi_cost(const Eigen::VectorXd& beta, const ObservationSeries& obs,
                 const EnsembleSet& train, const Eigen::MatrixXd& R,
                 const ObservationSetup& setup) {
  const Eigen::LLT<MatrixXd> llt(R);
  if (llt.info() != Eigen::Success) throw numerical_error("enoi_cost: R not factorizable");
  double data = 0.0;
  for (std::size_t k = 0; k < obs.times.size(); ++k) {
    const std::size_t idx = train.members[0].index_of_time(obs.times[k]);
    const MatrixXd H = observed_members(train, idx, setup);
    const VectorXd resid = H * beta - obs.values[k];
    data += resid.dot(llt.solve(resid));
  }
  data /= 2.0 * static_cast<double>(obs.times.size());
  const VectorXd mean = VectorXd::Constant(beta.size(), 1.0 / beta.size());
  return data + 0.5 * setup.alpha * setup.alpha * (beta - mean).squaredNorm();
}

ReconstructionCoefficients enoi_solve(const ObservationSeries& obs,
                                      const EnsembleSet& train,
                                      const Eigen::MatrixXd& R,
                                      const ObservationSetup& setup) {
  const int p = train.p();
  const Eigen::LLT<MatrixXd> llt(R);
  if (llt.info() != Eigen::Success)
    throw numerical_error("enoi_solve: R not factorizable");

  MatrixXd G = MatrixXd::Zero(p, p);
  VectorXd b = VectorXd::Zero(p);
  for (std::size_t k = 0; k < obs.times.size(); ++k) {
    const std::size_t idx = train.members[0].index_of_time(obs.times[k]);
    const MatrixXd H = observed_members(train, idx, setup);
    const MatrixXd RinvH = llt.solve(H);
    G += H.transpose() * RinvH;
    b += RinvH.transpose() * obs.values[k];
  }
  const double nt = static_cast<double>(obs.times.size());
  G /= nt;
  b /= nt;

  const double a2 = setup.alpha * setup.alpha;
  const VectorXd mean = VectorXd::Constant(p, 1.0 / p);
  const MatrixXd A = G + a2 * MatrixXd::Identity(p, p);
  Eigen::LLT<MatrixXd> solver(A);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "enoi_solve: normal equations indefinite (alpha=" << setup.alpha
        << ", trace(G)/p=" << G.trace() / p << ")";
    throw numerical_error(msg.str());
  }

  ReconstructionCoefficients out;
  out.anchor_time = train.times().front();
  out.kernel.family = KernelFamily::Empirical;
  out.beta = solver.solve(b + a2 * mean);
  return out;
}

Eigen::VectorXd best_constant_coefficients(const qg::Trajectory& truth,
                                           const EnsembleSet& train) {
  if (truth.times != train.times())
    throw std::invalid_argument("best_constant_coefficients: time grids differ");
  const int p = train.p();

  MatrixXd G = MatrixXd::Zero(p, p);
  VectorXd b = VectorXd::Zero(p);
  for (std::size_t k = 0; k < truth.times.size(); ++k) {
    const MatrixXd A = stack_weighted(train.states_at(k));
    const VectorXd x = stack_weighted(truth.states[k]);
    G += A.transpose() * A;
    b += A.transpose() * x;
  }
  const double nt = static_cast<double>(truth.times.size());
  return pinv(G / nt) * (b / nt);
}

DaErrorCurves da_error_curves(const EnsembleSet& test, const EnsembleSet& train,
                              const ObservationSetup& setup, double single_time) {
  ObservationSetup single_setup = setup;
  single_setup.obs_times = {single_time};

  const MatrixXd R_series = build_R(train, setup);
  const MatrixXd R_single = build_R(train, single_setup);

  const int p = train.p();
  const int pt = test.p();
  const std::size_t nt = setup.obs_times.size();

  DaErrorCurves out;
  out.times = setup.obs_times;

  // Everything independent of the test member is assembled once: the member
  // stacks A_k, the normal-equation operators, and the best-constant Gram.
  std::vector<std::size_t> idx(nt);
  std::vector<MatrixXd> A(nt), RinvH(nt);
  MatrixXd G_series = MatrixXd::Zero(p, p);
  MatrixXd G_best = MatrixXd::Zero(p, p);
  const Eigen::LLT<MatrixXd> llt_series(R_series);
  for (std::size_t k = 0; k < nt; ++k) {
    idx[k] = train.members[0].index_of_time(setup.obs_times[k]);
    A[k] = stack_weighted(train.states_at(idx[k]));
    const MatrixXd H = observed_members(train, idx[k], setup);
    RinvH[k] = llt_series.solve(H);
    G_series += H.transpose() * RinvH[k];
    G_best += A[k].transpose() * A[k];
  }
  G_series /= static_cast<double>(nt);
  G_best /= static_cast<double>(nt);
  const MatrixXd G_best_pinv = pinv(G_best);

  const std::size_t single_idx = train.members[0].index_of_time(single_time);
  const MatrixXd H_single = observed_members(train, single_idx, setup);
  const Eigen::LLT<MatrixXd> llt_single(R_single);
  const MatrixXd RinvH_single = llt_single.solve(H_single);
  const MatrixXd G_single = H_single.transpose() * RinvH_single;

  const double a2 = setup.alpha * setup.alpha;
  const VectorXd prior = VectorXd::Constant(p, 1.0 / p);
  const Eigen::LLT<MatrixXd> ne_series(MatrixXd(G_series + a2 * MatrixXd::Identity(p, p)));
  const Eigen::LLT<MatrixXd> ne_single(MatrixXd(G_single + a2 * MatrixXd::Identity(p, p)));
  if (ne_series.info() != Eigen::Success || ne_single.info() != Eigen::Success)
    throw numerical_error("da_error_curves: normal equations indefinite");

  MatrixXd B_series(p, pt), B_single(p, pt), B_best(p, pt);
  for (int j = 0; j < pt; ++j) {
    ObservationSetup member_setup = setup;
    member_setup.seed = rng::mix(setup.seed, 0x0b5, j);
    ObservationSetup member_single = single_setup;
    member_single.seed = member_setup.seed;

    const auto& truth = test.members[j];
    const auto obs_series = synthesize_observations(truth, member_setup);
    const auto obs_single = synthesize_observations(truth, member_single);

    VectorXd b = VectorXd::Zero(p);
    for (std::size_t k = 0; k < nt; ++k)
      b += RinvH[k].transpose() * obs_series.values[k];
    b /= static_cast<double>(nt);
    B_series.col(j) = ne_series.solve(b + a2 * prior);
    B_single.col(j) = ne_single.solve(
        VectorXd(RinvH_single.transpose() * obs_single.values[0] + a2 * prior));

    VectorXd bb = VectorXd::Zero(p);
    for (std::size_t k = 0; k < nt; ++k) {
      const VectorXd x = stack_weighted(truth.states[idx[k]]);
      bb += A[k].transpose() * x;
    }
    B_best.col(j) = G_best_pinv * (bb / static_cast<double>(nt));
  }

  out.series.assign(nt, 0.0);
  out.single.assign(nt, 0.0);
  out.best_const.assign(nt, 0.0);
  out.ensavg.assign(nt, 0.0);
  for (std::size_t k = 0; k < nt; ++k) {
    const MatrixXd X = stack_weighted(test.states_at(idx[k]));
    out.series[k] = (A[k] * B_series - X).colwise().squaredNorm().mean();
    out.single[k] = (A[k] * B_single - X).colwise().squaredNorm().mean();
    out.best_const[k] = (A[k] * B_best - X).colwise().squaredNorm().mean();
    const VectorXd ens_mean = A[k].rowwise().mean();
    out.ensavg[k] =
        (ens_mean.rowwise().replicate(pt) - X).colwise().squaredNorm().mean();
  }
  return out;
}

}  // namespace kqg
