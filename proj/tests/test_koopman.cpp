#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "koopqg/koopman.hpp"
#include "koopqg/rng.hpp"

using namespace kqg;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(int n, std::uint64_t seed) {
  MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng::gaussian(rng::mix(seed, i, j));
  return m;
}

MatrixXd random_skew(int n, std::uint64_t seed) {
  const MatrixXd m = random_matrix(n, seed);
  return 0.5 * (m - m.transpose());
}

MatrixXd random_psd(int n, std::uint64_t seed) {
  const MatrixXd a = random_matrix(n, seed);
  return a * a.transpose() + MatrixXd::Identity(n, n);
}

GramSystem make_gram(const MatrixXd& K, const KernelSpec& spec = {}) {
  return GramSystem(K, spec);
}

}  // namespace

TEST_CASE("assemble_generator: skew M with identity K passes through") {
  const int n = 6;
  const MatrixXd M = random_skew(n, 1);
  KernelSpec spec;
  const GramSystem gram = make_gram(MatrixXd::Identity(n, n), spec);
  const auto gen = assemble_generator(M, gram);
  CHECK((gen.S - M).norm() <= 1e-9 * M.norm());
  CHECK(gen.asymmetry < 1e-9);
}

TEST_CASE("assemble_generator: symmetric M yields S = 0") {
  const int n = 5;
  MatrixXd M = random_matrix(n, 2);
  M = MatrixXd(0.5 * (M + M.transpose()));
  const GramSystem gram = make_gram(MatrixXd::Identity(n, n));
  CHECK(assemble_generator(M, gram).S.norm() <= 1e-12 * M.norm());
}

TEST_CASE("assemble_generator: S is skew to round-off for any inputs") {
  const int n = 9;
  const MatrixXd M = random_matrix(n, 3);
  const GramSystem gram = make_gram(random_psd(n, 4));
  const MatrixXd S = assemble_generator(M, gram).S;
  CHECK((S + S.transpose()).norm() <= 1e-14 * std::max(S.norm(), 1e-30));
}

TEST_CASE("spectrum: 2x2 rotation generator has the analytic eigenpairs") {
  const double a = 0.7;
  MatrixXd S(2, 2);
  S << 0, a, -a, 0;
  KernelSpec spec;
  const GramSystem gram = make_gram(MatrixXd::Identity(2, 2), spec);
  const KoopmanSpectrum ks = spectrum(S, gram, spec);

  CHECK(ks.omegas(0) == doctest::Approx(a).epsilon(1e-12));   // + first
  CHECK(ks.omegas(1) == doctest::Approx(-a).epsilon(1e-12));
  for (int l = 0; l < 2; ++l) {
    // eigen-residual of S v = i w v
    const Eigen::VectorXcd v = ks.V.col(l);
    const Eigen::VectorXcd resid =
        S.cast<std::complex<double>>() * v -
        std::complex<double>(0, ks.omegas(l)) * v;
    CHECK(resid.norm() < 1e-12);
    CHECK(std::abs(v(0)) == doctest::Approx(1 / std::sqrt(2)).epsilon(1e-12));
    CHECK(std::abs(v(1)) == doctest::Approx(1 / std::sqrt(2)).epsilon(1e-12));
    // phase convention: first component real positive
    CHECK(v(0).imag() == doctest::Approx(0.0).scale(1).epsilon(1e-12));
    CHECK(v(0).real() > 0);
  }
}

TEST_CASE("spectrum: V is unitary and omegas pair under negation") {
  const int n = 12;
  KernelSpec spec;
  const GramSystem gram = make_gram(random_psd(n, 7), spec);
  const MatrixXd S = random_skew(n, 8);
  const KoopmanSpectrum ks = spectrum(S, gram, spec);

  CHECK((ks.V.adjoint() * ks.V - MatrixXcd::Identity(n, n)).norm() < 1e-8);

  const double wmax = ks.omegas.cwiseAbs().maxCoeff();
  std::vector<double> ws(ks.omegas.data(), ks.omegas.data() + n);
  // greedy +/- matching within tolerance
  std::vector<bool> used(n, false);
  for (int i = 0; i < n; ++i) {
    if (used[i]) continue;
    bool matched = false;
    for (int j = i + 1; j < n; ++j) {
      if (!used[j] && std::abs(ws[i] + ws[j]) <= 1e-10 * wmax) {
        used[i] = used[j] = true;
        matched = true;
        break;
      }
    }
    if (!matched) CHECK(std::abs(ws[i]) <= 1e-10 * wmax);  // unpaired => zero
  }
}

TEST_CASE("spectrum: odd dimension forces a zero eigenvalue") {
  const int n = 7;
  KernelSpec spec;
  const GramSystem gram = make_gram(MatrixXd::Identity(n, n), spec);
  const MatrixXd S = random_skew(n, 9);
  const KoopmanSpectrum ks = spectrum(S, gram, spec);
  const double wmax = ks.omegas.cwiseAbs().maxCoeff();
  CHECK(ks.omegas.cwiseAbs().minCoeff() <= 1e-12 * wmax);
}

TEST_CASE("spectrum: eigenfunctions reconstruct the scaled kernel matrix") {
  const int n = 10;
  for (auto norm : {MeasureNorm::OneOverP, MeasureNorm::None}) {
    KernelSpec spec;
    spec.measure_norm = norm;
    const GramSystem gram = make_gram(random_psd(n, 11), spec);
    const MatrixXd S = random_skew(n, 12);
    const KoopmanSpectrum ks = spectrum(S, gram, spec);
    const MatrixXcd sum = ks.psi0 * ks.psi0.adjoint();
    const MatrixXd target = gram.measure_scale() * gram.K();
    CHECK((sum - target.cast<std::complex<double>>()).norm() <=
          1e-8 * gram.K().norm());
  }
}

TEST_CASE("propagate_eigenfunctions: identity at t=0, unit-modulus factors") {
  const int n = 8;
  KernelSpec spec;
  const GramSystem gram = make_gram(random_psd(n, 13), spec);
  const KoopmanSpectrum ks = spectrum(random_skew(n, 14), gram, spec);

  CHECK((propagate_eigenfunctions(ks, 0.0) - ks.psi0).norm() == 0.0);

  const MatrixXcd fwd = propagate_eigenfunctions(ks, 2.7);
  CHECK((fwd.cwiseAbs() - ks.psi0.cwiseAbs()).norm() < 1e-12);

  // group property: there and back again
  KoopmanSpectrum shifted = ks;
  shifted.psi0 = fwd;
  const MatrixXcd back = propagate_eigenfunctions(shifted, -2.7);
  CHECK((back - ks.psi0).norm() <= 1e-14 * ks.psi0.norm() * 10);
}

TEST_CASE("tangent_linear_matrix: zero generator maps to zero") {
  const int n = 6;
  KernelSpec spec;
  const GramSystem gram = make_gram(random_psd(n, 15), spec);
  const auto tl = tangent_linear_matrix(MatrixXd::Zero(n, n), gram, spec);
  CHECK(tl.T.norm() == 0.0);
}

TEST_CASE("tangent_linear_matrix: similarity preserves the spectrum") {
  const int n = 10;
  KernelSpec spec;
  const GramSystem gram = make_gram(random_psd(n, 16), spec);
  const MatrixXd S = random_skew(n, 17);
  const auto tl = tangent_linear_matrix(S, gram, spec);

  CHECK((tl.T + tl.T_adjoint).norm() == 0.0);

  Eigen::ComplexEigenSolver<MatrixXd> et(tl.T);
  Eigen::ComplexEigenSolver<MatrixXd> es(S);
  VectorXd wt = et.eigenvalues().imag();
  VectorXd ws = es.eigenvalues().imag();
  std::sort(wt.data(), wt.data() + n);
  std::sort(ws.data(), ws.data() + n);
  CHECK((wt - ws).cwiseAbs().maxCoeff() <= 1e-8 * ws.cwiseAbs().maxCoeff());
  CHECK(et.eigenvalues().real().cwiseAbs().maxCoeff() <=
        1e-10 * ws.cwiseAbs().maxCoeff());
}
