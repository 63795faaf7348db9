// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code 0 only if all pass.
//
// Profile: the desk-scale reproductions default to p = 40/40 training/test
// members (fast profile). Set KOOPQG_ACCEPTANCE_PROFILE=full for p = 100/100.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "koopqg/assimilation.hpp"
#include "koopqg/config.hpp"
#include "koopqg/ensemble.hpp"
#include "koopqg/forecast.hpp"
#include "koopqg/koopman.hpp"
#include "koopqg/lyapunov.hpp"
#include "koopqg/pipeline.hpp"
#include "koopqg/rng.hpp"
#include "koopqg/snapshot_io.hpp"

using namespace kqg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, double seconds,
            const std::string& detail = "") {
  std::printf("%s criterion %2d: %s (%.1fs)%s%s\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), seconds, detail.empty() ? "" : " -- ",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void run(int index, const std::string& name,
         const std::function<bool(std::string&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(index, name, pass, sec, detail);
}

Field2D random_interior_field(const qg::ModelParams& p, std::uint64_t seed,
                              int margin) {
  Field2D f = p.make_field();
  for (int iy = margin; iy < p.ny - margin; ++iy)
    for (int ix = margin; ix < p.nx - margin; ++ix)
      f.at(ix, iy) = rng::gaussian(rng::mix(seed, ix, iy));
  return f;
}

Field2D smooth_perturbation(const qg::ModelParams& p, std::uint64_t seed,
                            double amplitude) {
  Field2D f = p.make_field();
  const double L = p.domain_L;
  for (int m = 1; m <= 3; ++m) {
    for (int n = 1; n <= 3; ++n) {
      const double c = amplitude * rng::gaussian(rng::mix(seed, m, n));
      for (int iy = 0; iy < p.ny; ++iy) {
        const double sy = std::sin(0.5 * n * M_PI * (f.y(iy) + L) / L);
        for (int ix = 0; ix < p.nx; ++ix)
          f.at(ix, iy) += c * std::sin(m * M_PI * f.x(ix) / L) * sy;
      }
    }
  }
  return f;
}

double max_abs_diff(const Field2D& a, const Field2D& b) {
  double m = 0.0;
  for (int j = 0; j < a.ny(); ++j)
    for (int i = 0; i < a.nx(); ++i)
      m = std::max(m, std::abs(a.at(i, j) - b.at(i, j)));
  return m;
}

/// Shared desk-scale context: the paper-protocol ensembles at 64x128.
struct Context {
  RunConfig cfg;
  EnsembleSet train;
  EnsembleSet test;
};

Context build_context() {
  const bool full = [] {
    const char* prof = std::getenv("KOOPQG_ACCEPTANCE_PROFILE");
    return prof && std::string(prof) == "full";
  }();
  const std::string p = full ? "100" : "40";

  Context ctx;
  ctx.cfg = default_config_with_overrides(
      {"ensemble.p=" + p, "ensemble.p_test=" + p});
  const auto& cfg = ctx.cfg;

  std::fprintf(stderr, "[acceptance] building ensembles (p=%s, grid %dx%d)...\n",
               p.c_str(), cfg.model.nx, cfg.model.ny);
  const Field2D q0 =
      axpy(cfg.model.rest_state(), 1.0,
           pipeline::base_noise_field(cfg.model, cfg.ensemble.base_noise,
                                      cfg.ensemble.base_seed));
  const qg::Trajectory base =
      qg::integrate(q0, cfg.model, cfg.ensemble.base_time, cfg.ensemble.base_time);
  qg::Trajectory collect = qg::integrate(
      base.states.back(), cfg.model,
      cfg.ensemble.pod_snapshots * cfg.ensemble.pod_stride, cfg.ensemble.pod_stride);
  collect.states.erase(collect.states.begin());
  const PodBasis pod = compute_pod(collect.states, cfg.ensemble.n_pod);

  auto make = [&](std::uint64_t seed, int count) {
    const auto members = generate_members(collect.states.back(), pod, count, seed);
    return spin_up_and_record(members, cfg.model, cfg.ensemble.spin_up,
                              cfg.ensemble.horizon, cfg.ensemble.output_every);
  };
  ctx.train = make(cfg.ensemble.seed_train, cfg.ensemble.p);
  ctx.test = make(cfg.ensemble.seed_test, cfg.ensemble.p_test);
  std::fprintf(stderr, "[acceptance] ensembles ready (train %d, test %d)\n",
               ctx.train.p(), ctx.test.p());
  return ctx;
}

}  // namespace

int main() {
  qg::ModelParams params;  // 64x128 reference grid
  params.warn_cfl = false;

  // 1. Solver conservation and Poisson exactness
  run(1, "solver conservation (Arakawa sums, Poisson residual)",
      [&](std::string& detail) {
        const double area = params.domain_L * 2 * params.domain_L;
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
          const Field2D psi = random_interior_field(params, 900 + trial, 2);
          const Field2D q = random_interior_field(params, 800 + trial, 2);
          const Field2D jac = qg::arakawa_jacobian(psi, q);
          const double sq = std::abs(inner(jac, q));
          const double sp = std::abs(inner(jac, psi));
          const double bound_q = 1e-12 * jac.max_abs() * q.max_abs() * area;
          const double bound_p = 1e-12 * jac.max_abs() * psi.max_abs() * area;
          worst = std::max({worst, sq / bound_q, sp / bound_p});
          if (sq >= bound_q || sp >= bound_p) return false;

          const Field2D omega = random_interior_field(params, 700 + trial, 1);
          const Field2D sol = qg::solve_poisson(omega);
          double resid = 0.0;
          const double ihx2 = 1.0 / (sol.dx() * sol.dx());
          const double ihy2 = 1.0 / (sol.dy() * sol.dy());
          for (int jy = 1; jy < params.ny - 1; ++jy)
            for (int ix = 1; ix < params.nx - 1; ++ix) {
              const double lap =
                  ihx2 * (sol.at(ix - 1, jy) + sol.at(ix + 1, jy) - 2 * sol.at(ix, jy)) +
                  ihy2 * (sol.at(ix, jy - 1) + sol.at(ix, jy + 1) - 2 * sol.at(ix, jy));
              resid = std::max(resid, std::abs(lap - omega.at(ix, jy)));
            }
          if (resid >= 1e-12 * omega.max_abs()) return false;
        }
        std::ostringstream os;
        os << "worst conservation ratio vs bound: " << worst;
        detail = os.str();
        return true;
      });

  // 2. RK4 convergence order at the reference resolution
  run(2, "RK4 order >= 3.8 (dt-halving, 64x128, t_end=1e-3)",
      [&](std::string& detail) {
        const Field2D q0 =
            axpy(params.rest_state(), 1.0, smooth_perturbation(params, 61, 0.01));
        auto terminal = [&](double dt) {
          auto pp = params;
          pp.dt = dt;
          return qg::integrate(q0, pp, 0.001, 0.001).states.back();
        };
        const Field2D ref = terminal(1e-4 / 8);
        const double e1 = max_abs_diff(terminal(1e-4), ref);
        const double e2 = max_abs_diff(terminal(5e-5), ref);
        const double order = std::log2(e1 / e2);
        std::ostringstream os;
        os << "observed order " << order;
        detail = os.str();
        return order >= 3.8;
      });

  Context ctx = build_context();
  const auto& train = ctx.train;
  const auto& test = ctx.test;

  KernelSpec emp_spec;
  KernelSpec gauss_spec;
  gauss_spec.family = KernelFamily::Gaussian;

  // 3. Spectrum structure
  run(3, "spectrum structure (imaginary, paired, zero mode for odd p)",
      [&](std::string& detail) {
        for (const auto* spec : {&emp_spec, &gauss_spec}) {
          const GramSystem gram = gram_matrix(train, *spec);
          const MatrixXd M = generator_matrix(train, *spec);
          const auto gen = assemble_generator(M, gram);
          const KoopmanSpectrum ks = spectrum(gen.S, gram, *spec);
          const int p = train.p();
          const double wmax = ks.omegas.cwiseAbs().maxCoeff();

          // purely imaginary: the Hermitian route makes Re(lambda) exactly 0;
          // verify through the non-symmetric eigensolver instead.
          Eigen::ComplexEigenSolver<MatrixXd> eig(gen.S);
          if (eig.eigenvalues().real().cwiseAbs().maxCoeff() >= 1e-10 * wmax)
            return false;

          // +/- pairing of the omega multiset
          std::vector<bool> used(p, false);
          for (int i = 0; i < p; ++i) {
            if (used[i]) continue;
            bool matched = std::abs(ks.omegas(i)) <= 1e-10 * wmax;
            for (int j = i + 1; j < p && !matched; ++j) {
              if (!used[j] &&
                  std::abs(ks.omegas(i) + ks.omegas(j)) <= 1e-10 * wmax) {
                used[i] = used[j] = true;
                matched = true;
              }
            }
            if (!matched) return false;
          }

          // odd-p variant: drop the last member
          EnsembleSet odd = train;
          odd.members.pop_back();
          odd.initial_tendencies.pop_back();
          const GramSystem gram_odd = gram_matrix(odd, *spec);
          const auto gen_odd =
              assemble_generator(generator_matrix(odd, *spec), gram_odd);
          const KoopmanSpectrum ks_odd = spectrum(gen_odd.S, gram_odd, *spec);
          const double wmax_odd = ks_odd.omegas.cwiseAbs().maxCoeff();
          if (ks_odd.omegas.cwiseAbs().minCoeff() > 1e-12 * wmax_odd) return false;
        }
        detail = "empirical and Gaussian kernels";
        return true;
      });

  // 4. Kernel expansion exactness
  run(4, "kernel expansion |sum psi psi* - K*ms|_F < 1e-8 |K|_F (both kernels)",
      [&](std::string& detail) {
        double worst = 0.0;
        for (const auto* spec : {&emp_spec, &gauss_spec}) {
          const GramSystem gram = gram_matrix(train, *spec);
          const auto gen = assemble_generator(generator_matrix(train, *spec), gram);
          const KoopmanSpectrum ks = spectrum(gen.S, gram, *spec);
          const MatrixXd target = gram.measure_scale() * gram.K();
          const double err =
              ((ks.psi0 * ks.psi0.adjoint()).real() - target).norm();
          worst = std::max(worst, err / gram.K().norm());
          if (err >= 1e-8 * gram.K().norm()) return false;
        }
        std::ostringstream os;
        os << "worst relative error " << worst;
        detail = os.str();
        return true;
      });

  // 5. Self-reconstruction of training members (Gaussian kernel, ell_G = 1)
  run(5, "self-reconstruction: |beta - e_i|_inf < 1e-6, t0 error < 1e-6",
      [&](std::string& detail) {
        const GramSystem gram = gram_matrix(train, gauss_spec);
        double worst_beta = 0.0, worst_rec = 0.0;
        for (int i = 0; i < train.p(); ++i) {
          const auto rc = regression_coefficients(train.members[i].states[0],
                                                  train, gram, gauss_spec);
          VectorXd e = VectorXd::Zero(train.p());
          e(i) = 1.0;
          worst_beta = std::max(worst_beta, (rc.beta - e).cwiseAbs().maxCoeff());
          const Field2D recon = reconstruct(rc.beta, train, 0.0);
          const double rel =
              std::sqrt(norm2(axpy(recon, -1.0, train.members[i].states[0])) /
                        norm2(train.members[i].states[0]));
          worst_rec = std::max(worst_rec, rel);
        }
        std::ostringstream os;
        os << "worst |beta-e|=" << worst_beta << ", worst rel err=" << worst_rec;
        detail = os.str();
        return worst_beta < 1e-6 && worst_rec < 1e-6;
      });

  // 6. Lyapunov identities
  run(6, "Lyapunov identities (modal times, KMLE ratio, K=I global spectrum)",
      [&](std::string& detail) {
        const GramSystem gram = gram_matrix(train, gauss_spec);
        const auto gen =
            assemble_generator(generator_matrix(train, gauss_spec), gram);
        const KoopmanSpectrum ks = spectrum(gen.S, gram, gauss_spec);
        const auto tl = tangent_linear_matrix(gen.S, gram, gauss_spec);
        const LyapunovReport rep = lyapunov_report(ks, gram, tl.T, 1e3, 1e-5);

        for (std::size_t l = 0; l < rep.modal_sigmas.size(); ++l) {
          if (rep.modal_sigmas[l] == 0.0) {
            if (!std::isinf(rep.times_modal[l])) return false;
          } else if (rep.times_modal[l] != std::log(1e3) / rep.modal_sigmas[l]) {
            return false;
          }
        }

        const double wmax = ks.omegas.cwiseAbs().maxCoeff();
        double ratio = -1.0;
        for (int l = 0; l < train.p(); ++l) {
          if (std::abs(ks.omegas(l)) <= 1e-10 * wmax) continue;
          const double r = rep.kmle[l] / std::abs(ks.omegas(l));
          if (ratio < 0) ratio = r;
          if (std::abs(r - ratio) > 1e-8 * ratio) return false;
        }

        // K replaced by the identity: global spectrum equals {|omega|}
        KernelSpec id_spec;
        id_spec.measure_norm = MeasureNorm::None;
        const GramSystem gram_id(MatrixXd::Identity(train.p(), train.p()), id_spec);
        const MatrixXd M = generator_matrix(train, emp_spec);
        const auto gen_id = assemble_generator(M, gram_id);
        const KoopmanSpectrum ks_id = spectrum(gen_id.S, gram_id, id_spec);
        const auto tl_id = tangent_linear_matrix(gen_id.S, gram_id, id_spec);
        auto sigmas = global_spectrum(tl_id.T, 0.0);
        auto expect = modal_sigma(ks_id);
        std::sort(expect.begin(), expect.end(), std::greater<>());
        const double scale = expect.front();
        for (std::size_t i = 0; i < sigmas.size(); ++i)
          if (std::abs(sigmas[i] - expect[i]) > 1e-8 * scale) return false;

        std::ostringstream os;
        os << "KMLE/|omega| = " << ratio;
        detail = os.str();
        return true;
      });

  // 7. Reconstruction error orderings (desk-scale errors-1 reproduction)
  ErrorCurves emp_curves, gauss_curves;
  run(7, "reconstruction error orderings (empirical/Gaussian/filtered)",
      [&](std::string& detail) {
        ErrorCurveOptions opt;
        {
          const GramSystem gram = gram_matrix(train, emp_spec);
          const auto gen =
              assemble_generator(generator_matrix(train, emp_spec), gram);
          const KoopmanSpectrum ks = spectrum(gen.S, gram, emp_spec);
          emp_curves = error_curves(test, train, gram, emp_spec, &ks, opt);
        }
        {
          const GramSystem gram = gram_matrix(train, gauss_spec);
          const auto gen =
              assemble_generator(generator_matrix(train, gauss_spec), gram);
          const KoopmanSpectrum ks = spectrum(gen.S, gram, gauss_spec);
          gauss_curves = error_curves(test, train, gram, gauss_spec, &ks, opt);
        }
        const auto& times = emp_curves.times;

        // (a) empirical overtakes the ensemble average somewhere in [0.1, 0.3]
        bool overtakes = false;
        for (std::size_t k = 0; k < times.size(); ++k)
          if (times[k] >= 0.1 && times[k] <= 0.3 &&
              emp_curves.mean_plain[k] > emp_curves.mean_ensavg[k])
            overtakes = true;
        // (b) Gaussian stays below the ensemble average for t <= 0.3
        bool gauss_below = true;
        // (c) filtered vs plain and vs ensemble average
        bool filtered_ok = true;
        // (d) projection lower-bounds everything
        bool proj_floor = true;
        for (std::size_t k = 0; k < times.size(); ++k) {
          if (times[k] <= 0.3 &&
              gauss_curves.mean_plain[k] >= gauss_curves.mean_ensavg[k])
            gauss_below = false;
          if (times[k] >= 0.15 &&
              gauss_curves.mean_filtered[k] > 1.05 * gauss_curves.mean_plain[k])
            filtered_ok = false;
          if (times[k] <= 0.3 &&
              gauss_curves.mean_filtered[k] > gauss_curves.mean_ensavg[k])
            filtered_ok = false;
          const double slack = 1e-12 * std::max(1.0, emp_curves.mean_ensavg[k]);
          if (emp_curves.projection[k] > emp_curves.mean_plain[k] + slack ||
              emp_curves.projection[k] > emp_curves.mean_ensavg[k] + slack ||
              gauss_curves.projection[k] > gauss_curves.mean_plain[k] + slack ||
              gauss_curves.projection[k] > gauss_curves.mean_filtered[k] + slack)
            proj_floor = false;
        }
        std::ostringstream os;
        os << "(a)=" << overtakes << " (b)=" << gauss_below
           << " (c)=" << filtered_ok << " (d)=" << proj_floor;
        detail = os.str();
        return overtakes && gauss_below && filtered_ok && proj_floor;
      });

  // 8. Swath data assimilation orderings (desk-scale errors-2 reproduction)
  run(8, "swath DA orderings (series vs oracle, single-time overfit window)",
      [&](std::string& detail) {
        const DaErrorCurves da =
            da_error_curves(test, train, ctx.cfg.assim, ctx.cfg.assim_single_time);
        const auto& times = da.times;

        double avg_series = 0.0, avg_best = 0.0;
        for (std::size_t k = 0; k < times.size(); ++k) {
          avg_series += da.series[k];
          avg_best += da.best_const[k];
        }
        const bool near_optimal = avg_series <= 1.5 * avg_best;

        std::size_t k_obs = 0;
        for (std::size_t k = 0; k < times.size(); ++k)
          if (std::abs(times[k] - ctx.cfg.assim_single_time) < 1e-9) k_obs = k;
        const bool overfit = da.single[k_obs] <= da.series[k_obs];

        bool window_ok = true, grows = true;
        for (std::size_t k = 0; k < times.size(); ++k) {
          if (std::abs(times[k] - ctx.cfg.assim_single_time) <= 0.03 + 1e-9) {
            if (da.single[k] > da.ensavg[k]) window_ok = false;
            if (da.single[k] < da.single[k_obs] - 1e-12) grows = false;
          }
        }
        std::ostringstream os;
        os << "series/best=" << avg_series / avg_best
           << " single@obs<=series=" << overfit << " window=" << window_ok
           << " grows=" << grows;
        detail = os.str();
        return near_optimal && overfit && window_ok && grows;
      });

  // 9. Quadratic cost correctness at alpha = 10
  run(9, "EnOI gradient check < 1e-6 and positive-definite Hessian",
      [&](std::string& detail) {
        auto setup = ctx.cfg.assim;
        setup.seed = rng::mix(setup.seed, 0x0b5, 0);
        const MatrixXd R = build_R(train, setup);
        const auto obs = synthesize_observations(test.members[0], setup);
        const VectorXd beta = enoi_solve(obs, train, R, setup).beta;

        const int p = train.p();
        auto fd_grad = [&](const VectorXd& at) {
          VectorXd g(p);
          const double h = 1e-6;
          for (int i = 0; i < p; ++i) {
            VectorXd up = at, dn = at;
            up(i) += h;
            dn(i) -= h;
            g(i) = (enoi_cost(up, obs, train, R, setup) -
                    enoi_cost(dn, obs, train, R, setup)) / (2 * h);
          }
          return g;
        };
        const double rel = fd_grad(beta).norm() / fd_grad(VectorXd::Zero(p)).norm();

        // Hessian = mean_t H^t R^-1 H + alpha^2 I, alpha = 10
        const Eigen::LLT<MatrixXd> llt(R);
        MatrixXd G = MatrixXd::Zero(p, p);
        for (double t : setup.obs_times) {
          MatrixXd H(static_cast<Eigen::Index>(setup.column_positions.size()) *
                         ctx.cfg.model.ny, p);
          for (int j = 0; j < p; ++j)
            H.col(j) = observe(train.members[j].at_time(t), setup);
          G += H.transpose() * llt.solve(H);
        }
        G /= static_cast<double>(setup.obs_times.size());
        const MatrixXd hess = G + 100.0 * MatrixXd::Identity(p, p);
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(hess);
        const bool pd = eig.eigenvalues().minCoeff() > 0.0;

        std::ostringstream os;
        os << "relative gradient " << rel << ", min Hessian eig "
           << eig.eigenvalues().minCoeff();
        detail = os.str();
        return rel < 1e-6 && pd;
      });

  // 10. Full-pipeline byte determinism
  run(10, "pipeline determinism: byte-identical CSVs and snapshots",
      [&](std::string& detail) {
        namespace fs = std::filesystem;
        const fs::path out1 = fs::temp_directory_path() / "koopqg_acc_det1";
        const fs::path out2 = fs::temp_directory_path() / "koopqg_acc_det2";
        fs::remove_all(out1);
        fs::remove_all(out2);
        for (const auto& out : {out1, out2}) {
          const RunConfig cfg = default_config_with_overrides(
              {"model.nx=16", "model.ny=32", "model.dt=0.0002",
               "ensemble.p=4", "ensemble.p_test=3", "ensemble.n_pod=3",
               "ensemble.base_time=0.01", "ensemble.base_noise=0.02",
               "ensemble.pod_snapshots=8", "ensemble.pod_stride=0.002",
               "ensemble.spin_up=0.002", "ensemble.horizon=0.01",
               "ensemble.output_every=0.002",
               "assim.obs_times=0:0.002:0.008", "assim.single_time=0.004",
               "io.output_dir=" + out.string()});
          pipeline::cmd_spinup(cfg);
          pipeline::cmd_ensemble(cfg);
          pipeline::cmd_koopman(cfg);
          pipeline::cmd_lyapunov(cfg);
          pipeline::cmd_reconstruct(cfg);
          pipeline::cmd_assimilate(cfg);
        }
        auto slurp = [](const fs::path& p) {
          std::ifstream is(p, std::ios::binary);
          std::ostringstream ss;
          ss << is.rdbuf();
          return ss.str();
        };
        int compared = 0;
        for (const auto& entry : fs::recursive_directory_iterator(out1)) {
          if (!entry.is_regular_file()) continue;
          const auto rel = fs::relative(entry.path(), out1);
          if (!fs::exists(out2 / rel)) return false;
          if (slurp(entry.path()) != slurp(out2 / rel)) return false;
          ++compared;
        }
        fs::remove_all(out1);
        fs::remove_all(out2);
        std::ostringstream os;
        os << compared << " artifacts compared";
        detail = os.str();
        return compared > 0;
      });

  std::printf("%s: %d/10 criteria passed\n", g_failures == 0 ? "OK" : "FAILURES",
              10 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
