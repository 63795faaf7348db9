#include "koopqg/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "koopqg/ensemble.hpp"
#include "koopqg/errors.hpp"
#include "koopqg/forecast.hpp"
#include "koopqg/koopman.hpp"
#include "koopqg/lyapunov.hpp"
#include "koopqg/rng.hpp"
#include "koopqg/snapshot_io.hpp"

namespace kqg::pipeline {

namespace {

namespace fs = std::filesystem;

std::string hex16(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t ensemble_hash(const RunConfig& cfg) {
  return config_hash(cfg, {"model", "ensemble"});
}

std::string family_tag(const KernelSpec& spec) {
  return spec.family == KernelFamily::Empirical ? "empirical" : "gaussian";
}

EnsembleSet load_named(const RunConfig& cfg, const std::string& name) {
  return load_ensemble(cfg.io.output_dir, name, cfg.model, ensemble_hash(cfg));
}

struct SpectrumBundle {
  GramSystem gram;
  Eigen::MatrixXd S;
  double asymmetry;
  KoopmanSpectrum spec;
};

SpectrumBundle compute_spectrum(const EnsembleSet& train, const KernelSpec& kspec) {
  GramSystem gram = gram_matrix(train, kspec);
  const Eigen::MatrixXd M = generator_matrix(train, kspec);
  GeneratorAssembly gen = assemble_generator(M, gram);
  KoopmanSpectrum spec = spectrum(gen.S, gram, kspec);
  return {std::move(gram), std::move(gen.S), gen.asymmetry, std::move(spec)};
}

void save_complex_matrix(const fs::path& path, const Eigen::MatrixXcd& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write file: " + path.string());
  Field2D re(static_cast<int>(m.cols()), static_cast<int>(m.rows()), 1.0, 1.0,
             FieldKind::Matrix);
  Field2D im = re;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re.at(static_cast<int>(c), static_cast<int>(r)) = m(r, c).real();
      im.at(static_cast<int>(c), static_cast<int>(r)) = m(r, c).imag();
    }
  }
  io::write_record(os, re, 0.0);
  io::write_record(os, im, 0.0);
}

}  // namespace

Field2D base_noise_field(const qg::ModelParams& params, double amplitude,
                         std::uint64_t seed) {
  Field2D noise = params.make_field();
  const double L = params.domain_L;
  for (int m = 1; m <= 4; ++m) {
    for (int n = 1; n <= 4; ++n) {
      const double c = amplitude * rng::gaussian(rng::mix(seed, m, n));
      for (int iy = 0; iy < params.ny; ++iy) {
        const double sy = std::sin(0.5 * n * M_PI * (noise.y(iy) + L) / L);
        for (int ix = 0; ix < params.nx; ++ix)
          noise.at(ix, iy) += c * std::sin(m * M_PI * noise.x(ix) / L) * sy;
      }
    }
  }
  return noise;
}

void cmd_spinup(const RunConfig& cfg) {
  const fs::path dir = cfg.io.output_dir / "spinup";
  fs::create_directories(dir);

  Field2D q0 = axpy(cfg.model.rest_state(), 1.0,
                    base_noise_field(cfg.model, cfg.ensemble.base_noise,
                                     cfg.ensemble.base_seed));
  std::fprintf(stderr, "[koopqg] spinup: base trajectory to t=%g\n",
               cfg.ensemble.base_time);
  const qg::Trajectory base =
      qg::integrate(q0, cfg.model, cfg.ensemble.base_time, cfg.ensemble.base_time);

  const double window = cfg.ensemble.pod_snapshots * cfg.ensemble.pod_stride;
  std::fprintf(stderr, "[koopqg] spinup: collecting %d POD snapshots every %g\n",
               cfg.ensemble.pod_snapshots, cfg.ensemble.pod_stride);
  qg::Trajectory collect = qg::integrate(base.states.back(), cfg.model, window,
                                         cfg.ensemble.pod_stride);
  collect.states.erase(collect.states.begin());  // drop the t=base_time state
  collect.times.erase(collect.times.begin());

  io::save_trajectory(dir / "pod_snapshots.wlnd", collect);
  io::save_field(dir / "base_state.wlnd", collect.states.back(), 0.0);

  io::Manifest man;
  man.set("config_hash", hex16(ensemble_hash(cfg)));
  man.set("base_state", "spinup/base_state.wlnd");
  man.set("pod_snapshots", "spinup/pod_snapshots.wlnd");
  man.set_u64("snapshot_count", collect.states.size());
  man.save(cfg.io.output_dir / "spinup_manifest.txt");
}

void cmd_ensemble(const RunConfig& cfg) {
  const fs::path manifest_path = cfg.io.output_dir / "spinup_manifest.txt";
  if (!fs::exists(manifest_path))
    throw missing_artifact("spinup manifest not found: " + manifest_path.string() +
                           " (run the `spinup` subcommand first)");
  const io::Manifest man = io::Manifest::load(manifest_path);
  if (man.get("config_hash") != hex16(ensemble_hash(cfg)))
    throw missing_artifact("spinup artifacts were produced by a different config; "
                           "re-run `spinup`");

  const Field2D base = io::load_field(cfg.io.output_dir / man.get("base_state"),
                                      cfg.model.dx(), cfg.model.dy());
  const qg::Trajectory snaps = io::load_trajectory(
      cfg.io.output_dir / man.get("pod_snapshots"), cfg.model.dx(), cfg.model.dy());

  const PodBasis pod = compute_pod(snaps.states, cfg.ensemble.n_pod);
  std::fprintf(stderr, "[koopqg] ensemble: POD kept %zu modes, lambda_1=%g\n",
               pod.modes.size(), pod.eigenvalues.empty() ? 0.0 : pod.eigenvalues[0]);

  auto build = [&](std::uint64_t seed, int p, EnsembleRole role,
                   const std::string& name) {
    const auto members = generate_members(base, pod, p, seed);
    EnsembleSet set = spin_up_and_record(members, cfg.model, cfg.ensemble.spin_up,
                                         cfg.ensemble.horizon,
                                         cfg.ensemble.output_every);
    set.seed = seed;
    set.role = role;
    save_ensemble(cfg.io.output_dir, name, set, ensemble_hash(cfg));
    std::fprintf(stderr, "[koopqg] ensemble: %s set with p=%d recorded\n",
                 name.c_str(), set.p());
  };
  build(cfg.ensemble.seed_train, cfg.ensemble.p, EnsembleRole::Training, "train");
  build(cfg.ensemble.seed_test, cfg.ensemble.p_test, EnsembleRole::Test, "test");
}

void cmd_koopman(const RunConfig& cfg, const std::vector<double>& average_times) {
  const EnsembleSet train = load_named(cfg, "train");
  const SpectrumBundle bundle = compute_spectrum(train, cfg.kernel);
  std::fprintf(stderr, "[koopqg] koopman: asymmetry diagnostic %.3g\n",
               bundle.asymmetry);
  if (train.times().size() > 1) {
    const double drift =
        isometry_drift(train, cfg.kernel, train.times().size() / 2);
    std::fprintf(stderr, "[koopqg] koopman: isometry drift at t=%g: %.3g\n",
                 train.times()[train.times().size() / 2], drift);
  }

  // Experimental: average |omega| over spectra re-anchored at later output
  // times (tendencies recomputed from the stored states).
  Eigen::VectorXd omega_avg = bundle.spec.omegas.cwiseAbs();
  if (!average_times.empty()) {
    int count = 1;
    for (double t : average_times) {
      const std::size_t k = train.members[0].index_of_time(t);
      if (k == 0) continue;
      EnsembleSet shifted;
      shifted.params = train.params;
      for (const auto& m : train.members) {
        qg::Trajectory tr;
        tr.times = {0.0};
        tr.states = {m.states[k]};
        shifted.members.push_back(std::move(tr));
        shifted.initial_tendencies.push_back(
            qg::flow_tendency(m.states[k], train.params));
      }
      const SpectrumBundle sb = compute_spectrum(shifted, cfg.kernel);
      omega_avg += sb.spec.omegas.cwiseAbs();
      ++count;
    }
    omega_avg /= count;
    std::fprintf(stderr,
                 "[koopqg] koopman: averaged |omega| over %d anchor times "
                 "(experimental)\n", count);
  }

  const auto h = config_hash(cfg, {"model", "ensemble", "kernel", "lyapunov"});
  const std::string tag = family_tag(cfg.kernel);
  std::vector<std::string> cols = {"index", "omega", "lyapunov_time"};
  if (!average_times.empty()) cols.push_back("omega_abs_avg");
  io::CsvWriter csv(cfg.io.output_dir / ("spectrum_" + tag + ".csv"), h, cols);
  for (Eigen::Index l = 0; l < bundle.spec.omegas.size(); ++l) {
    std::vector<double> row = {
        static_cast<double>(l), bundle.spec.omegas(l),
        lyapunov_time(std::abs(bundle.spec.omegas(l)), cfg.lyapunov.amplification)};
    if (!average_times.empty()) row.push_back(omega_avg(l));
    csv.row(row);
  }

  save_complex_matrix(cfg.io.output_dir / ("koopman_V_" + tag + ".wlnd"),
                      bundle.spec.V);
  save_complex_matrix(cfg.io.output_dir / ("koopman_psi0_" + tag + ".wlnd"),
                      bundle.spec.psi0);
}

void cmd_lyapunov(const RunConfig& cfg) {
  const EnsembleSet train = load_named(cfg, "train");
  const SpectrumBundle bundle = compute_spectrum(train, cfg.kernel);
  const TangentLinear tl = tangent_linear_matrix(bundle.S, bundle.gram, cfg.kernel);
  const LyapunovReport rep =
      lyapunov_report(bundle.spec, bundle.gram, tl.T, cfg.lyapunov.amplification,
                      cfg.lyapunov.sigma_threshold);

  const auto h = config_hash(cfg, {"model", "ensemble", "kernel", "lyapunov"});
  const std::string tag = family_tag(cfg.kernel);
  {
    io::CsvWriter csv(cfg.io.output_dir / ("lyapunov_modal_" + tag + ".csv"), h,
                      {"index", "omega_abs", "kmle", "kmle_alt", "t_modal", "t_kmle"});
    for (std::size_t l = 0; l < rep.modal_sigmas.size(); ++l)
      csv.row({static_cast<double>(l), rep.modal_sigmas[l], rep.kmle[l],
               rep.kmle_alt[l], rep.times_modal[l], rep.times_kmle[l]});
  }
  {
    io::CsvWriter csv(cfg.io.output_dir / ("lyapunov_global_" + tag + ".csv"), h,
                      {"index", "sigma", "lyapunov_time"});
    for (std::size_t i = 0; i < rep.global_sigmas.size(); ++i)
      csv.row({static_cast<double>(i), rep.global_sigmas[i], rep.times_global[i]});
  }
}

void cmd_reconstruct(const RunConfig& cfg) {
  const EnsembleSet train = load_named(cfg, "train");
  const EnsembleSet test = load_named(cfg, "test");
  const SpectrumBundle bundle = compute_spectrum(train, cfg.kernel);

  ErrorCurveOptions opt;
  opt.amplification = cfg.lyapunov.amplification;
  const ErrorCurves curves =
      error_curves(test, train, bundle.gram, cfg.kernel, &bundle.spec, opt);

  const auto h = config_hash(cfg, {"model", "ensemble", "kernel", "lyapunov"});
  const std::string tag = family_tag(cfg.kernel);
  io::CsvWriter csv(cfg.io.output_dir / ("errors_reconstruction_" + tag + ".csv"), h,
                    {"time", "mean_err_plain", "std_plain", "mean_err_filtered",
                     "std_filtered", "mean_err_mean", "err_projection"});
  for (std::size_t k = 0; k < curves.times.size(); ++k)
    csv.row({curves.times[k], curves.mean_plain[k], curves.std_plain[k],
             curves.mean_filtered[k], curves.std_filtered[k],
             curves.mean_ensavg[k], curves.projection[k]});
}

void cmd_assimilate(const RunConfig& cfg) {
  const EnsembleSet train = load_named(cfg, "train");
  const EnsembleSet test = load_named(cfg, "test");

  const DaErrorCurves curves =
      da_error_curves(test, train, cfg.assim, cfg.assim_single_time);

  const auto h = config_hash(cfg, {"model", "ensemble", "assim"});
  io::CsvWriter csv(cfg.io.output_dir / "errors_assimilation.csv", h,
                    {"time", "err_series", "err_single", "err_best_const",
                     "err_ensavg"});
  for (std::size_t k = 0; k < curves.times.size(); ++k)
    csv.row({curves.times[k], curves.series[k], curves.single[k],
             curves.best_const[k], curves.ensavg[k]});

  // Estimated fields for the first test member under both benchmarks.
  ObservationSetup member_setup = cfg.assim;
  member_setup.seed = rng::mix(cfg.assim.seed, 0x0b5, 0);
  ObservationSetup member_single = member_setup;
  member_single.obs_times = {cfg.assim_single_time};

  const auto& truth = test.members[0];
  const Eigen::MatrixXd R_series = build_R(train, member_setup);
  const Eigen::MatrixXd R_single = build_R(train, member_single);
  const auto obs_series = synthesize_observations(truth, member_setup);
  const auto obs_single = synthesize_observations(truth, member_single);
  const auto beta_series = enoi_solve(obs_series, train, R_series, member_setup);
  const auto beta_single = enoi_solve(obs_single, train, R_single, member_single);

  std::ofstream os_s(cfg.io.output_dir / "da_estimate_series_member0.wlnd",
                     std::ios::binary);
  std::ofstream os_1(cfg.io.output_dir / "da_estimate_single_member0.wlnd",
                     std::ios::binary);
  for (double t : cfg.assim.obs_times) {
    io::write_record(os_s, reconstruct(beta_series.beta, train, t), t);
    io::write_record(os_1, reconstruct(beta_single.beta, train, t), t);
  }
}

}  // namespace kqg::pipeline
