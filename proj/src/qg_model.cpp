#include "koopqg/qg_model.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "koopqg/errors.hpp"

namespace kqg::qg {

namespace {

// fftw_plan_r2r_2d is not thread safe; executing distinct plans is.
std::mutex g_fftw_plan_mutex;

/// Exact solver for the interior 5-point Dirichlet Poisson problem via a
/// double DST-I (FFTW RODFT00). The transform diagonalizes the stencil, so
/// the residual is round-off only.
class PoissonSolver {
 public:
  PoissonSolver(int nx, int ny, double dx, double dy)
      : nx_(nx), ny_(ny), mx_(nx - 2), my_(ny - 2),
        work_(static_cast<std::size_t>(mx_) * my_),
        inv_eig_(static_cast<std::size_t>(mx_) * my_) {
    const double L = dx * (nx - 1);
    for (int n = 1; n <= my_; ++n) {
      // sin^2 arguments follow the order-2 stencil eigenvalues on each axis
      const double sy = std::sin(0.5 * n * M_PI * dy / (2.0 * L));
      for (int m = 1; m <= mx_; ++m) {
        const double sx = std::sin(0.5 * m * M_PI * dx / L);
        const double mu = -4.0 / (dx * dx) * sx * sx - 4.0 / (dy * dy) * sy * sy;
        inv_eig_[static_cast<std::size_t>(n - 1) * mx_ + (m - 1)] = 1.0 / mu;
      }
    }
    std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
    // FFTW_ESTIMATE keeps plan selection deterministic run-to-run.
    plan_ = fftw_plan_r2r_2d(my_, mx_, work_.data(), work_.data(),
                             FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
    if (!plan_) throw numerical_error("PoissonSolver: fftw plan creation failed");
  }

  ~PoissonSolver() {
    std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
    fftw_destroy_plan(plan_);
  }

  PoissonSolver(const PoissonSolver&) = delete;
  PoissonSolver& operator=(const PoissonSolver&) = delete;

  void solve(const Field2D& omega, Field2D& psi) {
    for (int iy = 1; iy < ny_ - 1; ++iy)
      for (int ix = 1; ix < nx_ - 1; ++ix)
        work_[static_cast<std::size_t>(iy - 1) * mx_ + (ix - 1)] = omega.at(ix, iy);

    fftw_execute(plan_);
    const double scale = 1.0 / (4.0 * (nx_ - 1) * (ny_ - 1));  // RODFT00 norm
    for (std::size_t i = 0; i < work_.size(); ++i) work_[i] *= inv_eig_[i] * scale;
    fftw_execute(plan_);

    for (int iy = 1; iy < ny_ - 1; ++iy)
      for (int ix = 1; ix < nx_ - 1; ++ix)
        psi.at(ix, iy) = work_[static_cast<std::size_t>(iy - 1) * mx_ + (ix - 1)];
  }

 private:
  int nx_, ny_, mx_, my_;
  std::vector<double> work_;
  std::vector<double> inv_eig_;
  fftw_plan plan_;
};

PoissonSolver& solver_for(const Field2D& f) {
  struct Key {
    int nx, ny;
    double dx, dy;
    bool operator<(const Key& o) const {
      return std::tie(nx, ny, dx, dy) < std::tie(o.nx, o.ny, o.dx, o.dy);
    }
  };
  thread_local std::map<Key, std::unique_ptr<PoissonSolver>> cache;
  const Key key{f.nx(), f.ny(), f.dx(), f.dy()};
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_unique<PoissonSolver>(f.nx(), f.ny(),
                                                            f.dx(), f.dy()))
             .first;
  }
  return *it->second;
}

void check_grid(const Field2D& a, const ModelParams& p, const char* where) {
  if (a.nx() != p.nx || a.ny() != p.ny)
    throw std::invalid_argument(std::string(where) + ": field grid does not match params");
}

}  // namespace

void ModelParams::validate() const {
  std::ostringstream bad;
  if (!(rossby > 0)) bad << "rossby must be > 0; ";
  if (!(munk_ratio > 0)) bad << "munk_ratio must be > 0; ";
  if (!(domain_L > 0)) bad << "domain_L must be > 0; ";
  if (nx < 8) bad << "nx must be >= 8; ";
  if (ny < 8) bad << "ny must be >= 8; ";
  if (!(dt > 0)) bad << "dt must be > 0; ";
  if (!bad.str().empty()) throw config_error("ModelParams: " + bad.str());
}

Field2D ModelParams::make_field(FieldKind kind) const {
  return Field2D(nx, ny, dx(), dy(), kind);
}

Field2D ModelParams::rest_state() const {
  Field2D q = make_field(FieldKind::PotentialVorticity);
  for (int iy = 0; iy < ny; ++iy) {
    const double y = q.y(iy);
    for (int ix = 0; ix < nx; ++ix) q.at(ix, iy) = y;
  }
  return q;
}

const Field2D& Trajectory::at_time(double t) const {
  return states[index_of_time(t)];
}

std::size_t Trajectory::index_of_time(double t) const {
  if (times.empty()) throw std::invalid_argument("Trajectory::at_time: empty trajectory");
  std::size_t best = 0;
  double best_d = std::abs(times[0] - t);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double d = std::abs(times[i] - t);
    if (d < best_d) { best_d = d; best = i; }
  }
  const double spacing = times.size() > 1 ? times[1] - times[0] : 1.0;
  if (best_d > 1e-6 * std::max(1.0, spacing)) {
    std::fprintf(stderr,
                 "[koopqg] warning: requested time %.6g resolved to nearest snapshot %.6g\n",
                 t, times[best]);
  }
  return best;
}

Field2D solve_poisson(const Field2D& omega) {
  if (!omega.all_finite())
    throw numerical_error("solve_poisson: non-finite vorticity input");
  Field2D psi(omega.nx(), omega.ny(), omega.dx(), omega.dy(),
              FieldKind::Streamfunction);
  solver_for(omega).solve(omega, psi);
  return psi;
}

std::pair<Field2D, Field2D> diagnose(const Field2D& q, const ModelParams& p) {
  check_grid(q, p, "diagnose");
  if (!q.all_finite()) throw numerical_error("diagnose: non-finite input state");
  Field2D omega(q.nx(), q.ny(), q.dx(), q.dy(), FieldKind::Vorticity);
  for (int iy = 0; iy < q.ny(); ++iy) {
    const double y = q.y(iy);
    for (int ix = 0; ix < q.nx(); ++ix)
      omega.at(ix, iy) = (q.at(ix, iy) - y) / p.rossby;
  }
  Field2D psi = solve_poisson(omega);
  return {std::move(omega), std::move(psi)};
}

Field2D arakawa_jacobian(const Field2D& psi, const Field2D& q) {
  if (!psi.same_grid(q)) throw std::invalid_argument("arakawa_jacobian: grid mismatch");
  const int nx = psi.nx(), ny = psi.ny();
  Field2D out(nx, ny, psi.dx(), psi.dy(), FieldKind::PotentialVorticity);
  const double fac = 1.0 / (12.0 * psi.dx() * psi.dy());
  for (int j = 1; j < ny - 1; ++j) {
    for (int i = 1; i < nx - 1; ++i) {
      const double j1 =
          (psi.at(i + 1, j) - psi.at(i - 1, j)) * (q.at(i, j + 1) - q.at(i, j - 1)) -
          (psi.at(i, j + 1) - psi.at(i, j - 1)) * (q.at(i + 1, j) - q.at(i - 1, j));
      const double j2 =
          psi.at(i + 1, j) * (q.at(i + 1, j + 1) - q.at(i + 1, j - 1)) -
          psi.at(i - 1, j) * (q.at(i - 1, j + 1) - q.at(i - 1, j - 1)) -
          psi.at(i, j + 1) * (q.at(i + 1, j + 1) - q.at(i - 1, j + 1)) +
          psi.at(i, j - 1) * (q.at(i + 1, j - 1) - q.at(i - 1, j - 1));
      const double j3 =
          psi.at(i + 1, j + 1) * (q.at(i, j + 1) - q.at(i + 1, j)) -
          psi.at(i - 1, j - 1) * (q.at(i - 1, j) - q.at(i, j - 1)) -
          psi.at(i - 1, j + 1) * (q.at(i, j + 1) - q.at(i - 1, j)) +
          psi.at(i + 1, j - 1) * (q.at(i + 1, j) - q.at(i, j - 1));
      out.at(i, j) = fac * (j1 + j2 + j3);
    }
  }
  return out;
}

Field2D laplacian_zero_dirichlet(const Field2D& f) {
  const int nx = f.nx(), ny = f.ny();
  Field2D out(nx, ny, f.dx(), f.dy(), f.kind());
  const double ax = 1.0 / (f.dx() * f.dx());
  const double ay = 1.0 / (f.dy() * f.dy());
  for (int j = 1; j < ny - 1; ++j) {
    for (int i = 1; i < nx - 1; ++i) {
      out.at(i, j) = ax * (f.at(i + 1, j) - 2.0 * f.at(i, j) + f.at(i - 1, j)) +
                     ay * (f.at(i, j + 1) - 2.0 * f.at(i, j) + f.at(i, j - 1));
    }
  }
  return out;
}

Field2D tendency(const Field2D& q, const ModelParams& p) {
  check_grid(q, p, "tendency");
  auto [omega, psi] = diagnose(q, p);
  const Field2D jac = arakawa_jacobian(psi, q);
  const Field2D lap2 = laplacian_zero_dirichlet(laplacian_zero_dirichlet(omega));
  const double hyper = std::pow(p.munk_ratio, 5);

  Field2D out(q.nx(), q.ny(), q.dx(), q.dy(), FieldKind::PotentialVorticity);
  for (int iy = 0; iy < q.ny(); ++iy) {
    const double f = p.forcing * std::sin(M_PI * q.y(iy));
    for (int ix = 0; ix < q.nx(); ++ix)
      out.at(ix, iy) = f - jac.at(ix, iy) - hyper * lap2.at(ix, iy);
  }
  if (!out.all_finite()) throw numerical_error("tendency: non-finite result");
  return out;
}

Field2D flow_tendency(const Field2D& q, const ModelParams& p) {
  Field2D out = tendency(q, p);
  const int nx = out.nx(), ny = out.ny();
  for (int ix = 0; ix < nx; ++ix) {
    out.at(ix, 0) = 0.0;
    out.at(ix, ny - 1) = 0.0;
  }
  for (int iy = 0; iy < ny; ++iy) {
    out.at(0, iy) = 0.0;
    out.at(nx - 1, iy) = 0.0;
  }
  return out;
}

double cfl_number(const Field2D& q, const ModelParams& p) {
  auto [omega, psi] = diagnose(q, p);
  double umax = 0.0, vmax = 0.0;
  for (int j = 1; j < q.ny() - 1; ++j) {
    for (int i = 1; i < q.nx() - 1; ++i) {
      const double u = -(psi.at(i, j + 1) - psi.at(i, j - 1)) / (2.0 * q.dy());
      const double v = (psi.at(i + 1, j) - psi.at(i - 1, j)) / (2.0 * q.dx());
      umax = std::max(umax, std::abs(u));
      vmax = std::max(vmax, std::abs(v));
    }
  }
  return umax * p.dt / q.dx() + vmax * p.dt / q.dy();
}

double hyperviscous_number(const ModelParams& p) {
  const double s = 8.0 / (p.dx() * p.dx()) + 8.0 / (p.dy() * p.dy());
  return p.dt * std::pow(p.munk_ratio, 5) * s * s / p.rossby;
}

Field2D rk4_step(const Field2D& q, const ModelParams& p) {
  const double dt = p.dt;
  const Field2D k1 = flow_tendency(q, p);
  const Field2D k2 = flow_tendency(axpy(q, 0.5 * dt, k1), p);
  const Field2D k3 = flow_tendency(axpy(q, 0.5 * dt, k2), p);
  const Field2D k4 = flow_tendency(axpy(q, dt, k3), p);

  Field2D out = q;
  double* po = out.data();
  const double* p1 = k1.data();
  const double* p2 = k2.data();
  const double* p3 = k3.data();
  const double* p4 = k4.data();
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < out.size(); ++i)
    po[i] += w * (p1[i] + 2.0 * p2[i] + 2.0 * p3[i] + p4[i]);
  if (!out.all_finite()) throw numerical_error("rk4_step: non-finite state");
  return out;
}

Trajectory integrate(const Field2D& q0, const ModelParams& p, double t_end,
                     double output_every) {
  check_grid(q0, p, "integrate");
  p.validate();

  const long long nsteps = std::llround(t_end / p.dt);
  if (std::abs(nsteps * p.dt - t_end) > 1e-9 * std::max(1.0, std::abs(t_end))) {
    std::fprintf(stderr,
                 "[koopqg] warning: t_end %.9g rounded to %lld steps of dt=%.3g\n",
                 t_end, nsteps, p.dt);
  }
  long long every = std::llround(output_every / p.dt);
  if (every < 1) every = nsteps > 0 ? nsteps : 1;
  if (std::abs(every * p.dt - output_every) > 1e-9 * std::max(1.0, output_every)) {
    std::fprintf(stderr,
                 "[koopqg] warning: output_every %.9g rounded to %lld steps\n",
                 output_every, every);
  }

  if (p.warn_cfl) {
    const double cfl = cfl_number(q0, p);
    const double hv = hyperviscous_number(p);
    if (cfl >= 0.5)
      std::fprintf(stderr, "[koopqg] warning: advective CFL %.3g >= 0.5\n", cfl);
    if (hv >= 1.0)
      std::fprintf(stderr,
                   "[koopqg] warning: hyperviscous diagnostic %.3g >= 1 "
                   "(conservative bound; RK4 may still be stable)\n", hv);
  }

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(q0);

  Field2D q = q0;
  for (long long step = 1; step <= nsteps; ++step) {
    q = rk4_step(q, p);
    const double m = q.max_abs();
    if (!std::isfinite(m) || m > p.divergence_guard) {
      std::ostringstream msg;
      msg << "integrate: divergence guard tripped at t=" << (step * p.dt)
          << " (max|q|=" << m << "); last stable time "
          << ((step - 1) * p.dt);
      throw numerical_error(msg.str());
    }
    if (step % every == 0 || step == nsteps) {
      const double t = step * p.dt;
      if (traj.times.back() < t) {
        traj.times.push_back(t);
        traj.states.push_back(q);
      }
    }
  }
  return traj;
}

}  // namespace kqg::qg
