#pragma once

#include <utility>
#include <vector>

#include "koopqg/field.hpp"

namespace kqg::qg {

/// Dimensionless parameters of the barotropic double-gyre model
///   dq/dt + J(psi,q) = f - (delta/L)^5 nabla^4 omega,
///   Lap psi = omega,  q = Ro*omega + y.
/// Boundary closure: psi = 0, omega = 0, q = y on all four edges.
struct ModelParams {
  double rossby = 0.0036;      // Ro
  double munk_ratio = 0.032;   // delta/L
  double domain_L = 1.0;       // basin is [0,L] x [-L,L]
  int nx = 64;
  int ny = 128;
  double dt = 1e-4;
  double forcing = 1.0;        // f(y) = forcing * sin(pi*y); 0 switches forcing off
  double divergence_guard = 1e3;  // abort integrate() when max|q| exceeds this
  bool warn_cfl = true;

  double dx() const { return domain_L / (nx - 1); }
  double dy() const { return 2.0 * domain_L / (ny - 1); }

  void validate() const;  // throws config_error on bad values
  Field2D make_field(FieldKind kind = FieldKind::PotentialVorticity) const;
  Field2D rest_state() const;  // q = y everywhere
};

struct Trajectory {
  std::vector<double> times;   // strictly increasing
  std::vector<Field2D> states; // q fields, shared grid

  const Field2D& at_time(double t) const;  // nearest snapshot, warns if far
  std::size_t index_of_time(double t) const;
};

/// omega with homogeneous Dirichlet data -> psi solving the 5-point discrete
/// Poisson problem exactly (double DST-I diagonalization); psi = 0 on edges.
Field2D solve_poisson(const Field2D& omega);

/// q -> (omega, psi): omega = (q - y)/Ro pointwise, psi from solve_poisson.
std::pair<Field2D, Field2D> diagnose(const Field2D& q, const ModelParams& p);

/// Arakawa 9-point Jacobian (J1+J2+J3)/3 at interior nodes, 0 on the boundary.
Field2D arakawa_jacobian(const Field2D& psi, const Field2D& q);

/// 5-point Laplacian at interior nodes with the input treated as 0 outside;
/// output boundary set to 0. Applied twice this is the nabla^4 used below.
Field2D laplacian_zero_dirichlet(const Field2D& f);

/// Full right-hand side f - J(psi,q) - (delta/L)^5 nabla^4 omega on all nodes.
Field2D tendency(const Field2D& q, const ModelParams& p);

/// tendency() with boundary entries zeroed: the generator of the discrete
/// flow, since rk4_step holds q = y on the boundary.
Field2D flow_tendency(const Field2D& q, const ModelParams& p);

/// Classical RK4 update; boundary values of q are held fixed at y.
Field2D rk4_step(const Field2D& q, const ModelParams& p);

/// Integrate to t_end storing snapshots every output_every (both rounded to
/// whole steps with a diagnostic). t_end = 0 yields the single state q0.
Trajectory integrate(const Field2D& q0, const ModelParams& p, double t_end,
                     double output_every);

/// max(|u|)dt/dx + max(|v|)dt/dy for the state's geostrophic velocity.
double cfl_number(const Field2D& q, const ModelParams& p);

/// Hyperviscous stability diagnostic dt*(delta/L)^5*(8/dx^2+8/dy^2)^2/Ro.
double hyperviscous_number(const ModelParams& p);

}  // namespace kqg::qg
