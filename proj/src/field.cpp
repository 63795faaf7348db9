#include "koopqg/field.hpp"

#include <cmath>
#include <stdexcept>

namespace kqg {

bool Field2D::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Field2D::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double inner(const Field2D& a, const Field2D& b) {
  if (!a.same_grid(b)) throw std::invalid_argument("inner: grid mismatch");
  // Trapezoidal quadrature of the L2(Omega_x) product: half weights on the
  // edges so constants integrate to the exact domain area.
  const int nx = a.nx(), ny = a.ny();
  double s = 0.0;
  for (int iy = 0; iy < ny; ++iy) {
    const double wy = (iy == 0 || iy == ny - 1) ? 0.5 : 1.0;
    double row = 0.0;
    row += 0.5 * a.at(0, iy) * b.at(0, iy);
    for (int ix = 1; ix < nx - 1; ++ix) row += a.at(ix, iy) * b.at(ix, iy);
    row += 0.5 * a.at(nx - 1, iy) * b.at(nx - 1, iy);
    s += wy * row;
  }
  return s * a.dx() * a.dy();
}

double norm2(const Field2D& a) { return inner(a, a); }

Field2D axpy(const Field2D& a, double s, const Field2D& b) {
  if (!a.same_grid(b)) throw std::invalid_argument("axpy: grid mismatch");
  Field2D out = a;
  double* po = out.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) po[i] += s * pb[i];
  return out;
}

}  // namespace kqg
