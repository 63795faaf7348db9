#include "koopqg/stacking.hpp"

#include <cmath>
#include <stdexcept>

namespace kqg {

Eigen::VectorXd sqrt_quadrature_weights(const Field2D& like) {
  const int nx = like.nx(), ny = like.ny();
  Eigen::VectorXd w(static_cast<Eigen::Index>(like.size()));
  const double da = like.dx() * like.dy();
  Eigen::Index k = 0;
  for (int iy = 0; iy < ny; ++iy) {
    const double wy = (iy == 0 || iy == ny - 1) ? 0.5 : 1.0;
    for (int ix = 0; ix < nx; ++ix) {
      const double wx = (ix == 0 || ix == nx - 1) ? 0.5 : 1.0;
      w(k++) = std::sqrt(wx * wy * da);
    }
  }
  return w;
}

Eigen::MatrixXd stack_weighted(const std::vector<const Field2D*>& fields) {
  if (fields.empty()) throw std::invalid_argument("stack_weighted: empty list");
  const Eigen::VectorXd w = sqrt_quadrature_weights(*fields[0]);
  Eigen::MatrixXd m(w.size(), static_cast<Eigen::Index>(fields.size()));
  for (std::size_t j = 0; j < fields.size(); ++j) {
    if (!fields[j]->same_grid(*fields[0]))
      throw std::invalid_argument("stack_weighted: grid mismatch");
    m.col(static_cast<Eigen::Index>(j)) =
        w.cwiseProduct(Eigen::Map<const Eigen::VectorXd>(fields[j]->data(), w.size()));
  }
  return m;
}

Eigen::VectorXd stack_weighted(const Field2D& field) {
  const Eigen::VectorXd w = sqrt_quadrature_weights(field);
  return w.cwiseProduct(
      Eigen::Map<const Eigen::VectorXd>(field.data(), w.size()));
}

}  // namespace kqg
