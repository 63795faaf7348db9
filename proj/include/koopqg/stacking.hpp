#pragma once

#include <Eigen/Dense>

#include <vector>

#include "koopqg/field.hpp"

namespace kqg {

/// sqrt of the per-node trapezoidal quadrature weights (wx*wy*dx*dy), so that
/// stacked columns u,v satisfy u.dot(v) == inner(field_u, field_v).
Eigen::VectorXd sqrt_quadrature_weights(const Field2D& like);

/// Fields stacked as quadrature-weighted columns; Euclidean operations on the
/// result are discrete-L2 operations on the fields.
Eigen::MatrixXd stack_weighted(const std::vector<const Field2D*>& fields);
Eigen::VectorXd stack_weighted(const Field2D& field);

}  // namespace kqg
