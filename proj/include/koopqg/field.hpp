#pragma once

#include <cstdint>
#include <vector>

namespace kqg {

enum class FieldKind : std::uint8_t {
  PotentialVorticity = 0,
  Streamfunction = 1,
  Vorticity = 2,
  Matrix = 3,
};

/// Scalar field on the collocated [0,L] x [-L,L] grid.
/// Storage is row-major with x fastest: value(ix,iy) = data[iy*nx + ix].
/// dx = L/(nx-1), dy = 2L/(ny-1); node (ix,iy) sits at (ix*dx, -L + iy*dy).
class Field2D {
 public:
  Field2D() = default;
  Field2D(int nx, int ny, double dx, double dy,
          FieldKind kind = FieldKind::PotentialVorticity)
      : nx_(nx), ny_(ny), dx_(dx), dy_(dy), kind_(kind),
        data_(static_cast<std::size_t>(nx) * ny, 0.0) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  FieldKind kind() const { return kind_; }
  void set_kind(FieldKind k) { kind_ = k; }

  double domain_length() const { return dx_ * (nx_ - 1); }
  double x(int ix) const { return ix * dx_; }
  double y(int iy) const { return -0.5 * dy_ * (ny_ - 1) + iy * dy_; }

  double& at(int ix, int iy) { return data_[static_cast<std::size_t>(iy) * nx_ + ix]; }
  double at(int ix, int iy) const { return data_[static_cast<std::size_t>(iy) * nx_ + ix]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::size_t size() const { return data_.size(); }

  bool same_grid(const Field2D& other) const {
    return nx_ == other.nx_ && ny_ == other.ny_ &&
           dx_ == other.dx_ && dy_ == other.dy_;
  }

  bool all_finite() const;
  double max_abs() const;

  bool operator==(const Field2D& other) const = default;

 private:
  int nx_ = 0, ny_ = 0;
  double dx_ = 0.0, dy_ = 0.0;
  FieldKind kind_ = FieldKind::PotentialVorticity;
  std::vector<double> data_;
};

/// Discrete L2 inner product dx*dy*sum over all nodes.
double inner(const Field2D& a, const Field2D& b);
double norm2(const Field2D& a);  // inner(a,a)

/// a + s*b, grids must match.
Field2D axpy(const Field2D& a, double s, const Field2D& b);

}  // namespace kqg
