#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace tpf {

/// One real value per grid node.
using Field = Eigen::VectorXd;
/// Time-indexed sequence of spatial fields.
using FieldSeries = std::vector<Field>;

/// Vertex-centered uniform mesh of a 1-D interval or 2-D rectangle with
/// trapezoid quadrature weights and a homogeneous-Neumann Laplacian.
///
/// Nodes are numbered with the x index running fastest. The Laplacian uses
/// the centered 3-point stencil per axis; boundary rows mirror the first
/// interior neighbour, which encodes a zero normal derivative. With the
/// trapezoid weights W the operator is W-symmetric and annihilates constants.
class Grid {
 public:
  /// Throws InvalidArgument unless dim is 1 or 2, every axis has at least
  /// three points, and every length is positive.
  static Grid build(int dim, std::vector<int> shape, std::vector<double> lengths);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }
  const std::vector<int>& shape() const noexcept { return shape_; }
  const std::vector<double>& lengths() const noexcept { return lengths_; }
  const std::vector<double>& spacing() const noexcept { return spacing_; }
  const Field& weights() const noexcept { return weights_; }
  double measure() const noexcept;

  /// Coordinate of `node` along `axis` (domain origin at 0).
  double coordinate(std::size_t node, int axis) const;

  const Eigen::SparseMatrix<double>& laplacian() const noexcept { return laplacian_; }
  /// laplacian() * v evaluated in difference form (exactly 0 on constants).
  /// No shape check; see laplacian_apply.
  Field apply_laplacian(const Field& v) const;

  Field constant(double value) const { return Field::Constant(weights_.size(), value); }
  Field zeros() const { return Field::Zero(weights_.size()); }

  /// Throws InvalidArgument if `v` does not have one entry per node.
  void check(const Field& v, const char* what) const;

 private:
  Grid() = default;

  int dim_ = 1;
  std::vector<int> shape_;
  std::vector<double> lengths_;
  std::vector<double> spacing_;
  Field weights_;
  Eigen::SparseMatrix<double> laplacian_;
};

Field laplacian_apply(const Grid& grid, const Field& v);

/// Weighted inner product sum_i w_i v_i z_i.
double inner(const Grid& grid, const Field& v, const Field& z);

inline double norm(const Grid& grid, const Field& v) {
  return std::sqrt(inner(grid, v, v));
}

}  // namespace tpf
