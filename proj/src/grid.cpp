#include "tumorpf/grid.hpp"

#include <cmath>
#include <string>

#include "tumorpf/error.hpp"

namespace tpf {

namespace {

// 1-D Neumann stencil on n points with spacing h, as triplets offset by
// `stride` and replicated over the other axis.
void add_axis_stencil(std::vector<Eigen::Triplet<double>>& trips, int n, double h,
                      std::size_t stride, std::size_t node_of_line_start) {
  const double c = 1.0 / (h * h);
  for (int i = 0; i < n; ++i) {
    const std::size_t row = node_of_line_start + static_cast<std::size_t>(i) * stride;
    trips.emplace_back(row, row, -2.0 * c);
    if (i == 0) {
      trips.emplace_back(row, row + stride, 2.0 * c);
    } else if (i == n - 1) {
      trips.emplace_back(row, row - stride, 2.0 * c);
    } else {
      trips.emplace_back(row, row - stride, c);
      trips.emplace_back(row, row + stride, c);
    }
  }
}

Eigen::VectorXd trapezoid_weights(int n, double h) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, h);
  w[0] = w[n - 1] = 0.5 * h;
  return w;
}

}  // namespace

Grid Grid::build(int dim, std::vector<int> shape, std::vector<double> lengths) {
  require(dim == 1 || dim == 2, ErrorCode::InvalidArgument,
          "grid dimension must be 1 or 2, got " + std::to_string(dim));
  require(shape.size() == static_cast<std::size_t>(dim) &&
              lengths.size() == static_cast<std::size_t>(dim),
          ErrorCode::InvalidArgument, "grid shape/lengths must have one entry per axis");
  for (int a = 0; a < dim; ++a) {
    require(shape[a] >= 3, ErrorCode::InvalidArgument,
            "grid axis " + std::to_string(a) + " needs at least 3 points, got " +
                std::to_string(shape[a]));
    require(lengths[a] > 0.0 && std::isfinite(lengths[a]), ErrorCode::InvalidArgument,
            "grid axis " + std::to_string(a) + " length must be positive");
  }

  Grid g;
  g.dim_ = dim;
  g.shape_ = std::move(shape);
  g.lengths_ = std::move(lengths);
  for (int a = 0; a < dim; ++a) g.spacing_.push_back(g.lengths_[a] / (g.shape_[a] - 1));

  const int nx = g.shape_[0];
  const int ny = dim == 2 ? g.shape_[1] : 1;
  const std::size_t n = static_cast<std::size_t>(nx) * ny;

  const Eigen::VectorXd wx = trapezoid_weights(nx, g.spacing_[0]);
  const Eigen::VectorXd wy = dim == 2 ? trapezoid_weights(ny, g.spacing_[1])
                                      : Eigen::VectorXd::Ones(1);
  g.weights_.resize(static_cast<Eigen::Index>(n));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) g.weights_[i + nx * j] = wx[i] * wy[j];

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(n * (dim == 2 ? 6 : 3));
  for (int j = 0; j < ny; ++j)
    add_axis_stencil(trips, nx, g.spacing_[0], 1, static_cast<std::size_t>(nx) * j);
  if (dim == 2)
    for (int i = 0; i < nx; ++i)
      add_axis_stencil(trips, ny, g.spacing_[1], static_cast<std::size_t>(nx), i);
  g.laplacian_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  g.laplacian_.setFromTriplets(trips.begin(), trips.end());
  g.laplacian_.makeCompressed();
  return g;
}

double Grid::measure() const noexcept {
  double m = 1.0;
  for (double l : lengths_) m *= l;
  return m;
}

double Grid::coordinate(std::size_t node, int axis) const {
  const std::size_t nx = static_cast<std::size_t>(shape_[0]);
  if (axis == 0) return static_cast<double>(node % nx) * spacing_[0];
  require(axis == 1 && dim_ == 2, ErrorCode::InvalidArgument, "coordinate axis out of range");
  return static_cast<double>(node / nx) * spacing_[1];
}

void Grid::check(const Field& v, const char* what) const {
  if (static_cast<std::size_t>(v.size()) != size())
    fail(ErrorCode::InvalidArgument, std::string(what) + ": field has " +
                                         std::to_string(v.size()) + " entries, grid has " +
                                         std::to_string(size()) + " nodes");
}

Field Grid::apply_laplacian(const Field& v) const {
  // Same operator as laplacian(), written as sums of neighbour differences so
  // that constants map to exactly zero.
  Field out = Field::Zero(v.size());
  const int nx = shape_[0];
  const int ny = dim_ == 2 ? shape_[1] : 1;
  auto axis = [&](int n, double h, Eigen::Index stride, Eigen::Index start) {
    const double c = 1.0 / (h * h);
    for (int i = 0; i < n; ++i) {
      const Eigen::Index k = start + i * stride;
      if (i == 0)
        out[k] += 2.0 * c * (v[k + stride] - v[k]);
      else if (i == n - 1)
        out[k] += 2.0 * c * (v[k - stride] - v[k]);
      else
        out[k] += c * ((v[k - stride] - v[k]) + (v[k + stride] - v[k]));
    }
  };
  for (int j = 0; j < ny; ++j) axis(nx, spacing_[0], 1, static_cast<Eigen::Index>(nx) * j);
  if (dim_ == 2)
    for (int i = 0; i < nx; ++i) axis(ny, spacing_[1], nx, i);
  return out;
}

Field laplacian_apply(const Grid& grid, const Field& v) {
  grid.check(v, "laplacian_apply");
  return grid.apply_laplacian(v);
}

double inner(const Grid& grid, const Field& v, const Field& z) {
  grid.check(v, "inner");
  grid.check(z, "inner");
  return (grid.weights().array() * v.array() * z.array()).sum();
}

}  // namespace tpf
