#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "tumorpf/error.hpp"
#include "tumorpf/grid.hpp"

using namespace tpf;

namespace {

Field random_field(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Field v(g.size());
  for (auto& x : v) x = n(rng);
  return v;
}

}  // namespace

TEST_CASE("build: spacing and weights") {
  const Grid g = Grid::build(1, {5}, {1.0});
  CHECK(g.spacing()[0] == doctest::Approx(0.25));
  CHECK(g.weights().sum() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.weights()[0] == doctest::Approx(0.125));

  const Grid g2 = Grid::build(2, {3, 3}, {1.0, 2.0});
  CHECK(g2.size() == 9);
  CHECK(g2.weights().sum() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g2.measure() == doctest::Approx(2.0));
  // x runs fastest
  CHECK(g2.coordinate(1, 0) == doctest::Approx(0.5));
  CHECK(g2.coordinate(1, 1) == doctest::Approx(0.0));
  CHECK(g2.coordinate(3, 1) == doctest::Approx(1.0));
}

TEST_CASE("build: rejects degenerate input") {
  CHECK_THROWS_AS(Grid::build(1, {2}, {1.0}), Error);
  CHECK_THROWS_AS(Grid::build(1, {5}, {0.0}), Error);
  CHECK_THROWS_AS(Grid::build(1, {5}, {-1.0}), Error);
  CHECK_THROWS_AS(Grid::build(3, {5, 5, 5}, {1.0, 1.0, 1.0}), Error);
  CHECK_THROWS_AS(Grid::build(2, {5}, {1.0}), Error);
}

TEST_CASE("laplacian: kernel, conservation, symmetry, sign") {
  std::mt19937_64 rng(7);
  for (const Grid& g : {Grid::build(1, {17}, {2.0}), Grid::build(2, {9, 6}, {1.0, 0.7})}) {
    const Field c = g.constant(3.5);
    CHECK(laplacian_apply(g, c).cwiseAbs().maxCoeff() == 0.0);
    for (int k = 0; k < 5; ++k) {
      const Field v = random_field(g, rng);
      const Field w = random_field(g, rng);
      const Field Lv = laplacian_apply(g, v);
      const Field Lw = laplacian_apply(g, w);
      const double scale = norm(g, Lv) * norm(g, w) + 1.0;
      CHECK(std::abs(inner(g, Lv, g.constant(1.0))) <= 1e-12 * scale);
      CHECK(std::abs(inner(g, Lv, w) - inner(g, v, Lw)) <= 1e-12 * scale);
      CHECK(inner(g, Lv, v) <= 0.0);
    }
  }
}

TEST_CASE("laplacian: second-order convergence on a Neumann eigenfunction") {
  const double pi = std::numbers::pi;
  double prev = 0.0;
  for (int k = 0; k < 4; ++k) {
    const int n = 16 * (1 << k) + 1;
    const Grid g = Grid::build(1, {n}, {1.0});
    Field v(n), exact(n);
    for (int i = 0; i < n; ++i) {
      const double x = g.coordinate(i, 0);
      v[i] = std::cos(pi * x);
      exact[i] = -pi * pi * std::cos(pi * x);
    }
    const double err = (laplacian_apply(g, v) - exact).cwiseAbs().maxCoeff();
    if (k > 0) CHECK(std::log2(prev / err) == doctest::Approx(2.0).epsilon(0.05));
    prev = err;
  }
}

TEST_CASE("inner: quadrature") {
  const Grid g = Grid::build(1, {257}, {1.0});
  CHECK(inner(g, g.constant(1.0), g.constant(1.0)) == doctest::Approx(1.0));
  Field x(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) x[i] = g.coordinate(i, 0);
  CHECK(std::abs(inner(g, x, x) - 1.0 / 3.0) < 1e-4);
  CHECK(norm(g, g.zeros()) == 0.0);
  CHECK_THROWS_AS(inner(g, x, Field::Zero(3)), Error);
  CHECK_THROWS_AS(laplacian_apply(g, Field::Zero(3)), Error);
}
