#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tumorpf/error.hpp"
#include "tumorpf/model.hpp"

using namespace tpf;

TEST_CASE("potential values") {
  CHECK(potential_eval(PotentialSpec::regular(), 0.0, 0) == doctest::Approx(0.25));
  const PotentialSpec log = PotentialSpec::logarithmic(2.0);
  CHECK(potential_eval(log, 1.0, 0) == doctest::Approx(2.0 * std::log(2.0) - 2.0));
  CHECK(potential_eval(log, -1.0, 0) == doctest::Approx(2.0 * std::log(2.0) - 2.0));
  CHECK(potential_eval(log, 0.999999, 1) > 10.0);
  CHECK_THROWS_AS(potential_eval(log, 1.0, 1), SeparationViolation);
  CHECK_THROWS_AS(potential_eval(log, 1.5, 0), SeparationViolation);
  CHECK_THROWS_AS(potential_eval(PotentialSpec::obstacle(), 0.5, 1), Error);
  CHECK(potential_eval(PotentialSpec::obstacle(1.5), 0.0, 0) == doctest::Approx(1.5));

  try {
    potential_eval(log, 1.0, 2);
    FAIL("expected a separation violation");
  } catch (const SeparationViolation& e) {
    CHECK(e.value() == 1.0);
    CHECK(e.lower() == -1.0);
    CHECK(e.upper() == 1.0);
  }
}

TEST_CASE("potential derivatives match finite differences") {
  const PotentialSpec specs[] = {PotentialSpec::regular(), PotentialSpec::logarithmic(2.0),
                                 PotentialSpec::polynomial({0.1, -0.3, -1.0, 0.2, 0.5})};
  for (const auto& spec : specs) {
    for (double r : {-0.8, -0.3, 0.1, 0.55, 0.9}) {
      for (int k = 1; k <= 3; ++k) {
        double prev_err = 0.0;
        for (double step : {1e-3, 5e-4}) {
          const double fd =
              (potential_eval(spec, r + step, k - 1) - potential_eval(spec, r - step, k - 1)) /
              (2.0 * step);
          const double err = std::abs(fd - potential_eval(spec, r, k));
          if (prev_err > 1e-9) CHECK(prev_err / err == doctest::Approx(4.0).epsilon(0.05));
          prev_err = err;
        }
      }
      // Splitting adds up.
      for (int k = 0; k <= 3; ++k)
        CHECK(convex_part_eval(spec, r, k) + concave_part_eval(spec, r, k) ==
              doctest::Approx(potential_eval(spec, r, k)).epsilon(1e-12));
    }
    CHECK(convex_part_eval(spec, 0.0, 0) == 0.0);
  }
}

TEST_CASE("convex part is convex") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.99, 0.99);
  for (const auto& spec : {PotentialSpec::regular(), PotentialSpec::logarithmic(3.0),
                           PotentialSpec::polynomial({0.0, 0.0, -1.0, 0.0, 0.25})}) {
    for (int i = 0; i < 500; ++i) {
      const double r = u(rng);
      const double h = 1e-3;
      if (std::abs(r) + h >= 1.0) continue;
      CHECK(convex_part_eval(spec, r + h, 0) - 2.0 * convex_part_eval(spec, r, 0) +
                convex_part_eval(spec, r - h, 0) >=
            -1e-15);
    }
  }
}

TEST_CASE("polynomial splitting") {
  const PotentialSpec p = PotentialSpec::polynomial({0.25, 0.0, -0.5, 0.0, 0.25});
  CHECK(potential_eval(p, 0.3, 0) == doctest::Approx(potential_eval(PotentialSpec::regular(), 0.3, 0)));
  CHECK(!p.cubic_free());
  CHECK(PotentialSpec::polynomial({0.0, 0.0, 1.0}).cubic_free());
  CHECK(potential_kind_from_string("custom-polynomial") == PotentialKind::Polynomial);
  CHECK_THROWS_AS(potential_kind_from_string("quartic"), Error);
}

TEST_CASE("yosida: prox, derivative, Lipschitz bound, monotonicity") {
  const PotentialSpec specs[] = {PotentialSpec::regular(), PotentialSpec::logarithmic(2.0),
                                 PotentialSpec::obstacle(1.0)};
  CHECK(yosida_derivative(PotentialSpec::obstacle(), 0.5, 1.5) == doctest::Approx(1.0));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const auto& spec : specs) {
    for (double eps : {0.5, 1e-2, 1e-4}) {
      CHECK(yosida_derivative(spec, eps, 0.0) == 0.0);
      for (int i = 0; i < 300; ++i) {
        const double r = u(rng), s = u(rng);
        CHECK(std::abs(yosida_prox(spec, eps, r) - oracle::prox(spec, eps, r)) <= 1e-10);
        const double dr = yosida_derivative(spec, eps, r), ds = yosida_derivative(spec, eps, s);
        CHECK((dr - ds) * (r - s) >= 0.0);
        CHECK(std::abs(dr - ds) <= std::abs(r - s) / eps * (1.0 + 1e-12) + 1e-12);
      }
    }
  }
}

TEST_CASE("yosida: convergence to the minimal section") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  for (const auto& spec : {PotentialSpec::regular(), PotentialSpec::logarithmic(2.0),
                           PotentialSpec::obstacle(1.0)}) {
    for (int i = 0; i < 50; ++i) {
      const double r = u(rng);
      double prev = 0.0;
      for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
        const double v = std::abs(yosida_derivative(spec, eps, r));
        CHECK(v >= prev - 1e-12);
        prev = v;
      }
      CHECK(yosida_derivative(spec, 1e-8, r) ==
            doctest::Approx(oracle::minimal_section(spec, r)).epsilon(1e-5));
    }
  }
}

TEST_CASE("yosida: derivatives match finite differences") {
  for (const auto& spec : {PotentialSpec::regular(), PotentialSpec::logarithmic(2.0)}) {
    const double eps = 0.05;
    for (double r : {-1.4, -0.6, 0.2, 0.97, 2.0}) {
      for (int k = 1; k <= 3; ++k) {
        const double h = 1e-5;
        const double fd = (yosida_eval(spec, eps, r + h, k - 1) - yosida_eval(spec, eps, r - h, k - 1)) /
                          (2.0 * h);
        CHECK(fd == doctest::Approx(yosida_eval(spec, eps, r, k)).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("scheme potential") {
  CHECK_THROWS_AS(SchemePotential(PotentialSpec::obstacle(), 0.0), Error);
  const SchemePotential sp(PotentialSpec::obstacle(), 0.1);
  CHECK(sp.derivative(0.5, 1) == doctest::Approx(-1.0));
  CHECK(sp.derivative(1.5, 1) == doctest::Approx(5.0 - 3.0));
  CHECK(!sp.needs_separation());
  CHECK(SchemePotential(PotentialSpec::logarithmic()).needs_separation());
}

TEST_CASE("shapes") {
  const Shape h = Shape::ramp();
  CHECK(h.eval(-1.0, 0) == 0.0);
  CHECK(h.eval(1.0, 0) == 1.0);
  CHECK(h.eval(0.0, 0) == doctest::Approx(0.5));
  CHECK(Shape::constant(2.0).eval(0.3, 1) == 0.0);
  CHECK_THROWS_AS(Shape::from_id("spline", {}), Error);
  CHECK_THROWS_AS(Shape::from_id("bump", {}), Error);
  CHECK(Shape::from_id("bump", {{"amplitude", 1.0}}).eval(0.0, 0) == doctest::Approx(1.0));

  for (const Shape& s : {Shape::ramp(-0.5, 0.8, 0.2, 1.3), Shape::bump(2.0, 0.1, 0.4)}) {
    CHECK(s.smooth());
    for (double r : {-0.9, -0.4, 0.0, 0.3, 0.7}) {
      for (int k = 1; k <= 2; ++k) {
        const double d = 1e-5;
        const double fd = (s.eval(r + d, k - 1) - s.eval(r - d, k - 1)) / (2.0 * d);
        CHECK(fd == doctest::Approx(s.eval(r, k)).epsilon(1e-6).scale(1.0));
      }
      CHECK(s.eval(r, 0) >= 0.0);
      CHECK(s.eval(r, 0) <= s.sup_bound() + 1e-15);
    }
  }
  const Shape t = Shape::table({-1.0, 0.0, 1.0}, {0.0, 2.0, 1.0});
  CHECK(!t.smooth());
  CHECK(t.eval(-0.5, 0) == doctest::Approx(1.0));
  CHECK(t.eval(0.5, 1) == doctest::Approx(-1.0));
}

TEST_CASE("projection onto the box") {
  const Grid g = Grid::build(1, {6}, {1.0});
  const TimeGrid tg = TimeGrid::make(1.0, 4);
  const BoxConstraints box = BoxConstraints::uniform(g, tg, 0.0, 2.0, -1.0, 1.0);
  CHECK(box.sup_radius() == 3.0);
  Control u = Control::constant(g, tg, 1.0, 0.5);
  const Control pu = project_admissible(u, box);
  CHECK(control_norm(g, tg, pu - u) == 0.0);
  u.u1[1][2] = 5.0;
  CHECK(project_admissible(u, box).u1[1][2] == 2.0);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 2.0);
  auto random_control = [&]() {
    Control c = Control::zeros(g, tg);
    for (int l = 0; l < tg.steps; ++l)
      for (std::size_t i = 0; i < g.size(); ++i) {
        c.u1[l][i] = n(rng);
        c.u2[l][i] = n(rng);
      }
    return c;
  };
  for (int i = 0; i < 50; ++i) {
    const Control a = random_control(), b = random_control();
    const Control pa = project_admissible(a, box), pb = project_admissible(b, box);
    CHECK(control_norm(g, tg, pa - pb) <= control_norm(g, tg, a - b) + 1e-14);
    CHECK(control_norm(g, tg, project_admissible(pa, box) - pa) == 0.0);
  }
  CHECK_THROWS_AS(BoxConstraints::uniform(g, tg, 1.0, 0.0, 0.0, 1.0), Error);
}
