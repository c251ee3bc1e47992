#include <cmath>
#include <sstream>

#include "doctest.h"
#include "pwfield/poincare.hpp"

using namespace pwf;

namespace {

// Closed-form multiplier of the f family at i*eps/m.
double f_family_multiplier(int m, int i, double eps) {
  double x = i * eps / m, prod = 1;
  for (int k = 1; k <= m; ++k)
    if (k != i) prod *= x * x - (k * eps / m) * (k * eps / m);
  double c = 2 * eps * x * x * prod;
  return (x - c) / (x + c);
}

}  // namespace

TEST_CASE("full map on linear and center fields") {
  IntegratorConfig cfg;
  ReturnMapSample f = full_map(make_normal_form(PortraitLabel::FF1), 0.1, cfg);
  REQUIRE(f.ok);
  CHECK(f.value == doctest::Approx(std::exp(-2 * M_PI) * 0.1).epsilon(1e-3));
  CHECK(f.flight_time == doctest::Approx(2 * M_PI).epsilon(1e-8));

  ReturnMapSample c = full_map(make_z0(-1, -1), 0.3, cfg);
  REQUIRE(c.ok);
  CHECK(std::fabs(c.value - 0.3) <= 1e-8);
  ReturnMapSample cs = full_map(make_z0(-1, -1), 0.3, cfg, MapMode::Split);
  CHECK(cs.used_split);
  CHECK(cs.displacement == 0);

  ReturnMapSample ss = full_map(make_normal_form(PortraitLabel::SS), 0.1, cfg);
  CHECK(!ss.ok);
  CHECK(ss.failed_half == Side::Upper);
  CHECK(ss.reason == NoReturnReason::BoxExit);
}

TEST_CASE("mirrored fields") {
  IntegratorConfig cfg;
  PiecewiseField z = make_normal_form(PortraitLabel::FF1);
  PiecewiseField m = reflect_x(z);
  CHECK(needs_mirror(m));
  CHECK(!needs_mirror(z));
  ReturnMapSample a = full_map(z, 0.05, cfg), b = full_map(m, 0.05, cfg);
  REQUIRE(b.ok);
  CHECK(b.value == doctest::Approx(a.value).epsilon(1e-9));
  FixedPointReport r = find_fixed_points(reflect_x(make_prop52(-0.25, -0.25, 1, 0.05)), 1e-3, 0.07, 50, cfg);
  CHECK(r.mirrored);
  REQUIRE(r.cycles.size() == 1);
  CHECK(r.cycles[0].x_star == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("map derivative") {
  IntegratorConfig cfg;
  MapDerivative ff = map_derivative(make_normal_form(PortraitLabel::FF1), 1e-2, 1e-4, cfg);
  CHECK(ff.multiplier == doctest::Approx(std::exp(-2 * M_PI)).epsilon(1e-3));
  MapDerivative center = map_derivative(make_z0(-1, -1), 0.2, default_derivative_step(0.2), cfg, MapMode::Direct);
  CHECK(std::fabs(center.multiplier - 1) <= 1e-6);
  CHECK(default_derivative_step(0.5) == doctest::Approx(5e-5));
  CHECK(default_derivative_step(1e-3) == 1e-6);
  CHECK_THROWS_AS(map_derivative(make_normal_form(PortraitLabel::SS), 0.1, 1e-4, cfg), NoReturn);

  for (int m : {1, 2, 3}) {
    PiecewiseField z = make_prop52(-0.25, -0.25, m, 0.05);
    for (int i = 1; i <= m; ++i) {
      double x = i * 0.05 / m;
      MapDerivative d = map_derivative(z, x, default_derivative_step(x), cfg);
      double expected = f_family_multiplier(m, i, 0.05) - 1;
      CHECK(std::fabs(d.minus_one - expected) <= 1e-4 * std::fabs(expected));
      CHECK(d.multiplier > 0);
    }
  }
}

TEST_CASE("fixed points of the f family") {
  IntegratorConfig cfg;
  for (double ab : {-0.25, 0.25, 0.5}) {
    for (int m : {1, 2, 3}) {
      PiecewiseField z = make_prop52(ab, ab, m, 0.05);
      FixedPointReport r = find_fixed_points(z, 1e-3, 0.07, 400, cfg);
      INFO("a=b=", ab, " m=", m);
      CHECK(!r.degenerate);
      REQUIRE(r.cycles.size() == static_cast<std::size_t>(m));
      for (int i = 1; i <= m; ++i) {
        const LimitCycle& c = r.cycles[i - 1];
        CHECK(std::fabs(c.x_star - i * 0.05 / m) <= 1e-6);
        double expected = f_family_multiplier(m, i, 0.05) - 1;
        CHECK(std::fabs(c.multiplier_minus_one - expected) <= 1e-4 * std::fabs(expected));
        CHECK(c.multiplier > 0);
        CHECK(c.hyperbolic);
        Stability parity = (m - i) % 2 == 0 ? Stability::Stable : Stability::Unstable;
        CHECK(c.stability == parity);
        CHECK(c.bracket_stability == parity);
        CHECK(c.lower_intercept == doctest::Approx(-c.x_star).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("center reported as degenerate") {
  IntegratorConfig cfg;
  FixedPointReport split = find_fixed_points(make_prop52(-0.25, -0.25, 3, 0.0), 1e-3, 0.07, 100, cfg);
  CHECK(split.degenerate);
  CHECK(split.cycles.empty());
  FixedPointOptions direct;
  direct.mode = MapMode::Direct;
  FixedPointReport d = find_fixed_points(make_z0(-1, -1), 1e-3, 0.07, 100, cfg, direct);
  CHECK(d.degenerate);
  CHECK(d.cycles.empty());
}

TEST_CASE("fixed points of the g family") {
  IntegratorConfig cfg;
  FixedPointReport r = find_fixed_points(make_prop53(-0.25, -0.25, 0.05), 0.01, 0.07, 400, cfg);
  std::vector<double> found;
  for (const LimitCycle& c : r.cycles) found.push_back(c.x_star);
  REQUIRE(found.size() >= 2);
  CHECK(found.back() == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(found[found.size() - 2] == doctest::Approx(0.025).epsilon(1e-9));
  for (const LimitCycle& c : r.cycles) {
    int i = static_cast<int>(std::lround(0.05 / c.x_star));
    CHECK(std::fabs(c.x_star - 0.05 / i) <= 1e-6);
    CHECK(c.bracket_stability == (i % 2 == 1 ? Stability::Stable : Stability::Unstable));
  }
  PiecewiseField g = make_prop53(-0.25, -0.25, 0.05);
  CHECK(two_sided_stability(g, 0.05, 1e-3, cfg) == Stability::Stable);
  CHECK(two_sided_stability(g, 0.025, 1e-4, cfg) == Stability::Unstable);
}

TEST_CASE("empty and invalid intervals") {
  IntegratorConfig cfg;
  CHECK_THROWS_AS(find_fixed_points(make_normal_form(PortraitLabel::SS), 0.1, 0.5, 10, cfg), EmptyInterval);
  CHECK_THROWS_AS(find_fixed_points(make_z0(-1, -1), 0.0, 0.5, 10, cfg), std::invalid_argument);
  FixedPointReport none = find_fixed_points(make_normal_form(PortraitLabel::FF1), 1e-3, 0.5, 20, cfg);
  CHECK(none.cycles.empty());
  CHECK(!none.degenerate);
}

TEST_CASE("exponent of the return map") {
  IntegratorConfig cfg;
  std::vector<double> xs{4e-3, 2e-3, 1e-3};
  PiecewiseField lin = make_linear({0.2, -1, 1, 0.2}, {-0.5, -1, 1, -0.5});
  EllEstimate e = ell_from_map(lin, xs, cfg);
  CHECK(e.value == doctest::Approx(-0.3).epsilon(1e-6));
  CHECK(std::fabs(e.ratio.back() - std::exp(-0.3 * M_PI)) <= 1e-3 * std::exp(-0.3 * M_PI));
  CHECK(ell_from_map(make_normal_form(PortraitLabel::FF2), {4e-4, 2e-4, 1e-4}, cfg).value == doctest::Approx(2).epsilon(1e-6));
  CHECK(std::fabs(ell_from_map(make_z0(-1, -1), xs, cfg).value) <= 1e-6);
  // a nonlinear focus: the extrapolation removes the amplitude dependence
  PiecewiseField nl = make_inline("-y - x + x^2", "x - y", "-y - x", "x - y");
  EllEstimate n = ell_from_map(nl, {0.02, 0.01, 0.005, 0.0025}, cfg);
  CHECK(n.value == doctest::Approx(-2).epsilon(1e-5));
  CHECK(std::fabs(n.raw.front() + 2) > std::fabs(n.value + 2));
  CHECK_THROWS_AS(ell_from_map(lin, {1e-3, 2e-3}, cfg), std::invalid_argument);
}

TEST_CASE("report output") {
  IntegratorConfig cfg;
  FixedPointReport r = find_fixed_points(make_prop52(-0.25, -0.25, 2, 0.05), 1e-3, 0.07, 40, cfg);
  std::ostringstream map, text;
  write_return_map_csv(map, r.grid);
  write_cycle_report(text, r);
  CHECK(map.str().rfind("x0,P,flightTime,ok\n", 0) == 0);
  CHECK(text.str().find("cycles: 2") != std::string::npos);
  CHECK(text.str().find("stability=Unstable") != std::string::npos);
}
