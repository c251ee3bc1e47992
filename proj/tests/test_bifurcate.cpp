#include <cmath>
#include <sstream>

#include "doctest.h"
#include "pwfield/bifurcate.hpp"

using namespace pwf;

namespace {

// First switching-line crossing of the orbit through p0 (negative t_max runs
// backwards).
double first_crossing(const PiecewiseField& z, Vec2 p0, double t_max) {
  IntegratorConfig cfg;
  cfg.relTol = 1e-12;
  cfg.absTol = 1e-14;
  OrbitTrace tr = integrate_piecewise(z, p0, t_max, cfg);
  REQUIRE(!tr.events.empty());
  return tr.events.front().x;
}

}  // namespace

TEST_CASE("fold root of the f family") {
  CHECK(fold_root({-0.25, -0.25, 0.1, 1}) == doctest::Approx(1e-3).epsilon(0.1 * 0.1));
  CHECK(fold_root({-0.25, -0.25, 0.1, 2}) == doctest::Approx(-2.5e-6).epsilon(0.1));
  CHECK(fold_root({-0.25, -0.25, 0.0, 3}) == 0.0);
  CHECK(PolynomialFamily{-0.25, -0.25, 0.1, 2}.fold_root_leading() == doctest::Approx(-2.5e-6));
  // the leading term takes over as eps shrinks
  for (int m : {1, 2, 3, 4}) {
    PolynomialFamily s{-0.25, -0.25, 0.01, m};
    double root = fold_root(s);
    CHECK(std::fabs(root / s.fold_root_leading() - 1) <= 0.05);
    // the lower field's vertical component on the axis is x + eps f'(x)
    CHECK(std::fabs(s.field().lower.second({root, 0})) <= 1e-12 * std::fabs(root));
  }
  CHECK_THROWS_AS(fold_root({-0.25, -0.25, 1.0, 2}), BracketFailure);
}

TEST_CASE("predictions of the two families") {
  for (int m = 1; m <= 5; ++m) {
    PolynomialFamily s{-0.25, -0.25, 0.05, m};
    std::vector<double> xs = s.predicted_cycles(), m1 = s.predicted_multipliers_minus_one();
    std::vector<Stability> st = s.predicted_stability();
    REQUIRE(xs.size() == static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      CHECK(xs[i] == doctest::Approx((i + 1) * 0.05 / m));
      CHECK((m1[i] < 0) == (st[i] == Stability::Stable));
      CHECK(s.predicted_multipliers()[i] > 0);
    }
  }
  CHECK(PolynomialFamily{-0.25, -0.25, 0.0, 3}.predicted_cycles().empty());

  FlatFamily g{-0.25, -0.25, 0.05, 4};
  std::vector<double> xs = g.predicted_cycles();
  REQUIRE(xs.size() == 4);
  CHECK(xs.back() == doctest::Approx(0.05));
  CHECK(xs.front() == doctest::Approx(0.0125));
  std::vector<double> mult = g.predicted_multipliers();
  CHECK(mult.back() < 1);                   // i = 1
  CHECK(mult[2] > 1);                       // i = 2
  double expected = 0.05 / (0.05 + M_PI * std::exp(-20.0));
  CHECK(mult.back() == doctest::Approx(expected).epsilon(1e-15));
  std::vector<Stability> st = g.predicted_stability();
  CHECK(st == std::vector<Stability>{Stability::Unstable, Stability::Stable, Stability::Unstable, Stability::Stable});
}

TEST_CASE("saddle separatrix intercepts") {
  CHECK(!lower_saddle_intercepts(PolynomialFamily{-0.25, -0.25, 0.05, 3}));
  for (double eps : {0.05, 0.025}) {
    PolynomialFamily s{0.5, 0.5, eps, 2};
    auto x = lower_saddle_intercepts(s);
    REQUIRE(x);
    double lead = eps / std::sqrt(0.5 - eps);
    CHECK(std::fabs(x->unstable_x - lead) <= eps * eps);
    CHECK(std::fabs(x->stable_x + lead) <= eps * eps);

    // the same intercepts from the manifolds themselves
    PiecewiseField z = s.field();
    double k = 0.5 - eps, xe = fold_root(s);
    Vec2 saddle{xe, -eps / k};
    double mu = std::sqrt(k * z.lower.jacobian(saddle).a21);
    Vec2 unstable_dir{1, mu / k}, stable_dir{-1, mu / k};
    double d = 1e-9;
    CHECK(first_crossing(z, saddle + d * unstable_dir, 80) == doctest::Approx(x->unstable_x).epsilon(1e-6));
    CHECK(first_crossing(z, saddle + d * stable_dir, -80) == doctest::Approx(x->stable_x).epsilon(1e-6));
  }
  auto g = lower_saddle_intercepts(FlatFamily{0.5, 0.5, 0.05, 3});
  REQUIRE(g);
  CHECK(g->stable_x == doctest::Approx(-0.05 / std::sqrt(0.45)).epsilon(1e-14));
}

TEST_CASE("search intervals") {
  IntegratorConfig cfg;
  SearchInterval focus = search_interval(PolynomialFamily{-0.25, -0.25, 0.05, 3}, cfg);
  CHECK(focus.box_clipped);
  CHECK(focus.lo < 1e-3);
  CHECK(focus.hi > 0.05);
  SearchInterval saddle = search_interval(PolynomialFamily{0.5, 0.5, 0.05, 1}, cfg);
  CHECK(saddle.upper_saddle);
  CHECK(saddle.hi < 0.05 / std::sqrt(0.45));
  CHECK(saddle.hi > std::sqrt(2.0) * 0.05);
  SearchInterval flat = search_interval(FlatFamily{-0.25, -0.25, 0.05, 4}, cfg);
  CHECK(flat.lo == doctest::Approx(0.05 / 4.5));
  CHECK(flat.hi == doctest::Approx(0.07));
}

TEST_CASE("f family scenario") {
  IntegratorConfig cfg;
  ScenarioOptions opt;
  opt.grid_n = 150;
  opt.curve_points = 50;
  ScenarioReport r = run_polynomial_family({-0.25, -0.25, 0.05, 3}, cfg, opt);
  CHECK(r.passed);
  CHECK(r.nested);
  REQUIRE(r.checks.size() == 3);
  for (const CycleCheck& c : r.checks) {
    CHECK(c.location_ok);
    CHECK(c.multiplier_ok);
    CHECK(c.stability_ok);
    CHECK(c.level_residual <= 1e-8);
  }
  CHECK(r.checks[0].predicted == Stability::Stable);
  CHECK(r.checks[1].predicted == Stability::Unstable);
  REQUIRE(r.curves.size() == 6);
  // each arc closes on the switching line and the arcs nest
  double prev_top = 0;
  for (std::size_t k = 0; k < r.curves.size(); k += 2) {
    const Polyline& up = r.curves[k];
    CHECK(up.points.front().y == 0);
    CHECK(up.points.back().y == 0);
    double top = 0;
    for (Vec2 p : up.points) top = std::max(top, p.y);
    CHECK(top > prev_top);
    prev_top = top;
    for (Vec2 p : r.curves[k + 1].points) CHECK(p.y <= 0);
  }

  ScenarioReport saddle = run_polynomial_family({0.5, 0.5, 0.05, 1}, cfg, opt);
  CHECK(saddle.passed);

  ScenarioReport center = run_polynomial_family({-0.25, -0.25, 0.0, 3}, cfg, opt);
  CHECK(center.search.degenerate);
  CHECK(center.search.cycles.empty());
  CHECK(center.passed);

  CHECK_THROWS_AS(run_polynomial_family({-0.25, -0.25, 0.7, 2}, cfg, opt), CatalogError);
  CHECK_THROWS_AS(run_polynomial_family({0.5, 0.5, 0.0, 2}, cfg, opt), PreconditionError);
}

TEST_CASE("g family scenario") {
  IntegratorConfig cfg;
  ScenarioOptions opt;
  opt.grid_n = 150;
  opt.curve_points = 20;
  ScenarioReport r = run_flat_family({-0.25, -0.25, 0.05, 2}, cfg, opt);
  CHECK(r.passed);
  REQUIRE(r.checks.size() == 2);
  CHECK(r.checks[0].index == 1);
  CHECK(r.checks[0].two_sided == Stability::Stable);
  CHECK(r.checks[1].two_sided == Stability::Unstable);
  CHECK(r.curves.size() == 4);
  CHECK_THROWS_AS(run_flat_family({-0.25, -0.25, 0.05, 100000000}, cfg, opt), PreconditionError);
}

TEST_CASE("pseudo-Hopf scan") {
  IntegratorConfig cfg;
  PseudoHopfOptions opt;
  opt.window_lo = 1e-8;
  opt.window_hi = 1.0;
  PiecewiseField stable = make_theorem13_perturbation(make_normal_form(PortraitLabel::FF1), 0.1, 0, 0);
  PseudoHopfReport r = pseudo_hopf_scan(stable, {0.01, 0.0, -0.01}, cfg, opt);
  CHECK(r.passed);
  CHECK(r.focus == Stability::Stable);
  REQUIRE(r.outcomes.size() == 3);
  CHECK(r.outcomes[0].delta == -0.01);
  REQUIRE(r.outcomes[0].cycles.size() == 1);
  CHECK(r.outcomes[0].cycles[0].stability == Stability::Stable);
  CHECK(r.outcomes[1].cycles.empty());
  CHECK(r.outcomes[2].cycles.empty());
  CHECK(r.cycle_side == -1);

  PiecewiseField unstable = make_theorem13_perturbation(make_normal_form(PortraitLabel::FF2), 0.1, 0, 0);
  PseudoHopfReport u = pseudo_hopf_scan(unstable, {-0.01, 0.01}, cfg, opt);
  CHECK(u.passed);
  CHECK(u.focus == Stability::Unstable);
  CHECK(u.cycle_side == 1);

  // default windows scale with the shift
  PseudoHopfReport d = pseudo_hopf_scan(stable, {-0.004}, cfg);
  CHECK(d.outcomes[0].window_hi == doctest::Approx(10 * std::sqrt(0.004)));

  CHECK_THROWS_AS(pseudo_hopf_scan(make_normal_form(PortraitLabel::FF1), {0.01}, cfg), PreconditionError);
  PiecewiseField wrong = make_theorem13_perturbation(make_normal_form(PortraitLabel::FF1), -0.1, 0, 0);
  CHECK_THROWS_AS(pseudo_hopf_scan(wrong, {0.01}, cfg), PreconditionError);
}

TEST_CASE("cycles from the three-parameter perturbation") {
  IntegratorConfig cfg;
  PerturbationDemoReport c = perturbation_cycle_demo(make_z0(-1, -1), 0.1, 0.1, 0.005, cfg);
  CHECK(c.found);
  REQUIRE(c.cycles.size() == 1);
  CHECK(c.cycles[0].stability == Stability::Unstable);
  CHECK(c.cycles[0].x_star < c.window_hi);
  // the unstable pseudo-focus only sheds a cycle for a positive third parameter
  CHECK(!perturbation_cycle_demo(make_z0(-1, -1), 0.1, 0.1, -0.005, cfg).found);

  PerturbationDemoReport s = perturbation_cycle_demo(make_normal_form(PortraitLabel::SS), 0.1, 0.1, 0.005, cfg);
  CHECK(s.found);
  PerturbationDemoReport none = perturbation_cycle_demo(make_z0(-1, -1), 0, 0, 0, cfg);
  CHECK(!none.found);
  CHECK(none.note == "unperturbed field");
  CHECK_THROWS_AS(perturbation_cycle_demo(make_inline("1 + y", "x", "y", "x"), 0.1, 0.1, 0.005, cfg),
                  PreconditionError);
}

TEST_CASE("cycle orbits and outputs") {
  IntegratorConfig cfg;
  PolynomialFamily s{-0.25, -0.25, 0.05, 2};
  std::vector<Sample> orbit = cycle_orbit(s.field(), 0.05, cfg);
  REQUIRE(orbit.size() > 10);
  CHECK(orbit.front().x == doctest::Approx(0.05));
  CHECK(std::fabs(orbit.back().x - 0.05) <= 1e-8);
  CHECK(std::fabs(orbit.back().y) <= 1e-10);

  std::vector<Sample> mirrored = cycle_orbit(reflect_x(s.field()), 0.05, cfg);
  REQUIRE(!mirrored.empty());
  CHECK(mirrored.front().x == doctest::Approx(-0.05));

  ScenarioOptions opt;
  opt.grid_n = 60;
  opt.curve_points = 4;
  ScenarioReport r = run_polynomial_family(s, cfg, opt);
  std::ostringstream text, csv;
  write_scenario_report(text, r);
  write_polylines_csv(csv, r.curves);
  CHECK(text.str().find("result: PASS") != std::string::npos);
  CHECK(text.str().find("cycles found: 2 (expected 2)") != std::string::npos);
  CHECK(csv.str().rfind("curve,x,y\n\"cycle 1 upper\",", 0) == 0);
}
