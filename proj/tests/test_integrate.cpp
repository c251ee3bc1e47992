#include <cmath>
#include <sstream>

#include "catalog_samples.hpp"
#include "doctest.h"
#include "pwfield/integrate.hpp"

using namespace pwf;

namespace {

// Repeated adaptive steps up to time t_end.
Vec2 flow_for(const PlanarField& f, Vec2 p, double t_end, const IntegratorConfig& cfg) {
  double t = 0, h = 0.01;
  while (t < t_end) {
    SmoothStep s = step_smooth(f, p, t, std::min(h, t_end - t), cfg);
    p = s.point;
    t = s.time;
    h = s.next_step;
  }
  return p;
}

}  // namespace

TEST_CASE("smooth stepping") {
  IntegratorConfig cfg;
  PlanarField rot(expr::parse("-y"), expr::parse("x"));
  Vec2 end = flow_for(rot, {1, 0}, 2 * M_PI, cfg);
  CHECK(std::fabs(end.x - 1) <= 1e-8);
  CHECK(std::fabs(end.y) <= 1e-8);

  PlanarField saddle(expr::parse("y"), expr::parse("x"));
  double t = 0, h = 0.01;
  Vec2 p{1, 0};
  while (t < 2) {
    SmoothStep s = step_smooth(saddle, p, t, h, cfg);
    p = s.point;
    t = s.time;
    h = s.next_step;
    CHECK(std::fabs(p.x * p.x - p.y * p.y - 1) <= 1e-8 * (1 + p.x * p.x));
  }

  SmoothStep fwd = step_smooth(rot, {1, 0}, 0, 0.1, cfg);
  SmoothStep bwd = step_smooth(rot, fwd.point, fwd.time, -fwd.step, cfg);
  CHECK(bwd.step == -fwd.step);
  CHECK(bwd.time == doctest::Approx(0).scale(1));
  CHECK((bwd.point - Vec2{1, 0}).norm() <= 1e-9);
}

TEST_CASE("embedded error estimate scales as h^5") {
  IntegratorConfig loose;
  loose.relTol = 1;
  loose.absTol = 1;
  loose.maxStep = 1;
  PlanarField rot(expr::parse("-y"), expr::parse("x"));
  std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
  std::vector<double> errs;
  for (double h : hs) {
    SmoothStep s = step_smooth(rot, {1, 0}, 0, h, loose);
    REQUIRE(s.step == h);
    errs.push_back(s.error);
  }
  for (std::size_t i = 1; i < hs.size(); ++i) {
    double slope = std::log(errs[i - 1] / errs[i]) / std::log(hs[i - 1] / hs[i]);
    CHECK(slope == doctest::Approx(5).epsilon(0.05));
  }
}

TEST_CASE("closed orbit of the nonsmooth center") {
  IntegratorConfig cfg;
  OrbitTrace tr = integrate_piecewise(make_z0(-1, -1), {0.3, 0}, 6.5, cfg);
  REQUIRE(tr.events.size() == 2);
  CHECK(tr.events[0].kind == EventKind::CrossDown);
  CHECK(tr.events[0].x == doctest::Approx(-0.3).epsilon(1e-9));
  CHECK(tr.events[1].kind == EventKind::CrossUp);
  CHECK(std::fabs(tr.events[1].x - 0.3) <= 1e-7);
  CHECK(tr.events[1].t == doctest::Approx(2 * M_PI).epsilon(1e-8));
  CHECK(tr.termination == Termination::TimeOut);
  CHECK(events_consistent(tr, cfg.eventTol));

  OrbitTrace back = integrate_piecewise(make_z0(-1, -1), {0.3, 0.1}, -6.5, cfg);
  REQUIRE(back.events.size() == 2);
  CHECK(back.events[0].t < 0);
  CHECK(events_consistent(back, cfg.eventTol));
}

TEST_CASE("reversibility of the center") {
  IntegratorConfig cfg;
  PiecewiseField z = make_z0(-1, -1);
  Vec2 p0{0.2, 0.1};
  OrbitTrace fwd = integrate_piecewise(z, p0, 4.0, cfg);
  REQUIRE(fwd.termination == Termination::TimeOut);
  CHECK(fwd.samples.back().t == doctest::Approx(4.0));
  OrbitTrace bwd = integrate_piecewise(z, fwd.end(), -4.0, cfg);
  CHECK(bwd.samples.back().t == doctest::Approx(-4.0));
  CHECK((bwd.end() - p0).norm() <= 1e-6);
}

TEST_CASE("half returns") {
  IntegratorConfig cfg;
  PiecewiseField z0 = make_z0(-1, -1);
  HalfReturn h = first_return_to_sigma(z0, Side::Upper, 0.2, cfg);
  REQUIRE(h.ok);
  CHECK(std::fabs(h.x + 0.2) <= 1e-8);
  CHECK(std::fabs(h.flight_time - M_PI) <= 1e-8);

  CHECK(first_return_to_sigma(z0, Side::Lower, 0.2, cfg).reason == NoReturnReason::NotCrossing);
  CHECK(first_return_to_sigma(z0, Side::Upper, 1e-9, cfg).reason == NoReturnReason::NearOrigin);

  HalfReturn ss = first_return_to_sigma(make_normal_form(PortraitLabel::SS), Side::Upper, 0.2, cfg);
  CHECK(!ss.ok);
  CHECK(ss.reason == NoReturnReason::BoxExit);

  PiecewiseField zf = make_prop52(-0.25, -0.25, 3, 0.05);
  for (double x0 : {0.01, 0.03, 0.06}) {
    HalfReturn u = first_return_to_sigma(zf, Side::Upper, x0, cfg);
    REQUIRE(u.ok);
    CHECK(std::fabs(u.x + x0) <= 1e-9);
    std::optional<HalfReturn> s = first_return_split(zf, Side::Upper, x0, cfg);
    REQUIRE(s);
    CHECK(s->used_split);
    CHECK(s->displacement == 0);
    CHECK(s->flight_time == doctest::Approx(u.flight_time).epsilon(1e-8));
  }
}

TEST_CASE("split and direct half returns agree") {
  IntegratorConfig cfg;
  cfg.relTol = 1e-12;
  cfg.absTol = 1e-15;
  for (const PiecewiseField& z : {make_prop52(-0.25, -0.25, 2, 0.05), make_prop52(0.5, 0.5, 1, 0.05),
                                  make_prop53(-0.25, -0.25, 0.05), make_z0(-0.5, -1)}) {
    for (double x1 : {-0.012, -0.03, -0.045}) {
      HalfReturn d = first_return_to_sigma(z, Side::Lower, x1, cfg);
      std::optional<HalfReturn> s = first_return_split(z, Side::Lower, x1, cfg);
      INFO(z.catalog.describe(), " ", x1);
      REQUIRE(d.ok);
      REQUIRE(s);
      CHECK(std::fabs(d.x - s->x) <= 1e-11);
      CHECK(s->flight_time == doctest::Approx(d.flight_time).epsilon(1e-9));
    }
  }
}

TEST_CASE("counterexample orbits") {
  IntegratorConfig cfg;
  HalfReturn full = first_return_to_sigma(make_counterexample_zstar(false), Side::Lower, -0.1, cfg);
  REQUIRE(full.ok);
  CHECK(full.x > 0);
  CHECK(full.flight_time <= 200);

  PiecewiseField lin = make_counterexample_zstar(true);
  std::vector<Sample> arc;
  HalfReturn none = first_return_to_sigma(lin, Side::Lower, -0.1, cfg, &arc);
  CHECK(!none.ok);
  CHECK(none.reason == NoReturnReason::BoxExit);
  for (const Sample& s : arc) CHECK(s.y < 0);
  for (double t : {0.2, 0.4, 0.6, 0.8, 1.0}) {
    OrbitTrace tr = integrate_piecewise(lin, {-0.1, 0}, t, cfg);
    REQUIRE(tr.termination == Termination::TimeOut);
    double y = -0.1 * t * std::exp(t);
    CHECK(std::fabs(tr.end().y - y) <= 1e-6 * std::fabs(y));
  }
}

TEST_CASE("first integrals along arcs of the f family") {
  IntegratorConfig cfg;
  for (double a : {-0.25, 0.25, 0.5}) {
    for (int m : {1, 2, 3}) {
      double b = a, eps = 0.05;
      PiecewiseField z = make_prop52(a, b, m, eps);
      expr::Expression f = prop52_polynomial(m, eps);
      auto h_up = [&](const Sample& s) {
        return 0.5 * s.x * s.x - 0.5 * (a - eps) * s.y * s.y + eps * s.y;
      };
      auto h_low = [&](const Sample& s) {
        return 0.5 * s.x * s.x + eps * expr::evaluate(f, s.x, 0) - 0.5 * (b - eps) * s.y * s.y - eps * s.y;
      };
      for (double x0 : {0.01, 0.04}) {
        std::vector<Sample> up, low;
        HalfReturn u = first_return_to_sigma(z, Side::Upper, x0, cfg, &up);
        REQUIRE(u.ok);
        HalfReturn l = first_return_to_sigma(z, Side::Lower, u.x, cfg, &low);
        REQUIRE(l.ok);
        Sample start_up{0, x0, 0, Regime::Upper}, start_low{0, u.x, 0, Regime::Lower};
        double h0 = h_up(start_up), h1 = h_low(start_low);
        for (const Sample& s : up) CHECK(std::fabs(h_up(s) - h0) <= 1e-8 * (1 + std::fabs(h0)));
        for (const Sample& s : low) CHECK(std::fabs(h_low(s) - h1) <= 1e-8 * (1 + std::fabs(h1)));
      }
    }
  }
}

TEST_CASE("event hygiene on catalog traces") {
  IntegratorConfig cfg;
  cfg.maxTime = 30;
  for (const auto& [name, z] : testing_support::catalog_samples()) {
    for (Vec2 p0 : {Vec2{0.3, 0.05}, Vec2{-0.2, -0.1}, Vec2{0.05, 0}}) {
      if (!z.box.contains(p0)) continue;
      INFO(name);
      OrbitTrace tr = integrate_piecewise(z, p0, 30, cfg);
      CHECK(events_consistent(tr, cfg.eventTol));
    }
  }
}

TEST_CASE("sliding segments") {
  IntegratorConfig cfg;
  PiecewiseField runaway = make_inline("1", "-1", "1", "1");
  OrbitTrace a = integrate_piecewise(runaway, {-0.5, 0.2}, 10, cfg);
  REQUIRE(a.events.size() == 1);
  CHECK(a.events[0].kind == EventKind::SlideEnter);
  CHECK(a.events[0].x == doctest::Approx(-0.3));
  CHECK(a.termination == Termination::BoxExit);
  CHECK(events_consistent(a, cfg.eventTol));

  PiecewiseField rest = make_inline("0.3 - x", "-1", "0.3 - x", "1");
  OrbitTrace b = integrate_piecewise(rest, {-0.5, 0.1}, 100, cfg);
  REQUIRE(b.events.size() == 2);
  CHECK(b.events[1].kind == EventKind::PseudoEquilibrium);
  CHECK(b.events[1].x == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(b.termination == Termination::TimeOut);

  PiecewiseField exit = make_inline("1", "x - 0.2", "1", "1");
  OrbitTrace c = integrate_piecewise(exit, {-0.5, -0.1}, 10, cfg);
  REQUIRE(c.events.size() == 2);
  CHECK(c.events[0].kind == EventKind::SlideEnter);
  CHECK(c.events[0].x == doctest::Approx(-0.4));
  CHECK(c.events[1].kind == EventKind::SlideExit);
  CHECK(c.events[1].x == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(c.events[1].t == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(c.termination == Termination::BoxExit);
  CHECK(events_consistent(c, cfg.eventTol));
}

TEST_CASE("event cap and output") {
  IntegratorConfig cfg;
  cfg.maxEvents = 3;
  OrbitTrace tr = integrate_piecewise(make_z0(-1, -1), {0.3, 0}, 100, cfg);
  CHECK(tr.termination == Termination::EventCap);
  CHECK(tr.events.size() == 4);

  std::ostringstream samples, events;
  write_trace_csv(samples, tr);
  write_events_csv(events, tr);
  CHECK(samples.str().rfind("t,x,y,regime\n", 0) == 0);
  CHECK(events.str().find("CrossDown") != std::string::npos);
  CHECK(events.str().find("# termination EventCap") != std::string::npos);

  IntegratorConfig bad;
  bad.relTol = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
