// Acceptance runner: one timed PASS/FAIL line per criterion, exit status 0
// only when every criterion holds within its time budget.
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "catalog_samples.hpp"
#include "pwfield/bifurcate.hpp"
#include "pwfield/filippov.hpp"
#include "pwfield/spectral.hpp"
#include "random_expressions.hpp"

using namespace pwf;

namespace {

// Collects failed checks with a short description each.
class Verdict {
 public:
  void require(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ = failed_ || !ok;
  }
  bool ok() const { return !failed_; }
  int checks() const { return checks_; }
  std::string summary() const {
    std::string s;
    for (const std::string& f : failures_) s += (s.empty() ? "" : "; ") + f;
    return s;
  }

 private:
  bool failed_ = false;
  int checks_ = 0;
  std::vector<std::string> failures_;
};

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

void polynomial_family(Verdict& v) {
  IntegratorConfig cfg;
  for (double ab : {-0.25, 0.5}) {
    for (int m : {1, 2, 3}) {
      PolynomialFamily fam{ab, ab, 0.05, m};
      ScenarioReport r = run_polynomial_family(fam, cfg);
      std::string tag = "a=b=" + num(ab) + " m=" + std::to_string(m);
      v.require(r.search.cycles.size() == static_cast<std::size_t>(m), tag + " cycle count");
      v.require(r.checks.size() == static_cast<std::size_t>(m), tag + " matched cycles");
      for (const CycleCheck& c : r.checks) {
        std::string id = tag + " i=" + std::to_string(c.index);
        v.require(c.found_x && std::fabs(*c.found_x - c.index * fam.eps / m) <= 1e-6, id + " location");
        v.require(c.found_minus_one && std::fabs(*c.found_minus_one - c.predicted_minus_one) <=
                                           1e-4 * std::fabs(c.predicted_minus_one),
                  id + " multiplier");
        Stability parity = (m - c.index) % 2 == 0 ? Stability::Stable : Stability::Unstable;
        v.require(c.predicted == parity && c.found == parity, id + " stability parity");
      }
    }
  }
}

void flat_family(Verdict& v) {
  IntegratorConfig cfg;
  FlatFamily fam{-0.25, -0.25, 0.05, 4};
  ScenarioReport r = run_flat_family(fam, cfg);
  v.require(r.search.cycles.size() == 4, "cycle count " + std::to_string(r.search.cycles.size()));
  v.require(r.checks.size() == 4, "matched cycles");
  for (const CycleCheck& c : r.checks) {
    std::string id = "i=" + std::to_string(c.index);
    v.require(c.found_x && std::fabs(*c.found_x - fam.eps / c.index) <= 1e-6, id + " location");
    Stability parity = c.index % 2 == 1 ? Stability::Stable : Stability::Unstable;
    v.require(c.predicted == parity, id + " analytic stability");
    if (c.index <= 2) v.require(c.two_sided && *c.two_sided == parity, id + " two-sided sign check");
  }
}

void multiplier_law(Verdict& v) {
  IntegratorConfig cfg;
  PiecewiseField z = make_linear({0.2, -1, 1, 0.2}, {-0.5, -1, 1, -0.5});
  EllEstimate e = ell_from_map(z, {4e-3, 2e-3, 1e-3}, cfg);
  v.require(std::fabs(e.value + 0.3) <= 1e-6, "ell " + num(e.value));
  double target = std::exp(-0.3 * M_PI);
  v.require(std::fabs(e.ratio.back() - target) <= 1e-3 * target, "P(x0)/x0 " + num(e.ratio.back()));
  ReturnMapSample ff = full_map(make_normal_form(PortraitLabel::FF1), 0.1, cfg);
  double ff_target = std::exp(-2 * M_PI) * 0.1;
  v.require(ff.ok && std::fabs(ff.value - ff_target) <= 1e-3 * ff_target, "FF-1 P(0.1) " + num(ff.value));
}

void classification(Verdict& v) {
  for (PortraitLabel l : all_portrait_labels()) {
    OmegaClass c = classify_local(make_normal_form(l));
    v.require(c.label && *c.label == l, "round trip " + to_string(l));
  }
  for (double a : {-1.0, 1.0}) {
    for (double b : {-1.0, 1.0}) {
      OmegaClass c = classify_local(make_z0(a, b));
      Stratum expected = a < 0 && b < 0 ? Stratum::Omega2 : Stratum::Omega1;
      v.require(c.in_omega0 && c.stratum == expected, "z0(" + num(a) + "," + num(b) + ") stratum");
    }
  }
  OmegaClass zl = classify_local(make_counterexample_zstar(true));
  v.require(zl.omega3 && zl.stratum == Stratum::Omega3, "Z*_L in the Omega3 stratum");
  for (const auto& [name, z] : testing_support::catalog_samples()) {
    OmegaClass base = classify_local(z);
    for (const PiecewiseField& t : {reflect_x(z), reflect_y(z), reflect_x(reflect_y(z))}) {
      OmegaClass c = classify_local(t);
      bool same = c.in_omega0 == base.in_omega0 && c.stratum == base.stratum && c.label == base.label &&
                  c.subset == base.subset && std::fabs(c.ell - base.ell) <= 1e-12 * (1 + std::fabs(base.ell));
      v.require(same, "reflection invariance of " + name);
    }
  }
}

void pseudo_hopf(Verdict& v) {
  IntegratorConfig cfg;
  PiecewiseField base = make_theorem13_perturbation(make_normal_form(PortraitLabel::FF1), 0.1, 0, 0);
  PseudoHopfOptions opt;
  opt.window_lo = 1e-8;
  opt.window_hi = 1.0;
  PseudoHopfReport r = pseudo_hopf_scan(base, {-0.01, 0.01}, cfg, opt);
  v.require(r.outcomes.size() == 2, "two shifts scanned");
  for (const ShiftOutcome& o : r.outcomes) {
    v.require(!o.inconclusive, "delta " + num(o.delta) + " conclusive");
    if (o.delta < 0) {
      v.require(o.cycles.size() == 1, "one cycle at delta -0.01, found " + std::to_string(o.cycles.size()));
      v.require(o.cycles.size() == 1 && o.cycles[0].stability == Stability::Stable, "cycle at -0.01 stable");
    } else {
      v.require(o.cycles.empty(), "no cycle at delta +0.01, found " + std::to_string(o.cycles.size()));
    }
  }
}

void counterexample(Verdict& v) {
  IntegratorConfig cfg;
  cfg.maxTime = 200;
  HalfReturn full = first_return_to_sigma(make_counterexample_zstar(false), Side::Lower, -0.1, cfg);
  v.require(full.ok && full.x > 0 && full.flight_time <= 200, "Z* returns at x > 0");
  PiecewiseField lin = make_counterexample_zstar(true);
  std::vector<Sample> arc;
  HalfReturn none = first_return_to_sigma(lin, Side::Lower, -0.1, cfg, &arc);
  v.require(!none.ok, "Z*_L has no return");
  bool below = !arc.empty();
  for (const Sample& s : arc) below = below && s.y < 0 && s.t <= 200;
  v.require(below, "Z*_L arc stays below the line");
  for (double t : {0.2, 0.4, 0.6, 0.8, 1.0}) {
    OrbitTrace tr = integrate_piecewise(lin, {-0.1, 0}, t, cfg);
    double y = -0.1 * t * std::exp(t);
    v.require(tr.termination == Termination::TimeOut && std::fabs(tr.end().y - y) <= 1e-6 * std::fabs(y),
              "closed form at t=" + num(t));
  }
}

void property_suites(Verdict& v) {
  // Filippov convexity
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-1, 1);
  int sliding = 0;
  double worst = 0;
  while (sliding < 1000) {
    Vec2 up{u(rng), u(rng)}, low{u(rng), u(rng)};
    if (up.y * low.y > 0 || (up.y == 0 && low.y == 0)) continue;
    SlidingValue s = sliding_value(up, low);
    Vec2 combo = s.weight * up + (1 - s.weight) * low;
    worst = std::max({worst, std::fabs(combo.y), std::fabs(combo.x - s.velocity)});
    v.require(s.weight >= 0 && s.weight <= 1, "convex weight");
    ++sliding;
  }
  v.require(worst <= 1e-12, "convexity residual " + num(worst));

  // first integrals along arcs of the polynomial family
  IntegratorConfig cfg;
  double drift = 0;
  for (double ab : {-0.25, 0.5}) {
    for (int m : {1, 2, 3}) {
      double eps = 0.05;
      PiecewiseField z = make_prop52(ab, ab, m, eps);
      expr::Expression f = prop52_polynomial(m, eps);
      auto h_up = [&](double x, double y) { return 0.5 * x * x - 0.5 * (ab - eps) * y * y + eps * y; };
      auto h_low = [&](double x, double y) {
        return 0.5 * x * x + eps * expr::evaluate(f, x, 0) - 0.5 * (ab - eps) * y * y - eps * y;
      };
      for (double x0 : {0.01, 0.025, 0.04}) {
        std::vector<Sample> up, low;
        HalfReturn a = first_return_to_sigma(z, Side::Upper, x0, cfg, &up);
        HalfReturn b = a.ok ? first_return_to_sigma(z, Side::Lower, a.x, cfg, &low) : HalfReturn{};
        v.require(a.ok && b.ok, "half orbits return");
        double h0 = h_up(x0, 0), h1 = h_low(a.x, 0);
        for (const Sample& s : up) drift = std::max(drift, std::fabs(h_up(s.x, s.y) - h0) / (1 + std::fabs(h0)));
        for (const Sample& s : low) drift = std::max(drift, std::fabs(h_low(s.x, s.y) - h1) / (1 + std::fabs(h1)));
      }
    }
  }
  v.require(drift <= 1e-8, "first-integral drift " + num(drift));

  // event hygiene on catalog traces in both time directions
  IntegratorConfig hyg;
  int traces = 0;
  for (const auto& [name, z] : testing_support::catalog_samples()) {
    for (Vec2 p0 : {Vec2{0.3, 0.05}, Vec2{-0.2, -0.1}, Vec2{0.05, 0}, Vec2{-0.1, 0.2}}) {
      if (!z.box.contains(p0)) continue;
      for (double t : {30.0, -30.0}) {
        OrbitTrace tr = integrate_piecewise(z, p0, t, hyg);
        v.require(events_consistent(tr, hyg.eventTol), "hygiene " + name);
        ++traces;
      }
    }
  }
  v.require(traces > 50, "hygiene trace count");

  // symbolic derivatives against central differences
  testing_support::RandomExpressions gen(2024);
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  int checked = 0, attempts = 0;
  while (checked < 100 && attempts < 5000) {
    ++attempts;
    expr::Expression e = gen.make(3);
    expr::ParameterBinding p{{"a", w(gen.rng())}};
    double x = w(gen.rng()), y = w(gen.rng());
    for (expr::Var var : {expr::Var::X, expr::Var::Y}) {
      auto at = [&](double d) {
        return var == expr::Var::X ? expr::evaluate(e, x + d, y, p) : expr::evaluate(e, x, y + d, p);
      };
      double h = 1e-6, value = 0, fd = 0, fd2 = 0, exact = 0;
      try {
        value = at(0);
        fd = (at(h) - at(-h)) / (2 * h);
        fd2 = (at(2 * h) - at(-2 * h)) / (4 * h);
        exact = expr::evaluate(expr::differentiate(e, var), x, y, p);
      } catch (const expr::EvalError&) {
        continue;
      }
      // points on a kink or conditional switch are not smooth samples
      if (std::fabs(fd - fd2) > 1e-6 * (1 + std::fabs(fd)) || std::fabs(value) > 1e3) continue;
      v.require(std::fabs(exact - fd) <= 1e-5 * (1 + std::fabs(value)), "derivative of " + e.str());
      ++checked;
    }
  }
  v.require(checked >= 100, "random expressions checked: " + std::to_string(checked));
}

struct Criterion {
  std::string name;
  double budget_s;
  std::function<void(Verdict&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"polynomial family cycles, multipliers and parity", 30, polynomial_family},
      {"flat family cycles and stability", 30, flat_family},
      {"focus-focus multiplier law", 5, multiplier_law},
      {"classification round trip and strata", 2, classification},
      {"pseudo-Hopf one-sidedness", 20, pseudo_hopf},
      {"counterexample separation", 20, counterexample},
      {"property suites", 30, property_suites},
  };
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const Criterion& c = criteria[k];
    Verdict v;
    auto start = std::chrono::steady_clock::now();
    try {
      c.body(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool in_time = elapsed <= c.budget_s;
    bool ok = v.ok() && in_time;
    all = all && ok;
    std::ostringstream line;
    line << (ok ? "PASS" : "FAIL") << "  criterion " << k + 1 << ": " << c.name << "  (" << std::fixed
         << std::setprecision(2) << elapsed << " s of " << std::setprecision(0) << c.budget_s << " s, "
         << v.checks() << " checks)";
    if (!v.ok()) line << "  failed: " << v.summary();
    if (!in_time) line << "  over time budget";
    std::cout << line.str() << std::endl;
  }
  std::cout << (all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << std::endl;
  return all ? 0 : 1;
}
