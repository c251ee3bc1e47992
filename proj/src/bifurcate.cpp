#include "pwfield/bifurcate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "pwfield/filippov.hpp"
#include "pwfield/spectral.hpp"

namespace pwf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double factorial(int n) {
  double f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// f(x) = x prod_k (x^2 - c_k^2) with c_k = k eps / m, and its derivatives.
struct Polynomial {
  int m;
  double eps;

  double value(double x) const {
    double p = x;
    for (int k = 1; k <= m; ++k) p *= x * x - c2(k);
    return p;
  }
  double derivative(double x) const {
    // d/dx [x P(x^2)] = P(u) + 2 x^2 P'(u)
    double u = x * x, p = 1, dp = 0;
    for (int k = 1; k <= m; ++k) {
      dp = dp * (u - c2(k)) + p;
      p *= u - c2(k);
    }
    return p + 2 * u * dp;
  }
  double second(double x) const {
    double h = 1e-6 * std::max(1.0, std::fabs(x));
    return (derivative(x + h) - derivative(x - h)) / (2 * h);
  }
  double c2(int k) const {
    double c = k * eps / m;
    return c * c;
  }
};

// g(x) = exp(-1/x) sin(pi eps / x) for x > 0, zero otherwise.
struct Flat {
  double eps;

  double value(double x) const { return x > 0 ? std::exp(-1 / x) * std::sin(M_PI * eps / x) : 0.0; }
  double derivative(double x) const {
    if (x <= 0) return 0.0;
    double e = std::exp(-1 / x), w = M_PI * eps / x;
    return e / (x * x) * (std::sin(w) - M_PI * eps * std::cos(w));
  }
};

// Safeguarded Newton on a bracketing interval.
double newton_bracketed(const std::function<double(double)>& f, const std::function<double(double)>& df,
                        double lo, double hi, double seed) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0) return lo;
  if (fhi == 0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw BracketFailure("no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  double x = std::clamp(seed, lo, hi);
  for (int it = 0; it < 200; ++it) {
    double fx = f(x);
    if (fx == 0) return x;
    if ((fx > 0) == (flo > 0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    double d = df(x);
    double next = d != 0 ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 4 * std::numeric_limits<double>::epsilon() * std::max(std::fabs(x), 1e-300) ||
        hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(std::fabs(lo), std::fabs(hi)))
      return next;
    x = next;
  }
  return x;
}

// Roots of A y^2 + B y + C = 0 closest to zero on the given side (sign +1
// for y >= 0, -1 for y <= 0). Returns NaN when there is none.
double root_near_zero(double A, double B, double C, int sign) {
  std::vector<double> roots;
  if (A == 0) {
    if (B != 0) roots.push_back(-C / B);
  } else {
    double disc = B * B - 4 * A * C;
    if (disc < 0) {
      if (disc > -1e-14 * B * B) disc = 0;
      else return std::nan("");
    }
    double q = -0.5 * (B + std::copysign(std::sqrt(disc), B == 0 ? 1.0 : B));
    if (q != 0) roots.push_back(C / q);
    roots.push_back(q / A);
  }
  double best = std::nan("");
  for (double r : roots) {
    if (r * sign < -1e-15) continue;
    r = sign > 0 ? std::max(r, 0.0) : std::min(r, 0.0);
    if (std::isnan(best) || std::fabs(r) < std::fabs(best)) best = r;
  }
  return best;
}

// Level functions of the two zones of either family: upper
// H = x^2/2 - (a-eps)/2 y^2 + eps y, lower H = x^2/2 + eps f(x) - (b-eps)/2 y^2 - eps y.
struct Integrals {
  double a, b, eps;
  std::function<double(double)> potential;  // eps * f(x)

  double upper(Vec2 p) const { return 0.5 * p.x * p.x - 0.5 * (a - eps) * p.y * p.y + eps * p.y; }
  double lower(Vec2 p) const {
    return 0.5 * p.x * p.x + potential(p.x) - 0.5 * (b - eps) * p.y * p.y - eps * p.y;
  }

  // Arc of the cycle through (x_star, 0) and (-x_star, 0) on the given side.
  Polyline arc(double x_star, Side side, int n, const std::string& label) const {
    Polyline pl;
    pl.label = label;
    double level = 0.5 * x_star * x_star;
    for (int k = 0; k <= n; ++k) {
      // cosine spacing resolves the vertical tangents at the ends
      double x = x_star * std::cos(M_PI * k / n);
      if (side == Side::Lower) x = -x;
      double y;
      if (side == Side::Upper) {
        y = root_near_zero(-0.5 * (a - eps), eps, 0.5 * x * x - level, 1);
      } else {
        y = root_near_zero(-0.5 * (b - eps), -eps, 0.5 * x * x + potential(x) - level, -1);
      }
      if (k == 0 || k == n) y = 0;
      if (!std::isnan(y)) pl.points.push_back({x, y});
    }
    return pl;
  }
};

// Largest amplitude whose cycle arcs stay in 0.9 of the box, using the
// arc heights at x = 0.
double box_amplitude(const Integrals& h, const Box& box) {
  auto fits = [&](double x0) {
    double level = 0.5 * x0 * x0;
    double yu = root_near_zero(-0.5 * (h.a - h.eps), h.eps, -level, 1);
    double yl = root_near_zero(-0.5 * (h.b - h.eps), -h.eps, h.potential(0) - level, -1);
    auto ok = [&](double y) { return std::isnan(y) || std::fabs(y) <= 0.9 * box.hy; };
    return ok(yu) && ok(yl);
  };
  double hi = 0.9 * box.hx;
  if (fits(hi)) return hi;
  double lo = 0;
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    (fits(mid) ? lo : hi) = mid;
  }
  return lo;
}

std::optional<SaddleIntercepts> saddle_intercepts(double b, double eps, double saddle_x,
                                                  const std::function<double(double)>& pot,
                                                  const std::function<double(double)>& dpot) {
  double k = b - eps;
  if (!(k > 0) || eps == 0) return std::nullopt;
  double ys = -eps / k;
  double level = 0.5 * saddle_x * saddle_x + pot(saddle_x) - 0.5 * k * ys * ys - eps * ys;
  auto f = [&](double x) { return 0.5 * x * x + pot(x) - level; };
  auto df = [&](double x) { return x + dpot(x); };
  double seed = eps / std::sqrt(k);
  SaddleIntercepts s;
  s.unstable_x = newton_bracketed(f, df, 0.25 * seed, 4 * seed, seed);
  s.stable_x = newton_bracketed(f, df, -4 * seed, -0.25 * seed, -seed);
  return s;
}

SearchInterval interval_for(double a, double b, double eps, const std::optional<SaddleIntercepts>& lower,
                            const Integrals& h, const Box& box) {
  SearchInterval iv;
  double upper_bound = a - eps > 0 ? eps / std::sqrt(a - eps) : kInf;
  double lower_bound = lower ? -lower->stable_x : (b - eps > 0 ? 0.0 : 1.0);
  double box_bound = box_amplitude(h, box);
  double hi = std::min({upper_bound, lower_bound, box_bound});
  iv.upper_saddle = hi == upper_bound;
  iv.lower_saddle = lower.has_value() && hi == lower_bound;
  iv.box_clipped = hi == box_bound;
  // stay clear of the separatrix loops
  iv.hi = hi * (1 - 1e-3);
  return iv;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

// Matches found cycles to predicted intercepts and fills the common checks.
void match_cycles(ScenarioReport& r, const std::vector<double>& xs, const std::vector<double>& minus_one,
                  const std::vector<Stability>& stab, const ScenarioOptions& options) {
  std::vector<bool> used(r.search.cycles.size(), false);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CycleCheck c;
    c.index = static_cast<int>(i) + 1;
    c.predicted_x = xs[i];
    c.predicted_minus_one = minus_one[i];
    c.predicted = stab[i];
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < r.search.cycles.size(); ++k) {
      if (used[k]) continue;
      double d = std::fabs(r.search.cycles[k].x_star - xs[i]);
      if (!best || d < std::fabs(r.search.cycles[*best].x_star - xs[i])) best = k;
    }
    double gap = kInf;
    for (std::size_t j = 0; j < xs.size(); ++j)
      if (j != i) gap = std::min(gap, std::fabs(xs[j] - xs[i]));
    if (best && std::fabs(r.search.cycles[*best].x_star - xs[i]) < 0.5 * std::min(gap, xs[i])) {
      used[*best] = true;
      const LimitCycle& lc = r.search.cycles[*best];
      c.found_x = lc.x_star;
      c.found_minus_one = lc.multiplier_minus_one;
      c.found = lc.hyperbolic ? lc.stability : Stability::NonHyperbolic;
      c.location_ok = std::fabs(lc.x_star - xs[i]) <= options.location_tol;
      c.multiplier_ok =
          std::fabs(lc.multiplier_minus_one - minus_one[i]) <= options.multiplier_rel_tol * std::fabs(minus_one[i]);
      c.stability_ok = c.found == c.predicted && lc.bracket_stability == c.predicted;
    }
    r.checks.push_back(c);
  }
  for (std::size_t k = 0; k < r.search.cycles.size(); ++k)
    if (!used[k]) r.mismatches.push_back("unexpected cycle at x = " + fmt(r.search.cycles[k].x_star));
  if (r.search.cycles.size() != xs.size())
    r.mismatches.push_back("expected " + std::to_string(xs.size()) + " cycles, found " +
                           std::to_string(r.search.cycles.size()));
  for (std::size_t k = 1; k < r.search.cycles.size(); ++k) {
    const LimitCycle &p = r.search.cycles[k - 1], &q = r.search.cycles[k];
    if (!(q.x_star > p.x_star && q.lower_intercept < p.lower_intercept)) r.nested = false;
  }
  if (!r.nested) r.mismatches.push_back("cycles are not nested");
}

void check_residuals(ScenarioReport& r, const PiecewiseField& z, const Integrals& h, const IntegratorConfig& cfg) {
  for (CycleCheck& c : r.checks) {
    if (!c.found_x) continue;
    double level = 0.5 * *c.found_x * *c.found_x;
    double worst = 0;
    for (const Sample& s : cycle_orbit(z, *c.found_x, cfg)) {
      Vec2 p{s.x, s.y};
      double v = s.regime == Regime::Upper ? h.upper(p) : h.lower(p);
      worst = std::max(worst, std::fabs(v - level));
    }
    c.level_residual = worst;
  }
}

void record_check_failures(ScenarioReport& r, bool require_multiplier, int two_sided_upto) {
  for (const CycleCheck& c : r.checks) {
    std::string tag = "cycle " + std::to_string(c.index) + ": ";
    if (!c.found_x) {
      r.mismatches.push_back(tag + "no cycle found near " + fmt(c.predicted_x));
      continue;
    }
    if (!c.location_ok)
      r.mismatches.push_back(tag + "location off by " + fmt(*c.found_x - c.predicted_x));
    if (require_multiplier && !c.multiplier_ok)
      r.mismatches.push_back(tag + "multiplier - 1 is " + fmt(*c.found_minus_one) + ", predicted " +
                             fmt(c.predicted_minus_one));
    if (c.index <= two_sided_upto) {
      if (!c.two_sided || *c.two_sided != c.predicted)
        r.mismatches.push_back(tag + "two-sided check disagrees with predicted " + to_string(c.predicted));
    } else if (two_sided_upto < 0 && !c.stability_ok) {
      r.mismatches.push_back(tag + "stability " + to_string(c.found) + ", predicted " + to_string(c.predicted));
    }
    if (c.level_residual > 1e-8) r.mismatches.push_back(tag + "level residual " + fmt(c.level_residual));
  }
}

Stability stability_of_minus_one(double minus_one) {
  if (minus_one < 0) return Stability::Stable;
  if (minus_one > 0) return Stability::Unstable;
  return Stability::NonHyperbolic;
}

}  // namespace

// ---- polynomial family ----

PiecewiseField PolynomialFamily::field() const { return make_prop52(a, b, m, eps); }

double PolynomialFamily::fold_root_leading() const {
  double sign = m % 2 == 1 ? 1.0 : -1.0;
  double f = factorial(m);
  return sign * f * f / std::pow(m, 2 * m) * std::pow(eps, 2 * m + 1);
}

std::vector<double> PolynomialFamily::predicted_cycles() const {
  std::vector<double> xs;
  if (eps == 0) return xs;
  for (int i = 1; i <= m; ++i) xs.push_back(i * eps / m);
  return xs;
}

std::vector<double> PolynomialFamily::predicted_multipliers_minus_one() const {
  // P'(x) = (x - c)/(x + c) with c = 2 eps x^2 prod_{k != i} (x^2 - c_k^2)
  std::vector<double> out;
  Polynomial poly{m, eps};
  for (double x : predicted_cycles()) {
    double prod = 1;
    for (int k = 1; k <= m; ++k)
      if (std::fabs(k * eps / m - x) > 1e-15 * x) prod *= x * x - poly.c2(k);
    double c = 2 * eps * x * x * prod;
    out.push_back(-2 * c / (x + c));
  }
  return out;
}

std::vector<double> PolynomialFamily::predicted_multipliers() const {
  std::vector<double> out = predicted_multipliers_minus_one();
  for (double& v : out) v += 1;
  return out;
}

std::vector<Stability> PolynomialFamily::predicted_stability() const {
  std::vector<Stability> out;
  for (int i = 1; i <= static_cast<int>(predicted_cycles().size()); ++i)
    out.push_back((m - i) % 2 == 0 ? Stability::Stable : Stability::Unstable);
  return out;
}

double fold_root(const PolynomialFamily& scn) {
  if (scn.m < 1) throw std::invalid_argument("m must be at least 1");
  if (scn.eps == 0) return 0.0;
  Polynomial poly{scn.m, scn.eps};
  double e = std::fabs(scn.eps);
  double f = factorial(scn.m);
  double half = 2 * std::pow(e, 2 * scn.m + 1) * f * f / std::pow(scn.m, 2 * scn.m) + std::pow(e, 2 * scn.m + 2);
  auto F = [&](double x) { return x + scn.eps * poly.derivative(x); };
  auto dF = [&](double x) { return 1 + scn.eps * poly.second(x); };
  return newton_bracketed(F, dF, -half, half, scn.fold_root_leading());
}

std::optional<SaddleIntercepts> lower_saddle_intercepts(const PolynomialFamily& scn) {
  Polynomial poly{scn.m, scn.eps};
  double xe = scn.b - scn.eps > 0 && scn.eps != 0 ? fold_root(scn) : 0.0;
  return saddle_intercepts(
      scn.b, scn.eps, xe, [&](double x) { return scn.eps * poly.value(x); },
      [&](double x) { return scn.eps * poly.derivative(x); });
}

std::optional<SaddleIntercepts> lower_saddle_intercepts(const FlatFamily& scn) {
  Flat g{scn.eps};
  return saddle_intercepts(
      scn.b, scn.eps, 0.0, [&](double x) { return scn.eps * g.value(x); },
      [&](double x) { return scn.eps * g.derivative(x); });
}

namespace {

Integrals integrals_of(const PolynomialFamily& scn) {
  Polynomial poly{scn.m, scn.eps};
  return {scn.a, scn.b, scn.eps, [poly](double x) { return poly.eps * poly.value(x); }};
}

Integrals integrals_of(const FlatFamily& scn) {
  Flat g{scn.eps};
  return {scn.a, scn.b, scn.eps, [g](double x) { return g.eps * g.value(x); }};
}

void require_admissible(const SearchInterval& iv, const std::vector<double>& predictions, double eps) {
  if (!(iv.hi > iv.lo)) throw PreconditionError("search interval is empty");
  if (!predictions.empty() && !(iv.hi > std::sqrt(2.0) * eps))
    throw PreconditionError("outer bound " + fmt(iv.hi) + " does not exceed sqrt(2) eps");
  for (double x : predictions)
    if (!(x > iv.lo && x < iv.hi))
      throw PreconditionError("predicted cycle " + fmt(x) + " lies outside the search interval");
}

}  // namespace

SearchInterval search_interval(const PolynomialFamily& scn, const IntegratorConfig& cfg) {
  SearchInterval iv = interval_for(scn.a, scn.b, scn.eps, lower_saddle_intercepts(scn), integrals_of(scn),
                                   scn.field().box);
  iv.lo = std::max(2 * std::fabs(fold_root(scn)), 10 * cfg.minAmplitude);
  return iv;
}

SearchInterval search_interval(const FlatFamily& scn, const IntegratorConfig& cfg) {
  SearchInterval iv = interval_for(scn.a, scn.b, scn.eps, lower_saddle_intercepts(scn), integrals_of(scn),
                                   scn.field().box);
  iv.lo = std::max(scn.eps / (scn.i_max + 0.5), 10 * cfg.minAmplitude);
  iv.hi = std::min(iv.hi, 1.4 * scn.eps);
  return iv;
}

ScenarioReport run_polynomial_family(const PolynomialFamily& scn, const IntegratorConfig& cfg,
                                     const ScenarioOptions& options) {
  cfg.validate();
  if (scn.m < 1) throw std::invalid_argument("m must be at least 1");
  PiecewiseField z = scn.field();
  ScenarioReport r;
  r.name = "prop52";
  r.parameters = {{"a", scn.a}, {"b", scn.b}, {"m", scn.m}, {"eps", scn.eps}};
  r.interval = search_interval(scn, cfg);
  std::vector<double> xs = scn.predicted_cycles();
  require_admissible(r.interval, xs, scn.eps);
  r.search = find_fixed_points(z, r.interval.lo, r.interval.hi, options.grid_n, cfg, options.search);

  match_cycles(r, xs, scn.predicted_multipliers_minus_one(), scn.predicted_stability(), options);
  Integrals h = integrals_of(scn);
  check_residuals(r, z, h, cfg);
  record_check_failures(r, true, -1);
  if (scn.eps == 0 && scn.a < 0 && scn.b < 0 && !r.search.degenerate)
    r.mismatches.push_back("unperturbed center not reported as degenerate");

  for (const CycleCheck& c : r.checks) {
    double x = c.found_x.value_or(c.predicted_x);
    std::string id = std::to_string(c.index);
    r.curves.push_back(h.arc(x, Side::Upper, options.curve_points, "cycle " + id + " upper"));
    r.curves.push_back(h.arc(x, Side::Lower, options.curve_points, "cycle " + id + " lower"));
  }
  r.passed = r.mismatches.empty();
  return r;
}

// ---- flat family ----

PiecewiseField FlatFamily::field() const { return make_prop53(a, b, eps); }

std::vector<double> FlatFamily::predicted_cycles() const {
  std::vector<double> xs;
  if (eps == 0) return xs;
  // increasing order, matching the search output
  for (int i = i_max; i >= 1; --i) xs.push_back(eps / i);
  return xs;
}

std::vector<double> FlatFamily::predicted_multipliers_minus_one() const {
  // P'(eps/i) = (eps/i) / (eps/i - pi i^2 exp(-i/eps) cos(pi i))
  std::vector<double> out;
  for (int i = i_max; i >= 1 && eps != 0; --i) {
    double k = M_PI * i * i * std::exp(-i / eps) * (i % 2 == 0 ? 1.0 : -1.0);
    out.push_back(k / (eps / i - k));
  }
  return out;
}

std::vector<double> FlatFamily::predicted_multipliers() const {
  std::vector<double> out = predicted_multipliers_minus_one();
  for (double& v : out) v += 1;
  return out;
}

std::vector<Stability> FlatFamily::predicted_stability() const {
  std::vector<Stability> out;
  for (double m1 : predicted_multipliers_minus_one()) out.push_back(stability_of_minus_one(m1));
  return out;
}

ScenarioReport run_flat_family(const FlatFamily& scn, const IntegratorConfig& cfg, const ScenarioOptions& options) {
  cfg.validate();
  if (scn.i_max < 1) throw std::invalid_argument("i_max must be at least 1");
  if (!(scn.eps / scn.i_max > cfg.minAmplitude))
    throw PreconditionError("eps / i_max must exceed the minimum amplitude");
  PiecewiseField z = scn.field();
  ScenarioReport r;
  r.name = "prop53";
  r.parameters = {{"a", scn.a}, {"b", scn.b}, {"eps", scn.eps}, {"i_max", scn.i_max}};
  r.interval = search_interval(scn, cfg);
  std::vector<double> xs = scn.predicted_cycles();
  require_admissible(r.interval, xs, 0.0);
  r.search = find_fixed_points(z, r.interval.lo, r.interval.hi, options.grid_n, cfg, options.search);
  match_cycles(r, xs, scn.predicted_multipliers_minus_one(), scn.predicted_stability(), options);

  // Checks are stored in increasing x; index them by i instead.
  for (CycleCheck& c : r.checks) c.index = static_cast<int>(std::lround(scn.eps / c.predicted_x));
  std::sort(r.checks.begin(), r.checks.end(), [](const CycleCheck& p, const CycleCheck& q) { return p.index < q.index; });

  IntegratorConfig tight = cfg;
  tight.relTol = std::min(cfg.relTol, 1e-12);
  tight.absTol = std::min(cfg.absTol, 1e-15);
  for (CycleCheck& c : r.checks) {
    if (c.index > 2 || !c.found_x) continue;
    double spacing = scn.eps / c.index - scn.eps / (c.index + 1);
    c.two_sided = two_sided_stability(z, *c.found_x, 0.1 * spacing, tight, options.search.mode);
  }
  Integrals h = integrals_of(scn);
  check_residuals(r, z, h, cfg);
  record_check_failures(r, false, 2);

  for (const CycleCheck& c : r.checks) {
    double x = c.found_x.value_or(c.predicted_x);
    std::string id = std::to_string(c.index);
    r.curves.push_back(h.arc(x, Side::Upper, options.curve_points, "cycle " + id + " upper"));
    r.curves.push_back(h.arc(x, Side::Lower, options.curve_points, "cycle " + id + " lower"));
  }
  r.passed = r.mismatches.empty();
  return r;
}

// ---- cycle orbits ----

std::vector<Sample> cycle_orbit(const PiecewiseField& z, double x_star, const IntegratorConfig& cfg) {
  bool mirrored = needs_mirror(z);
  PiecewiseField oriented = mirrored ? reflect_x(z) : z;
  std::vector<Sample> up{{0.0, x_star, 0.0, Regime::Upper}}, low;
  HalfReturn u = first_return_to_sigma(oriented, Side::Upper, x_star, cfg, &up);
  if (u.ok) {
    up.push_back({u.flight_time, u.x, 0.0, Regime::Upper});
    HalfReturn l = first_return_to_sigma(oriented, Side::Lower, u.x, cfg, &low);
    if (l.ok) low.push_back({l.flight_time, l.x, 0.0, Regime::Lower});
    for (Sample& s : low) s.t += u.flight_time;
    up.insert(up.end(), low.begin(), low.end());
  }
  if (mirrored)
    for (Sample& s : up) s.x = -s.x;
  return up;
}

// ---- pseudo-Hopf scan ----

namespace {

// Sign of P(x) - x at small amplitudes of the unshifted field.
Stability focus_stability(const PiecewiseField& base, const IntegratorConfig& cfg) {
  Stability verdict = Stability::NonHyperbolic;
  bool first = true;
  for (double x : {1e-2, 1e-3}) {
    ReturnMapSample s = full_map(base, x * std::min(1.0, base.box.hx), cfg);
    Stability here = !s.ok ? Stability::NonHyperbolic : stability_of_minus_one(s.displacement);
    if (first) verdict = here;
    else if (here != verdict) return Stability::NonHyperbolic;
    first = false;
  }
  return verdict;
}

ShiftOutcome scan_one(const PiecewiseField& base, double delta, const IntegratorConfig& cfg,
                      const PseudoHopfOptions& options) {
  ShiftOutcome o;
  o.delta = delta;
  o.window_lo = std::max(options.window_lo.value_or(0.0), 2 * cfg.minAmplitude);
  o.window_hi = options.window_hi.value_or(delta == 0 ? 0.1 : 10 * std::sqrt(std::fabs(delta)));
  o.window_hi = std::min(o.window_hi, 0.95 * std::min(base.box.hx, base.box.hy));
  if (!(o.window_hi > o.window_lo)) {
    o.inconclusive = true;
    o.note = "empty amplitude window";
    return o;
  }
  PiecewiseField z = make_pseudo_hopf_shift(base, delta);
  FixedPointOptions fp;
  fp.geometric_grid = true;
  fp.threads = 1;
  try {
    FixedPointReport r = find_fixed_points(z, o.window_lo, o.window_hi, options.grid_n, cfg, fp);
    for (const LimitCycle& c : r.cycles)
      if (c.hyperbolic) o.cycles.push_back(c);
    if (r.degenerate) {
      o.inconclusive = true;
      o.note = "return map is the identity on the window";
    } else if (r.skipped.size() == r.grid.size()) {
      o.inconclusive = true;
      o.note = "no grid point returns to the switching line";
    } else if (!r.skipped.empty()) {
      o.note = std::to_string(r.skipped.size()) + " grid points without return";
    }
  } catch (const EmptyInterval& e) {
    o.inconclusive = true;
    o.note = e.what();
  }
  return o;
}

}  // namespace

PseudoHopfReport pseudo_hopf_scan(const PiecewiseField& base, std::vector<double> deltas, const IntegratorConfig& cfg,
                                  const PseudoHopfOptions& options) {
  cfg.validate();
  FoldFold ff = fold_fold_classify(base, 0.0);
  double x1 = base.upper.first({0, 0}), y1 = base.lower.first({0, 0});
  if (ff != FoldFold::II)
    throw PreconditionError("origin is not an invisible-invisible fold-fold (" + to_string(ff) + ")");
  if (!(x1 < 0 && 0 < y1))
    throw PreconditionError("need X1(0,0) < 0 < Y1(0,0), got " + fmt(x1) + " and " + fmt(y1));
  if (deltas.empty()) throw std::invalid_argument("no delta values given");
  std::sort(deltas.begin(), deltas.end());

  PseudoHopfReport rep;
  rep.focus = focus_stability(base, cfg);
  rep.outcomes.resize(deltas.size());

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(deltas.size()));
  std::exception_ptr failure;
  std::mutex lock;
  auto work = [&](unsigned first) {
    try {
      for (std::size_t i = first; i < deltas.size(); i += threads)
        rep.outcomes[i] = scan_one(base, deltas[i], cfg, options);
    } catch (...) {
      std::lock_guard guard(lock);
      if (!failure) failure = std::current_exception();
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(work, k);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  bool neg = false, pos = false, zero = false;
  for (const ShiftOutcome& o : rep.outcomes) {
    if (o.inconclusive) rep.mismatches.push_back("delta = " + fmt(o.delta) + ": inconclusive (" + o.note + ")");
    if (o.cycles.empty()) continue;
    (o.delta < 0 ? neg : o.delta > 0 ? pos : zero) = true;
  }
  rep.one_sided = (neg != pos) && !zero;
  rep.cycle_side = rep.one_sided ? (neg ? -1 : 1) : 0;
  if (zero) rep.mismatches.push_back("cycle found at delta = 0");
  if (neg && pos) rep.mismatches.push_back("cycles on both sides of delta = 0");
  if (!neg && !pos) rep.mismatches.push_back("no cycle on either side");

  if (rep.focus == Stability::NonHyperbolic) {
    rep.mismatches.push_back("stability of the unshifted pseudo-focus could not be read from the map");
  } else {
    int expected_side = rep.focus == Stability::Stable ? -1 : 1;
    if (rep.one_sided && rep.cycle_side != expected_side)
      rep.mismatches.push_back("cycles appear on the delta " + std::string(rep.cycle_side < 0 ? "< 0" : "> 0") +
                               " side, expected the other");
    for (const ShiftOutcome& o : rep.outcomes)
      for (const LimitCycle& c : o.cycles)
        if (c.stability != rep.focus)
          rep.mismatches.push_back("delta = " + fmt(o.delta) + ": cycle at " + fmt(c.x_star) + " is " +
                                   to_string(c.stability) + ", focus is " + to_string(rep.focus));
  }
  rep.passed = rep.mismatches.empty();
  return rep;
}

// ---- three-parameter perturbation ----

PerturbationDemoReport perturbation_cycle_demo(const PiecewiseField& base, double eps1, double eps2, double eps3,
                                               const IntegratorConfig& cfg, const PerturbationDemoOptions& options) {
  cfg.validate();
  PerturbationDemoReport r;
  r.eps1 = eps1;
  r.eps2 = eps2;
  r.eps3 = eps3;
  Omega0Result check = omega0_test(base);
  if (!check) throw PreconditionError("base field is not in Omega0: " + check.detail);
  PiecewiseField z = make_theorem13_perturbation(base, eps1, eps2, eps3);
  r.window_lo = std::max(options.window_lo.value_or(0.0), 2 * cfg.minAmplitude);
  r.window_hi = std::min(options.window_hi, 0.95 * std::min(z.box.hx, z.box.hy));
  if (eps1 == 0 && eps2 == 0 && eps3 == 0) {
    r.note = "unperturbed field";
    return r;
  }
  FixedPointOptions fp;
  fp.geometric_grid = true;
  try {
    FixedPointReport f = find_fixed_points(z, r.window_lo, r.window_hi, options.grid_n, cfg, fp);
    for (const LimitCycle& c : f.cycles)
      if (c.hyperbolic) r.cycles.push_back(c);
    if (f.degenerate) r.note = "return map is the identity on the window";
  } catch (const EmptyInterval& e) {
    r.note = e.what();
  }
  r.found = !r.cycles.empty();
  if (!r.found && r.note.empty()) r.note = "no crossing cycle in the window";
  return r;
}

// ---- output ----

void write_scenario_report(std::ostream& out, const ScenarioReport& r) {
  out << "scenario: " << r.name << "\n";
  for (const auto& [k, v] : r.parameters) out << "parameter " << k << " = " << fmt(v) << "\n";
  out << "interval: [" << fmt(r.interval.lo) << ", " << fmt(r.interval.hi) << "]"
      << " upper_saddle=" << (r.interval.upper_saddle ? "yes" : "no")
      << " lower_saddle=" << (r.interval.lower_saddle ? "yes" : "no")
      << " box_clipped=" << (r.interval.box_clipped ? "yes" : "no") << "\n";
  out << "degenerate: " << (r.search.degenerate ? "yes" : "no") << "\n";
  out << "cycles found: " << r.search.cycles.size() << " (expected " << r.checks.size() << ")\n";
  for (const CycleCheck& c : r.checks) {
    out << "cycle " << c.index << ": predicted_x=" << fmt(c.predicted_x)
        << " found_x=" << (c.found_x ? fmt(*c.found_x) : "-")
        << " predicted_multiplier_minus_one=" << fmt(c.predicted_minus_one)
        << " found_multiplier_minus_one=" << (c.found_minus_one ? fmt(*c.found_minus_one) : "-")
        << " predicted=" << to_string(c.predicted) << " found=" << to_string(c.found)
        << " two_sided=" << (c.two_sided ? to_string(*c.two_sided) : "-")
        << " level_residual=" << fmt(c.level_residual) << " location=" << (c.location_ok ? "ok" : "FAIL")
        << " multiplier=" << (c.multiplier_ok ? "ok" : "FAIL") << "\n";
  }
  out << "nested: " << (r.nested ? "yes" : "no") << "\n";
  for (const std::string& m : r.mismatches) out << "mismatch: " << m << "\n";
  out << "result: " << (r.passed ? "PASS" : "FAIL") << "\n";
}

void write_pseudo_hopf_report(std::ostream& out, const PseudoHopfReport& r) {
  out << "pseudo-focus: " << to_string(r.focus) << "\n";
  for (const ShiftOutcome& o : r.outcomes) {
    out << "delta " << fmt(o.delta) << ": window=[" << fmt(o.window_lo) << ", " << fmt(o.window_hi)
        << "] cycles=" << o.cycles.size() << (o.inconclusive ? " inconclusive" : "");
    if (!o.note.empty()) out << " note=\"" << o.note << "\"";
    out << "\n";
    for (const LimitCycle& c : o.cycles)
      out << "  cycle x_star=" << fmt(c.x_star) << " period=" << fmt(c.period)
          << " multiplier=" << fmt(c.multiplier) << " stability=" << to_string(c.stability) << "\n";
  }
  out << "one-sided: " << (r.one_sided ? "yes" : "no") << " side=" << r.cycle_side << "\n";
  for (const std::string& m : r.mismatches) out << "mismatch: " << m << "\n";
  out << "result: " << (r.passed ? "PASS" : "FAIL") << "\n";
}

void write_demo_report(std::ostream& out, const PerturbationDemoReport& r) {
  out << "perturbation: eps1=" << fmt(r.eps1) << " eps2=" << fmt(r.eps2) << " eps3=" << fmt(r.eps3) << "\n";
  out << "window: [" << fmt(r.window_lo) << ", " << fmt(r.window_hi) << "]\n";
  out << "cycles: " << r.cycles.size() << "\n";
  for (const LimitCycle& c : r.cycles)
    out << "cycle x_star=" << fmt(c.x_star) << " lower_intercept=" << fmt(c.lower_intercept)
        << " period=" << fmt(c.period) << " multiplier=" << fmt(c.multiplier)
        << " stability=" << to_string(c.stability) << "\n";
  if (!r.note.empty()) out << "note: " << r.note << "\n";
  out << "result: " << (r.found ? "cycle found" : "no cycle found") << "\n";
}

void write_polylines_csv(std::ostream& out, const std::vector<Polyline>& curves) {
  out << "curve,x,y\n" << std::setprecision(17);
  for (const Polyline& c : curves)
    for (const Vec2& p : c.points) out << '"' << c.label << "\"," << p.x << ',' << p.y << '\n';
}

}  // namespace pwf
