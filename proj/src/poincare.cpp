#include "pwfield/poincare.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

namespace pwf {

std::string to_string(MapMode m) {
  switch (m) {
    case MapMode::Auto: return "auto";
    case MapMode::Direct: return "direct";
    case MapMode::Split: return "split";
  }
  return "?";
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "Stable";
    case Stability::Unstable: return "Unstable";
    case Stability::NonHyperbolic: return "NonHyperbolic";
  }
  return "?";
}

bool needs_mirror(const PiecewiseField& z) { return z.upper.jacobian({0, 0}).a21 < 0; }

namespace {

HalfReturn half(const PiecewiseField& z, Side side, double x, const IntegratorConfig& cfg, MapMode mode) {
  if (mode != MapMode::Direct && z.split) {
    if (std::optional<HalfReturn> s = first_return_split(z, side, x, cfg)) return *s;
  }
  return first_return_to_sigma(z, side, x, cfg);
}

// Full map of a field already oriented so that the positive axis flows up.
ReturnMapSample oriented_map(const PiecewiseField& z, double x0, const IntegratorConfig& cfg, MapMode mode) {
  ReturnMapSample s;
  s.x0 = x0;
  HalfReturn up = half(z, Side::Upper, x0, cfg, mode);
  if (!up.ok) {
    s.failed_half = Side::Upper;
    s.reason = up.reason;
    return s;
  }
  HalfReturn low = half(z, Side::Lower, up.x, cfg, mode);
  if (!low.ok) {
    s.failed_half = Side::Lower;
    s.reason = low.reason;
    return s;
  }
  s.ok = true;
  s.lower_intercept = up.x;
  s.value = low.x;
  s.flight_time = up.flight_time + low.flight_time;
  // x1 = -x0 + d_up and x2 = -x1 + d_low, so x2 - x0 = d_low - d_up
  s.displacement = low.displacement - up.displacement;
  s.used_split = up.used_split && low.used_split;
  return s;
}

struct Oriented {
  PiecewiseField field;
  bool mirrored = false;
};

Oriented orient(const PiecewiseField& z) {
  if (needs_mirror(z)) return {reflect_x(z), true};
  return {z, false};
}

ReturnMapSample require_ok(ReturnMapSample s) {
  if (!s.ok)
    throw NoReturn(s, "no return to the switching line from x0 = " + std::to_string(s.x0) + " (" +
                          to_string(s.reason) + " in the " + to_string(*s.failed_half) + " zone)");
  return s;
}

MapDerivative oriented_derivative(const PiecewiseField& z, double x0, double h, const IntegratorConfig& cfg,
                                  MapMode mode) {
  ReturnMapSample plus = require_ok(oriented_map(z, x0 + h, cfg, mode));
  ReturnMapSample minus = require_ok(oriented_map(z, x0 - h, cfg, mode));
  MapDerivative d;
  d.minus_one = (plus.displacement - minus.displacement) / (2 * h);
  d.multiplier = 1 + d.minus_one;
  d.used_split = plus.used_split && minus.used_split;
  return d;
}

std::vector<ReturnMapSample> evaluate_grid(const PiecewiseField& z, const std::vector<double>& xs,
                                           const IntegratorConfig& cfg, MapMode mode, unsigned threads) {
  std::vector<ReturnMapSample> out(xs.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(xs.size()));
  std::exception_ptr failure;
  std::mutex lock;
  auto work = [&](unsigned first) {
    try {
      for (std::size_t i = first; i < xs.size(); i += threads) out[i] = oriented_map(z, xs[i], cfg, mode);
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
  return out;
}

Stability from_bracket(double d_left, double d_right) {
  if (d_left > 0 && d_right < 0) return Stability::Stable;
  if (d_left < 0 && d_right > 0) return Stability::Unstable;
  return Stability::NonHyperbolic;
}

}  // namespace

ReturnMapSample full_map(const PiecewiseField& z, double x0, const IntegratorConfig& cfg, MapMode mode) {
  cfg.validate();
  if (!needs_mirror(z)) return oriented_map(z, x0, cfg, mode);
  return oriented_map(reflect_x(z), x0, cfg, mode);
}

double default_derivative_step(double x0) { return std::max(1e-4 * std::fabs(x0), 1e-6); }

MapDerivative map_derivative(const PiecewiseField& z, double x0, double h, const IntegratorConfig& cfg,
                             MapMode mode) {
  cfg.validate();
  if (!(h > 0)) throw std::invalid_argument("derivative step must be positive");
  Oriented o = orient(z);
  return oriented_derivative(o.field, x0, h, cfg, mode);
}

FixedPointReport find_fixed_points(const PiecewiseField& z, double lo, double hi, int grid_n,
                                   const IntegratorConfig& cfg, const FixedPointOptions& options) {
  cfg.validate();
  if (!(lo > cfg.minAmplitude) || !(hi > lo) || grid_n < 2)
    throw std::invalid_argument("fixed-point search needs minAmplitude < lo < hi and at least two grid points");
  Oriented o = orient(z);
  FixedPointReport report;
  report.mirrored = o.mirrored;

  std::vector<double> xs(grid_n + 1);
  for (int k = 0; k <= grid_n; ++k) {
    double u = static_cast<double>(k) / grid_n;
    xs[k] = options.geometric_grid ? lo * std::pow(hi / lo, u) : lo + (hi - lo) * u;
  }
  xs.back() = hi;
  report.grid = evaluate_grid(o.field, xs, cfg, options.mode, options.threads);

  std::vector<const ReturnMapSample*> valid;
  bool all_split = true;
  for (const ReturnMapSample& s : report.grid) {
    if (!s.ok) {
      report.skipped.push_back(s.x0);
      continue;
    }
    valid.push_back(&s);
    all_split = all_split && s.used_split;
  }
  if (valid.empty()) throw EmptyInterval("no grid point of the interval has a return");

  double degenerate_tol = options.degenerate_tol.value_or(all_split ? 0.0 : 1e-10);
  std::size_t flat = std::count_if(valid.begin(), valid.end(), [&](const ReturnMapSample* s) {
    return std::fabs(s->displacement) <= degenerate_tol;
  });
  if (flat >= 0.9 * valid.size()) {
    report.degenerate = true;
    return report;
  }

  auto refine = [&](ReturnMapSample a, ReturnMapSample b) {
    for (int i = 0; i < 200; ++i) {
      if (b.x0 - a.x0 <= 1e-12 * (1 + std::fabs(a.x0))) break;
      ReturnMapSample m = oriented_map(o.field, 0.5 * (a.x0 + b.x0), cfg, options.mode);
      if (!m.ok) break;
      if (m.displacement == 0) return m.x0;
      ((m.displacement > 0) == (a.displacement > 0) ? a : b) = m;
    }
    return a.x0 - a.displacement * (b.x0 - a.x0) / (b.displacement - a.displacement);
  };

  struct Root {
    double x;
    Stability bracket;
  };
  std::vector<Root> roots;
  for (std::size_t i = 0; i + 1 < valid.size(); ++i) {
    const ReturnMapSample& a = *valid[i];
    const ReturnMapSample& b = *valid[i + 1];
    if (a.displacement == 0) {
      double left = i > 0 ? valid[i - 1]->displacement : 0.0;
      roots.push_back({a.x0, from_bracket(left, b.displacement)});
    } else if (b.displacement != 0 && (a.displacement > 0) != (b.displacement > 0)) {
      roots.push_back({refine(a, b), from_bracket(a.displacement, b.displacement)});
    }
  }
  if (valid.back()->displacement == 0 && valid.size() > 1)
    roots.push_back({valid.back()->x0, from_bracket(valid[valid.size() - 2]->displacement, 0.0)});

  std::vector<Root> unique;
  for (const Root& r : roots)
    if (unique.empty() || std::fabs(r.x - unique.back().x) >= 1e-9) unique.push_back(r);

  for (const Root& r : unique) {
    ReturnMapSample at = oriented_map(o.field, r.x, cfg, options.mode);
    if (!at.ok) continue;
    double h = options.derivative_step > 0 ? options.derivative_step : default_derivative_step(r.x);
    MapDerivative d = oriented_derivative(o.field, r.x, h, cfg, options.mode);
    LimitCycle c;
    c.x_star = r.x;
    c.lower_intercept = at.lower_intercept;
    c.period = at.flight_time;
    c.multiplier = d.multiplier;
    c.multiplier_minus_one = d.minus_one;
    c.used_split = d.used_split;
    c.bracket_stability = r.bracket;
    if (d.used_split) {
      // displacements carry relative precision: hyperbolic when the slope is
      // resolved, i.e. stable under doubling the difference step
      MapDerivative wide = oriented_derivative(o.field, r.x, 2 * h, cfg, options.mode);
      c.hyperbolic = d.minus_one != 0 && std::fabs(wide.minus_one - d.minus_one) <= 0.01 * std::fabs(d.minus_one);
    } else {
      c.hyperbolic = std::fabs(d.minus_one) > options.hyperbolic_tol;
    }
    if (c.hyperbolic) c.stability = d.minus_one < 0 ? Stability::Stable : Stability::Unstable;
    report.cycles.push_back(c);
  }
  return report;
}

Stability two_sided_stability(const PiecewiseField& z, double x_star, double delta, const IntegratorConfig& cfg,
                              MapMode mode) {
  cfg.validate();
  Oriented o = orient(z);
  ReturnMapSample left = require_ok(oriented_map(o.field, x_star - delta, cfg, mode));
  ReturnMapSample right = require_ok(oriented_map(o.field, x_star + delta, cfg, mode));
  return from_bracket(left.displacement, right.displacement);
}

EllEstimate ell_from_map(const PiecewiseField& z, const std::vector<double>& x0_decreasing,
                         const IntegratorConfig& cfg) {
  cfg.validate();
  if (x0_decreasing.empty()) throw std::invalid_argument("ell_from_map needs at least one amplitude");
  for (std::size_t i = 1; i < x0_decreasing.size(); ++i)
    if (!(x0_decreasing[i] < x0_decreasing[i - 1])) throw std::invalid_argument("amplitudes must decrease");
  Oriented o = orient(z);
  EllEstimate e;
  e.x0 = x0_decreasing;
  for (double x : x0_decreasing) {
    ReturnMapSample s = require_ok(oriented_map(o.field, x, cfg, MapMode::Auto));
    double ratio = s.value / x;
    e.ratio.push_back(ratio);
    e.raw.push_back(std::log(ratio) / M_PI);
  }
  // Neville's scheme for the interpolating polynomial at x0 = 0
  std::vector<double> p = e.raw;
  const std::vector<double>& x = e.x0;
  for (std::size_t k = 1; k < p.size(); ++k)
    for (std::size_t i = p.size() - 1; i >= k; --i) p[i] = (x[i - k] * p[i] - x[i] * p[i - 1]) / (x[i - k] - x[i]);
  e.value = p.back();
  return e;
}

void write_return_map_csv(std::ostream& out, const std::vector<ReturnMapSample>& samples) {
  auto old = out.precision(17);
  out << "x0,P,flightTime,ok\n";
  for (const ReturnMapSample& s : samples) {
    out << s.x0 << ',';
    if (s.ok)
      out << s.value << ',' << s.flight_time << ",1\n";
    else
      out << ",,0\n";
  }
  out.precision(old);
}

void write_cycle_report(std::ostream& out, const FixedPointReport& report) {
  auto old = out.precision(12);
  out << "mirrored: " << (report.mirrored ? "yes" : "no") << '\n';
  out << "degenerate: " << (report.degenerate ? "yes (every sampled point is fixed)" : "no") << '\n';
  out << "skipped grid points: " << report.skipped.size() << '\n';
  out << "cycles: " << report.cycles.size() << '\n';
  int i = 0;
  for (const LimitCycle& c : report.cycles) {
    out << "cycle " << ++i << ": x_star=" << c.x_star << " lower_intercept=" << c.lower_intercept
        << " period=" << c.period << " multiplier=" << c.multiplier << " multiplier_minus_one=" << c.multiplier_minus_one
        << " hyperbolic=" << (c.hyperbolic ? "yes" : "no") << " stability=" << to_string(c.stability)
        << " bracket=" << to_string(c.bracket_stability) << " split=" << (c.used_split ? "yes" : "no") << '\n';
  }
  out.precision(old);
}

}  // namespace pwf
