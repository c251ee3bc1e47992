#include "pwfield/integrate.hpp"

#include <cmath>
#include <functional>
#include <ostream>

#include "dopri.hpp"
#include "pwfield/filippov.hpp"

namespace pwf {

using detail::State;
using detail::Step;
using detail::Tolerance;

void IntegratorConfig::validate() const {
  if (!(relTol > 0 && absTol > 0 && maxStep > 0 && eventTol > 0 && maxTime > 0 && maxEvents > 0 &&
        minAmplitude > 0))
    throw std::invalid_argument("integrator settings must all be positive");
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Upper: return "upper";
    case Regime::Lower: return "lower";
    case Regime::Sliding: return "sliding";
  }
  return "?";
}

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::CrossUp: return "CrossUp";
    case EventKind::CrossDown: return "CrossDown";
    case EventKind::SlideEnter: return "SlideEnter";
    case EventKind::SlideExit: return "SlideExit";
    case EventKind::FoldHit: return "FoldHit";
    case EventKind::PseudoEquilibrium: return "PseudoEquilibrium";
  }
  return "?";
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::TimeOut: return "TimeOut";
    case Termination::BoxExit: return "BoxExit";
    case Termination::NearOrigin: return "NearOrigin";
    case Termination::EventCap: return "EventCap";
    case Termination::SigmaReturn: return "SigmaReturn";
  }
  return "?";
}

std::string to_string(NoReturnReason r) {
  switch (r) {
    case NoReturnReason::TimeOut: return "TimeOut";
    case NoReturnReason::BoxExit: return "BoxExit";
    case NoReturnReason::NearOrigin: return "NearOrigin";
    case NoReturnReason::NotCrossing: return "NotCrossing";
  }
  return "?";
}

namespace {

State<2> as_state(Vec2 p) { return {p.x, p.y}; }
Vec2 as_vec(const State<2>& s) { return {s[0], s[1]}; }

Tolerance<2> zone_tolerance(const IntegratorConfig& cfg) {
  Tolerance<2> tol;
  tol.rel = cfg.relTol;
  tol.abs = {cfg.absTol, cfg.absTol};
  return tol;
}

auto zone_rhs(const PlanarField& f, double direction) {
  return [&f, direction](double, const State<2>& y) {
    Vec2 v = f({y[0], y[1]});
    return State<2>{direction * v.x, direction * v.y};
  };
}

bool finite(const State<2>& s) { return std::isfinite(s[0]) && std::isfinite(s[1]); }

// Bisection for the first theta in [lo, hi] with g(theta) <= 0, given g(lo) > 0
// and g(hi) <= 0. Stops early once |g| <= tol.
double bisect(const std::function<double(double)>& g, double lo, double hi, double tol) {
  for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
    double mid = 0.5 * (lo + hi);
    double v = g(mid);
    if (std::fabs(v) <= tol) return mid;
    (v > 0 ? lo : hi) = mid;
  }
  return hi;
}

// Carries q along the orbit of f onto y = 0 with y as the independent
// variable. Returns the (x, t) offsets, or nullopt when the crossing is too
// shallow for that.
std::optional<std::pair<double, double>> land_on_axis(const PlanarField& f, Vec2 q, double max_dt) {
  if (q.y == 0) return std::pair{0.0, 0.0};
  double v2 = f.second(q);
  if (v2 == 0 || std::fabs(q.y / v2) > max_dt) return std::nullopt;
  // progress variable sigma in [0, 1] with y = (1 - sigma) q.y
  auto rhs = [&f, &q](double sigma, const State<2>& u) {
    Vec2 w = f({q.x + u[0], (1 - sigma) * q.y});
    return State<2>{-q.y * w.x / w.y, -q.y / w.y};
  };
  Tolerance<2> tol;
  tol.rel = 1e-13;
  tol.abs = {1e-13 * std::fabs(q.y), 1e-13 * max_dt};
  State<2> u{0, 0};
  State<2> f0 = rhs(0.0, u);
  double sigma = 0.0, h = 1.0;
  while (sigma < 1.0) {
    Step<2> st = detail::dp_advance<2>(rhs, sigma, u, f0, h, 1.0 - sigma, tol);
    if (!finite(st.y1)) return std::nullopt;
    sigma = 1.0 - st.t1() < 1e-15 ? 1.0 : st.t1();
    u = st.y1;
    f0 = st.f1;
  }
  if (std::fabs(u[1]) > 2 * max_dt) return std::nullopt;
  return std::pair{u[0], u[1]};
}

enum class ZoneEnd { Sigma, Box, Time, NearOrigin };

struct ZoneResult {
  ZoneEnd end = ZoneEnd::Time;
  Vec2 p;
  double t = 0.0;
};

double box_margin(const Box& box, Vec2 p) {
  return 1.0 - std::max(std::fabs(p.x) / box.hx, std::fabs(p.y) / box.hy);
}

// Integrates one zone field from p until y changes sign, the box is left,
// the origin is approached or t_end is reached.
ZoneResult run_zone(const PlanarField& f, Side side, Vec2 p, double t, double t_end, const Box& box,
                    const IntegratorConfig& cfg, std::vector<Sample>* samples) {
  const double sign = side == Side::Upper ? 1.0 : -1.0;
  const Regime regime = side == Side::Upper ? Regime::Upper : Regime::Lower;
  auto rhs = zone_rhs(f, 1.0);
  const Tolerance<2> tol = zone_tolerance(cfg);
  State<2> y = as_state(p);
  State<2> f0 = rhs(t, y);
  double h = detail::initial_step<2>(y, f0, cfg.maxStep);

  while (t < t_end) {
    Step<2> s = detail::dp_advance<2>(rhs, t, y, f0, h, std::min(cfg.maxStep, t_end - t), tol);
    auto height = [&](double th) { return sign * s.dense(th)[1]; };

    std::optional<double> sigma_at, box_at;
    if (sign * s.y1[1] <= 0) {
      double lo = 0;
      if (sign * s.y0[1] <= 0) {
        // started on the line: find where the orbit is inside the zone
        lo = -1;
        for (int k = 1; k < 64 && lo < 0; ++k)
          if (height(k / 64.0) > 0) lo = k / 64.0;
      }
      if (lo < 0) return {ZoneEnd::Sigma, {s.y0[0], 0.0}, t};
      sigma_at = bisect(height, lo, 1.0, cfg.eventTol);
    }
    if (!box.contains(as_vec(s.y1)))
      box_at = bisect([&](double th) { return box_margin(box, as_vec(s.dense(th))); }, 0.0, 1.0, 1e-13);

    if (sigma_at && (!box_at || *sigma_at <= *box_at)) {
      double hs = *sigma_at * s.h;
      Vec2 q = as_vec(s.dense(*sigma_at));
      if (hs > 0) {
        Step<2> part = detail::dp_step<2>(rhs, t, y, f0, hs, tol);
        if (finite(part.y1)) q = as_vec(part.y1);
      }
      Vec2 landing{q.x, 0.0};
      double t_land = t + hs;
      if (auto offsets = land_on_axis(f, q, s.h)) {
        landing.x += offsets->first;
        t_land += offsets->second;
      }
      if (!box.contains(landing)) return {ZoneEnd::Box, landing, t_land};
      return {ZoneEnd::Sigma, landing, t_land};
    }
    if (box_at) {
      Vec2 q = as_vec(s.dense(*box_at));
      if (samples) samples->push_back({t + *box_at * s.h, q.x, q.y, regime});
      return {ZoneEnd::Box, q, t + *box_at * s.h};
    }

    t = s.t1();
    y = s.y1;
    f0 = s.f1;
    if (samples) samples->push_back({t, y[0], y[1], regime});
    if (as_vec(y).norm() < cfg.minAmplitude) return {ZoneEnd::NearOrigin, as_vec(y), t};
  }
  return {ZoneEnd::Time, as_vec(y), t};
}

enum class SlideEnd { Exit, PseudoEquilibrium, Time, NearOrigin, Box };

struct SlideResult {
  SlideEnd end = SlideEnd::Time;
  double x = 0.0;
  double t = 0.0;
};

// Integrates the sliding velocity along y = 0 from x until the sliding set
// ends or the velocity vanishes.
SlideResult run_sliding(const PiecewiseField& z, double x, double t, double t_end, const IntegratorConfig& cfg,
                        std::vector<Sample>* samples) {
  auto velocity = [&z](double xx) { return sliding_value(z.upper({xx, 0}), z.lower({xx, 0})).velocity; };
  auto rhs = [&](double, const State<1>& u) { return State<1>{velocity(u[0])}; };
  Tolerance<1> tol;
  tol.rel = cfg.relTol;
  tol.abs = {cfg.absTol};
  State<1> u{x};
  State<1> f0 = rhs(t, u);
  double h = detail::initial_step<1>(u, f0, cfg.maxStep);
  auto sliding = [&z](double xx) { return classify_sigma_point(z, xx).kind == SigmaKind::Sliding; };

  while (t < t_end) {
    if (std::fabs(f0[0]) < cfg.absTol) return {SlideEnd::PseudoEquilibrium, u[0], t};
    Step<1> s = detail::dp_advance<1>(rhs, t, u, f0, h, std::min(cfg.maxStep, t_end - t), tol);
    double x1 = s.y1[0];
    if (!sliding(x1)) {
      SigmaKind k = classify_sigma_point(z, x1).kind;
      double th = bisect([&](double th) { return sliding(s.dense(th)[0]) ? 1.0 : -1.0; }, 0.0, 1.0, 0.0);
      double xe = s.dense(th)[0];
      double te = t + th * s.h;
      if (samples) samples->push_back({te, xe, 0.0, Regime::Sliding});
      return {k == SigmaKind::SingularSliding ? SlideEnd::NearOrigin : SlideEnd::Exit, xe, te};
    }
    t = s.t1();
    u = s.y1;
    f0 = s.f1;
    if (samples) samples->push_back({t, x1, 0.0, Regime::Sliding});
    if (std::fabs(x1) > z.box.hx) return {SlideEnd::Box, x1, t};
    if (std::fabs(x1) < cfg.minAmplitude) return {SlideEnd::NearOrigin, x1, t};
  }
  return {SlideEnd::Time, u[0], t};
}

Side side_of(double y) { return y > 0 ? Side::Upper : Side::Lower; }

}  // namespace

SmoothStep step_smooth(const PlanarField& f, Vec2 p, double t, double h, const IntegratorConfig& cfg) {
  cfg.validate();
  if (h == 0) throw std::invalid_argument("step_smooth needs a nonzero step");
  double direction = h > 0 ? 1.0 : -1.0;
  auto rhs = zone_rhs(f, direction);
  State<2> y = as_state(p);
  double hh = std::fabs(h);
  Step<2> s = detail::dp_advance<2>(rhs, 0.0, y, rhs(0.0, y), hh, std::fabs(h), zone_tolerance(cfg));
  return {as_vec(s.y1), t + direction * s.h, s.error_max, direction * s.h, direction * hh};
}

OrbitTrace integrate_piecewise(const PiecewiseField& z, Vec2 p0, double t_max, const IntegratorConfig& cfg) {
  cfg.validate();
  if (t_max < 0) {
    OrbitTrace back = integrate_piecewise(time_reversed(z), p0, -t_max, cfg);
    for (Sample& s : back.samples) s.t = -s.t;
    for (Event& e : back.events) e.t = -e.t;
    return back;
  }
  if (!z.box.contains(p0)) throw std::invalid_argument("starting point lies outside the working box");

  OrbitTrace trace;
  const double nudge = 10 * cfg.eventTol;
  Vec2 p = p0;
  double t = 0.0;
  if (std::fabs(p.y) > cfg.eventTol)
    trace.samples.push_back({t, p.x, p.y, p.y > 0 ? Regime::Upper : Regime::Lower});

  auto finish = [&](Termination term) {
    trace.termination = term;
    return trace;
  };
  auto add_event = [&](EventKind kind, double x) {
    trace.events.push_back({t, x, kind});
    return static_cast<int>(trace.events.size()) > cfg.maxEvents;
  };

  for (;;) {
    if (p.norm() < cfg.minAmplitude) return finish(Termination::NearOrigin);
    if (t >= t_max) return finish(Termination::TimeOut);

    if (std::fabs(p.y) <= cfg.eventTol) {
      SigmaClassification c = classify_sigma_point(z, p.x);
      if (c.kind == SigmaKind::SingularSliding) return finish(Termination::NearOrigin);
      if (c.kind == SigmaKind::Crossing) {
        p.y = c.governing == Side::Upper ? nudge : -nudge;
      } else {
        p.y = 0;
        trace.samples.push_back({t, p.x, 0.0, Regime::Sliding});
        if (add_event(EventKind::SlideEnter, p.x)) return finish(Termination::EventCap);
        SlideResult r = run_sliding(z, p.x, t, t_max, cfg, &trace.samples);
        t = r.t;
        p = {r.x, 0.0};
        switch (r.end) {
          case SlideEnd::Time: return finish(Termination::TimeOut);
          case SlideEnd::NearOrigin: return finish(Termination::NearOrigin);
          case SlideEnd::Box: return finish(Termination::BoxExit);
          case SlideEnd::PseudoEquilibrium:
            if (add_event(EventKind::PseudoEquilibrium, p.x)) return finish(Termination::EventCap);
            trace.samples.push_back({t_max, p.x, 0.0, Regime::Sliding});
            return finish(Termination::TimeOut);
          case SlideEnd::Exit: {
            if (add_event(EventKind::SlideExit, p.x)) return finish(Termination::EventCap);
            SigmaClassification after = classify_sigma_point(z, p.x);
            if (after.kind != SigmaKind::Crossing) return finish(Termination::NearOrigin);
            p.y = after.governing == Side::Upper ? nudge : -nudge;
            break;
          }
        }
      }
    }

    Side side = side_of(p.y);
    ZoneResult r = run_zone(z.zone(side), side, p, t, t_max, z.box, cfg, &trace.samples);
    t = r.t;
    p = r.p;
    switch (r.end) {
      case ZoneEnd::Time: return finish(Termination::TimeOut);
      case ZoneEnd::Box: return finish(Termination::BoxExit);
      case ZoneEnd::NearOrigin: return finish(Termination::NearOrigin);
      case ZoneEnd::Sigma: break;
    }
    SigmaClassification c = classify_sigma_point(z, p.x);
    if (c.kind == SigmaKind::Crossing) {
      bool through = (side == Side::Upper) == (c.direction == FlowDirection::Downward);
      EventKind kind = !through ? EventKind::FoldHit
                                : (side == Side::Upper ? EventKind::CrossDown : EventKind::CrossUp);
      if (add_event(kind, p.x)) return finish(Termination::EventCap);
    }
    // sliding and singular points are handled at the top of the loop
  }
}

HalfReturn first_return_to_sigma(const PiecewiseField& z, Side side, double x0, const IntegratorConfig& cfg,
                                 std::vector<Sample>* samples) {
  cfg.validate();
  HalfReturn out;
  if (std::fabs(x0) < cfg.minAmplitude) {
    out.reason = NoReturnReason::NearOrigin;
    return out;
  }
  SigmaClassification c = classify_sigma_point(z, x0);
  if (c.kind != SigmaKind::Crossing || c.governing != side) {
    out.reason = NoReturnReason::NotCrossing;
    return out;
  }
  ZoneResult r = run_zone(z.zone(side), side, {x0, 0.0}, 0.0, cfg.maxTime, z.box, cfg, samples);
  switch (r.end) {
    case ZoneEnd::Sigma:
      out.ok = true;
      out.x = r.p.x;
      out.flight_time = r.t;
      out.displacement = r.p.x + x0;
      return out;
    case ZoneEnd::Time: out.reason = NoReturnReason::TimeOut; break;
    case ZoneEnd::Box: out.reason = NoReturnReason::BoxExit; break;
    case ZoneEnd::NearOrigin: out.reason = NoReturnReason::NearOrigin; break;
  }
  return out;
}

namespace {

// Closed-form orbit of the reference (q y + r, s x) from (x0, 0) up to its
// next hit of y = 0, which lands at (-x0, 0) by reversibility.
class ReferenceArc {
 public:
  static std::optional<ReferenceArc> make(const ZoneSplit& zs, double x0) {
    ReferenceArc a;
    a.q_ = zs.q;
    a.r_ = zs.r;
    a.s_ = zs.s;
    a.x0_ = x0;
    if (zs.q == 0) {
      if (zs.r == 0 || zs.s == 0) return std::nullopt;
      a.kind_ = Kind::Parabolic;
      a.landing_ = -2 * x0 / zs.r;
      if (!(a.landing_ > 0)) return std::nullopt;
      return a;
    }
    a.u0_ = zs.r / zs.q;
    double k = zs.q * zs.s;
    if (k < 0) {
      a.kind_ = Kind::Elliptic;
      a.rate_ = std::sqrt(-k);
      double b = zs.s * x0 / a.rate_;
      double half = std::atan2(b, a.u0_);
      if (half <= 0) half += M_PI;
      a.landing_ = 2 * half / a.rate_;
      return a;
    }
    if (k > 0) {
      a.kind_ = Kind::Hyperbolic;
      a.rate_ = std::sqrt(k);
      double ratio = -(zs.s * x0 / a.rate_) / a.u0_;
      if (!(ratio > 0 && ratio < 1)) return std::nullopt;
      a.landing_ = 2 * std::atanh(ratio) / a.rate_;
      return a;
    }
    return std::nullopt;
  }

  double landing_time() const { return landing_; }

  Vec2 at(double t) const {
    switch (kind_) {
      case Kind::Parabolic: return {x0_ + r_ * t, s_ * t * (x0_ + 0.5 * r_ * t)};
      case Kind::Elliptic: {
        double w = rate_ * t, sn = std::sin(w), sh = std::sin(0.5 * w);
        return {x0_ * std::cos(w) + q_ * u0_ / rate_ * sn, -2 * u0_ * sh * sh + s_ * x0_ / rate_ * sn};
      }
      case Kind::Hyperbolic: {
        double w = rate_ * t, sn = std::sinh(w), sh = std::sinh(0.5 * w);
        return {x0_ * std::cosh(w) + q_ * u0_ / rate_ * sn, 2 * u0_ * sh * sh + s_ * x0_ / rate_ * sn};
      }
    }
    return {};
  }

 private:
  enum class Kind { Parabolic, Elliptic, Hyperbolic };
  Kind kind_ = Kind::Elliptic;
  double q_ = 0, r_ = 0, s_ = 0, x0_ = 0, u0_ = 0, rate_ = 0, landing_ = 0;
};

}  // namespace

std::optional<HalfReturn> first_return_split(const PiecewiseField& z, Side side, double x0,
                                             const IntegratorConfig& cfg) {
  cfg.validate();
  if (!z.split) return std::nullopt;
  const ZoneSplit& zs = side == Side::Upper ? z.split->upper : z.split->lower;
  HalfReturn out;
  if (std::fabs(x0) < cfg.minAmplitude) {
    out.reason = NoReturnReason::NearOrigin;
    return out;
  }
  SigmaClassification c = classify_sigma_point(z, x0);
  if (c.kind != SigmaKind::Crossing || c.governing != side) {
    out.reason = NoReturnReason::NotCrossing;
    return out;
  }
  std::optional<ReferenceArc> arc = ReferenceArc::make(zs, x0);
  if (!arc || arc->landing_time() > cfg.maxTime) return std::nullopt;
  const double T = arc->landing_time();
  const double limit = 0.1 * std::fabs(x0);

  // deviation from the reference, integrated as a small quantity
  auto rhs = [&](double t, const State<2>& d) {
    Vec2 ref = arc->at(t);
    Vec2 w = zs.remainder({ref.x + d[0], ref.y + d[1]});
    return State<2>{zs.q * d[1] + w.x, zs.s * d[0] + w.y};
  };
  State<2> d{0, 0};
  if (!zs.remainder_is_zero) {
    Tolerance<2> tol;
    tol.rel = cfg.relTol;
    double t = 0, scale = 0;
    State<2> f0 = rhs(t, d);
    double h = cfg.maxStep;
    while (t < T) {
      // relative control on the deviation, with a floor far below any
      // resolvable displacement
      double floor = cfg.relTol * scale + 1e-250;
      tol.abs = {floor, floor};
      Step<2> s = detail::dp_advance<2>(rhs, t, d, f0, h, std::min(cfg.maxStep, T - t), tol);
      t = (T - s.t1() < 1e-15 * T) ? T : s.t1();
      d = s.y1;
      f0 = s.f1;
      scale = std::max({scale, std::fabs(d[0]), std::fabs(d[1])});
      if (scale > limit) return std::nullopt;
      Vec2 ref = arc->at(t);
      Vec2 now{ref.x + d[0], ref.y + d[1]};
      if (!z.box.contains(now)) return std::nullopt;
      // the true orbit must not have crossed the line well before the reference
      if ((side == Side::Upper ? -now.y : now.y) > 1e-2 * std::fabs(x0)) return std::nullopt;
    }
  }

  Vec2 end{-x0 + d[0], d[1]};
  auto offsets = land_on_axis(z.zone(side), end, T);
  if (!offsets) return std::nullopt;
  out.ok = true;
  out.used_split = true;
  out.displacement = d[0] + offsets->first;
  out.x = -x0 + out.displacement;
  out.flight_time = T + offsets->second;
  return out;
}

bool events_consistent(const OrbitTrace& trace, double event_tol) {
  std::size_t e = 0;
  int sign = 0;
  // backward traces run with decreasing t
  double dir = trace.samples.size() > 1 && trace.samples.back().t < trace.samples.front().t ? -1.0 : 1.0;
  for (const Sample& s : trace.samples) {
    while (e < trace.events.size() && dir * trace.events[e].t <= dir * s.t) {
      ++e;
      sign = 0;
    }
    if (s.regime == Regime::Sliding) {
      if (std::fabs(s.y) > event_tol) return false;
      continue;
    }
    int sg = s.y > 0 ? 1 : -1;
    if ((s.regime == Regime::Upper) != (sg > 0)) return false;
    if (sign != 0 && sg != sign) return false;
    sign = sg;
  }
  return true;
}

void write_trace_csv(std::ostream& out, const OrbitTrace& trace) {
  auto old = out.precision(17);
  out << "t,x,y,regime\n";
  for (const Sample& s : trace.samples) out << s.t << ',' << s.x << ',' << s.y << ',' << to_string(s.regime) << '\n';
  out.precision(old);
}

void write_events_csv(std::ostream& out, const OrbitTrace& trace) {
  auto old = out.precision(17);
  out << "t,x,kind\n";
  for (const Event& e : trace.events) out << e.t << ',' << e.x << ',' << to_string(e.kind) << '\n';
  out << "# termination " << to_string(trace.termination) << '\n';
  out.precision(old);
}

}  // namespace pwf
