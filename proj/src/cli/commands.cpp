#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "pwfield/bifurcate.hpp"
#include "pwfield/cli.hpp"
#include "pwfield/filippov.hpp"
#include "pwfield/spectral.hpp"
#include "pwfield/svg.hpp"

namespace pwf::cli {

namespace {

std::string fmt(double v, int digits = 10) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

double to_real(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": '" + s + "' is not a number");
  }
}

std::vector<double> real_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const std::string& part : split(s, ',')) out.push_back(to_real(part, what));
  return out;
}

// ---- options shared by every subcommand ----

struct Common {
  std::string config;
  std::string field;
  std::string upper, lower;
  std::vector<std::string> params;
  std::string box;
  std::string out_dir;
  std::string formats;
  std::optional<double> rel_tol, abs_tol, max_step, event_tol, max_time, min_amplitude;
  std::optional<int> max_events;
};

void add_common(CLI::App* app, Common& c, bool with_field) {
  app->add_option("--config", c.config, "YAML configuration file");
  if (with_field) {
    app->add_option("--field", c.field, "catalog reference, e.g. FF-1 or z0(a=-1,b=-1)");
    app->add_option("--upper", c.upper, "inline upper field 'F1;F2' (use --upper=... for leading minus)");
    app->add_option("--lower", c.lower, "inline lower field 'F1;F2'");
    app->add_option("--param", c.params, "inline parameter k=v (repeatable)");
    app->add_option("--box", c.box, "working box 'hx,hy'");
  }
  app->add_option("--out", c.out_dir, "output directory");
  app->add_option("--formats", c.formats, "comma list from csv,svg,report");
  app->add_option("--rel-tol", c.rel_tol);
  app->add_option("--abs-tol", c.abs_tol);
  app->add_option("--max-step", c.max_step);
  app->add_option("--event-tol", c.event_tol);
  app->add_option("--max-time", c.max_time);
  app->add_option("--max-events", c.max_events);
  app->add_option("--min-amplitude", c.min_amplitude);
}

std::array<std::string, 2> component_pair(const std::string& s, const std::string& what) {
  std::vector<std::string> parts = split(s, ';');
  if (parts.size() != 2) throw ConfigError(what + " needs two components separated by ';'");
  return {parts[0], parts[1]};
}

RunConfig resolve(const Common& c) {
  RunConfig r = c.config.empty() ? RunConfig{} : load_config(c.config);
  if (!c.field.empty() && (!c.upper.empty() || !c.lower.empty()))
    throw ConfigError("give either --field or --upper/--lower, not both");
  if (!c.field.empty()) {
    r.field.catalog = c.field;
    r.field.upper.reset();
    r.field.lower.reset();
  }
  if (!c.upper.empty() || !c.lower.empty()) r.field.catalog.reset();
  if (!c.upper.empty()) r.field.upper = component_pair(c.upper, "--upper");
  if (!c.lower.empty()) r.field.lower = component_pair(c.lower, "--lower");
  for (const std::string& kv : c.params) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects k=v, got '" + kv + "'");
    r.field.parameters.set(kv.substr(0, eq), to_real(kv.substr(eq + 1), "--param " + kv.substr(0, eq)));
  }
  if (!c.box.empty()) {
    std::vector<double> b = real_list(c.box, "--box");
    if (b.size() != 2) throw ConfigError("--box expects hx,hy");
    r.field.box = Box{b[0], b[1]};
  }
  if (!c.out_dir.empty()) r.out_dir = c.out_dir;
  if (!c.formats.empty()) {
    r.formats.clear();
    for (const std::string& f : split(c.formats, ',')) r.formats.insert(f);
  }
  for (const std::string& f : r.formats)
    if (f != "csv" && f != "svg" && f != "report") throw ConfigError("unknown output format '" + f + "'");
  IntegratorConfig& i = r.integrator;
  if (c.rel_tol) i.relTol = *c.rel_tol;
  if (c.abs_tol) i.absTol = *c.abs_tol;
  if (c.max_step) i.maxStep = *c.max_step;
  if (c.event_tol) i.eventTol = *c.event_tol;
  if (c.max_time) i.maxTime = *c.max_time;
  if (c.max_events) i.maxEvents = *c.max_events;
  if (c.min_amplitude) i.minAmplitude = *c.min_amplitude;
  try {
    i.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("integrator: ") + e.what());
  }
  return r;
}

// Files under the output directory, written only for requested formats.
class Outputs {
 public:
  explicit Outputs(const RunConfig& cfg) : cfg_(cfg) {}

  template <class Fn>
  void write(const std::string& name, const std::string& format, Fn&& fn) {
    if (!cfg_.wants(format)) return;
    std::filesystem::path dir(cfg_.out_dir);
    std::filesystem::create_directories(dir);
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    fn(f);
  }

 private:
  const RunConfig& cfg_;
};

const char* regime_color(Regime r) {
  switch (r) {
    case Regime::Upper: return "#1f5fbf";
    case Regime::Lower: return "#bf3a1f";
    case Regime::Sliding: return "#1f9f3a";
  }
  return "#000000";
}

// Splits samples into runs of one regime so each run gets its colour.
void plot_samples(SvgPlot& plot, const std::vector<Sample>& samples) {
  std::size_t start = 0;
  for (std::size_t k = 1; k <= samples.size(); ++k) {
    if (k < samples.size() && samples[k].regime == samples[start].regime) continue;
    std::vector<Vec2> pts;
    // join to the previous run so the curve stays connected
    for (std::size_t j = start == 0 ? 0 : start - 1; j < k; ++j) pts.push_back({samples[j].x, samples[j].y});
    plot.polyline(pts, regime_color(samples[start].regime));
    start = k;
  }
}

// ---- pass/fail tables ----

enum class Verdict { Pass, Fail, Info };

struct Row {
  std::string check, measured, expected;
  Verdict verdict;
};

Row row(std::string check, std::string measured, std::string expected, bool ok) {
  return {std::move(check), std::move(measured), std::move(expected), ok ? Verdict::Pass : Verdict::Fail};
}

Row info(std::string check, std::string measured, std::string expected = "-") {
  return {std::move(check), std::move(measured), std::move(expected), Verdict::Info};
}

bool print_table(std::ostream& out, const std::string& scenario, const std::vector<Row>& rows) {
  bool all = true;
  out << "scenario " << scenario << "\n";
  out << std::left << std::setw(34) << "check" << std::setw(26) << "measured" << std::setw(32) << "expected"
      << "result\n";
  for (const Row& r : rows) {
    const char* v = r.verdict == Verdict::Pass ? "PASS" : r.verdict == Verdict::Fail ? "FAIL" : "info";
    all = all && r.verdict != Verdict::Fail;
    out << std::left << std::setw(34) << r.check << std::setw(26) << r.measured << std::setw(32) << r.expected << v
        << "\n";
  }
  out << "overall: " << (all ? "PASS" : "FAIL") << "\n";
  out << std::right;
  return all;
}

// ---- classify ----

std::string eigen_text(const EigenData& e) {
  if (e.is_complex()) return fmt(e.re1) + " +- " + fmt(e.im1) + "i";
  return fmt(e.re1) + ", " + fmt(e.re2);
}

void write_classification(std::ostream& out, const PiecewiseField& z, const OmegaClass& c) {
  out << "field: " << z.catalog.describe() << "\n";
  out << "omega0: " << (c.in_omega0 ? "pass" : "fail") << "\n";
  if (!c.in_omega0) {
    out << "reason: " << to_string(c.omega0.reason) << "\n";
    if (!c.omega0.detail.empty()) out << "detail: " << c.omega0.detail << "\n";
    return;
  }
  out << "upper eigenvalues: " << eigen_text(c.upper) << "\n";
  out << "lower eigenvalues: " << eigen_text(c.lower) << "\n";
  out << "ell: " << fmt(c.ell) << "\n";
  out << "omega2: " << (c.omega2 ? "yes" : "no") << "\n";
  out << "omega3: " << (c.omega3 ? "yes" : "no") << "\n";
  out << "stratum: " << (c.stratum ? to_string(*c.stratum) : "-") << "\n";
  out << "subset: " << (c.subset ? to_string(*c.subset) : "-") << "\n";
  auto idx = [&](const char* name, const std::optional<int>& v) {
    if (v) out << name << ": " << *v << "\n";
  };
  idx("alpha", c.alpha);
  idx("beta", c.beta);
  idx("gamma", c.gamma);
  idx("eta", c.eta);
  idx("xi", c.xi);
  out << "portrait: " << (c.label ? to_string(*c.label) : "-") << "\n";
  out << "orientation: mirror_x=" << (c.orientation.mirror_x ? "yes" : "no")
      << " swap_sides=" << (c.orientation.swap_sides ? "yes" : "no")
      << " rotate_pi=" << (c.orientation.rotate_pi ? "yes" : "no") << "\n";
  out << (c.structurally_stable() ? "verdict: Σ-structurally stable w.r.t. Ω₀"
                                  : "verdict: not Σ-structurally stable w.r.t. Ω₀")
      << "\n";
}

int cmd_classify(const RunConfig& cfg, std::ostream& out) {
  PiecewiseField z = build_field(cfg.field);
  OmegaClass c = classify_local(z);
  std::ostringstream text;
  write_classification(text, z, c);
  out << text.str();
  Outputs(cfg).write("classify.txt", "report", [&](std::ostream& f) { f << text.str(); });
  return c.in_omega0 ? Pass : PreconditionFailure;
}

// ---- portrait ----

struct PortraitOptions {
  std::vector<std::string> seeds;
  int radial = 0;
  std::optional<double> radius;
  double t_max = 10;
};

std::vector<Vec2> portrait_seeds(const PortraitOptions& o, const Box& box) {
  std::vector<Vec2> out;
  for (const std::string& s : o.seeds) {
    for (const std::string& pair : split(s, ';')) {
      if (pair.empty()) continue;
      std::vector<double> v = real_list(pair, "--seed");
      if (v.size() != 2) throw ConfigError("seeds are 'x,y' pairs, got '" + pair + "'");
      out.push_back({v[0], v[1]});
    }
  }
  if (o.radial < 0) throw ConfigError("--radial must be non-negative");
  double r = o.radius.value_or(0.5 * std::min(box.hx, box.hy));
  for (int k = 0; k < o.radial; ++k) {
    double th = 2 * M_PI * (k + 0.5) / o.radial;
    out.push_back({r * std::cos(th), r * std::sin(th)});
  }
  return out;
}

int cmd_portrait(const RunConfig& cfg, const PortraitOptions& o, std::ostream& out) {
  if (!(o.t_max > 0)) throw ConfigError("--t-max must be positive");
  PiecewiseField z = build_field(cfg.field);
  std::vector<Vec2> seeds = portrait_seeds(o, z.box);
  Outputs files(cfg);
  SvgPlot plot(z.box.hx, z.box.hy);
  plot.title("phase portrait: " + z.catalog.describe());
  std::ostringstream report;
  report << "field: " << z.catalog.describe() << "\nseeds: " << seeds.size() << "\nt_max: " << fmt(o.t_max) << "\n";
  int produced = 0;
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    Vec2 p = seeds[k];
    report << "seed " << k << " (" << fmt(p.x) << ", " << fmt(p.y) << ")\n";
    for (int dir : {1, -1}) {
      std::string tag = "seed" + std::to_string(k) + (dir > 0 ? "_forward" : "_backward");
      try {
        OrbitTrace tr = integrate_piecewise(z, p, dir * o.t_max, cfg.integrator);
        ++produced;
        report << "  " << (dir > 0 ? "forward" : "backward") << ": termination=" << to_string(tr.termination)
               << " events=";
        for (std::size_t e = 0; e < tr.events.size(); ++e)
          report << (e ? "," : "") << to_string(tr.events[e].kind) << "@" << fmt(tr.events[e].x, 6);
        if (tr.events.empty()) report << "none";
        report << " consistent=" << (events_consistent(tr, cfg.integrator.eventTol) ? "yes" : "no") << "\n";
        files.write(tag + ".csv", "csv", [&](std::ostream& f) { write_trace_csv(f, tr); });
        files.write(tag + "_events.csv", "csv", [&](std::ostream& f) { write_events_csv(f, tr); });
        std::vector<Sample> s = tr.samples;
        s.insert(s.begin(), Sample{0.0, p.x, p.y, p.y >= 0 ? Regime::Upper : Regime::Lower});
        plot_samples(plot, s);
        for (const Event& e : tr.events) plot.marker({e.x, 0}, "#000000", 2.5);
      } catch (const std::exception& e) {
        report << "  " << (dir > 0 ? "forward" : "backward") << ": failed: " << e.what() << "\n";
      }
    }
    plot.marker(p, "#7f3fbf", 2.0);
  }
  files.write("portrait.svg", "svg", [&](std::ostream& f) { plot.write(f); });
  files.write("portrait.txt", "report", [&](std::ostream& f) { f << report.str(); });
  out << report.str();
  return seeds.empty() || produced > 0 ? Pass : AssertionFailure;
}

// ---- poincare ----

struct MapOptions {
  std::string x0;
  std::optional<double> lo, hi;
  int n = 50;
  bool geometric = false;
  std::string mode = "auto";
};

MapMode parse_mode(const std::string& m) {
  if (m == "auto") return MapMode::Auto;
  if (m == "direct") return MapMode::Direct;
  if (m == "split") return MapMode::Split;
  throw ConfigError("unknown map mode '" + m + "'");
}

std::vector<double> map_points(const MapOptions& o) {
  if (!o.x0.empty()) {
    std::vector<double> xs = real_list(o.x0, "--x0");
    for (double x : xs)
      if (!(x > 0)) throw ConfigError("--x0 values must be positive");
    return xs;
  }
  if (!o.lo || !o.hi) throw ConfigError("give --x0 or both --lo and --hi");
  if (!(*o.lo > 0 && *o.hi > *o.lo) || o.n < 2) throw ConfigError("need 0 < lo < hi and n >= 2");
  std::vector<double> xs;
  for (int k = 0; k < o.n; ++k) {
    double s = static_cast<double>(k) / (o.n - 1);
    xs.push_back(o.geometric ? *o.lo * std::pow(*o.hi / *o.lo, s) : *o.lo + s * (*o.hi - *o.lo));
  }
  return xs;
}

int cmd_poincare(const RunConfig& cfg, const MapOptions& o, std::ostream& out) {
  PiecewiseField z = build_field(cfg.field);
  MapMode mode = parse_mode(o.mode);
  std::vector<ReturnMapSample> samples;
  for (double x : map_points(o)) samples.push_back(full_map(z, x, cfg.integrator, mode));
  std::ostringstream report;
  report << "field: " << z.catalog.describe() << "\nmirrored: " << (needs_mirror(z) ? "yes" : "no")
         << "\nmode: " << to_string(mode) << "\n";
  for (const ReturnMapSample& s : samples) {
    report << "x0=" << fmt(s.x0, 12);
    if (s.ok)
      report << " P=" << fmt(s.value, 15) << " P-x0=" << fmt(s.displacement, 10) << " flightTime="
             << fmt(s.flight_time, 10) << " split=" << (s.used_split ? "yes" : "no") << "\n";
    else
      report << " no return (" << to_string(s.reason) << " in the " << to_string(*s.failed_half) << " zone)\n";
  }
  Outputs files(cfg);
  files.write("return_map.csv", "csv", [&](std::ostream& f) { write_return_map_csv(f, samples); });
  files.write("poincare.txt", "report", [&](std::ostream& f) { f << report.str(); });
  out << report.str();
  return Pass;
}

// ---- cycles ----

void plot_cycles(SvgPlot& plot, const PiecewiseField& z, const std::vector<LimitCycle>& cycles,
                 const IntegratorConfig& cfg) {
  for (const LimitCycle& c : cycles) {
    plot_samples(plot, cycle_orbit(z, c.x_star, cfg));
    plot.marker({needs_mirror(z) ? -c.x_star : c.x_star, 0}, c.stability == Stability::Stable ? "#1f9f3a" : "#bf1f1f");
  }
}

int cmd_cycles(const RunConfig& cfg, const MapOptions& o, std::ostream& out) {
  PiecewiseField z = build_field(cfg.field);
  if (!o.lo || !o.hi) throw ConfigError("cycles needs --lo and --hi");
  FixedPointOptions fp;
  fp.mode = parse_mode(o.mode);
  fp.geometric_grid = o.geometric;
  FixedPointReport r;
  try {
    r = find_fixed_points(z, *o.lo, *o.hi, o.n, cfg.integrator, fp);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::ostringstream report;
  report << "field: " << z.catalog.describe() << "\ninterval: [" << fmt(*o.lo) << ", " << fmt(*o.hi) << "]\n";
  write_cycle_report(report, r);
  Outputs files(cfg);
  files.write("return_map.csv", "csv", [&](std::ostream& f) { write_return_map_csv(f, r.grid); });
  files.write("cycles.txt", "report", [&](std::ostream& f) { f << report.str(); });
  files.write("cycles.svg", "svg", [&](std::ostream& f) {
    SvgPlot plot(z.box.hx, z.box.hy);
    plot.title("crossing cycles: " + z.catalog.describe());
    plot_cycles(plot, z, r.cycles, cfg.integrator);
    plot.write(f);
  });
  out << report.str();
  return Pass;
}

// ---- pseudo-Hopf ----

struct HopfOptions {
  std::string deltas = "-0.01,0.01";
  std::optional<double> window_lo, window_hi;
  int grid = 200;
};

PseudoHopfReport run_hopf(const PiecewiseField& base, const HopfOptions& o, const IntegratorConfig& cfg) {
  PseudoHopfOptions opt;
  opt.window_lo = o.window_lo;
  opt.window_hi = o.window_hi;
  opt.grid_n = o.grid;
  if (o.grid < 2) throw ConfigError("--grid must be at least 2");
  return pseudo_hopf_scan(base, real_list(o.deltas, "--deltas"), cfg, opt);
}

void write_hopf_files(const RunConfig& cfg, const PiecewiseField& base, const PseudoHopfReport& r) {
  Outputs files(cfg);
  std::ostringstream text;
  write_pseudo_hopf_report(text, r);
  files.write("pseudohopf.txt", "report", [&](std::ostream& f) { f << text.str(); });
  files.write("pseudohopf_cycles.csv", "csv", [&](std::ostream& f) {
    f << "delta,x_star,period,multiplier,stability\n" << std::setprecision(17);
    for (const ShiftOutcome& o : r.outcomes)
      for (const LimitCycle& c : o.cycles)
        f << o.delta << ',' << c.x_star << ',' << c.period << ',' << c.multiplier << ',' << to_string(c.stability)
          << '\n';
  });
  files.write("pseudohopf.svg", "svg", [&](std::ostream& f) {
    SvgPlot plot(base.box.hx, base.box.hy);
    plot.title("pseudo-Hopf scan: " + base.catalog.describe());
    for (const ShiftOutcome& o : r.outcomes)
      plot_cycles(plot, make_pseudo_hopf_shift(base, o.delta), o.cycles, cfg.integrator);
    plot.write(f);
  });
}

int cmd_pseudohopf(const RunConfig& cfg, const HopfOptions& o, std::ostream& out) {
  PiecewiseField base = build_field(cfg.field);
  PseudoHopfReport r = run_hopf(base, o, cfg.integrator);
  write_pseudo_hopf_report(out, r);
  write_hopf_files(cfg, base, r);
  return r.passed ? Pass : AssertionFailure;
}

// ---- verify ----

struct VerifyOptions {
  std::string scenario;
  double a = -0.25, b = -0.25, eps = 0.05;
  int m = 3, imax = 4, grid = 400;
  HopfOptions hopf;
  std::string base;
  double eps1 = 0.1, eps2 = 0.1, eps3 = 0.005;
  double re_up = 0.2, re_down = -0.5, x0 = 1e-3;
};

std::string yes_no(bool b) { return b ? "yes" : "no"; }

void scenario_files(const RunConfig& cfg, const ScenarioReport& r) {
  Outputs files(cfg);
  files.write("verify_" + r.name + ".txt", "report", [&](std::ostream& f) { write_scenario_report(f, r); });
  files.write("verify_" + r.name + "_curves.csv", "csv", [&](std::ostream& f) { write_polylines_csv(f, r.curves); });
  files.write("verify_" + r.name + ".svg", "svg", [&](std::ostream& f) {
    double ext = 0;
    for (const Polyline& p : r.curves)
      for (const Vec2& v : p.points) ext = std::max({ext, std::fabs(v.x), std::fabs(v.y)});
    ext = ext > 0 ? 1.1 * ext : 1.0;
    SvgPlot plot(ext, ext);
    plot.title(r.name + " cycles from the first integrals");
    for (const Polyline& p : r.curves)
      plot.polyline(p.points, p.label.find("upper") != std::string::npos ? "#1f5fbf" : "#bf3a1f");
    plot.write(f);
  });
}

std::vector<Row> family_rows(const ScenarioReport& r, bool multiplier_is_check) {
  std::vector<Row> rows;
  rows.push_back(row("cycle count", std::to_string(r.search.cycles.size()), std::to_string(r.checks.size()),
                     r.search.cycles.size() == r.checks.size()));
  for (const CycleCheck& c : r.checks) {
    std::string id = "cycle " + std::to_string(c.index);
    rows.push_back(row(id + " location", c.found_x ? fmt(*c.found_x, 12) : "-", fmt(c.predicted_x, 12) + " +-1e-6",
                       c.location_ok));
    std::string m = c.found_minus_one ? fmt(*c.found_minus_one, 6) : "-";
    if (multiplier_is_check)
      rows.push_back(row(id + " multiplier-1", m, fmt(c.predicted_minus_one, 6) + " rel 1e-4", c.multiplier_ok));
    else
      rows.push_back(info(id + " multiplier-1", m, fmt(c.predicted_minus_one, 6)));
    if (c.two_sided)
      rows.push_back(row(id + " two-sided sign", to_string(*c.two_sided), to_string(c.predicted),
                         *c.two_sided == c.predicted));
    else if (multiplier_is_check)
      rows.push_back(row(id + " stability", to_string(c.found), to_string(c.predicted), c.stability_ok));
    else
      rows.push_back(info(id + " stability (closed form)", to_string(c.predicted),
                          c.index % 2 == 1 ? "Stable" : "Unstable"));
    rows.push_back(row(id + " level residual", fmt(c.level_residual, 3), "<= 1e-8", c.level_residual <= 1e-8));
  }
  rows.push_back(row("nested", yes_no(r.nested), "yes", r.nested));
  for (const std::string& m : r.mismatches) rows.push_back(row("mismatch", m, "-", false));
  return rows;
}

int verify_prop52(const RunConfig& cfg, const VerifyOptions& o, std::ostream& out) {
  if (o.m < 1) throw ConfigError("--m must be at least 1");
  if (o.grid < 2) throw ConfigError("--grid must be at least 2");
  ScenarioOptions so;
  so.grid_n = o.grid;
  ScenarioReport r = run_polynomial_family({o.a, o.b, o.eps, o.m}, cfg.integrator, so);
  std::vector<Row> rows = family_rows(r, true);
  if (o.eps == 0 && o.a < 0 && o.b < 0)
    rows.insert(rows.begin(), row("degenerate center", yes_no(r.search.degenerate), "yes", r.search.degenerate));
  scenario_files(cfg, r);
  return print_table(out, "prop52", rows) ? Pass : AssertionFailure;
}

int verify_prop53(const RunConfig& cfg, const VerifyOptions& o, std::ostream& out) {
  if (o.imax < 1) throw ConfigError("--imax must be at least 1");
  if (o.grid < 2) throw ConfigError("--grid must be at least 2");
  ScenarioOptions so;
  so.grid_n = o.grid;
  ScenarioReport r = run_flat_family({o.a, o.b, o.eps, o.imax}, cfg.integrator, so);
  scenario_files(cfg, r);
  return print_table(out, "prop53", family_rows(r, false)) ? Pass : AssertionFailure;
}

int verify_pseudohopf(const RunConfig& cfg, const VerifyOptions& o, std::ostream& out) {
  PiecewiseField base = parse_field_reference(o.base.empty() ? "theorem13(FF-1, eps1=0.1)" : o.base);
  HopfOptions h = o.hopf;
  if (!h.window_lo) h.window_lo = 1e-8;
  if (!h.window_hi) h.window_hi = 1.0;
  PseudoHopfReport r = run_hopf(base, h, cfg.integrator);
  write_hopf_files(cfg, base, r);
  std::vector<Row> rows;
  rows.push_back(info("pseudo-focus", to_string(r.focus)));
  int side = r.focus == Stability::Stable ? -1 : r.focus == Stability::Unstable ? 1 : 0;
  for (const ShiftOutcome& s : r.outcomes) {
    bool on_side = side != 0 && (s.delta < 0 ? -1 : s.delta > 0 ? 1 : 0) == side;
    std::size_t expected = on_side ? 1 : 0;
    rows.push_back(row("delta " + fmt(s.delta) + " cycles", std::to_string(s.cycles.size()), std::to_string(expected),
                       s.cycles.size() == expected && !s.inconclusive));
    for (const LimitCycle& c : s.cycles)
      rows.push_back(row("delta " + fmt(s.delta) + " stability", to_string(c.stability), to_string(r.focus),
                         c.stability == r.focus));
  }
  rows.push_back(row("one-sided", yes_no(r.one_sided), "yes", r.one_sided));
  for (const std::string& m : r.mismatches) rows.push_back(row("mismatch", m, "-", false));
  return print_table(out, "pseudohopf", rows) ? Pass : AssertionFailure;
}

int verify_theorem13(const RunConfig& cfg, const VerifyOptions& o, std::ostream& out) {
  PiecewiseField base = parse_field_reference(o.base.empty() ? "z0(-1,-1)" : o.base);
  PerturbationDemoReport r = perturbation_cycle_demo(base, o.eps1, o.eps2, o.eps3, cfg.integrator);
  Outputs files(cfg);
  std::ostringstream text;
  write_demo_report(text, r);
  files.write("verify_theorem13.txt", "report", [&](std::ostream& f) { f << text.str(); });
  files.write("verify_theorem13.svg", "svg", [&](std::ostream& f) {
    PiecewiseField z = make_theorem13_perturbation(base, o.eps1, o.eps2, o.eps3);
    SvgPlot plot(z.box.hx, z.box.hy);
    plot.title("perturbation cycles: " + z.catalog.describe());
    plot_cycles(plot, z, r.cycles, cfg.integrator);
    plot.write(f);
  });
  std::vector<Row> rows;
  rows.push_back(row("crossing cycle found", std::to_string(r.cycles.size()), ">= 1", r.found));
  for (const LimitCycle& c : r.cycles) {
    rows.push_back(row("cycle in window", fmt(c.x_star, 10), "(" + fmt(r.window_lo) + ", " + fmt(r.window_hi) + ")",
                       c.x_star > r.window_lo && c.x_star < r.window_hi));
    rows.push_back(info("cycle stability", to_string(c.stability)));
  }
  if (!r.note.empty()) rows.push_back(info("note", r.note));
  return print_table(out, "theorem13", rows) ? Pass : AssertionFailure;
}

int verify_ell(const RunConfig& cfg, const VerifyOptions& o, std::ostream& out) {
  if (!(o.x0 > 0)) throw ConfigError("--x0 must be positive");
  Mat2 up{o.re_up, -1, 1, o.re_up}, down{o.re_down, -1, 1, o.re_down};
  PiecewiseField z = make_linear(up, down);
  double ell = o.re_up + o.re_down;
  double target = std::exp(ell * M_PI);
  std::vector<Row> rows;
  double spectral = lyapunov_ell(up, down);
  rows.push_back(row("ell from eigenvalues", fmt(spectral, 12), fmt(ell, 12), std::fabs(spectral - ell) <= 1e-12));
  EllEstimate e = ell_from_map(z, {4 * o.x0, 2 * o.x0, o.x0}, cfg.integrator);
  rows.push_back(row("ell from the map", fmt(e.value, 12), fmt(ell, 12) + " +-1e-6",
                     std::fabs(e.value - ell) <= 1e-6 * std::max(1.0, std::fabs(ell))));
  double ratio = e.ratio.back();
  rows.push_back(row("P(x0)/x0 at x0=" + fmt(o.x0), fmt(ratio, 12), fmt(target, 12) + " rel 1e-3",
                     std::fabs(ratio - target) <= 1e-3 * target));
  ReturnMapSample ff = full_map(make_normal_form(PortraitLabel::FF1), 0.1, cfg.integrator);
  double ff_target = std::exp(-2 * M_PI) * 0.1;
  rows.push_back(row("FF-1 P(0.1)", ff.ok ? fmt(ff.value, 12) : "no return", fmt(ff_target, 12) + " rel 1e-3",
                     ff.ok && std::fabs(ff.value - ff_target) <= 1e-3 * ff_target));
  Outputs(cfg).write("verify_ell.csv", "csv", [&](std::ostream& f) {
    f << "x0,ratio,ell_raw\n" << std::setprecision(17);
    for (std::size_t k = 0; k < e.x0.size(); ++k) f << e.x0[k] << ',' << e.ratio[k] << ',' << e.raw[k] << '\n';
  });
  return print_table(out, "ell-ff", rows) ? Pass : AssertionFailure;
}

int verify_counterexample(const RunConfig& cfg, std::ostream& out) {
  IntegratorConfig ic = cfg.integrator;
  std::vector<Row> rows;
  HalfReturn full = first_return_to_sigma(make_counterexample_zstar(false), Side::Lower, -0.1, ic);
  rows.push_back(row("Z* returns to the line", full.ok ? "x=" + fmt(full.x, 8) : to_string(full.reason), "x > 0",
                     full.ok && full.x > 0));
  rows.push_back(row("Z* return time", fmt(full.flight_time, 8), "<= 200", full.ok && full.flight_time <= 200));
  PiecewiseField lin = make_counterexample_zstar(true);
  std::vector<Sample> arc;
  HalfReturn none = first_return_to_sigma(lin, Side::Lower, -0.1, ic, &arc);
  double t_end = arc.empty() ? 0 : arc.back().t;
  rows.push_back(row("Z*_L no return", none.ok ? "returned" : to_string(none.reason), "no return", !none.ok));
  rows.push_back(info("Z*_L arc end time", fmt(t_end, 6), "<= 200"));
  bool below = true;
  for (const Sample& s : arc) below = below && s.y < 0;
  rows.push_back(row("Z*_L stays below the line", yes_no(below), "yes", below));
  for (double t : {0.2, 0.4, 0.6, 0.8, 1.0}) {
    OrbitTrace tr = integrate_piecewise(lin, {-0.1, 0}, t, ic);
    double y = -0.1 * t * std::exp(t);
    bool ok = tr.termination == Termination::TimeOut && std::fabs(tr.end().y - y) <= 1e-6 * std::fabs(y);
    rows.push_back(row("y(" + fmt(t) + ") closed form", fmt(tr.end().y, 12), fmt(y, 12) + " rel 1e-6", ok));
  }
  return print_table(out, "counterexample", rows) ? Pass : AssertionFailure;
}

int cmd_verify(const RunConfig& cfg, const VerifyOptions& o, std::ostream& out) {
  if (o.scenario == "prop52") return verify_prop52(cfg, o, out);
  if (o.scenario == "prop53") return verify_prop53(cfg, o, out);
  if (o.scenario == "pseudohopf") return verify_pseudohopf(cfg, o, out);
  if (o.scenario == "theorem13") return verify_theorem13(cfg, o, out);
  if (o.scenario == "ell-ff") return verify_ell(cfg, o, out);
  if (o.scenario == "counterexample") return verify_counterexample(cfg, out);
  throw ConfigError("unknown scenario '" + o.scenario + "'");
}

void add_map_options(CLI::App* app, MapOptions& o) {
  app->add_option("--lo", o.lo, "lower end of the x0 grid");
  app->add_option("--hi", o.hi, "upper end of the x0 grid");
  app->add_option("--n", o.n, "number of grid points");
  app->add_flag("--geometric", o.geometric, "geometric grid spacing");
  app->add_option("--mode", o.mode, "auto, direct or split");
}

void add_hopf_options(CLI::App* app, HopfOptions& o) {
  app->add_option("--deltas", o.deltas, "comma list of shifts");
  app->add_option("--window-lo", o.window_lo, "amplitude window low end");
  app->add_option("--window-hi", o.window_hi, "amplitude window high end");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Planar piecewise-smooth vector fields: classification, orbits, return maps and cycles", "pwfield"};
  app.require_subcommand(1);

  Common common;
  PortraitOptions portrait;
  MapOptions map;
  HopfOptions hopf;
  VerifyOptions verify;

  auto* classify = app.add_subcommand("classify", "classify the origin and report the stratum");
  add_common(classify, common, true);
  auto* port = app.add_subcommand("portrait", "integrate seeds in both time directions");
  add_common(port, common, true);
  port->add_option("--seed", portrait.seeds, "seed 'x,y' (repeatable, or ';' separated)");
  port->add_option("--radial", portrait.radial, "number of seeds on a circle");
  port->add_option("--radius", portrait.radius, "radius of the seed circle");
  port->add_option("--t-max", portrait.t_max, "integration time per direction");
  auto* poin = app.add_subcommand("poincare", "tabulate the return map on the positive axis");
  add_common(poin, common, true);
  poin->add_option("--x0", map.x0, "comma list of starting abscissae");
  add_map_options(poin, map);
  auto* cyc = app.add_subcommand("cycles", "find crossing limit cycles on an interval");
  add_common(cyc, common, true);
  add_map_options(cyc, map);
  auto* ph = app.add_subcommand("pseudohopf", "scan a shift of the lower field for pseudo-Hopf cycles");
  add_common(ph, common, true);
  add_hopf_options(ph, hopf);
  ph->add_option("--grid", hopf.grid, "grid points per window");
  auto* ver = app.add_subcommand("verify", "run a named scenario against its closed-form oracle");
  add_common(ver, common, false);
  ver->add_option("scenario", verify.scenario, "prop52, prop53, pseudohopf, theorem13, ell-ff, counterexample")
      ->required();
  ver->add_option("--a", verify.a);
  ver->add_option("--b", verify.b);
  ver->add_option("--m", verify.m);
  ver->add_option("--eps", verify.eps);
  ver->add_option("--imax", verify.imax);
  ver->add_option("--grid", verify.grid, "fixed-point search grid");
  ver->add_option("--base", verify.base, "base field reference for pseudohopf and theorem13");
  add_hopf_options(ver, verify.hopf);
  ver->add_option("--eps1", verify.eps1);
  ver->add_option("--eps2", verify.eps2);
  ver->add_option("--eps3", verify.eps3);
  ver->add_option("--re-up", verify.re_up, "real part of the upper eigenvalues");
  ver->add_option("--re-down", verify.re_down, "real part of the lower eigenvalues");
  ver->add_option("--x0", verify.x0, "amplitude for the multiplier check");
  auto* fields = app.add_subcommand("fields", "list catalog field references");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return Pass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return ConfigFailure;
  }

  try {
    if (fields->parsed()) {
      for (const std::string& s : field_reference_help()) out << s << "\n";
      return Pass;
    }
    RunConfig cfg = resolve(common);
    if (classify->parsed()) return cmd_classify(cfg, out);
    if (port->parsed()) return cmd_portrait(cfg, portrait, out);
    if (poin->parsed()) return cmd_poincare(cfg, map, out);
    if (cyc->parsed()) return cmd_cycles(cfg, map, out);
    if (ph->parsed()) return cmd_pseudohopf(cfg, hopf, out);
    verify.hopf.grid = verify.grid < 2 ? 2 : std::min(verify.grid, 200);
    return cmd_verify(cfg, verify, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return ConfigFailure;
  } catch (const CatalogError& e) {
    bool precondition = e.kind() == CatalogError::Kind::NotOmega0 || e.kind() == CatalogError::Kind::NotOmega3 ||
                        e.kind() == CatalogError::Kind::ConditionViolated;
    err << (precondition ? "precondition failed: " : "config error: ") << e.what() << "\n";
    return precondition ? PreconditionFailure : ConfigFailure;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << "\n";
    return PreconditionFailure;
  } catch (const EmptyInterval& e) {
    err << "precondition failed: " << e.what() << "\n";
    return PreconditionFailure;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << "\n";
    return AssertionFailure;
  }
}

}  // namespace pwf::cli
