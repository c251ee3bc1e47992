// Python bindings for the pwfield core: catalog fields, classification,
// integration, return maps, cycle search and the bifurcation scenarios.
#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pwfield/bifurcate.hpp"
#include "pwfield/filippov.hpp"
#include "pwfield/spectral.hpp"

namespace py = pybind11;
using namespace pwf;

namespace {

PortraitLabel label_from(const std::string& name) {
  for (PortraitLabel l : all_portrait_labels())
    if (to_string(l) == name) return l;
  throw CatalogError(CatalogError::Kind::UnknownLabel, "unknown portrait label '" + name + "'");
}

Mat2 mat_from(const std::array<double, 4>& v) { return {v[0], v[1], v[2], v[3]}; }

std::string eigen_repr(const EigenData& e) {
  std::ostringstream s;
  s << "EigenData(" << e.re1 << (e.is_complex() ? " +- " : ", ") << (e.is_complex() ? e.im1 : e.re2)
    << (e.is_complex() ? "i)" : ")");
  return s.str();
}

template <class Fn>
std::string to_text(Fn&& fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Planar piecewise-smooth vector fields split by y = 0";

  py::register_exception<CatalogError>(m, "CatalogError", PyExc_ValueError);
  py::register_exception<expr::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<expr::EvalError>(m, "EvalError", PyExc_ArithmeticError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_RuntimeError);
  py::register_exception<EmptyInterval>(m, "EmptyInterval", PyExc_ValueError);
  py::register_exception<NotOmega1>(m, "NotOmega1", PyExc_ValueError);

  py::enum_<Side>(m, "Side").value("Upper", Side::Upper).value("Lower", Side::Lower);
  py::enum_<Regime>(m, "Regime")
      .value("Upper", Regime::Upper)
      .value("Lower", Regime::Lower)
      .value("Sliding", Regime::Sliding);
  py::enum_<EventKind>(m, "EventKind")
      .value("CrossUp", EventKind::CrossUp)
      .value("CrossDown", EventKind::CrossDown)
      .value("SlideEnter", EventKind::SlideEnter)
      .value("SlideExit", EventKind::SlideExit)
      .value("FoldHit", EventKind::FoldHit)
      .value("PseudoEquilibrium", EventKind::PseudoEquilibrium);
  py::enum_<Termination>(m, "Termination")
      .value("TimeOut", Termination::TimeOut)
      .value("BoxExit", Termination::BoxExit)
      .value("NearOrigin", Termination::NearOrigin)
      .value("EventCap", Termination::EventCap)
      .value("SigmaReturn", Termination::SigmaReturn);
  py::enum_<MapMode>(m, "MapMode")
      .value("Auto", MapMode::Auto)
      .value("Direct", MapMode::Direct)
      .value("Split", MapMode::Split);
  py::enum_<Stability>(m, "Stability")
      .value("Stable", Stability::Stable)
      .value("Unstable", Stability::Unstable)
      .value("NonHyperbolic", Stability::NonHyperbolic);
  py::enum_<Stratum>(m, "Stratum")
      .value("Omega1", Stratum::Omega1)
      .value("Omega2", Stratum::Omega2)
      .value("Omega3", Stratum::Omega3);

  py::class_<IntegratorConfig>(m, "IntegratorConfig")
      .def(py::init<>())
      .def_readwrite("relTol", &IntegratorConfig::relTol)
      .def_readwrite("absTol", &IntegratorConfig::absTol)
      .def_readwrite("maxStep", &IntegratorConfig::maxStep)
      .def_readwrite("eventTol", &IntegratorConfig::eventTol)
      .def_readwrite("maxTime", &IntegratorConfig::maxTime)
      .def_readwrite("maxEvents", &IntegratorConfig::maxEvents)
      .def_readwrite("minAmplitude", &IntegratorConfig::minAmplitude)
      .def("validate", &IntegratorConfig::validate);

  py::class_<PiecewiseField>(m, "PiecewiseField")
      .def("upper", [](const PiecewiseField& z, double x, double y) {
        Vec2 v = z.upper({x, y});
        return std::pair{v.x, v.y};
      })
      .def("lower", [](const PiecewiseField& z, double x, double y) {
        Vec2 v = z.lower({x, y});
        return std::pair{v.x, v.y};
      })
      .def_property_readonly("name", [](const PiecewiseField& z) { return z.catalog.name; })
      .def_property_readonly("box", [](const PiecewiseField& z) { return std::pair{z.box.hx, z.box.hy}; })
      .def_property_readonly("has_split", [](const PiecewiseField& z) { return z.split.has_value(); })
      .def("describe", [](const PiecewiseField& z) { return z.catalog.describe(); })
      .def("__repr__", [](const PiecewiseField& z) { return "<PiecewiseField " + z.catalog.describe() + ">"; });

  m.def("portrait_labels", [] {
    std::vector<std::string> out;
    for (PortraitLabel l : all_portrait_labels()) out.push_back(to_string(l));
    return out;
  });
  m.def("normal_form", [](const std::string& label) { return make_normal_form(label_from(label)); },
        py::arg("label"));
  m.def("inline_field",
        [](const std::string& u1, const std::string& u2, const std::string& l1, const std::string& l2,
           const std::map<std::string, double>& params, std::pair<double, double> box) {
          expr::ParameterBinding p;
          for (const auto& [k, v] : params) p.set(k, v);
          return make_inline(u1, u2, l1, l2, p, Box{box.first, box.second});
        },
        py::arg("upper1"), py::arg("upper2"), py::arg("lower1"), py::arg("lower2"),
        py::arg("params") = std::map<std::string, double>{}, py::arg("box") = std::pair{1.0, 1.0});
  m.def("linear", [](const std::array<double, 4>& up, const std::array<double, 4>& low) {
    return make_linear(mat_from(up), mat_from(low));
  }, py::arg("upper"), py::arg("lower"), "Linear field from row-major 2x2 matrices.");
  m.def("z0", &make_z0, py::arg("a"), py::arg("b"));
  m.def("prop52", &make_prop52, py::arg("a"), py::arg("b"), py::arg("m"), py::arg("eps"));
  m.def("prop53", &make_prop53, py::arg("a"), py::arg("b"), py::arg("eps"));
  m.def("pseudo_hopf_shift", &make_pseudo_hopf_shift, py::arg("base"), py::arg("delta"));
  m.def("theorem13_perturbation", &make_theorem13_perturbation, py::arg("base"), py::arg("eps1") = 0.0,
        py::arg("eps2") = 0.0, py::arg("eps3") = 0.0);
  m.def("omega3_perturbation", &make_omega3_perturbation, py::arg("base"), py::arg("eps"));
  m.def("counterexample_zstar", &make_counterexample_zstar, py::arg("linearized") = false);
  m.def("reflect_x", &reflect_x);
  m.def("reflect_y", &reflect_y);
  m.def("time_reversed", &time_reversed);

  // classification
  py::class_<EigenData>(m, "EigenData")
      .def_readonly("trace", &EigenData::trace)
      .def_readonly("det", &EigenData::det)
      .def_property_readonly("eigenvalues",
                             [](const EigenData& e) {
                               return std::pair{std::complex<double>(e.re1, e.im1), std::complex<double>(e.re2, e.im2)};
                             })
      .def_property_readonly("is_complex", &EigenData::is_complex)
      .def("__repr__", &eigen_repr);

  py::class_<OmegaClass>(m, "OmegaClass")
      .def_readonly("in_omega0", &OmegaClass::in_omega0)
      .def_property_readonly("omega0_failure", [](const OmegaClass& c) { return to_string(c.omega0.reason); })
      .def_property_readonly("omega0_detail", [](const OmegaClass& c) { return c.omega0.detail; })
      .def_readonly("upper", &OmegaClass::upper)
      .def_readonly("lower", &OmegaClass::lower)
      .def_readonly("ell", &OmegaClass::ell)
      .def_readonly("omega2", &OmegaClass::omega2)
      .def_readonly("omega3", &OmegaClass::omega3)
      .def_readonly("stratum", &OmegaClass::stratum)
      .def_property_readonly("subset",
                             [](const OmegaClass& c) { return c.subset ? std::optional(to_string(*c.subset)) : std::nullopt; })
      .def_property_readonly("label",
                             [](const OmegaClass& c) { return c.label ? std::optional(to_string(*c.label)) : std::nullopt; })
      .def_readonly("alpha", &OmegaClass::alpha)
      .def_readonly("beta", &OmegaClass::beta)
      .def_readonly("gamma", &OmegaClass::gamma)
      .def_readonly("eta", &OmegaClass::eta)
      .def_readonly("xi", &OmegaClass::xi)
      .def("structurally_stable", &OmegaClass::structurally_stable);
  m.def("classify", &classify_local, py::arg("field"));
  m.def("normal_form_of", &normal_form_of, py::arg("classification"));
  m.def("lyapunov_ell", [](const std::array<double, 4>& up, const std::array<double, 4>& low) {
    return lyapunov_ell(mat_from(up), mat_from(low));
  });
  m.def("sliding_value", [](std::pair<double, double> up, std::pair<double, double> low) {
    SlidingValue s = sliding_value({up.first, up.second}, {low.first, low.second});
    return std::pair{s.weight, s.velocity};
  }, "Convex weight and tangential velocity of the sliding field.");
  m.def("fold_fold", [](const PiecewiseField& z, double x) { return to_string(fold_fold_classify(z, x)); },
        py::arg("field"), py::arg("x") = 0.0);

  // integration
  py::class_<Event>(m, "Event")
      .def_readonly("t", &Event::t)
      .def_readonly("x", &Event::x)
      .def_readonly("kind", &Event::kind);
  py::class_<OrbitTrace>(m, "OrbitTrace")
      .def_property_readonly("t", [](const OrbitTrace& tr) {
        std::vector<double> v;
        for (const Sample& s : tr.samples) v.push_back(s.t);
        return v;
      })
      .def_property_readonly("points", [](const OrbitTrace& tr) {
        std::vector<std::pair<double, double>> v;
        for (const Sample& s : tr.samples) v.emplace_back(s.x, s.y);
        return v;
      })
      .def_property_readonly("regimes", [](const OrbitTrace& tr) {
        std::vector<Regime> v;
        for (const Sample& s : tr.samples) v.push_back(s.regime);
        return v;
      })
      .def_readonly("events", &OrbitTrace::events)
      .def_readonly("termination", &OrbitTrace::termination)
      .def("events_consistent", [](const OrbitTrace& tr, double tol) { return events_consistent(tr, tol); },
           py::arg("event_tol") = 1e-11);
  m.def("integrate", [](const PiecewiseField& z, std::pair<double, double> p0, double t_max,
                        const IntegratorConfig& cfg) { return integrate_piecewise(z, {p0.first, p0.second}, t_max, cfg); },
        py::arg("field"), py::arg("start"), py::arg("t_max"), py::arg("config") = IntegratorConfig{},
        py::call_guard<py::gil_scoped_release>());

  py::class_<HalfReturn>(m, "HalfReturn")
      .def_readonly("ok", &HalfReturn::ok)
      .def_readonly("x", &HalfReturn::x)
      .def_readonly("flight_time", &HalfReturn::flight_time)
      .def_property_readonly("reason", [](const HalfReturn& h) { return to_string(h.reason); });
  m.def("half_return", [](const PiecewiseField& z, Side side, double x0, const IntegratorConfig& cfg) {
    return first_return_to_sigma(z, side, x0, cfg);
  }, py::arg("field"), py::arg("side"), py::arg("x0"), py::arg("config") = IntegratorConfig{});

  // return maps and cycles
  py::class_<ReturnMapSample>(m, "ReturnMapSample")
      .def_readonly("x0", &ReturnMapSample::x0)
      .def_readonly("value", &ReturnMapSample::value)
      .def_readonly("displacement", &ReturnMapSample::displacement)
      .def_readonly("flight_time", &ReturnMapSample::flight_time)
      .def_readonly("ok", &ReturnMapSample::ok)
      .def_readonly("used_split", &ReturnMapSample::used_split);
  m.def("full_map", &full_map, py::arg("field"), py::arg("x0"), py::arg("config") = IntegratorConfig{},
        py::arg("mode") = MapMode::Auto, py::call_guard<py::gil_scoped_release>());

  py::class_<LimitCycle>(m, "LimitCycle")
      .def_readonly("x_star", &LimitCycle::x_star)
      .def_readonly("lower_intercept", &LimitCycle::lower_intercept)
      .def_readonly("period", &LimitCycle::period)
      .def_readonly("multiplier", &LimitCycle::multiplier)
      .def_readonly("multiplier_minus_one", &LimitCycle::multiplier_minus_one)
      .def_readonly("hyperbolic", &LimitCycle::hyperbolic)
      .def_readonly("stability", &LimitCycle::stability);
  py::class_<FixedPointReport>(m, "FixedPointReport")
      .def_readonly("cycles", &FixedPointReport::cycles)
      .def_readonly("grid", &FixedPointReport::grid)
      .def_readonly("skipped", &FixedPointReport::skipped)
      .def_readonly("degenerate", &FixedPointReport::degenerate)
      .def_readonly("mirrored", &FixedPointReport::mirrored)
      .def("report", [](const FixedPointReport& r) { return to_text([&](std::ostream& s) { write_cycle_report(s, r); }); });
  m.def("find_cycles",
        [](const PiecewiseField& z, double lo, double hi, int n, const IntegratorConfig& cfg, MapMode mode,
           bool geometric) {
          FixedPointOptions o;
          o.mode = mode;
          o.geometric_grid = geometric;
          return find_fixed_points(z, lo, hi, n, cfg, o);
        },
        py::arg("field"), py::arg("lo"), py::arg("hi"), py::arg("n") = 200, py::arg("config") = IntegratorConfig{},
        py::arg("mode") = MapMode::Auto, py::arg("geometric") = false, py::call_guard<py::gil_scoped_release>());
  m.def("two_sided_stability", &two_sided_stability, py::arg("field"), py::arg("x_star"), py::arg("delta"),
        py::arg("config") = IntegratorConfig{}, py::arg("mode") = MapMode::Auto);
  m.def("ell_from_map", [](const PiecewiseField& z, const std::vector<double>& x0, const IntegratorConfig& cfg) {
    EllEstimate e = ell_from_map(z, x0, cfg);
    return py::dict(py::arg("value") = e.value, py::arg("x0") = e.x0, py::arg("raw") = e.raw,
                    py::arg("ratio") = e.ratio);
  }, py::arg("field"), py::arg("x0_decreasing"), py::arg("config") = IntegratorConfig{});

  // scenarios
  py::class_<PolynomialFamily>(m, "PolynomialFamily")
      .def(py::init([](double a, double b, double eps, int m) { return PolynomialFamily{a, b, eps, m}; }),
           py::arg("a") = -0.25, py::arg("b") = -0.25, py::arg("eps") = 0.05, py::arg("m") = 3)
      .def("field", &PolynomialFamily::field)
      .def("predicted_cycles", &PolynomialFamily::predicted_cycles)
      .def("predicted_multipliers_minus_one", &PolynomialFamily::predicted_multipliers_minus_one)
      .def("predicted_stability", &PolynomialFamily::predicted_stability);
  py::class_<FlatFamily>(m, "FlatFamily")
      .def(py::init([](double a, double b, double eps, int i_max) { return FlatFamily{a, b, eps, i_max}; }),
           py::arg("a") = -0.25, py::arg("b") = -0.25, py::arg("eps") = 0.05, py::arg("i_max") = 4)
      .def("field", &FlatFamily::field)
      .def("predicted_cycles", &FlatFamily::predicted_cycles)
      .def("predicted_stability", &FlatFamily::predicted_stability);
  py::class_<CycleCheck>(m, "CycleCheck")
      .def_readonly("index", &CycleCheck::index)
      .def_readonly("predicted_x", &CycleCheck::predicted_x)
      .def_readonly("found_x", &CycleCheck::found_x)
      .def_readonly("predicted_minus_one", &CycleCheck::predicted_minus_one)
      .def_readonly("found_minus_one", &CycleCheck::found_minus_one)
      .def_readonly("predicted", &CycleCheck::predicted)
      .def_readonly("found", &CycleCheck::found)
      .def_readonly("two_sided", &CycleCheck::two_sided)
      .def_readonly("level_residual", &CycleCheck::level_residual);
  py::class_<ScenarioReport>(m, "ScenarioReport")
      .def_readonly("name", &ScenarioReport::name)
      .def_readonly("checks", &ScenarioReport::checks)
      .def_readonly("mismatches", &ScenarioReport::mismatches)
      .def_readonly("nested", &ScenarioReport::nested)
      .def_readonly("passed", &ScenarioReport::passed)
      .def_property_readonly("cycles", [](const ScenarioReport& r) { return r.search.cycles; })
      .def("report", [](const ScenarioReport& r) { return to_text([&](std::ostream& s) { write_scenario_report(s, r); }); });
  m.def("run_polynomial_family", [](const PolynomialFamily& f, const IntegratorConfig& cfg, int grid_n) {
    ScenarioOptions o;
    o.grid_n = grid_n;
    return run_polynomial_family(f, cfg, o);
  }, py::arg("family"), py::arg("config") = IntegratorConfig{}, py::arg("grid_n") = 400,
        py::call_guard<py::gil_scoped_release>());
  m.def("run_flat_family", [](const FlatFamily& f, const IntegratorConfig& cfg, int grid_n) {
    ScenarioOptions o;
    o.grid_n = grid_n;
    return run_flat_family(f, cfg, o);
  }, py::arg("family"), py::arg("config") = IntegratorConfig{}, py::arg("grid_n") = 400,
        py::call_guard<py::gil_scoped_release>());

  py::class_<ShiftOutcome>(m, "ShiftOutcome")
      .def_readonly("delta", &ShiftOutcome::delta)
      .def_readonly("window_lo", &ShiftOutcome::window_lo)
      .def_readonly("window_hi", &ShiftOutcome::window_hi)
      .def_readonly("cycles", &ShiftOutcome::cycles)
      .def_readonly("inconclusive", &ShiftOutcome::inconclusive)
      .def_readonly("note", &ShiftOutcome::note);
  py::class_<PseudoHopfReport>(m, "PseudoHopfReport")
      .def_readonly("focus", &PseudoHopfReport::focus)
      .def_readonly("outcomes", &PseudoHopfReport::outcomes)
      .def_readonly("one_sided", &PseudoHopfReport::one_sided)
      .def_readonly("cycle_side", &PseudoHopfReport::cycle_side)
      .def_readonly("passed", &PseudoHopfReport::passed)
      .def("report", [](const PseudoHopfReport& r) { return to_text([&](std::ostream& s) { write_pseudo_hopf_report(s, r); }); });
  m.def("pseudo_hopf_scan",
        [](const PiecewiseField& base, std::vector<double> deltas, const IntegratorConfig& cfg,
           std::optional<double> lo, std::optional<double> hi, int grid_n) {
          PseudoHopfOptions o;
          o.window_lo = lo;
          o.window_hi = hi;
          o.grid_n = grid_n;
          return pseudo_hopf_scan(base, std::move(deltas), cfg, o);
        },
        py::arg("base"), py::arg("deltas"), py::arg("config") = IntegratorConfig{}, py::arg("window_lo") = py::none(),
        py::arg("window_hi") = py::none(), py::arg("grid_n") = 200, py::call_guard<py::gil_scoped_release>());

  py::class_<PerturbationDemoReport>(m, "PerturbationDemoReport")
      .def_readonly("cycles", &PerturbationDemoReport::cycles)
      .def_readonly("found", &PerturbationDemoReport::found)
      .def_readonly("window_lo", &PerturbationDemoReport::window_lo)
      .def_readonly("window_hi", &PerturbationDemoReport::window_hi)
      .def_readonly("note", &PerturbationDemoReport::note);
  m.def("perturbation_cycle_demo",
        [](const PiecewiseField& base, double e1, double e2, double e3, const IntegratorConfig& cfg) {
          return perturbation_cycle_demo(base, e1, e2, e3, cfg);
        },
        py::arg("base"), py::arg("eps1"), py::arg("eps2"), py::arg("eps3"), py::arg("config") = IntegratorConfig{},
        py::call_guard<py::gil_scoped_release>());
  m.def("cycle_orbit", [](const PiecewiseField& z, double x_star, const IntegratorConfig& cfg) {
    std::vector<std::pair<double, double>> pts;
    for (const Sample& s : cycle_orbit(z, x_star, cfg)) pts.emplace_back(s.x, s.y);
    return pts;
  }, py::arg("field"), py::arg("x_star"), py::arg("config") = IntegratorConfig{});
}
