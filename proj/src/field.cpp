#include "pwfield/field.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "pwfield/spectral.hpp"
#include "pwfield/tolerances.hpp"

namespace pwf {

using expr::Expression;
using expr::ParameterBinding;
using expr::Var;

std::string to_string(Side s) { return s == Side::Upper ? "upper" : "lower"; }

// ---- PlanarField ----

PlanarField::PlanarField() : PlanarField(Expression::constant(0), Expression::constant(0)) {}

PlanarField::PlanarField(Expression f1, Expression f2, ParameterBinding params)
    : f1_(std::move(f1)),
      f2_(std::move(f2)),
      params_(std::move(params)),
      d1x_(expr::differentiate(f1_, Var::X)),
      d1y_(expr::differentiate(f1_, Var::Y)),
      d2x_(expr::differentiate(f2_, Var::X)),
      d2y_(expr::differentiate(f2_, Var::Y)),
      c1_(f1_, params_),
      c2_(f2_, params_),
      c1x_(d1x_, params_),
      c1y_(d1y_, params_),
      c2x_(d2x_, params_),
      c2y_(d2y_, params_) {}

Mat2 PlanarField::jacobian(Vec2 p) const {
  return {c1x_(p.x, p.y), c1y_(p.x, p.y), c2x_(p.x, p.y), c2y_(p.x, p.y)};
}

const Expression& PlanarField::partial(int component, Var var) const {
  if (component == 1) return var == Var::X ? d1x_ : d1y_;
  return var == Var::X ? d2x_ : d2y_;
}

// ---- labels and records ----

namespace {

constexpr std::array<std::pair<PortraitLabel, const char*>, 11> kLabelNames{{{PortraitLabel::FF1, "FF-1"},
                                                                           {PortraitLabel::FF2, "FF-2"},
                                                                           {PortraitLabel::FN1, "FN-1"},
                                                                           {PortraitLabel::FN2, "FN-2"},
                                                                           {PortraitLabel::FS, "FS"},
                                                                           {PortraitLabel::NN1, "NN-1"},
                                                                           {PortraitLabel::NN2, "NN-2"},
                                                                           {PortraitLabel::NN3, "NN-3"},
                                                                           {PortraitLabel::NS1, "NS-1"},
                                                                           {PortraitLabel::NS2, "NS-2"},
                                                                           {PortraitLabel::SS, "SS"}}};

Expression num(double v) { return Expression::constant(v); }
Expression X() { return Expression::x(); }
Expression Y() { return Expression::y(); }

Expression linear(double cx, double cy) { return num(cx) * X() + num(cy) * Y(); }

void require_tangency_condition(const PiecewiseField& z) {
  double x2x = z.upper.jacobian({0, 0}).a21;
  double y2x = z.lower.jacobian({0, 0}).a21;
  if (!(x2x * y2x > 0)) {
    std::ostringstream os;
    os << "condition X2x(0,0)*Y2x(0,0) > 0 violated (" << x2x << " * " << y2x << ")";
    throw CatalogError(CatalogError::Kind::ConditionViolated, os.str());
  }
}

void require_range(bool ok, const std::string& what) {
  if (!ok) throw CatalogError(CatalogError::Kind::ParameterOutOfRange, "parameter out of range: " + what);
}

void validate_family(double a, double b, double eps) {
  require_range(a != 0 && std::fabs(a) <= 0.5, "0 < |a| <= 1/2");
  require_range(b != 0 && std::fabs(b) <= 0.5, "0 < |b| <= 1/2");
  require_range(eps >= 0 && eps < std::min(std::fabs(a), std::fabs(b)), "0 <= eps < min(|a|, |b|)");
}

PlanarField transform(const PlanarField& f, double sign1, double sign2, bool flip_x, bool flip_y) {
  Expression f1 = f.f1(), f2 = f.f2();
  if (flip_x) {
    f1 = expr::substitute(f1, Var::X, -X());
    f2 = expr::substitute(f2, Var::X, -X());
  }
  if (flip_y) {
    f1 = expr::substitute(f1, Var::Y, -Y());
    f2 = expr::substitute(f2, Var::Y, -Y());
  }
  return PlanarField(num(sign1) * f1, num(sign2) * f2, f.params());
}

ZoneSplit transform(const ZoneSplit& z, double sign1, double sign2, bool flip_x, bool flip_y) {
  ZoneSplit out = z;
  // reference (q y + r, s x)
  out.q = sign1 * (flip_y ? -z.q : z.q);
  out.r = sign1 * z.r;
  out.s = sign2 * (flip_x ? -z.s : z.s);
  out.remainder = transform(z.remainder, sign1, sign2, flip_x, flip_y);
  return out;
}

ZoneSplit affine_split(double q, double r, double s) {
  ZoneSplit z;
  z.q = q;
  z.r = r;
  z.s = s;
  return z;
}

}  // namespace

std::string to_string(PortraitLabel l) {
  for (const auto& [label, name] : kLabelNames)
    if (label == l) return name;
  return "?";
}

PortraitLabel parse_portrait_label(const std::string& s) {
  for (const auto& [label, name] : kLabelNames)
    if (s == name) return label;
  throw CatalogError(CatalogError::Kind::UnknownLabel, "unknown portrait label '" + s + "'");
}

const std::vector<PortraitLabel>& all_portrait_labels() {
  static const std::vector<PortraitLabel> labels = [] {
    std::vector<PortraitLabel> v;
    for (const auto& entry : kLabelNames) v.push_back(entry.first);
    return v;
  }();
  return labels;
}

std::string to_string(CatalogTag t) {
  switch (t) {
    case CatalogTag::Inline: return "Inline";
    case CatalogTag::Linear: return "Linear";
    case CatalogTag::NormalForm: return "NormalForm";
    case CatalogTag::Z0: return "Z0";
    case CatalogTag::PropFamilyF: return "PropFamilyF";
    case CatalogTag::PropFamilyG: return "PropFamilyG";
    case CatalogTag::PseudoHopfShift: return "PseudoHopfShift";
    case CatalogTag::Theorem13Perturbation: return "Theorem13Perturbation";
    case CatalogTag::Omega3Perturbation: return "Omega3Perturbation";
    case CatalogTag::CounterexampleZstar: return "CounterexampleZstar";
  }
  return "?";
}

std::string CatalogRecord::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(tag);
  if (!name.empty()) os << " " << name;
  if (!params.empty()) {
    os << " (";
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (i) os << ", ";
      os << params[i].first << "=" << params[i].second;
    }
    os << ")";
  }
  return os.str();
}

// ---- constructors ----

PiecewiseField make_inline(const std::string& upper1, const std::string& upper2, const std::string& lower1,
                           const std::string& lower2, const ParameterBinding& params, Box box) {
  auto restrict = [&](const Expression& a, const Expression& b) {
    ParameterBinding p;
    for (const auto& e : {a, b})
      for (const auto& name : expr::parameters_of(e))
        if (params.contains(name)) p.set(name, params.at(name));
    return p;
  };
  Expression u1 = expr::parse(upper1), u2 = expr::parse(upper2);
  Expression l1 = expr::parse(lower1), l2 = expr::parse(lower2);
  PiecewiseField z;
  z.upper = PlanarField(u1, u2, restrict(u1, u2));
  z.lower = PlanarField(l1, l2, restrict(l1, l2));
  z.box = box;
  z.catalog.tag = CatalogTag::Inline;
  return z;
}

PiecewiseField make_linear(const Mat2& ap, const Mat2& am) {
  for (double v : {ap.a11, ap.a12, ap.a21, ap.a22, am.a11, am.a12, am.a21, am.a22})
    require_range(std::isfinite(v), "matrix entries must be finite");
  PiecewiseField z;
  z.upper = PlanarField(linear(ap.a11, ap.a12), linear(ap.a21, ap.a22));
  z.lower = PlanarField(linear(am.a11, am.a12), linear(am.a21, am.a22));
  z.catalog = {CatalogTag::Linear,
               "linear",
               {{"a11+", ap.a11}, {"a12+", ap.a12}, {"a21+", ap.a21}, {"a22+", ap.a22},
                {"a11-", am.a11}, {"a12-", am.a12}, {"a21-", am.a21}, {"a22-", am.a22}}};
  return z;
}

PiecewiseField make_normal_form(PortraitLabel label) {
  // (k x + y, x + k y) with k = 2 * sign parameter: node or saddle generator.
  auto node = [](double k) { return PlanarField(linear(k, 1), linear(1, k)); };
  auto focus = [](double alpha) { return PlanarField(linear(alpha, -1), linear(1, alpha)); };
  const PlanarField rotation(linear(0, -1), linear(1, 0));
  const PlanarField saddle(linear(0, 1), linear(1, 0));

  PiecewiseField z;
  std::vector<std::pair<std::string, double>> params;
  switch (label) {
    case PortraitLabel::FF1:
    case PortraitLabel::FF2: {
      double alpha = label == PortraitLabel::FF1 ? -1 : 1;
      z.upper = z.lower = focus(alpha);
      params = {{"alpha", alpha}};
      break;
    }
    case PortraitLabel::FN1:
    case PortraitLabel::FN2: {
      double beta = label == PortraitLabel::FN1 ? 1 : -1;
      z.upper = rotation;
      z.lower = node(2 * beta);
      params = {{"beta", beta}};
      break;
    }
    case PortraitLabel::FS:
      z.upper = rotation;
      z.lower = saddle;
      break;
    case PortraitLabel::NN1:
    case PortraitLabel::NN2:
    case PortraitLabel::NN3: {
      double gamma = label == PortraitLabel::NN3 ? -1 : 1;
      double eta = label == PortraitLabel::NN1 ? 1 : -1;
      z.upper = node(2 * gamma);
      z.lower = node(2 * eta);
      params = {{"gamma", gamma}, {"eta", eta}};
      break;
    }
    case PortraitLabel::NS1:
    case PortraitLabel::NS2: {
      double xi = label == PortraitLabel::NS1 ? 1 : -1;
      z.upper = node(2 * xi);
      z.lower = saddle;
      params = {{"xi", xi}};
      break;
    }
    case PortraitLabel::SS:
      z.upper = z.lower = saddle;
      break;
  }
  z.catalog = {CatalogTag::NormalForm, to_string(label), params};
  require_tangency_condition(z);
  return z;
}

PiecewiseField make_z0(double a, double b) {
  if (a * b == 0) throw CatalogError(CatalogError::Kind::ZeroParameter, "make_z0 requires a*b != 0");
  PiecewiseField z;
  z.upper = PlanarField(Expression::parameter("a") * Y(), X(), {{"a", a}});
  z.lower = PlanarField(Expression::parameter("b") * Y(), X(), {{"b", b}});
  z.catalog = {CatalogTag::Z0, "z0", {{"a", a}, {"b", b}}};
  z.split = ReversibleSplit{affine_split(a, 0, 1), affine_split(b, 0, 1)};
  require_tangency_condition(z);
  return z;
}

Expression prop52_polynomial(int m, double eps) {
  // prod_i (u - c_i^2) in u = x^2, coefficients low to high.
  std::vector<double> p{1.0};
  for (int i = 1; i <= m; ++i) {
    double c = i * eps / m;
    std::vector<double> next(p.size() + 1, 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
      next[k + 1] += p[k];
      next[k] -= c * c * p[k];
    }
    p = std::move(next);
  }
  Expression f = num(0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    Expression mono = expr::pow(X(), num(static_cast<double>(2 * k + 1)));
    f = f + num(p[k]) * mono;
  }
  return f;
}

Expression prop53_function() {
  return expr::parse("if(x > 0, exp(-1/x)*sin(pi*eps/x), 0)");
}

namespace {

PiecewiseField make_family(double a, double b, double eps, const Expression& fprime, CatalogTag tag,
                           std::vector<std::pair<std::string, double>> record) {
  validate_family(a, b, eps);
  Expression A = Expression::parameter("a"), B = Expression::parameter("b"), E = Expression::parameter("eps");
  PiecewiseField z;
  z.upper = PlanarField((A - E) * Y() - E, X(), {{"a", a}, {"eps", eps}});
  z.lower = PlanarField((B - E) * Y() + E, X() + E * fprime, {{"b", b}, {"eps", eps}});
  z.catalog = {tag, tag == CatalogTag::PropFamilyF ? "prop52" : "prop53", std::move(record)};

  ZoneSplit lower = affine_split(b - eps, eps, 1);
  lower.remainder = PlanarField(num(0), E * fprime, {{"eps", eps}});
  lower.remainder_is_zero = eps == 0;
  z.split = ReversibleSplit{affine_split(a - eps, -eps, 1), lower};
  require_tangency_condition(z);
  return z;
}

}  // namespace

PiecewiseField make_prop52(double a, double b, int m, double eps) {
  require_range(m >= 1, "m >= 1");
  validate_family(a, b, eps);
  Expression fprime = expr::differentiate(prop52_polynomial(m, eps), Var::X);
  return make_family(a, b, eps, fprime, CatalogTag::PropFamilyF,
                     {{"a", a}, {"b", b}, {"m", m}, {"eps", eps}});
}

PiecewiseField make_prop53(double a, double b, double eps) {
  Expression gprime = expr::differentiate(prop53_function(), Var::X);
  return make_family(a, b, eps, gprime, CatalogTag::PropFamilyG, {{"a", a}, {"b", b}, {"eps", eps}});
}

PiecewiseField make_pseudo_hopf_shift(const PiecewiseField& base, double delta) {
  static const std::string kName = "hopf_delta";
  if (base.catalog.tag == CatalogTag::PseudoHopfShift) {
    PiecewiseField z = base;
    ParameterBinding p = base.lower.params();
    double total = p.at(kName) + delta;
    p.set(kName, total);
    z.lower = PlanarField(base.lower.f1(), base.lower.f2(), p);
    z.catalog.params.back().second = total;
    return z;
  }
  if (delta == 0) return base;
  PiecewiseField z = base;
  ParameterBinding p = base.lower.params();
  p.set(kName, delta);
  z.lower = PlanarField(base.lower.f1(), base.lower.f2() + Expression::parameter(kName), p);
  z.catalog.tag = CatalogTag::PseudoHopfShift;
  z.catalog.name = "shift(" + base.catalog.name + ")";
  z.catalog.params.emplace_back("delta", delta);
  z.split.reset();
  return z;
}

PiecewiseField make_theorem13_perturbation(const PiecewiseField& base, double eps1, double eps2, double eps3) {
  Omega0Result check = omega0_test(base);
  if (!check)
    throw CatalogError(CatalogError::Kind::NotOmega0, "base field is not in Omega0: " + check.detail);
  if (eps1 == 0 && eps2 == 0 && eps3 == 0) return base;
  double x2x = base.upper.jacobian({0, 0}).a21;
  double y2x = base.lower.jacobian({0, 0}).a21;
  PiecewiseField z = base;
  z.upper = PlanarField(base.upper.f1() - num(x2x * eps1) + num(x2x * eps1) * X(), base.upper.f2(),
                        base.upper.params());
  z.lower = PlanarField(base.lower.f1() + num(y2x * eps1) + num(y2x * eps1) * X() + num(eps2) * base.lower.f2(),
                        base.lower.f2() + num(eps3), base.lower.params());
  z.catalog.tag = CatalogTag::Theorem13Perturbation;
  z.catalog.name = "theorem13(" + base.catalog.name + ")";
  z.catalog.params.insert(z.catalog.params.end(), {{"eps1", eps1}, {"eps2", eps2}, {"eps3", eps3}});
  z.split.reset();
  return z;
}

PiecewiseField make_omega3_perturbation(const PiecewiseField& base, double eps) {
  Mat2 a = base.upper.jacobian({0, 0});
  EigenData e = eigen_data(a);
  if (std::fabs(e.discriminant) > tol::discriminant)
    throw CatalogError(CatalogError::Kind::NotOmega3, "upper Jacobian has distinct eigenvalues");
  if (a.a21 == 0) throw CatalogError(CatalogError::Kind::NotOmega3, "upper Jacobian has a21 = 0");
  if (eps == 0) return base;
  require_range(a.a21 + eps != 0, "a21 + eps != 0");
  double a12_eps = (a.a12 * a.a21 + eps / 4) / (a.a21 + eps);
  PiecewiseField z = base;
  z.upper = PlanarField(base.upper.f1() + num(a12_eps - a.a12) * Y(), base.upper.f2() + num(eps) * X(),
                        base.upper.params());
  z.catalog.tag = CatalogTag::Omega3Perturbation;
  z.catalog.name = "omega3(" + base.catalog.name + ")";
  z.catalog.params.emplace_back("eps", eps);
  z.split.reset();
  require_tangency_condition(z);
  return z;
}

PiecewiseField make_counterexample_zstar(bool linearized) {
  PiecewiseField z;
  z.upper = PlanarField(Y(), X());
  if (linearized) {
    z.lower = PlanarField(X(), X() + Y());
  } else {
    Expression gamma =
        expr::parse("if(x^2 + y^2 > 0, sqrt(x^2 + y^2) * (-0.5*ln(x^2 + y^2))^(-1.5), 0)");
    Expression half = num(0.5) * gamma;
    z.lower = PlanarField(X() + half, X() + Y() + half);
  }
  // The lower orbit through (-0.1, 0) reaches |x| ~ 0.86 before returning.
  z.box = Box{0.95, 0.95};
  z.catalog = {CatalogTag::CounterexampleZstar, linearized ? "zstar-linear" : "zstar", {}};
  require_tangency_condition(z);
  return z;
}

// ---- conjugations ----

PiecewiseField reflect_x(const PiecewiseField& z) {
  PiecewiseField out = z;
  out.upper = transform(z.upper, -1, 1, true, false);
  out.lower = transform(z.lower, -1, 1, true, false);
  if (z.split) out.split = ReversibleSplit{transform(z.split->upper, -1, 1, true, false),
                                           transform(z.split->lower, -1, 1, true, false)};
  out.catalog.name = "reflect_x(" + z.catalog.name + ")";
  return out;
}

PiecewiseField reflect_y(const PiecewiseField& z) {
  PiecewiseField out = z;
  out.upper = transform(z.lower, 1, -1, false, true);
  out.lower = transform(z.upper, 1, -1, false, true);
  if (z.split) out.split = ReversibleSplit{transform(z.split->lower, 1, -1, false, true),
                                           transform(z.split->upper, 1, -1, false, true)};
  out.catalog.name = "reflect_y(" + z.catalog.name + ")";
  return out;
}

PiecewiseField time_reversed(const PiecewiseField& z) {
  PiecewiseField out = z;
  out.upper = transform(z.upper, -1, -1, false, false);
  out.lower = transform(z.lower, -1, -1, false, false);
  if (z.split) out.split = ReversibleSplit{transform(z.split->upper, -1, -1, false, false),
                                           transform(z.split->lower, -1, -1, false, false)};
  out.catalog.name = "reversed(" + z.catalog.name + ")";
  return out;
}

}  // namespace pwf
