#include "pwfield/spectral.hpp"

#include <cmath>
#include <sstream>

#include "pwfield/tolerances.hpp"

namespace pwf {

EigenData eigen_data(const Mat2& a) {
  EigenData e;
  e.trace = a.trace();
  e.det = a.det();
  e.discriminant = e.trace * e.trace - 4 * e.det;
  if (e.discriminant < 0) {
    e.re1 = e.re2 = e.trace / 2;
    e.im1 = std::sqrt(-e.discriminant) / 2;
    e.im2 = -e.im1;
    return e;
  }
  double s = std::sqrt(e.discriminant);
  // Larger-magnitude root first, the other from det/root to avoid cancellation.
  double big = e.trace >= 0 ? (e.trace + s) / 2 : (e.trace - s) / 2;
  double small = big != 0 ? e.det / big : 0.0;
  e.re1 = std::max(big, small);
  e.re2 = std::min(big, small);
  return e;
}

JacobianPair jacobian_at_origin(const PiecewiseField& z) {
  return {z.upper.jacobian({0, 0}), z.lower.jacobian({0, 0})};
}

std::string to_string(Omega0Failure f) {
  switch (f) {
    case Omega0Failure::None: return "None";
    case Omega0Failure::NotEquilibrium: return "NotEquilibrium";
    case Omega0Failure::DegenerateJacobian: return "DegenerateJacobian";
    case Omega0Failure::TangencyCondition: return "TangencyCondition";
    case Omega0Failure::EvaluationError: return "EvaluationError";
  }
  return "?";
}

Omega0Result omega0_test(const PiecewiseField& z) {
  auto fail = [](Omega0Failure r, std::string detail) { return Omega0Result{false, r, std::move(detail)}; };
  try {
    for (Side side : {Side::Upper, Side::Lower}) {
      Vec2 v = z.zone(side)({0, 0});
      if (std::fabs(v.x) > tol::sigma || std::fabs(v.y) > tol::sigma) {
        std::ostringstream os;
        os << to_string(side) << " field does not vanish at the origin: (" << v.x << ", " << v.y << ")";
        return fail(Omega0Failure::NotEquilibrium, os.str());
      }
    }
    JacobianPair j = jacobian_at_origin(z);
    if (std::fabs(j.upper.det()) <= 1e-12 || std::fabs(j.lower.det()) <= 1e-12) {
      std::ostringstream os;
      os << "det A+ * det A- = 0 (det A+ = " << j.upper.det() << ", det A- = " << j.lower.det() << ")";
      return fail(Omega0Failure::DegenerateJacobian, os.str());
    }
    if (!(j.upper.a21 * j.lower.a21 > 0)) {
      std::ostringstream os;
      os << "X2x(0,0) * Y2x(0,0) = " << j.upper.a21 * j.lower.a21 << " is not positive";
      return fail(Omega0Failure::TangencyCondition, os.str());
    }
  } catch (const expr::EvalError& e) {
    return fail(Omega0Failure::EvaluationError, e.what());
  }
  return {true, Omega0Failure::None, "ok"};
}

double lyapunov_ell(const Mat2& a_plus, const Mat2& a_minus) {
  EigenData p = eigen_data(a_plus), m = eigen_data(a_minus);
  if (p.discriminant < -tol::discriminant && m.discriminant < -tol::discriminant)
    return p.re1 / std::fabs(p.im1) + m.re1 / std::fabs(m.im1);
  return 1.0;
}

std::string to_string(Stratum s) {
  switch (s) {
    case Stratum::Omega1: return "Omega1";
    case Stratum::Omega2: return "Omega2";
    case Stratum::Omega3: return "Omega3";
  }
  return "?";
}

std::string to_string(Subset s) {
  switch (s) {
    case Subset::FF: return "ff";
    case Subset::FN: return "fn";
    case Subset::FS: return "fs";
    case Subset::NN: return "nn";
    case Subset::NS: return "ns";
    case Subset::SS: return "ss";
  }
  return "?";
}

namespace {

enum class Kind { Focus, Node, Saddle };

Kind kind_of(const EigenData& e) {
  if (e.discriminant < -tol::discriminant) return Kind::Focus;
  return e.det > 0 ? Kind::Node : Kind::Saddle;
}

int sign(double v) { return v > 0 ? 1 : -1; }

}  // namespace

OmegaClass classify_local(const PiecewiseField& z) {
  OmegaClass c;
  c.omega0 = omega0_test(z);
  c.in_omega0 = c.omega0.pass;
  if (!c.in_omega0) return c;

  JacobianPair j = jacobian_at_origin(z);
  c.upper = eigen_data(j.upper);
  c.lower = eigen_data(j.lower);
  c.ell = lyapunov_ell(j.upper, j.lower);
  c.orientation.mirror_x = j.upper.a21 < 0;

  bool complex_up = c.upper.discriminant < -tol::discriminant;
  bool complex_low = c.lower.discriminant < -tol::discriminant;
  c.omega3 = std::fabs(c.upper.discriminant) <= tol::discriminant ||
             std::fabs(c.lower.discriminant) <= tol::discriminant;
  c.omega2 = complex_up && complex_low && std::fabs(c.ell) <= tol::ell;
  if (c.omega2) {
    c.stratum = Stratum::Omega2;
    return c;
  }
  if (c.omega3) {
    c.stratum = Stratum::Omega3;
    return c;
  }
  c.stratum = Stratum::Omega1;

  Kind up = kind_of(c.upper), low = kind_of(c.lower);
  auto has = [&](Kind a, Kind b) { return (up == a && low == b) || (up == b && low == a); };

  if (up == Kind::Focus && low == Kind::Focus) {
    c.subset = Subset::FF;
    c.alpha = sign(c.ell);
    c.label = *c.alpha < 0 ? PortraitLabel::FF1 : PortraitLabel::FF2;
  } else if (has(Kind::Focus, Kind::Node)) {
    c.subset = Subset::FN;
    const EigenData& node = up == Kind::Node ? c.upper : c.lower;
    c.orientation.swap_sides = up == Kind::Node;
    c.beta = sign(node.trace);
    c.label = *c.beta == 1 ? PortraitLabel::FN1 : PortraitLabel::FN2;
  } else if (has(Kind::Focus, Kind::Saddle)) {
    c.subset = Subset::FS;
    c.orientation.swap_sides = up == Kind::Saddle;
    c.label = PortraitLabel::FS;
  } else if (up == Kind::Node && low == Kind::Node) {
    c.subset = Subset::NN;
    if (c.upper.trace * c.lower.trace > 0) {
      c.gamma = c.eta = sign(c.upper.trace);
      c.label = *c.gamma == 1 ? PortraitLabel::NN1 : PortraitLabel::NN3;
    } else {
      c.gamma = 1;
      c.eta = -1;
      c.orientation.rotate_pi = c.upper.trace < 0;
      c.label = PortraitLabel::NN2;
    }
  } else if (has(Kind::Node, Kind::Saddle)) {
    c.subset = Subset::NS;
    const EigenData& node = up == Kind::Node ? c.upper : c.lower;
    c.orientation.swap_sides = up == Kind::Saddle;
    c.xi = sign(node.trace);
    c.label = *c.xi == 1 ? PortraitLabel::NS1 : PortraitLabel::NS2;
  } else {
    c.subset = Subset::SS;
    c.label = PortraitLabel::SS;
  }
  return c;
}

PiecewiseField normal_form_of(const OmegaClass& c) {
  if (c.stratum != Stratum::Omega1 || !c.label) throw NotOmega1("classification is not in Omega1");
  return make_normal_form(*c.label);
}

}  // namespace pwf
