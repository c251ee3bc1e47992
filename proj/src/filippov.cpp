#include "pwfield/filippov.hpp"

#include <cmath>
#include <sstream>

#include "pwfield/spectral.hpp"
#include "pwfield/tolerances.hpp"

namespace pwf {

std::string to_string(SigmaKind k) {
  switch (k) {
    case SigmaKind::Crossing: return "Crossing";
    case SigmaKind::Sliding: return "Sliding";
    case SigmaKind::SingularSliding: return "SingularSliding";
  }
  return "?";
}

std::string to_string(FlowDirection d) { return d == FlowDirection::Upward ? "upward" : "downward"; }

std::string to_string(TangencyCategory c) {
  switch (c) {
    case TangencyCategory::NotTangent: return "NotTangent";
    case TangencyCategory::FoldVisible: return "FoldVisible";
    case TangencyCategory::FoldInvisible: return "FoldInvisible";
    case TangencyCategory::HigherOrderTangency: return "HigherOrderTangency";
    case TangencyCategory::BoundaryEquilibrium: return "BoundaryEquilibrium";
  }
  return "?";
}

std::string to_string(FoldFold f) {
  switch (f) {
    case FoldFold::VV: return "VV";
    case FoldFold::II: return "II";
    case FoldFold::VI: return "VI";
    case FoldFold::IV: return "IV";
    case FoldFold::NotFoldFold: return "NotFoldFold";
  }
  return "?";
}

SlidingValue sliding_value(Vec2 upper, Vec2 lower) {
  double denom = lower.y - upper.y;
  return {(lower.y * upper.x - upper.y * lower.x) / denom, lower.y / denom};
}

SigmaClassification classify_sigma_point(const PiecewiseField& z, double x) {
  Vec2 up = z.upper({x, 0});
  Vec2 low = z.lower({x, 0});
  SigmaClassification c;
  c.x = x;
  c.upper_normal = up.y;
  c.lower_normal = low.y;
  bool up_zero = std::fabs(up.y) <= tol::sigma;
  bool low_zero = std::fabs(low.y) <= tol::sigma;
  if (up_zero && low_zero) {
    c.kind = SigmaKind::SingularSliding;
    return c;
  }
  if (!up_zero && !low_zero && up.y * low.y > 0) {
    c.kind = SigmaKind::Crossing;
    c.direction = up.y > 0 ? FlowDirection::Upward : FlowDirection::Downward;
    c.governing = up.y > 0 ? Side::Upper : Side::Lower;
    return c;
  }
  c.kind = SigmaKind::Sliding;
  SlidingValue s = sliding_value(up, low);
  c.sliding_velocity = s.velocity;
  c.weight = s.weight;
  return c;
}

TangencyReport tangency_classify(const PiecewiseField& z, Side side, double x) {
  const PlanarField& f = z.zone(side);
  Vec2 v = f({x, 0});
  TangencyReport r;
  r.side = side;
  if (std::fabs(v.y) > tol::sigma) {
    r.category = TangencyCategory::NotTangent;
    return r;
  }
  if (std::fabs(v.x) <= tol::sigma) {
    r.category = TangencyCategory::BoundaryEquilibrium;
    return r;
  }
  r.product = v.x * f.jacobian({x, 0}).a21;
  if (std::fabs(r.product) <= tol::sigma) {
    r.category = TangencyCategory::HigherOrderTangency;
    return r;
  }
  // An upper orbit bends into y > 0 when the product is positive; a lower
  // orbit bends into y < 0 when it is negative.
  bool visible = side == Side::Upper ? r.product > 0 : r.product < 0;
  r.category = visible ? TangencyCategory::FoldVisible : TangencyCategory::FoldInvisible;
  return r;
}

FoldFold fold_fold_classify(const PiecewiseField& z, double x) {
  auto is_fold = [](TangencyCategory c) {
    return c == TangencyCategory::FoldVisible || c == TangencyCategory::FoldInvisible;
  };
  TangencyReport up = tangency_classify(z, Side::Upper, x);
  TangencyReport low = tangency_classify(z, Side::Lower, x);
  if (!is_fold(up.category) || !is_fold(low.category)) return FoldFold::NotFoldFold;
  bool uv = up.category == TangencyCategory::FoldVisible;
  bool lv = low.category == TangencyCategory::FoldVisible;
  if (uv && lv) return FoldFold::VV;
  if (!uv && !lv) return FoldFold::II;
  return uv ? FoldFold::VI : FoldFold::IV;
}

CrossingSplitReport crossing_split_report(const PiecewiseField& z, double radius, int n) {
  Omega0Result check = omega0_test(z);
  if (!check) throw CatalogError(CatalogError::Kind::NotOmega0, "field is not in Omega0: " + check.detail);
  if (n < 1 || radius <= 0) throw std::invalid_argument("crossing_split_report needs radius > 0 and n >= 1");

  CrossingSplitReport report;
  report.radius = radius;
  report.samples_per_side = n;
  double x2x = z.upper.jacobian({0, 0}).a21;
  report.expected_right = x2x > 0 ? FlowDirection::Upward : FlowDirection::Downward;

  bool consistent = true;
  for (int sign : {1, -1}) {
    std::optional<FlowDirection> seen;
    for (int k = 1; k <= n; ++k) {
      double x = sign * radius * k / (n + 1.0);
      SigmaClassification c = classify_sigma_point(z, x);
      if (c.kind != SigmaKind::Crossing) {
        std::ostringstream os;
        os << "point x = " << x << " is " << to_string(c.kind) << ", not crossing";
        throw SlidingFound(x, os.str());
      }
      if (seen && *seen != c.direction) consistent = false;
      seen = c.direction;
    }
    (sign > 0 ? report.right : report.left) = *seen;
  }
  FlowDirection expected_left =
      report.expected_right == FlowDirection::Upward ? FlowDirection::Downward : FlowDirection::Upward;
  report.consistent = consistent && report.right == report.expected_right && report.left == expected_left;
  return report;
}

}  // namespace pwf
