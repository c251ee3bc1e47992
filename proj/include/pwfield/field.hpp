// Smooth planar fields, piecewise fields split by y = 0, and the catalog of
// named systems.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwfield/expr.hpp"
#include "pwfield/geometry.hpp"

namespace pwf {

enum class Side { Upper, Lower };

std::string to_string(Side s);

/// Smooth field (F1, F2) with bound parameters and symbolic Jacobian.
class PlanarField {
 public:
  PlanarField();
  PlanarField(expr::Expression f1, expr::Expression f2, expr::ParameterBinding params = {});

  Vec2 operator()(Vec2 p) const { return {c1_(p.x, p.y), c2_(p.x, p.y)}; }
  double first(Vec2 p) const { return c1_(p.x, p.y); }
  double second(Vec2 p) const { return c2_(p.x, p.y); }
  Mat2 jacobian(Vec2 p) const;

  const expr::Expression& f1() const { return f1_; }
  const expr::Expression& f2() const { return f2_; }
  // Partial derivative of component i (1 or 2).
  const expr::Expression& partial(int component, expr::Var var) const;
  const expr::ParameterBinding& params() const { return params_; }

 private:
  expr::Expression f1_, f2_;
  expr::ParameterBinding params_;
  expr::Expression d1x_, d1y_, d2x_, d2y_;
  expr::CompiledExpression c1_, c2_, c1x_, c1y_, c2x_, c2y_;
};

/// Working box |x| <= hx, |y| <= hy.
struct Box {
  double hx = 1.0;
  double hy = 1.0;
  bool contains(Vec2 p) const { return std::abs(p.x) <= hx && std::abs(p.y) <= hy; }
};

enum class PortraitLabel { FF1, FF2, FN1, FN2, FS, NN1, NN2, NN3, NS1, NS2, SS };

std::string to_string(PortraitLabel l);
PortraitLabel parse_portrait_label(const std::string& s);
const std::vector<PortraitLabel>& all_portrait_labels();

enum class CatalogTag {
  Inline,
  Linear,
  NormalForm,
  Z0,
  PropFamilyF,
  PropFamilyG,
  PseudoHopfShift,
  Theorem13Perturbation,
  Omega3Perturbation,
  CounterexampleZstar
};

std::string to_string(CatalogTag t);

struct CatalogRecord {
  CatalogTag tag = CatalogTag::Inline;
  std::string name;  // e.g. "FF-1" or "prop52"
  std::vector<std::pair<std::string, double>> params;

  std::string describe() const;
};

/// Reversible affine reference (q*y + r, s*x) of one zone plus the remainder
/// that the true zone field adds to it. Fields of this shape allow return
/// displacements to be integrated as small quantities.
struct ZoneSplit {
  double q = 0.0;
  double r = 0.0;
  double s = 0.0;
  PlanarField remainder;
  bool remainder_is_zero = true;
};

struct ReversibleSplit {
  ZoneSplit upper;
  ZoneSplit lower;
};

struct PiecewiseField {
  PlanarField upper;  // acts on y > 0
  PlanarField lower;  // acts on y < 0
  Box box;
  CatalogRecord catalog;
  std::optional<ReversibleSplit> split;

  const PlanarField& zone(Side s) const { return s == Side::Upper ? upper : lower; }
};

class CatalogError : public std::runtime_error {
 public:
  enum class Kind { ZeroParameter, ParameterOutOfRange, UnknownLabel, NotOmega0, NotOmega3, ConditionViolated };
  CatalogError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

PiecewiseField make_inline(const std::string& upper1, const std::string& upper2, const std::string& lower1,
                           const std::string& lower2, const expr::ParameterBinding& params = {}, Box box = {});
PiecewiseField make_linear(const Mat2& a_plus, const Mat2& a_minus);
PiecewiseField make_normal_form(PortraitLabel label);
PiecewiseField make_z0(double a, double b);
PiecewiseField make_prop52(double a, double b, int m, double eps);
PiecewiseField make_prop53(double a, double b, double eps);
PiecewiseField make_pseudo_hopf_shift(const PiecewiseField& base, double delta);
PiecewiseField make_theorem13_perturbation(const PiecewiseField& base, double eps1, double eps2, double eps3);
PiecewiseField make_omega3_perturbation(const PiecewiseField& base, double eps);
PiecewiseField make_counterexample_zstar(bool linearized);

// f(x, eps) = x * prod_{i=1..m} (x^2 - (i eps / m)^2) as an expanded polynomial.
expr::Expression prop52_polynomial(int m, double eps);
// g(x, eps) with eps left as the parameter "eps".
expr::Expression prop53_function();

/// Conjugation by (x, y) -> (-x, y).
PiecewiseField reflect_x(const PiecewiseField& z);
/// Conjugation by (x, y) -> (x, -y); upper and lower swap roles.
PiecewiseField reflect_y(const PiecewiseField& z);
/// Both fields negated: orbits run backwards in time.
PiecewiseField time_reversed(const PiecewiseField& z);

}  // namespace pwf
