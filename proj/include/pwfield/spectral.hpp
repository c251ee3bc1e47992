// Linear analysis at the origin: eigen data, strata tests, the constant ell
// and the portrait labels.
#pragma once

#include <optional>
#include <string>
#include <utility>

#include "pwfield/field.hpp"

namespace pwf {

struct EigenData {
  double trace = 0.0;
  double det = 0.0;
  double discriminant = 0.0;
  // Complex pairs are stored with im1 = |Im| > 0 and im2 = -im1.
  double re1 = 0.0, im1 = 0.0, re2 = 0.0, im2 = 0.0;

  bool is_complex() const { return im1 != 0.0; }
};

EigenData eigen_data(const Mat2& a);

struct JacobianPair {
  Mat2 upper;
  Mat2 lower;
};

JacobianPair jacobian_at_origin(const PiecewiseField& z);

enum class Omega0Failure { None, NotEquilibrium, DegenerateJacobian, TangencyCondition, EvaluationError };

std::string to_string(Omega0Failure f);

struct Omega0Result {
  bool pass = false;
  Omega0Failure reason = Omega0Failure::None;
  std::string detail;

  explicit operator bool() const { return pass; }
};

Omega0Result omega0_test(const PiecewiseField& z);

double lyapunov_ell(const Mat2& a_plus, const Mat2& a_minus);

enum class Stratum { Omega1, Omega2, Omega3 };
enum class Subset { FF, FN, FS, NN, NS, SS };

std::string to_string(Stratum s);
std::string to_string(Subset s);

struct OrientationFlags {
  bool mirror_x = false;    // (x, y) -> (-x, y): X2x(0,0) < 0
  bool swap_sides = false;  // (x, y) -> (x, -y): the distinguished side is the lower one
  bool rotate_pi = false;   // (x, y) -> (-x, -y): NN traces in the (-, +) pattern
};

struct OmegaClass {
  Omega0Result omega0;
  bool in_omega0 = false;
  // Valid only when in_omega0.
  EigenData upper, lower;
  double ell = 0.0;
  bool omega2 = false;
  bool omega3 = false;
  std::optional<Stratum> stratum;
  std::optional<Subset> subset;
  std::optional<int> alpha, beta, gamma, eta, xi;
  std::optional<PortraitLabel> label;
  OrientationFlags orientation;

  bool structurally_stable() const { return stratum == Stratum::Omega1; }
};

OmegaClass classify_local(const PiecewiseField& z);

class NotOmega1 : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

PiecewiseField normal_form_of(const OmegaClass& c);

}  // namespace pwf
