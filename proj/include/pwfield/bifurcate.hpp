// Scenario runners for cycle-creating perturbations, with closed-form
// predictions for the two exact families.
#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwfield/poincare.hpp"

namespace pwf {

class BracketFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scenario precondition does not hold (bad parameters, wrong fold type,
/// predictions outside the search interval).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SearchInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool upper_saddle = false;  // hi capped by the upper separatrix
  bool lower_saddle = false;  // hi capped by the lower separatrix
  bool box_clipped = false;
};

struct Polyline {
  std::string label;
  std::vector<Vec2> points;
};

/// The f family: m nested cycles at i*eps/m.
struct PolynomialFamily {
  double a = -0.25;
  double b = -0.25;
  double eps = 0.05;
  int m = 3;

  PiecewiseField field() const;
  double fold_root_leading() const;            // (-1)^(m+1) (m!)^2 / m^(2m) eps^(2m+1)
  std::vector<double> predicted_cycles() const;
  std::vector<double> predicted_multipliers() const;
  std::vector<double> predicted_multipliers_minus_one() const;
  std::vector<Stability> predicted_stability() const;  // stable when m - i is even
};

/// The g family: infinitely many cycles at eps/i, checked for i <= i_max.
struct FlatFamily {
  double a = -0.25;
  double b = -0.25;
  double eps = 0.05;
  int i_max = 4;

  PiecewiseField field() const;
  std::vector<double> predicted_cycles() const;
  std::vector<double> predicted_multipliers() const;
  std::vector<double> predicted_multipliers_minus_one() const;
  std::vector<Stability> predicted_stability() const;  // stable for odd i
};

/// Root of x + eps f'(x) near 0, the invisible fold of the lower field.
double fold_root(const PolynomialFamily& scn);

struct SaddleIntercepts {
  double unstable_x = 0.0;  // x_u > 0
  double stable_x = 0.0;    // x_s < 0
};

/// Switching-line intercepts of the lower saddle's manifolds from the level
/// set of the lower first integral; nullopt when b - eps <= 0.
std::optional<SaddleIntercepts> lower_saddle_intercepts(const PolynomialFamily& scn);
std::optional<SaddleIntercepts> lower_saddle_intercepts(const FlatFamily& scn);

SearchInterval search_interval(const PolynomialFamily& scn, const IntegratorConfig& cfg);
SearchInterval search_interval(const FlatFamily& scn, const IntegratorConfig& cfg);

struct CycleCheck {
  int index = 0;
  double predicted_x = 0.0;
  std::optional<double> found_x;
  double predicted_minus_one = 0.0;
  std::optional<double> found_minus_one;
  Stability predicted = Stability::NonHyperbolic;
  Stability found = Stability::NonHyperbolic;
  std::optional<Stability> two_sided;  // numeric sign check, where run
  double level_residual = 0.0;         // max first-integral drift along the orbit
  bool location_ok = false;
  bool multiplier_ok = false;
  bool stability_ok = false;
};

struct ScenarioReport {
  std::string name;
  std::vector<std::pair<std::string, double>> parameters;
  SearchInterval interval;
  FixedPointReport search;
  std::vector<CycleCheck> checks;
  std::vector<Polyline> curves;
  std::vector<std::string> mismatches;
  bool nested = true;
  bool passed = false;
};

struct ScenarioOptions {
  int grid_n = 400;
  FixedPointOptions search;
  double location_tol = 1e-6;
  double multiplier_rel_tol = 1e-4;  // on multiplier - 1
  int curve_points = 200;
};

/// Runs the fixed-point search for the f family and compares count,
/// locations, multipliers and stability with the predictions.
ScenarioReport run_polynomial_family(const PolynomialFamily& scn, const IntegratorConfig& cfg,
                                     const ScenarioOptions& options = {});

/// Same for the g family. Stability of every cycle follows the closed-form
/// multiplier; the first two are also checked from the sign of P(x) - x.
ScenarioReport run_flat_family(const FlatFamily& scn, const IntegratorConfig& cfg,
                               const ScenarioOptions& options = {});

struct ShiftOutcome {
  double delta = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::vector<LimitCycle> cycles;  // hyperbolic cycles in the window
  bool inconclusive = false;
  std::string note;
};

struct PseudoHopfReport {
  Stability focus = Stability::NonHyperbolic;  // stability of the unshifted pseudo-focus
  std::vector<ShiftOutcome> outcomes;          // sorted by delta
  bool one_sided = false;
  int cycle_side = 0;  // sign of delta carrying cycles
  std::vector<std::string> mismatches;
  bool passed = false;
};

struct PseudoHopfOptions {
  // Amplitude window (lo, hi); unset hi means 10 sqrt|delta|. The low end is
  // raised to twice the minimum amplitude when smaller.
  std::optional<double> window_lo;
  std::optional<double> window_hi;
  int grid_n = 200;
  unsigned threads = 0;
};

/// Requires an invisible-invisible fold-fold at the origin with
/// X1(0,0) < 0 < Y1(0,0). Throws PreconditionError otherwise.
PseudoHopfReport pseudo_hopf_scan(const PiecewiseField& base, std::vector<double> deltas,
                                  const IntegratorConfig& cfg, const PseudoHopfOptions& options = {});

struct PerturbationDemoReport {
  double eps1 = 0.0, eps2 = 0.0, eps3 = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::vector<LimitCycle> cycles;
  bool found = false;
  std::string note;
};

struct PerturbationDemoOptions {
  std::optional<double> window_lo;
  double window_hi = 0.5;
  int grid_n = 300;
};

/// Builds the three-parameter perturbation of base and searches for crossing
/// cycles around the origin.
PerturbationDemoReport perturbation_cycle_demo(const PiecewiseField& base, double eps1, double eps2, double eps3,
                                               const IntegratorConfig& cfg,
                                               const PerturbationDemoOptions& options = {});

/// Closed cycle orbit from (x_star, 0): upper arc then lower arc.
std::vector<Sample> cycle_orbit(const PiecewiseField& z, double x_star, const IntegratorConfig& cfg);

void write_scenario_report(std::ostream& out, const ScenarioReport& report);
void write_pseudo_hopf_report(std::ostream& out, const PseudoHopfReport& report);
void write_demo_report(std::ostream& out, const PerturbationDemoReport& report);
void write_polylines_csv(std::ostream& out, const std::vector<Polyline>& curves);

}  // namespace pwf
