// Return maps on the switching line, their derivatives and fixed points.
#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwfield/integrate.hpp"

namespace pwf {

/// How half returns are computed. Auto uses the reference-plus-deviation
/// route for fields that carry a reversible split and falls back to plain
/// integration otherwise.
enum class MapMode { Auto, Direct, Split };

std::string to_string(MapMode m);

struct ReturnMapSample {
  double x0 = 0.0;
  double value = 0.0;        // landing abscissa, > 0
  double flight_time = 0.0;
  bool ok = false;
  double displacement = 0.0;  // value - x0, carried as a small quantity in split mode
  double lower_intercept = 0.0;
  bool used_split = false;
  std::optional<Side> failed_half;
  NoReturnReason reason = NoReturnReason::TimeOut;
};

enum class Stability { Stable, Unstable, NonHyperbolic };
std::string to_string(Stability s);

struct LimitCycle {
  double x_star = 0.0;
  double lower_intercept = 0.0;
  double period = 0.0;
  double multiplier = 0.0;
  double multiplier_minus_one = 0.0;
  bool hyperbolic = false;
  Stability stability = Stability::NonHyperbolic;
  // Attraction read from the sign change of P(x) - x across the root,
  // independent of the multiplier.
  Stability bracket_stability = Stability::NonHyperbolic;
  bool used_split = false;
};

/// True when the map is built from the field mirrored by x -> -x.
bool needs_mirror(const PiecewiseField& z);

ReturnMapSample full_map(const PiecewiseField& z, double x0, const IntegratorConfig& cfg,
                         MapMode mode = MapMode::Auto);

struct MapDerivative {
  double multiplier = 0.0;
  double minus_one = 0.0;  // multiplier - 1 from displacement differences
  bool used_split = false;
};

class NoReturn : public std::runtime_error {
 public:
  NoReturn(const ReturnMapSample& s, const std::string& message) : std::runtime_error(message), sample(s) {}
  ReturnMapSample sample;
};

double default_derivative_step(double x0);

/// Central difference of the full map. Throws NoReturn when either
/// evaluation fails.
MapDerivative map_derivative(const PiecewiseField& z, double x0, double h, const IntegratorConfig& cfg,
                             MapMode mode = MapMode::Auto);

class EmptyInterval : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FixedPointOptions {
  MapMode mode = MapMode::Auto;
  bool geometric_grid = false;
  // Threshold on |P(x) - x| for the all-fixed (center) verdict. When unset it
  // is 1e-10 for directly integrated maps and exactly zero in split mode.
  std::optional<double> degenerate_tol;
  double hyperbolic_tol = 1e-6;  // on |multiplier - 1| for directly integrated maps
  double derivative_step = 0.0;  // 0 selects default_derivative_step
  unsigned threads = 0;          // 0 selects the hardware concurrency
};

struct FixedPointReport {
  std::vector<LimitCycle> cycles;
  std::vector<ReturnMapSample> grid;
  std::vector<double> skipped;  // grid abscissae with no return
  bool degenerate = false;
  bool mirrored = false;
};

/// Sign changes of P(x) - x on a grid over [lo, hi], refined by bisection.
FixedPointReport find_fixed_points(const PiecewiseField& z, double lo, double hi, int grid_n,
                                   const IntegratorConfig& cfg, const FixedPointOptions& options = {});

/// Stability from the sign of P(x) - x at x_star -+ delta: Stable when the
/// map moves both points toward x_star, Unstable when it moves both away.
Stability two_sided_stability(const PiecewiseField& z, double x_star, double delta, const IntegratorConfig& cfg,
                              MapMode mode = MapMode::Auto);

struct EllEstimate {
  double value = 0.0;               // extrapolated to x0 -> 0
  std::vector<double> x0;           // amplitudes used, decreasing
  std::vector<double> raw;          // ln(P(x0)/x0)/pi per amplitude
  std::vector<double> ratio;        // P(x0)/x0 per amplitude
};

/// Exponent of the return map near the origin, ln(P(x0)/x0)/pi, extrapolated
/// to zero amplitude with Neville's scheme in x0.
EllEstimate ell_from_map(const PiecewiseField& z, const std::vector<double>& x0_decreasing,
                         const IntegratorConfig& cfg);

void write_return_map_csv(std::ostream& out, const std::vector<ReturnMapSample>& samples);
void write_cycle_report(std::ostream& out, const FixedPointReport& report);

}  // namespace pwf
