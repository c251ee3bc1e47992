// Event-driven integration of piecewise fields across the switching line.
#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwfield/field.hpp"

namespace pwf {

struct IntegratorConfig {
  double relTol = 1e-9;
  double absTol = 1e-12;
  double maxStep = 0.05;
  double eventTol = 1e-11;
  double maxTime = 200.0;
  int maxEvents = 1000;
  double minAmplitude = 1e-8;

  // Throws std::invalid_argument unless every field is positive.
  void validate() const;
};

class StepUnderflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Regime { Upper, Lower, Sliding };
enum class EventKind { CrossUp, CrossDown, SlideEnter, SlideExit, FoldHit, PseudoEquilibrium };
enum class Termination { TimeOut, BoxExit, NearOrigin, EventCap, SigmaReturn };

std::string to_string(Regime r);
std::string to_string(EventKind k);
std::string to_string(Termination t);

struct Sample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  Regime regime = Regime::Upper;
};

struct Event {
  double t = 0.0;
  double x = 0.0;
  EventKind kind = EventKind::CrossUp;
};

struct OrbitTrace {
  std::vector<Sample> samples;
  std::vector<Event> events;
  Termination termination = Termination::TimeOut;

  Vec2 end() const { return samples.empty() ? Vec2{} : Vec2{samples.back().x, samples.back().y}; }
};

struct SmoothStep {
  Vec2 point;
  double time = 0.0;
  double error = 0.0;      // max-norm of the embedded error estimate
  double step = 0.0;       // step actually taken
  double next_step = 0.0;  // suggested next step
};

/// One adaptive Dormand-Prince 5(4) step of F from (p, t), trying h first.
/// Negative h integrates backwards.
SmoothStep step_smooth(const PlanarField& f, Vec2 p, double t, double h, const IntegratorConfig& cfg);

/// Orbit of the Filippov flow from p0 for |t| <= |t_max| (negative t_max runs
/// backwards in time).
OrbitTrace integrate_piecewise(const PiecewiseField& z, Vec2 p0, double t_max, const IntegratorConfig& cfg);

enum class NoReturnReason { TimeOut, BoxExit, NearOrigin, NotCrossing };
std::string to_string(NoReturnReason r);

struct HalfReturn {
  bool ok = false;
  double x = 0.0;            // landing abscissa on y = 0
  double flight_time = 0.0;
  // Landing minus the mirrored start, -x0. Computed as a small quantity in
  // split mode, as a plain difference otherwise.
  double displacement = 0.0;
  NoReturnReason reason = NoReturnReason::TimeOut;
  bool used_split = false;
};

/// First hit of y = 0 when (x0, 0) is flowed into the given zone. The field
/// of that zone alone is used for the whole arc. Optional `samples` receives
/// the arc.
HalfReturn first_return_to_sigma(const PiecewiseField& z, Side side, double x0, const IntegratorConfig& cfg,
                                 std::vector<Sample>* samples = nullptr);

/// Same half return, integrated as reference orbit plus deviation for fields
/// carrying a reversible split. Returns nullopt when the deviation grows too
/// large for the small-quantity formulation to apply.
std::optional<HalfReturn> first_return_split(const PiecewiseField& z, Side side, double x0,
                                             const IntegratorConfig& cfg);

/// Between consecutive events y keeps one sign and the regime matches it;
/// sliding samples stay within event_tol of the line.
bool events_consistent(const OrbitTrace& trace, double event_tol);

void write_trace_csv(std::ostream& out, const OrbitTrace& trace);
void write_events_csv(std::ostream& out, const OrbitTrace& trace);

}  // namespace pwf
