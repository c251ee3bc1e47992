// Points of the switching line y = 0 under the Filippov convention.
#pragma once

#include <stdexcept>
#include <string>

#include "pwfield/field.hpp"

namespace pwf {

enum class SigmaKind { Crossing, Sliding, SingularSliding };
enum class FlowDirection { Upward, Downward };

std::string to_string(SigmaKind k);
std::string to_string(FlowDirection d);

struct SigmaClassification {
  SigmaKind kind = SigmaKind::SingularSliding;
  double x = 0.0;
  double upper_normal = 0.0;  // X2(x, 0)
  double lower_normal = 0.0;  // Y2(x, 0)
  // Crossing only.
  FlowDirection direction = FlowDirection::Upward;
  Side governing = Side::Upper;
  // Sliding only (zero for singular points).
  double sliding_velocity = 0.0;
  double weight = 0.0;  // lambda with lambda X + (1 - lambda) Y tangent to the line
};

SigmaClassification classify_sigma_point(const PiecewiseField& z, double x);

// Filippov sliding velocity and weight for given upper/lower field values.
struct SlidingValue {
  double velocity;
  double weight;
};
SlidingValue sliding_value(Vec2 upper, Vec2 lower);

enum class TangencyCategory { NotTangent, FoldVisible, FoldInvisible, HigherOrderTangency, BoundaryEquilibrium };

std::string to_string(TangencyCategory c);

struct TangencyReport {
  Side side = Side::Upper;
  TangencyCategory category = TangencyCategory::NotTangent;
  double product = 0.0;  // F1 * dF2/dx at the point
};

TangencyReport tangency_classify(const PiecewiseField& z, Side side, double x);

enum class FoldFold { VV, II, VI, IV, NotFoldFold };

std::string to_string(FoldFold f);

FoldFold fold_fold_classify(const PiecewiseField& z, double x);

class SlidingFound : public std::runtime_error {
 public:
  SlidingFound(double x, const std::string& message) : std::runtime_error(message), x_(x) {}
  double x() const { return x_; }

 private:
  double x_;
};

struct CrossingSplitReport {
  double radius = 0.0;
  int samples_per_side = 0;
  FlowDirection right = FlowDirection::Upward;
  FlowDirection left = FlowDirection::Downward;
  // Direction on the right set predicted from the sign of X2x(0,0).
  FlowDirection expected_right = FlowDirection::Upward;
  bool consistent = false;
};

CrossingSplitReport crossing_split_report(const PiecewiseField& z, double radius, int n);

}  // namespace pwf
