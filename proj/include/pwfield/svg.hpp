// Minimal SVG 1.1 writer for phase-plane figures.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pwfield/geometry.hpp"

namespace pwf {

/// Plot of the rectangle [-hx, hx] x [-hy, hy] with the switching line
/// drawn. Coordinates are data coordinates; y points up.
class SvgPlot {
 public:
  SvgPlot(double hx, double hy, int pixels = 600);

  void polyline(const std::vector<Vec2>& points, const std::string& color, double width = 1.2);
  void marker(Vec2 p, const std::string& color, double radius = 3.0);
  void label(Vec2 p, const std::string& text, const std::string& color = "#000000");
  void title(const std::string& text);

  void write(std::ostream& out) const;

 private:
  double px(double x) const;
  double py(double y) const;

  double hx_, hy_;
  int width_, height_;
  std::string title_;
  std::vector<std::string> items_;
};

std::string xml_escape(const std::string& s);

}  // namespace pwf
