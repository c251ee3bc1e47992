#include "pwfield/svg.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace pwf {

namespace {

constexpr int kMargin = 30;

std::string num(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

}  // namespace

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

SvgPlot::SvgPlot(double hx, double hy, int pixels) : hx_(hx), hy_(hy) {
  double aspect = hy / hx;
  width_ = pixels;
  height_ = static_cast<int>(std::lround(pixels * aspect));
}

double SvgPlot::px(double x) const { return kMargin + (x + hx_) / (2 * hx_) * width_; }
double SvgPlot::py(double y) const { return kMargin + (hy_ - y) / (2 * hy_) * height_; }

void SvgPlot::polyline(const std::vector<Vec2>& points, const std::string& color, double width) {
  if (points.size() < 2) return;
  std::string pts;
  for (const Vec2& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
    if (!pts.empty()) pts += ' ';
    pts += num(px(p.x)) + "," + num(py(p.y));
  }
  items_.push_back("<polyline fill=\"none\" stroke=\"" + xml_escape(color) + "\" stroke-width=\"" + num(width) +
                   "\" points=\"" + pts + "\"/>");
}

void SvgPlot::marker(Vec2 p, const std::string& color, double radius) {
  items_.push_back("<circle cx=\"" + num(px(p.x)) + "\" cy=\"" + num(py(p.y)) + "\" r=\"" + num(radius) +
                   "\" fill=\"" + xml_escape(color) + "\"/>");
}

void SvgPlot::label(Vec2 p, const std::string& text, const std::string& color) {
  items_.push_back("<text x=\"" + num(px(p.x)) + "\" y=\"" + num(py(p.y)) + "\" font-size=\"11\" fill=\"" +
                   xml_escape(color) + "\">" + xml_escape(text) + "</text>");
}

void SvgPlot::title(const std::string& text) { title_ = text; }

void SvgPlot::write(std::ostream& out) const {
  int w = width_ + 2 * kMargin, h = height_ + 2 * kMargin;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"#ffffff\"/>\n";
  out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << width_ << "\" height=\"" << height_
      << "\" fill=\"none\" stroke=\"#999999\"/>\n";
  // switching line
  out << "<line x1=\"" << num(px(-hx_)) << "\" y1=\"" << num(py(0)) << "\" x2=\"" << num(px(hx_)) << "\" y2=\""
      << num(py(0)) << "\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
  if (!title_.empty())
    out << "<text x=\"" << kMargin << "\" y=\"" << kMargin - 10 << "\" font-size=\"13\">" << xml_escape(title_)
        << "</text>\n";
  for (const std::string& item : items_) out << item << '\n';
  out << "</svg>\n";
}

}  // namespace pwf
