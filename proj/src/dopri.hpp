// Dormand-Prince 5(4) stepping over fixed-size states.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <utility>

#include "pwfield/integrate.hpp"

namespace pwf::detail {

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
struct Tolerance {
  double rel = 1e-9;
  State<N> abs{};
};

template <std::size_t N>
struct Step {
  double t0 = 0.0;
  double h = 0.0;
  State<N> y0{}, f0{}, y1{}, f1{};
  double error_norm = 0.0;   // scaled, <= 1 when accepted
  double error_max = 0.0;    // unscaled max-norm of the embedded estimate

  double t1() const { return t0 + h; }

  // Cubic Hermite interpolant on [t0, t0 + h], theta in [0, 1].
  State<N> dense(double theta) const {
    State<N> out;
    double a = theta - 1.0;
    for (std::size_t i = 0; i < N; ++i) {
      double d = y1[i] - y0[i];
      out[i] = (1 - theta) * y0[i] + theta * y1[i] +
               theta * a * ((1 - 2 * theta) * d + a * h * f0[i] + theta * h * f1[i]);
    }
    return out;
  }
};

/// One unadapted Dormand-Prince step of size h from (t, y) with f0 = f(t, y).
template <std::size_t N, class Rhs>
Step<N> dp_step(const Rhs& f, double t, const State<N>& y, const State<N>& f0, double h, const Tolerance<N>& tol) {
  using S = State<N>;
  auto lin = [&](std::initializer_list<std::pair<double, const S*>> terms) {
    S out = y;
    for (const auto& [c, k] : terms)
      for (std::size_t i = 0; i < N; ++i) out[i] += h * c * (*k)[i];
    return out;
  };
  const S& k1 = f0;
  S k2 = f(t + h / 5, lin({{1.0 / 5, &k1}}));
  S k3 = f(t + 3 * h / 10, lin({{3.0 / 40, &k1}, {9.0 / 40, &k2}}));
  S k4 = f(t + 4 * h / 5, lin({{44.0 / 45, &k1}, {-56.0 / 15, &k2}, {32.0 / 9, &k3}}));
  S k5 = f(t + 8 * h / 9,
           lin({{19372.0 / 6561, &k1}, {-25360.0 / 2187, &k2}, {64448.0 / 6561, &k3}, {-212.0 / 729, &k4}}));
  S k6 = f(t + h, lin({{9017.0 / 3168, &k1},
                       {-355.0 / 33, &k2},
                       {46732.0 / 5247, &k3},
                       {49.0 / 176, &k4},
                       {-5103.0 / 18656, &k5}}));
  Step<N> s;
  s.t0 = t;
  s.h = h;
  s.y0 = y;
  s.f0 = f0;
  s.y1 = lin({{35.0 / 384, &k1}, {500.0 / 1113, &k3}, {125.0 / 192, &k4}, {-2187.0 / 6784, &k5}, {11.0 / 84, &k6}});
  s.f1 = f(t + h, s.y1);
  const S& k7 = s.f1;
  double sum = 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    double e = h * (71.0 / 57600 * k1[i] - 71.0 / 16695 * k3[i] + 71.0 / 1920 * k4[i] -
                    17253.0 / 339200 * k5[i] + 22.0 / 525 * k6[i] - 1.0 / 40 * k7[i]);
    double sc = tol.abs[i] + tol.rel * std::max(std::fabs(y[i]), std::fabs(s.y1[i]));
    worst = std::max(worst, std::fabs(e));
    if (sc > 0) {
      sum += (e / sc) * (e / sc);
    } else if (e != 0) {
      sum += 1e300;
    }
  }
  s.error_norm = std::sqrt(sum / N);
  s.error_max = worst;
  return s;
}

/// Adaptive driver: retries with smaller h until the step is accepted.
/// On return `h` holds the suggested next step.
template <std::size_t N, class Rhs>
Step<N> dp_advance(const Rhs& f, double t, const State<N>& y, const State<N>& f0, double& h, double h_max,
                   const Tolerance<N>& tol) {
  constexpr double kMinStep = 1e-14;
  for (;;) {
    h = std::min(h, h_max);
    if (h < kMinStep && h < h_max) throw pwf::StepUnderflow("required step size fell below 1e-14");
    Step<N> s = dp_step<N>(f, t, y, f0, h, tol);
    bool finite = std::isfinite(s.error_norm);
    for (double v : s.y1) finite = finite && std::isfinite(v);
    if (finite && s.error_norm <= 1.0) {
      double fac = s.error_norm == 0 ? 5.0 : std::clamp(0.9 * std::pow(s.error_norm, -0.2), 0.2, 5.0);
      h = s.h * fac;
      return s;
    }
    double fac = finite ? std::clamp(0.9 * std::pow(s.error_norm, -0.2), 0.1, 0.9) : 0.25;
    h = s.h * fac;
  }
}

template <std::size_t N>
double initial_step(const State<N>& y, const State<N>& f0, double h_max) {
  double ny = 0, nf = 0;
  for (std::size_t i = 0; i < N; ++i) {
    ny = std::max(ny, std::fabs(y[i]));
    nf = std::max(nf, std::fabs(f0[i]));
  }
  if (nf == 0) return h_max;
  return std::min(h_max, 0.01 * std::max(ny, 1e-6) / nf);
}

}  // namespace pwf::detail
