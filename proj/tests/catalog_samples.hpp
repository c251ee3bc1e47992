#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pwfield/field.hpp"

namespace testing_support {

// One instance of every catalog constructor, plus all normal forms.
inline std::vector<std::pair<std::string, pwf::PiecewiseField>> catalog_samples() {
  using namespace pwf;
  std::vector<std::pair<std::string, PiecewiseField>> out;
  for (PortraitLabel l : all_portrait_labels()) out.emplace_back(to_string(l), make_normal_form(l));
  for (double a : {-1.0, 1.0})
    for (double b : {-1.0, 1.0}) out.emplace_back("z0", make_z0(a, b));
  out.emplace_back("linear", make_linear({0.2, -1, 1, 0.2}, {-0.5, -1, 1, -0.5}));
  out.emplace_back("prop52", make_prop52(-0.25, 0.5, 2, 0.05));
  out.emplace_back("prop53", make_prop53(0.25, -0.25, 0.05));
  out.emplace_back("shift", make_pseudo_hopf_shift(make_normal_form(PortraitLabel::FF1), 0.01));
  out.emplace_back("theorem13", make_theorem13_perturbation(make_normal_form(PortraitLabel::NS1), 0.1, 0.05, 0.01));
  out.emplace_back("omega3", make_omega3_perturbation(make_linear({1, 0, 1, 1}, {0, -1, 1, 0.3}), -0.04));
  out.emplace_back("zstar", make_counterexample_zstar(false));
  out.emplace_back("zstar-linear", make_counterexample_zstar(true));
  return out;
}

}  // namespace testing_support
