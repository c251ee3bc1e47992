#pragma once

#include <cmath>
#include <random>
#include <string>

#include "pwfield/expr.hpp"

namespace testing_support {

using pwf::expr::Expression;
using pwf::expr::parse;

// Random expression trees over {x, y, a} for property tests.
class RandomExpressions {
 public:
  explicit RandomExpressions(unsigned seed) : rng_(seed) {}

  Expression make(int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 11);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    switch (pick(rng_)) {
      case 0: return Expression::x();
      case 1: return Expression::y();
      case 2: return std::bernoulli_distribution(0.5)(rng_) ? Expression::parameter("a")
                                                             : Expression::constant(std::round(coef(rng_) * 100) / 100);
      case 3: return parse("(" + make(depth - 1).str() + ") + (" + make(depth - 1).str() + ")");
      case 4: return parse("(" + make(depth - 1).str() + ") - (" + make(depth - 1).str() + ")");
      case 5: return parse("(" + make(depth - 1).str() + ") * (" + make(depth - 1).str() + ")");
      case 6: return parse("(" + make(depth - 1).str() + ") / (2 + (" + make(depth - 1).str() + ")^2)");
      case 7: return parse("(" + make(depth - 1).str() + ")^" + std::to_string(std::uniform_int_distribution<int>(2, 4)(rng_)));
      case 8: return parse(std::string(std::bernoulli_distribution(0.5)(rng_) ? "sin(" : "cos(") + make(depth - 1).str() + ")");
      case 9: return parse("exp(sin(" + make(depth - 1).str() + "))");
      case 10: return parse("sqrt(1 + (" + make(depth - 1).str() + ")^2) + ln(2 + cos(" + make(depth - 1).str() + "))");
      default:
        return parse("if(" + make(depth - 1).str() + " > " + make(depth - 1).str() + ", " + make(depth - 1).str() +
                     ", " + make(depth - 1).str() + ")");
    }
  }

  std::mt19937& rng() { return rng_; }

 private:
  std::mt19937 rng_;
};


}  // namespace testing_support
