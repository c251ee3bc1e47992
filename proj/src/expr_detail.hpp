#pragma once

#include "pwfield/expr.hpp"

namespace pwf::expr::detail {

struct DomainFailure {
  const char* what;
};

bool compare(Cmp c, double a, double b);
bool small_integer(double b, long& n);
double int_power(double a, long n);
double power(double a, double b);
double apply_binary(BinaryOp op, double a, double b);
double apply_func(Func f, double a);

// Constant-folding node constructors without neutral-element elimination.
Expression raw_binary(BinaryOp op, const Expression& a, const Expression& b);
Expression raw_negate(const Expression& a);

}  // namespace pwf::expr::detail
