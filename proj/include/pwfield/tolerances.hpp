#pragma once

namespace pwf::tol {

// Zero test on field component values along the switching line.
inline constexpr double sigma = 1e-11;
// Discriminant magnitude treated as equal eigenvalues.
inline constexpr double discriminant = 1e-9;
// |ell| treated as zero.
inline constexpr double ell = 1e-9;
// |multiplier - 1| below which a cycle is non-hyperbolic (finite-difference multipliers).
inline constexpr double hyperbolic = 1e-6;

}  // namespace pwf::tol
