#pragma once

#include <span>
#include <vector>

namespace evnav {

/// Polynomials are coefficient vectors in increasing order: c[0] + c[1] x + ...

double poly_eval(std::span<const double> coeffs, double x);

std::vector<double> poly_derivative(std::span<const double> coeffs);

/// All real roots in [lo, hi], ascending, each located to within `tol`.
/// Works by splitting the interval at the roots of the derivative (found
/// recursively) and bisecting every monotone piece that changes sign. Touching
/// roots (even multiplicity) are reported when |p| vanishes at a critical point
/// relative to the coefficient scale.
std::vector<double> real_roots_in(std::span<const double> coeffs, double lo, double hi, double tol = 1e-12);

}  // namespace evnav
