#include "evnav/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "evnav/errors.hpp"

namespace evnav {
namespace {

// Drops leading coefficients that are negligible against the largest one.
std::vector<double> trimmed(std::span<const double> coeffs) {
  std::vector<double> c(coeffs.begin(), coeffs.end());
  double scale = 0.0;
  for (double v : c) scale = std::max(scale, std::abs(v));
  while (!c.empty() && std::abs(c.back()) <= 1e-14 * scale) c.pop_back();
  return c;
}

double bisect(std::span<const double> c, double a, double b, double fa, double tol) {
  while (b - a > tol) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = poly_eval(c, m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

double coefficient_scale(std::span<const double> c) {
  double scale = 0.0;
  for (double v : c) scale = std::max(scale, std::abs(v));
  return scale;
}

}  // namespace

double poly_eval(std::span<const double> coeffs, double x) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::vector<double> poly_derivative(std::span<const double> coeffs) {
  if (coeffs.size() <= 1) return {};
  std::vector<double> d(coeffs.size() - 1);
  for (std::size_t k = 1; k < coeffs.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs[k];
  return d;
}

std::vector<double> real_roots_in(std::span<const double> coeffs, double lo, double hi, double tol) {
  if (!(lo <= hi)) throw DomainError("real_roots_in: empty interval");
  const std::vector<double> c = trimmed(coeffs);
  if (c.size() <= 1) return {};  // constant: either no roots or the zero polynomial
  if (c.size() == 2) {
    const double r = -c[0] / c[1];
    if (r >= lo && r <= hi) return {r};
    return {};
  }

  const std::vector<double> dc = poly_derivative(c);
  const std::vector<double> critical = real_roots_in(dc, lo, hi, tol);
  std::vector<double> knots;
  knots.push_back(lo);
  for (double x : critical) {
    if (x > knots.back()) knots.push_back(x);
  }
  if (hi > knots.back()) knots.push_back(hi);

  const double zero_tol = 1e-12 * coefficient_scale(c);
  std::vector<double> roots;
  const auto add = [&](double r) {
    if (roots.empty() || r - roots.back() > tol) roots.push_back(r);
  };
  for (std::size_t k = 0; k < knots.size(); ++k) {
    const double a = knots[k];
    const double fa = poly_eval(c, a);
    if (std::abs(fa) <= zero_tol) {
      add(a);
      continue;
    }
    if (k + 1 == knots.size()) break;
    const double b = knots[k + 1];
    const double fb = poly_eval(c, b);
    if (std::abs(fb) <= zero_tol) continue;  // picked up as the next knot
    if ((fa < 0.0) != (fb < 0.0)) add(bisect(c, a, b, fa, tol));
  }
  return roots;
}

}  // namespace evnav
