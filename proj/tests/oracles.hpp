#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "evnav/energy_model.hpp"

namespace evnav::testing {

struct GridMinimum {
  double velocity = 0.0;
  int index = 0;
  int count = 0;
};

// Brute-force minimiser of the raw simulated energy over `count` evenly spaced
// cruise speeds in [v_lo, v_hi].
inline GridMinimum grid_search_v_opt(double depth, double v_lo, double v_hi, int count,
                                     const DroneDynamics& dyn = {}, const MotorParams& mot = {}) {
  GridMinimum best{v_lo, 0, count};
  double e_best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < count; ++i) {
    const double v = v_lo + (v_hi - v_lo) * i / (count - 1);
    const double e = simulate_flight_energy(depth, v, dyn, mot);
    if (e < e_best) {
      e_best = e;
      best.velocity = v;
      best.index = i;
    }
  }
  return best;
}

// The speed range the energy fits cover at one depth.
inline std::pair<double, double> feasible_range(double depth, const DroneDynamics& dyn = {}) {
  const auto grid = feasible_velocity_grid(depth, dyn);
  return {grid.front(), grid.back()};
}

// Real roots in [lo, hi] from the eigenvalues of the companion matrix.
inline std::vector<double> companion_real_roots(const std::vector<double>& c, double lo, double hi,
                                                double imag_tol = 1e-7) {
  int n = static_cast<int>(c.size()) - 1;
  while (n > 0 && c[n] == 0.0) --n;
  std::vector<double> roots;
  if (n < 1) return roots;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) m(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) m(i, n - 1) = -c[i] / c[n];
  const Eigen::VectorXcd ev = m.eigenvalues();
  for (int i = 0; i < n; ++i) {
    const std::complex<double> z = ev(i);
    if (std::abs(z.imag()) <= imag_tol && z.real() >= lo && z.real() <= hi) roots.push_back(z.real());
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// Distance short of `depth` after t = depth / v from rest: accelerate at
// a_max until reaching v, then cruise. Stepped in time, each step integrated
// exactly.
inline double stepped_dynamics_gap(double v, double depth, double a_max, double dt = 1e-4) {
  const double t_end = depth / v;
  double x = 0.0;
  double speed = 0.0;
  for (double t = 0.0; t < t_end;) {
    const double h = std::min(dt, t_end - t);
    const double t_acc = std::min(h, std::isinf(a_max) ? 0.0 : (v - speed) / a_max);
    if (std::isinf(a_max)) speed = v;
    x += speed * t_acc + (std::isinf(a_max) ? 0.0 : 0.5 * a_max * t_acc * t_acc);
    speed = std::isinf(a_max) ? v : speed + a_max * t_acc;
    if (t_acc >= h) {
      t += h;
      continue;
    }
    speed = v;
    x += v * (h - t_acc);
    t += h;
  }
  return depth - x;
}

}  // namespace evnav::testing
