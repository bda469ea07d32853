#pragma once

// Periodic-grid numerics shared by the flow engine: central finite
// differences of order 2/4 and periodic cubic spline interpolation.

#include <cmath>
#include <cstddef>
#include <vector>

#include "pinchflow/errors.hpp"

namespace pinchflow {

// Central first derivative of a periodic array of N points with d components
// per point (row-major), grid spacing dx.
inline std::vector<double> periodic_d1(const std::vector<double>& f, int N, int d, double dx,
                                       int order = 4) {
  std::vector<double> out(f.size());
  auto idx = [N](int i) { return ((i % N) + N) % N; };
  for (int i = 0; i < N; ++i)
    for (int c = 0; c < d; ++c) {
      auto v = [&](int off) { return f[static_cast<size_t>(idx(i + off)) * d + c]; };
      double r;
      if (order >= 4)
        r = (-v(2) + 8.0 * v(1) - 8.0 * v(-1) + v(-2)) / (12.0 * dx);
      else
        r = (v(1) - v(-1)) / (2.0 * dx);
      out[static_cast<size_t>(i) * d + c] = r;
    }
  return out;
}

inline std::vector<double> periodic_d2(const std::vector<double>& f, int N, int d, double dx,
                                       int order = 4) {
  std::vector<double> out(f.size());
  auto idx = [N](int i) { return ((i % N) + N) % N; };
  for (int i = 0; i < N; ++i)
    for (int c = 0; c < d; ++c) {
      auto v = [&](int off) { return f[static_cast<size_t>(idx(i + off)) * d + c]; };
      double r;
      if (order >= 4)
        r = (-v(2) + 16.0 * v(1) - 30.0 * v(0) + 16.0 * v(-1) - v(-2)) / (12.0 * dx * dx);
      else
        r = (v(1) - 2.0 * v(0) + v(-1)) / (dx * dx);
      out[static_cast<size_t>(i) * d + c] = r;
    }
  return out;
}

// Periodic cubic spline through N samples y_i at nodes x_i = i*dx; evaluation
// wraps modulo the period N*dx. Second derivatives from the cyclic
// tridiagonal system (Sherman-Morrison on the standard natural-spline solve).
class PeriodicCubicSpline {
 public:
  PeriodicCubicSpline(std::vector<double> y, double dx) : y_(std::move(y)), dx_(dx) {
    const int N = static_cast<int>(y_.size());
    if (N < 4) throw config_error("spline needs at least 4 points");
    // Solve M m = rhs with M cyclic tridiagonal (1, 4, 1).
    std::vector<double> rhs(N);
    for (int i = 0; i < N; ++i) {
      double ym = y_[(i + N - 1) % N], yp = y_[(i + 1) % N];
      rhs[i] = 6.0 * (ym - 2.0 * y_[i] + yp) / (dx_ * dx_);
    }
    m_ = solve_cyclic(rhs);
  }

  double operator()(double x) const {
    const int N = static_cast<int>(y_.size());
    const double period = N * dx_;
    x = std::fmod(x, period);
    if (x < 0) x += period;
    int i = static_cast<int>(x / dx_);
    if (i >= N) i = N - 1;
    const int j = (i + 1) % N;
    const double a = (dx_ * (i + 1) - x) / dx_;
    const double b = 1.0 - a;
    return a * y_[i] + b * y_[j] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[j]) * dx_ * dx_ / 6.0;
  }

 private:
  // Cyclic tridiagonal system (diag 4, off-diagonals 1, corner entries 1)
  // via Sherman-Morrison: A = T + u v^T with u = (gamma,0,...,1),
  // v = (1,0,...,1/gamma), T tridiagonal with first/last diagonal entries
  // 4-gamma and 4-1/gamma.
  std::vector<double> solve_cyclic(const std::vector<double>& rhs) const {
    const int N = static_cast<int>(rhs.size());
    const double gamma = -4.0;
    const double a00 = 4.0 - gamma;
    const double ann = 4.0 - 1.0 / gamma;
    auto solve_mod = [&](std::vector<double> r) {
      // Thomas with variable first/last diagonal entries.
      std::vector<double> c(N, 0.0), x(N, 0.0);
      double beta = a00;
      c[0] = 1.0 / beta;
      x[0] = r[0] / beta;
      for (int i = 1; i < N - 1; ++i) {
        beta = 4.0 - c[i - 1];
        c[i] = 1.0 / beta;
        x[i] = (r[i] - x[i - 1]) / beta;
      }
      beta = ann - c[N - 2];
      x[N - 1] = (r[N - 1] - x[N - 2]) / beta;
      for (int i = N - 2; i >= 0; --i) x[i] -= c[i] * x[i + 1];
      return x;
    };
    std::vector<double> u(N, 0.0);
    u[0] = gamma;
    u[N - 1] = 1.0;
    std::vector<double> z = solve_mod(rhs);
    std::vector<double> w = solve_mod(u);
    // v^T x with v = (1, 0, ..., 0, 1/gamma)
    const double vz = z[0] + z[N - 1] / gamma;
    const double vw = w[0] + w[N - 1] / gamma;
    std::vector<double> x(N);
    for (int i = 0; i < N; ++i) x[i] = z[i] - vz / (1.0 + vw) * w[i];
    return x;
  }

  std::vector<double> y_;
  std::vector<double> m_;
  double dx_;
};

}  // namespace pinchflow
