#pragma once

// Deterministic random generation of curvature frames, including frames in
// the quadratic pinching cone. Uses std::mt19937_64 so streams are identical
// across platforms for a given seed.

#include <cmath>
#include <random>
#include <vector>

#include "pinchflow/tensor.hpp"

namespace pinchflow {

using Rng = std::mt19937_64;

inline CurvatureFrame random_frame(Rng& rng, int n, int q, double amp = 1.0) {
  std::uniform_real_distribution<double> uni(-amp, amp);
  CurvatureFrame f(n, q);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int a = 0; a < q; ++a) {
        double v = uni(rng);
        f.at(i, j, a) = v;
        f.at(j, i, a) = v;
      }
  return f;
}

// Random frame in the pinched cone Q = |A|^2 + a - c|H|^2 <= 0.
//
// A uniformly random symmetric tensor lies in the cone with vanishing
// probability, so instead of naive rejection we draw a random umbilic
// direction U (h = delta_ij nu_a, deep inside the cone for c > 1/n), a random
// symmetric perturbation S, and move from U toward the cone boundary:
//     h(beta) = U + beta S,  Q(beta) quadratic in beta with Q(0) < 0.
// beta is drawn uniformly in [0, beta_max] where beta_max is the exit point
// of the cone, so samples cover the interior and hug the boundary. A final
// rejection keeps only Q <= 0 (guards the degenerate q2 <= 0 branch).
inline CurvatureFrame random_pinched_frame(Rng& rng, const PinchingParams& p,
                                           bool unitMeanCurvature = false) {
  const int n = p.n, q = p.q;
  std::uniform_real_distribution<double> uni01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (int attempt = 0; attempt < 1000; ++attempt) {
    // Random unit normal direction.
    std::vector<double> nu(q);
    double nn = 0.0;
    for (int a = 0; a < q; ++a) {
      nu[a] = gauss(rng);
      nn += nu[a] * nu[a];
    }
    if (nn <= 1e-12) continue;
    nn = std::sqrt(nn);
    for (int a = 0; a < q; ++a) nu[a] /= nn;

    CurvatureFrame S = random_frame(rng, n, q);

    // Q(beta) = q0 + q1 beta + q2 beta^2 for h = U + beta S.
    std::vector<double> trS(q, 0.0);
    for (int a = 0; a < q; ++a)
      for (int i = 0; i < n; ++i) trS[a] += S.at(i, i, a);
    double trSnu = 0.0, S2 = 0.0, trS2 = 0.0, diagSnu = 0.0;
    for (int a = 0; a < q; ++a) {
      trSnu += trS[a] * nu[a];
      trS2 += trS[a] * trS[a];
    }
    for (double v : S.h) S2 += v * v;
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < q; ++a) diagSnu += S.at(i, i, a) * nu[a];
    // |A|^2(beta) = n + 2 beta diagSnu + beta^2 S2
    // |H|^2(beta) = n^2 + 2 n beta trSnu + beta^2 trS2   (note diagSnu = trSnu)
    const double q0 = n + p.a - p.c * n * n;
    const double q1 = 2.0 * diagSnu - 2.0 * p.c * n * trSnu;
    const double q2 = S2 - p.c * trS2;
    if (q0 >= 0.0) throw invalid_slope("pinching parameters leave no umbilic interior");

    double betaMax;
    if (q2 > 0.0) {
      betaMax = (-q1 + std::sqrt(q1 * q1 - 4.0 * q2 * q0)) / (2.0 * q2);
    } else {
      betaMax = 2.0;  // whole ray may stay inside; cap the range
    }
    const double beta = betaMax * uni01(rng);

    CurvatureFrame f(n, q);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int a = 0; a < q; ++a)
          f.at(i, j, a) = (i == j ? nu[a] : 0.0) + beta * S.at(i, j, a);

    if (pinch_Q(f, p) > 0.0) continue;
    double h2 = norm_H2(f);
    if (h2 <= 1e-12) continue;
    if (unitMeanCurvature) {
      // Only valid when a == 0; scaling changes Q otherwise.
      const double s = 1.0 / std::sqrt(h2);
      for (double& v : f.h) v *= s;
    }
    return f;
  }
  throw not_pinched("failed to sample a pinched frame");
}

}  // namespace pinchflow
