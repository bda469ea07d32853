#pragma once

// Quantitative estimate monitors: gradient bounds, measured curvature
// constants, Harnack propagation, parabolic neighbourhoods, neck detection,
// the cylindrical ratio trend, and the compactness dichotomy.
//
// Everything operates on SampledGeometry, a flat per-point view of curvature
// data along an arclength-parametrized profile, so the same monitors run on
// flow snapshots and on closed-form catalog samples.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "pinchflow/errors.hpp"
#include "pinchflow/profile.hpp"
#include "pinchflow/tensor.hpp"

namespace pinchflow {

struct SampledGeometry {
  int n = 0;
  bool periodic = true;
  double length = 0.0;
  std::vector<double> s;          // arclength positions
  std::vector<double> u;          // orbit radius
  std::vector<double> us;         // du/ds
  std::vector<double> kappaNorm;  // |profile curvature|
  std::vector<double> A2, H2;
  std::vector<double> gradA2, gradH2, grad2A2;  // may be empty

  int size() const { return static_cast<int>(s.size()); }
  double distance(int i, int j) const {
    double d = std::abs(s[i] - s[j]);
    if (periodic) d = std::min(d, length - d);
    return d;
  }
};

inline SampledGeometry sampled_geometry(const Snapshot& sn, int n) {
  SampledGeometry g;
  g.n = n;
  g.periodic = true;
  g.length = sn.length;
  g.s = sn.s;
  g.u = sn.state.u;
  g.us = sn.us;
  g.kappaNorm = sn.kappaNorm;
  g.A2 = sn.A2;
  g.H2 = sn.H2;
  g.gradA2 = sn.gradA2;
  g.gradH2 = sn.gradH2;
  g.grad2A2 = sn.grad2A2;
  return g;
}

inline SampledGeometry sampled_geometry(const ProfileState& st, int order = 4) {
  const ProfileGeometry pg = profile_geometry(st, order);
  return sampled_geometry(make_snapshot(st, pg, 0.0), st.n);
}

// Round sphere S^n(r) sampled along a meridian (interior points only).
inline SampledGeometry sphere_sample(int n, double r, int N = 128) {
  SampledGeometry g;
  g.n = n;
  g.periodic = false;
  const double pi = 3.14159265358979323846;
  g.length = pi * r;
  g.s.resize(N);
  g.u.resize(N);
  g.us.resize(N);
  g.kappaNorm.assign(N, 1.0 / r);
  g.A2.assign(N, n / (r * r));
  g.H2.assign(N, static_cast<double>(n) * n / (r * r));
  g.gradA2.assign(N, 0.0);
  g.gradH2.assign(N, 0.0);
  g.grad2A2.assign(N, 0.0);
  for (int i = 0; i < N; ++i) {
    g.s[i] = g.length * (i + 0.5) / N;
    g.u[i] = r * std::sin(g.s[i] / r);
    g.us[i] = std::cos(g.s[i] / r);
  }
  return g;
}

// Straight round cylinder S^{n-1}(r) x [0, L] sampled along the axis.
inline SampledGeometry cylinder_sample(int n, double r, int N = 128, double L = 0.0) {
  if (L <= 0.0) L = 20.0 * r;
  SampledGeometry g;
  g.n = n;
  g.periodic = false;
  g.length = L;
  g.s.resize(N);
  g.u.assign(N, r);
  g.us.assign(N, 0.0);
  g.kappaNorm.assign(N, 0.0);
  g.A2.assign(N, (n - 1) / (r * r));
  g.H2.assign(N, static_cast<double>(n - 1) * (n - 1) / (r * r));
  g.gradA2.assign(N, 0.0);
  g.gradH2.assign(N, 0.0);
  g.grad2A2.assign(N, 0.0);
  for (int i = 0; i < N; ++i) g.s[i] = L * (i + 0.5) / N;
  return g;
}

// ---- constants ------------------------------------------------------------

struct GradientEstimateConsts {
  double gamma1 = 0.0, gamma2 = 0.0;  // |grad A|^2 <= gamma1 |A|^4 + gamma2
  double gamma3 = 0.0, gamma4 = 0.0;  // |grad^2 A|^2 <= gamma3 |A|^6 + gamma4
  double cSharp = 0.0;                // |grad H| <= cSharp |H|^2 above HSharp
  double HSharp = 0.0;
  double dSharp = 0.0;                // 1 / (8 (n-1)^2 cSharp)
};

inline double d_sharp(int n, double cSharp) {
  if (cSharp <= 0.0) return 0.0;
  return 1.0 / (8.0 * (n - 1) * (n - 1) * cSharp);
}

struct ParabolicNbhd {
  int centerIndex = 0;
  double centerTime = 0.0;
  double radius = 0.0;    // spatial radius, length
  double lookback = 0.0;  // backward time extent, length^2
  double rHat = 0.0;      // (n-1)/|H(center)|
};

inline ParabolicNbhd make_parabolic_nbhd(int n, int centerIndex, double centerTime,
                                         double Hcenter, double L, double theta) {
  if (Hcenter <= 0.0) throw zero_mean_curvature();
  ParabolicNbhd p;
  p.centerIndex = centerIndex;
  p.centerTime = centerTime;
  p.rHat = (n - 1) / Hcenter;
  p.radius = L * p.rHat;
  p.lookback = theta * p.rHat * p.rHat;
  return p;
}

struct NeckParams {
  double epsNeck = 0.1;
  int kReg = 2;      // derivative-control count, >= 2
  double L = 2.0;    // window half-width in units of rHat
  double theta = 1.0;
};

struct DichotomyParams {
  double eta0 = 0.0;    // ratio gap below 1/(n-1)
  double alpha0 = 0.0;  // search radius in units of 1/|H|
  double gamma0 = 1.0;  // curvature-drop factor
};

inline DichotomyParams make_dichotomy_params(double eta0, double cSharp) {
  if (eta0 <= 0.0) throw config_error("eta0 must be positive");
  DichotomyParams d;
  d.eta0 = eta0;
  d.alpha0 = std::sqrt(2.0) * 3.14159265358979323846 / std::sqrt(eta0);
  d.gamma0 = 1.0 + cSharp * d.alpha0;
  return d;
}

// ---- gradient estimates -----------------------------------------------------

struct GradientRatio {
  double supRatio = 0.0;    // max |grad A|^2 / (c|H|^2 - |A|^2)^2
  double theoryBound = 0.0;  // 3 c_n / (2 kappa_n (n+2) eps_meas)
  double epsMeas = 0.0;     // min (c|H|^2 - |A|^2) / |A|^2
};

inline GradientRatio gradient_ratio_monitor(const SampledGeometry& g, const PinchingParams& p) {
  if (g.gradA2.empty()) throw missing_gradient();
  GradientRatio out;
  out.epsMeas = 1e300;
  for (int i = 0; i < g.size(); ++i) {
    const double gap = p.c * g.H2[i] - g.A2[i];
    if (gap <= 0.0) throw not_pinched("c|H|^2 - |A|^2 <= 0 at sample " + std::to_string(i));
    out.supRatio = std::max(out.supRatio, g.gradA2[i] / (gap * gap));
    if (g.A2[i] > 0.0) out.epsMeas = std::min(out.epsMeas, gap / g.A2[i]);
  }
  const double cn = c_n_constant(g.n).value();
  const double kappaN = 3.0 / (g.n + 2) - p.c;
  if (kappaN <= 0.0) throw invalid_slope("slope must stay below 3/(n+2)");
  out.theoryBound = 3.0 * cn / (2.0 * kappaN * (g.n + 2) * out.epsMeas);
  return out;
}

struct BoundCheck {
  bool ok = false;
  double worstMargin = -1e300;  // max of (lhs - bound); <= tol when ok
  int worstIndex = -1;
};

inline BoundCheck gradient_bound_check(const SampledGeometry& g, const GradientEstimateConsts& c,
                                       double tol = 1e-9) {
  if (g.gradA2.empty()) throw missing_gradient();
  BoundCheck out;
  for (int i = 0; i < g.size(); ++i) {
    const double m = g.gradA2[i] - c.gamma1 * g.A2[i] * g.A2[i] - c.gamma2;
    if (m > out.worstMargin) {
      out.worstMargin = m;
      out.worstIndex = i;
    }
  }
  out.ok = out.worstMargin <= tol;
  return out;
}

inline BoundCheck second_deriv_monitor(const SampledGeometry& g, const GradientEstimateConsts& c,
                                       double tol = 1e-9) {
  if (g.grad2A2.empty()) throw missing_gradient("no second-derivative data");
  BoundCheck out;
  for (int i = 0; i < g.size(); ++i) {
    const double m = g.grad2A2[i] - c.gamma3 * g.A2[i] * g.A2[i] * g.A2[i] - c.gamma4;
    if (m > out.worstMargin) {
      out.worstMargin = m;
      out.worstIndex = i;
    }
  }
  out.ok = out.worstMargin <= tol;
  return out;
}

// Fit the gradient constants on a snapshot window [first, last): the smallest
// gamma with gamma1 = gamma2 (resp. gamma3 = gamma4) making the bounds hold
// on the window. Out-of-window validity is the actual check.
inline GradientEstimateConsts fit_gradient_consts(const Trajectory& tr, size_t first, size_t last) {
  GradientEstimateConsts c;
  for (size_t k = first; k < last && k < tr.snaps.size(); ++k) {
    const Snapshot& sn = tr.snaps[k];
    for (size_t i = 0; i < sn.A2.size(); ++i) {
      const double a2 = sn.A2[i];
      c.gamma1 = std::max(c.gamma1, sn.gradA2[i] / (1.0 + a2 * a2));
      if (!sn.grad2A2.empty())
        c.gamma3 = std::max(c.gamma3, sn.grad2A2[i] / (1.0 + a2 * a2 * a2));
    }
  }
  c.gamma2 = c.gamma1;
  c.gamma4 = c.gamma3;
  return c;
}

// Smallest cSharp with |grad H| <= cSharp |H|^2 and |dH/dt| <= cSharp |H|^3
// over all recorded samples with |H| >= HSharp. The time derivative is a
// finite difference at fixed grid index between consecutive snapshots.
inline double measure_csharp(const Trajectory& tr, double HSharp) {
  double c = 0.0;
  bool any = false;
  for (size_t k = 0; k < tr.snaps.size(); ++k) {
    const Snapshot& sn = tr.snaps[k];
    const int N = static_cast<int>(sn.H2.size());
    const int d = (N > 0) ? static_cast<int>(sn.Hvec.size()) / N : 0;
    for (int i = 0; i < N; ++i) {
      const double H = std::sqrt(sn.H2[i]);
      if (H < HSharp) continue;
      any = true;
      c = std::max(c, std::sqrt(sn.gradH2[i]) / (H * H));
      if (k + 1 < tr.snaps.size()) {
        const Snapshot& nx = tr.snaps[k + 1];
        const double dt = nx.time - sn.time;
        if (dt <= 0.0 || nx.H2.size() != sn.H2.size()) continue;
        double dH2 = 0.0;
        for (int cc = 0; cc < d; ++cc) {
          const double dv = (nx.Hvec[static_cast<size_t>(i) * d + cc] -
                             sn.Hvec[static_cast<size_t>(i) * d + cc]) / dt;
          dH2 += dv * dv;
        }
        c = std::max(c, std::sqrt(dH2) / (H * H * H));
      }
    }
  }
  if (!any) throw no_qualifying_points();
  return c;
}

// Curvature propagates along the profile: every q within intrinsic distance
// (gamma-1)/(cSharp |H(i0)|) of i0 satisfies
//   |H(q)| >= |H(i0)| / (1 + cSharp d(i0,q) |H(i0)|)  >= |H(i0)| / gamma.
inline bool harnack_check(const SampledGeometry& g, int i0, double cSharp, double HSharp,
                          double gamma, double tol = 1e-9) {
  const double H0 = std::sqrt(g.H2[i0]);
  if (H0 < gamma * HSharp) throw below_threshold();
  const double radius = (cSharp > 0.0) ? (gamma - 1.0) / (cSharp * H0) : g.length;
  for (int q = 0; q < g.size(); ++q) {
    const double dist = g.distance(i0, q);
    if (dist > radius) continue;
    const double bound = H0 / (1.0 + cSharp * dist * H0);
    if (std::sqrt(g.H2[q]) < bound - tol) return false;
  }
  return true;
}

// Curvature stays within [1/2, 2] of the center value across the backward
// parabolic neighbourhood of size dSharp = 1/(8(n-1)^2 cSharp). Grid indices
// track material points across snapshots (regridding perturbs this by at most
// the redistribution drift, far below factor two).
inline bool half_double_check(const Trajectory& tr, size_t snapIdx, int i0, double cSharp,
                              double HSharp, double tol = 1e-9) {
  if (snapIdx >= tr.snaps.size()) throw insufficient_history();
  const Snapshot& center = tr.snaps[snapIdx];
  const double H0 = std::sqrt(center.H2[i0]);
  if (H0 < HSharp) throw below_threshold();
  const double rHat = (tr.n - 1) / H0;
  const double ds = d_sharp(tr.n, cSharp);
  const double radius = (cSharp > 0.0) ? ds * rHat : center.length;
  const double lookback = (cSharp > 0.0) ? ds * rHat * rHat : center.time;

  bool anySnap = false;
  for (size_t k = 0; k <= snapIdx; ++k) {
    const Snapshot& sn = tr.snaps[k];
    if (sn.time < center.time - lookback - 1e-15) continue;
    if (sn.H2.size() != center.H2.size()) continue;
    anySnap = true;
    const int N = static_cast<int>(sn.H2.size());
    for (int q = 0; q < N; ++q) {
      double dist = std::abs(sn.s[q] - sn.s[i0]);
      dist = std::min(dist, sn.length - dist);
      if (dist > radius) continue;
      const double H = std::sqrt(sn.H2[q]);
      if (H < 0.5 * H0 - tol || H > 2.0 * H0 + tol) return false;
    }
  }
  if (!anySnap) throw insufficient_history();
  return true;
}

// ---- necks and the dichotomy ------------------------------------------------

struct NeckDetection {
  bool isNeck = false;
  double deviation = 0.0;      // worst cylinder deviation over the window
  double derivDeviation = 0.0; // worst rescaled derivative up to kReg
  int windowPoints = 0;
};

// Cylinder closeness at i0: after rescaling by rHat = (n-1)/|H(i0)|, the
// radius, slope, profile curvature and pinch ratio must all be epsNeck-close
// to the standard cylinder over an arclength window of half-width L rHat,
// with finite-difference derivative control up to order kReg.
inline NeckDetection neck_detect(const SampledGeometry& g, int i0, const NeckParams& np) {
  const double H0 = std::sqrt(g.H2[i0]);
  if (H0 <= 0.0) throw zero_mean_curvature();
  const double rHat = (g.n - 1) / H0;
  const double half = np.L * rHat;
  if (g.periodic && 2.0 * half >= g.length)
    throw window_exceeds_domain();

  // Window members sorted by signed offset from i0.
  std::vector<std::pair<double, int>> win;
  for (int q = 0; q < g.size(); ++q) {
    double off = g.s[q] - g.s[i0];
    if (g.periodic) {
      if (off > 0.5 * g.length) off -= g.length;
      if (off < -0.5 * g.length) off += g.length;
    }
    if (std::abs(off) <= half) win.push_back({off, q});
  }
  std::sort(win.begin(), win.end());
  NeckDetection out;
  out.windowPoints = static_cast<int>(win.size());
  if (win.size() < 3) throw window_exceeds_domain("neck window holds fewer than 3 samples");

  const int M = static_cast<int>(win.size());
  // Four dimensionless cylinder deviations per window point.
  std::vector<std::array<double, 4>> dev(M);
  for (int w = 0; w < M; ++w) {
    const int q = win[w].second;
    dev[w][0] = g.u[q] / rHat - 1.0;
    dev[w][1] = g.us[q];
    dev[w][2] = g.kappaNorm[q] * rHat;
    dev[w][3] = (g.A2[q] / g.H2[q] - 1.0 / (g.n - 1)) * (g.n - 1);
    for (double v : dev[w]) out.deviation = std::max(out.deviation, std::abs(v));
  }
  // Derivative control in rescaled arclength, centered differences on the
  // (possibly nonuniform) window; repeated differencing covers order kReg.
  std::vector<double> pos(M);
  for (int w = 0; w < M; ++w) pos[w] = win[w].first / rHat;
  for (int m = 0; m < 4; ++m) {
    std::vector<double> cur(M);
    for (int w = 0; w < M; ++w) cur[w] = dev[w][m];
    for (int orderK = 1; orderK <= np.kReg; ++orderK) {
      std::vector<double> nxt(M, 0.0);
      for (int w = 1; w + 1 < M; ++w) {
        const double h = pos[w + 1] - pos[w - 1];
        if (h > 1e-14) nxt[w] = (cur[w + 1] - cur[w - 1]) / h;
      }
      nxt[0] = nxt[1];
      nxt[M - 1] = nxt[M - 2];
      cur = std::move(nxt);
      for (int w = 1; w + 1 < M; ++w)
        out.derivDeviation = std::max(out.derivDeviation, std::abs(cur[w]));
    }
  }
  out.isNeck = out.deviation <= np.epsNeck && out.derivDeviation <= np.epsNeck;
  return out;
}

struct CylindricalTrend {
  std::vector<std::pair<double, double>> points;  // (max|H|, ratio at argmax)
  double asymptote = 0.0;                         // mean ratio over the top curvature band
};

inline CylindricalTrend cylindrical_trend(const Trajectory& tr) {
  CylindricalTrend out;
  double maxH = 0.0;
  for (const Snapshot& sn : tr.snaps) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(sn.H2.size()); ++i)
      if (sn.H2[i] > sn.H2[best]) best = i;
    const double H = std::sqrt(sn.H2[best]);
    out.points.push_back({H, sn.A2[best] / sn.H2[best]});
    maxH = std::max(maxH, H);
  }
  double acc = 0.0;
  int cnt = 0;
  for (const auto& [H, ratio] : out.points)
    if (H >= 0.5 * maxH) {
      acc += ratio;
      ++cnt;
    }
  if (cnt > 0) out.asymptote = acc / cnt;
  return out;
}

// Lower bound on the minimal sectional curvature from the pinch gap.
inline double chen_kmin(int n, double A2, double H2) {
  return 0.5 * (H2 / (n - 1) - A2);
}

inline double chen_kmin(const CurvatureFrame& f) {
  return chen_kmin(f.n, norm_A2(f), norm_H2(f));
}

enum class DichotomyKind { Compact, NeckCandidate, Inconclusive };

struct DichotomyResult {
  DichotomyKind kind = DichotomyKind::Inconclusive;
  int index = -1;            // candidate point for NeckCandidate
  bool hLowerBoundOk = false;  // |H(q)| >= |H(i0)|/gamma0 at the candidate
  double minChen = 0.0;        // min Chen bound over the searched ball
};

// Either every point within distance alpha0/|H(i0)| keeps ratio below
// 1/(n-1) - eta0 (then positive Chen curvature forces compactness) or some
// nearby point already has cylindrical ratio and comparable curvature.
inline DichotomyResult dichotomy_classify(const SampledGeometry& g, int i0,
                                          const DichotomyParams& dp, double HSharp) {
  const double H0 = std::sqrt(g.H2[i0]);
  const double threshold = 1.0 / (g.n - 1) - dp.eta0;
  if (g.A2[i0] / g.H2[i0] >= threshold)
    throw precondition_failed("base point ratio not below 1/(n-1) - eta0");
  if (H0 < dp.gamma0 * HSharp)
    throw precondition_failed("base point curvature below gamma0 * HSharp");

  const double radius = dp.alpha0 / H0;
  DichotomyResult out;
  out.minChen = 1e300;
  int bestQ = -1;
  double bestH2 = -1.0;
  for (int q = 0; q < g.size(); ++q) {
    if (g.distance(i0, q) > radius) continue;
    const double ratio = g.A2[q] / g.H2[q];
    // Among cylindrical-ratio points pick the one of largest curvature: the
    // candidate must carry curvature comparable to the base point.
    if (ratio >= threshold && g.H2[q] > bestH2) {
      bestH2 = g.H2[q];
      bestQ = q;
    }
    out.minChen = std::min(out.minChen, chen_kmin(g.n, g.A2[q], g.H2[q]));
  }
  if (bestQ >= 0) {
    out.kind = DichotomyKind::NeckCandidate;
    out.index = bestQ;
    out.hLowerBoundOk = std::sqrt(g.H2[bestQ]) >= H0 / dp.gamma0;
    return out;
  }
  out.kind = (out.minChen > 0.0) ? DichotomyKind::Compact : DichotomyKind::Inconclusive;
  return out;
}

}  // namespace pinchflow
