#pragma once

// Rotationally symmetric immersions F(x, w) = (u(x) w, chi(x)), w in S^{n-1},
// reduced to the profile curve gamma = (u, chi) in R^{1+k} over a periodic
// grid. All curvature quantities of the n-dimensional submanifold are closed
// forms in the profile data:
//   h(T,T) = kappa (profile curvature vector),
//   h(e_i,e_j) = delta_ij phi,  phi = -(1/u)(e_u - <e_u,gamma_s> gamma_s),
//   H = kappa + (n-1) phi.
// The covariant derivative reduces to two normal-valued fields along s,
//   a = D_s kappa  and  m = rho psi  with  rho = u_s/u, psi = kappa - phi,
// giving |grad A|^2 = |a|^2 + 3(n-1) rho^2 |psi|^2 and, one level up,
// |grad^2 A|^2 = |a'|^2 + 3(n-1)|m'|^2 + 3(n-1) rho^2 |a - 2m|^2
//              + 3(n-1)(n+1) rho^4 |psi|^2.
// These closed forms are validated against the finite-difference oracle in
// the test suite before being trusted by any monitor.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "pinchflow/errors.hpp"
#include "pinchflow/gridmath.hpp"
#include "pinchflow/tensor.hpp"

namespace pinchflow {

struct ProfileState {
  int n = 0;               // tangent dimension of the submanifold
  int k = 1;               // codimension of the profile target, chi in R^k
  int N = 0;               // grid points, x_i = i/N periodic
  std::vector<double> u;   // N radii, > 0
  std::vector<double> chi; // N*k
  double time = 0.0;

  int profileDim() const { return 1 + k; }
  double chiAt(int i, int c) const { return chi[static_cast<size_t>(i) * k + c]; }
  double& chiAt(int i, int c) { return chi[static_cast<size_t>(i) * k + c]; }
};

struct FlowConfig {
  double cflNumber = 0.4;
  int derivativeOrder = 4;           // 2 or 4
  double tEnd = 0.0;
  double stopWhenMaxHExceeds = 0.0;  // 0 disables
  int regridEvery = 0;               // 0 disables
  bool curvatureWeightedRegrid = false;  // equidistribute |A| ds instead of ds
  bool tangentialRedistribution = false;
  int recordEvery = 1;               // snapshot cadence for trajectories
  long maxSteps = 100000000;
};

struct FlowEvent {
  enum class Kind { Step, Rescaled, SingularityDetected, InvariantViolation };
  Kind kind = Kind::Step;
  double time = 0.0;
  int location = -1;
  double payload = 0.0;
};

inline std::string event_name(FlowEvent::Kind k) {
  switch (k) {
    case FlowEvent::Kind::Step: return "Step";
    case FlowEvent::Kind::Rescaled: return "Rescaled";
    case FlowEvent::Kind::SingularityDetected: return "SingularityDetected";
    default: return "InvariantViolation";
  }
}

// All pointwise geometric quantities of a state, computed once per step.
struct ProfileGeometry {
  int n = 0, k = 0, N = 0, d = 0;
  double length = 0.0;
  std::vector<double> s;       // arclength position per grid point
  std::vector<double> speed;   // |gamma_x|
  std::vector<double> gammaS;  // N*d unit tangents
  std::vector<double> kappa;   // N*d
  std::vector<double> phi;     // N*d
  std::vector<double> Hvec;    // N*d
  std::vector<double> aVec;    // N*d, D_s kappa
  std::vector<double> mVec;    // N*d, rho*psi
  std::vector<double> apVec;   // N*d, D_s aVec
  std::vector<double> mpVec;   // N*d, D_s mVec
  std::vector<double> us, rho; // N
  std::vector<double> A2, H2, gradA2, gradH2, grad2A2, kappaNorm;  // N

  double maxA2() const { double m = 0; for (double v : A2) m = std::max(m, v); return m; }
  double maxH() const { double m = 0; for (double v : H2) m = std::max(m, v); return std::sqrt(m); }
  double minU(const ProfileState& st) const {
    double m = 1e300;
    for (double v : st.u) m = std::min(m, v);
    return m;
  }
};

namespace pdetail {

inline void vec_at(const std::vector<double>& flat, int i, int d, double* out) {
  for (int c = 0; c < d; ++c) out[c] = flat[static_cast<size_t>(i) * d + c];
}

}  // namespace pdetail

inline ProfileGeometry profile_geometry(const ProfileState& st, int order = 4) {
  const int N = st.N, k = st.k, d = st.profileDim(), n = st.n;
  if (N < 16) throw config_error("profile grid must have at least 16 points");
  ProfileGeometry g;
  g.n = n; g.k = k; g.N = N; g.d = d;
  const double dx = 1.0 / N;

  std::vector<double> gamma(static_cast<size_t>(N) * d);
  for (int i = 0; i < N; ++i) {
    if (!(st.u[i] > 0.0)) throw degenerate_immersion("u <= 0 at grid point " + std::to_string(i));
    gamma[static_cast<size_t>(i) * d] = st.u[i];
    for (int c = 0; c < k; ++c) gamma[static_cast<size_t>(i) * d + 1 + c] = st.chiAt(i, c);
  }
  std::vector<double> gx = periodic_d1(gamma, N, d, dx, order);
  std::vector<double> gxx = periodic_d2(gamma, N, d, dx, order);

  g.speed.resize(N);
  g.s.resize(N);
  g.gammaS.resize(gamma.size());
  g.kappa.resize(gamma.size());
  g.phi.resize(gamma.size());
  g.Hvec.resize(gamma.size());
  g.us.resize(N);
  g.rho.resize(N);
  g.A2.resize(N);
  g.H2.resize(N);
  g.kappaNorm.resize(N);

  for (int i = 0; i < N; ++i) {
    double q2 = 0.0;
    for (int c = 0; c < d; ++c) {
      double v = gx[static_cast<size_t>(i) * d + c];
      q2 += v * v;
    }
    if (q2 < 1e-24) throw degenerate_immersion("profile curve not immersed at " + std::to_string(i));
    g.speed[i] = std::sqrt(q2);
    double dotxx = 0.0;
    for (int c = 0; c < d; ++c) {
      g.gammaS[static_cast<size_t>(i) * d + c] = gx[static_cast<size_t>(i) * d + c] / g.speed[i];
      dotxx += g.gammaS[static_cast<size_t>(i) * d + c] * gxx[static_cast<size_t>(i) * d + c];
    }
    double kap2 = 0.0;
    for (int c = 0; c < d; ++c) {
      double v = (gxx[static_cast<size_t>(i) * d + c] -
                  dotxx * g.gammaS[static_cast<size_t>(i) * d + c]) / q2;
      g.kappa[static_cast<size_t>(i) * d + c] = v;
      kap2 += v * v;
    }
    g.kappaNorm[i] = std::sqrt(kap2);

    const double us = g.gammaS[static_cast<size_t>(i) * d];  // <e_u, gamma_s>
    g.us[i] = us;
    g.rho[i] = us / st.u[i];
    double phi2 = 0.0;
    for (int c = 0; c < d; ++c) {
      double eu = (c == 0) ? 1.0 : 0.0;
      double v = -(eu - us * g.gammaS[static_cast<size_t>(i) * d + c]) / st.u[i];
      g.phi[static_cast<size_t>(i) * d + c] = v;
      phi2 += v * v;
    }
    double H2i = 0.0;
    for (int c = 0; c < d; ++c) {
      double v = g.kappa[static_cast<size_t>(i) * d + c] +
                 (n - 1) * g.phi[static_cast<size_t>(i) * d + c];
      g.Hvec[static_cast<size_t>(i) * d + c] = v;
      H2i += v * v;
    }
    g.A2[i] = kap2 + (n - 1) * phi2;
    g.H2[i] = H2i;
  }

  // Arclength positions by the trapezoid rule on |gamma_x|.
  g.s[0] = 0.0;
  for (int i = 1; i < N; ++i) g.s[i] = g.s[i - 1] + 0.5 * dx * (g.speed[i - 1] + g.speed[i]);
  g.length = g.s[N - 1] + 0.5 * dx * (g.speed[N - 1] + g.speed[0]);

  // First covariant derivative fields.
  auto project_ds = [&](const std::vector<double>& field) {
    std::vector<double> dfdx = periodic_d1(field, N, d, dx, order);
    std::vector<double> out(field.size());
    for (int i = 0; i < N; ++i) {
      double dt = 0.0;
      for (int c = 0; c < d; ++c)
        dt += dfdx[static_cast<size_t>(i) * d + c] * g.gammaS[static_cast<size_t>(i) * d + c];
      for (int c = 0; c < d; ++c)
        out[static_cast<size_t>(i) * d + c] =
            (dfdx[static_cast<size_t>(i) * d + c] / g.speed[i]) -
            (dt / g.speed[i]) * g.gammaS[static_cast<size_t>(i) * d + c];
    }
    return out;
  };

  g.aVec = project_ds(g.kappa);
  g.mVec.resize(gamma.size());
  for (int i = 0; i < N; ++i)
    for (int c = 0; c < d; ++c)
      g.mVec[static_cast<size_t>(i) * d + c] =
          g.rho[i] * (g.kappa[static_cast<size_t>(i) * d + c] -
                      g.phi[static_cast<size_t>(i) * d + c]);
  g.apVec = project_ds(g.aVec);
  g.mpVec = project_ds(g.mVec);

  g.gradA2.resize(N);
  g.gradH2.resize(N);
  g.grad2A2.resize(N);
  for (int i = 0; i < N; ++i) {
    double a2 = 0, psi2 = 0, gh2 = 0, ap2 = 0, mp2 = 0, am2 = 0;
    for (int c = 0; c < d; ++c) {
      const size_t id = static_cast<size_t>(i) * d + c;
      const double psi = g.kappa[id] - g.phi[id];
      a2 += g.aVec[id] * g.aVec[id];
      psi2 += psi * psi;
      const double gh = g.aVec[id] + (n - 1) * g.mVec[id];
      gh2 += gh * gh;
      ap2 += g.apVec[id] * g.apVec[id];
      mp2 += g.mpVec[id] * g.mpVec[id];
      const double am = g.aVec[id] - 2.0 * g.mVec[id];
      am2 += am * am;
    }
    const double rho2 = g.rho[i] * g.rho[i];
    g.gradA2[i] = a2 + 3.0 * (n - 1) * rho2 * psi2;
    g.gradH2[i] = gh2;
    g.grad2A2[i] = ap2 + 3.0 * (n - 1) * mp2 + 3.0 * (n - 1) * rho2 * am2 +
                   3.0 * (n - 1) * (n + 1) * rho2 * rho2 * psi2;
  }
  return g;
}

// Full curvature frame (with gradA and grad2A) at one grid point. Tangent
// index 0 is the profile direction, 1..n-1 are sphere directions; normal
// frame is a deterministic orthonormal basis of the profile normal space.
inline CurvatureFrame profile_curvature(const ProfileState& st, int i, int order = 4) {
  const ProfileGeometry g = profile_geometry(st, order);
  const int n = st.n, k = st.k, d = g.d;

  // Normal basis: Gram-Schmidt of the standard basis of R^{1+k} against the
  // profile tangent, in index order.
  std::vector<std::vector<double>> nu;
  std::vector<double> t(d);
  pdetail::vec_at(g.gammaS, i, d, t.data());
  for (int e = 0; e < d && static_cast<int>(nu.size()) < k; ++e) {
    std::vector<double> v(d, 0.0);
    v[e] = 1.0;
    double c = 0.0;
    for (int x = 0; x < d; ++x) c += v[x] * t[x];
    for (int x = 0; x < d; ++x) v[x] -= c * t[x];
    for (const auto& w : nu) {
      double cc = 0.0;
      for (int x = 0; x < d; ++x) cc += v[x] * w[x];
      for (int x = 0; x < d; ++x) v[x] -= cc * w[x];
    }
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (nrm > 1e-8) {
      for (double& x : v) x /= nrm;
      nu.push_back(std::move(v));
    }
  }
  if (static_cast<int>(nu.size()) != k) throw degenerate_immersion("profile normal basis failed");

  auto comp = [&](const std::vector<double>& field, int a) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) s += field[static_cast<size_t>(i) * d + c] * nu[a][c];
    return s;
  };

  CurvatureFrame f(n, k);
  for (int a = 0; a < k; ++a) {
    const double kap = comp(g.kappa, a);
    const double ph = comp(g.phi, a);
    f.at(0, 0, a) = kap;
    for (int j = 1; j < n; ++j) f.at(j, j, a) = ph;
  }

  f.gradA.assign(static_cast<size_t>(n) * n * n * k, 0.0);
  for (int a = 0; a < k; ++a) {
    const double av = comp(g.aVec, a);
    const double mv = comp(g.mVec, a);
    f.grad_at(0, 0, 0, a) = av;
    for (int j = 1; j < n; ++j) {
      f.grad_at(0, j, j, a) = mv;
      f.grad_at(j, 0, j, a) = mv;
      f.grad_at(j, j, 0, a) = mv;
    }
  }

  f.grad2A.assign(static_cast<size_t>(n) * n * n * n * k, 0.0);
  for (int a = 0; a < k; ++a) {
    const double ap = comp(g.apVec, a);
    const double mp = comp(g.mpVec, a);
    const double av = comp(g.aVec, a);
    const double mv = comp(g.mVec, a);
    const double rho = g.rho[i];
    const double psi = comp(g.kappa, a) - comp(g.phi, a);
    const double ram = rho * (av - 2.0 * mv);
    f.grad2_at(0, 0, 0, 0, a) = ap;
    for (int j = 1; j < n; ++j) {
      f.grad2_at(0, 0, j, j, a) = mp;
      f.grad2_at(0, j, 0, j, a) = mp;
      f.grad2_at(0, j, j, 0, a) = mp;
      f.grad2_at(j, 0, 0, j, a) = ram;
      f.grad2_at(j, 0, j, 0, a) = ram;
      f.grad2_at(j, j, 0, 0, a) = ram;
    }
    for (int j = 1; j < n; ++j)
      for (int l = 1; l < n; ++l)
        for (int p = 1; p < n; ++p)
          for (int r = 1; r < n; ++r) {
            double val = rho * rho * psi *
                         ((j == l && p == r ? 1.0 : 0.0) + (j == p && l == r ? 1.0 : 0.0) +
                          (j == r && l == p ? 1.0 : 0.0));
            if (val != 0.0) f.grad2_at(j, l, p, r, a) = val;
          }
  }
  return f;
}

// ---- time stepping --------------------------------------------------------

struct StepOutcome {
  double dt = 0.0;
  int halvings = 0;
  bool singularity = false;
};

namespace pdetail {

// Tangential velocity that drives the parametrization toward uniform
// arclength without changing the image curve: solves d beta/ds =
// mean(stretch) - stretch along the closed curve.
inline std::vector<double> redistribution_velocity(const ProfileGeometry& g,
                                                   const std::vector<double>& V, int order) {
  const int N = g.N, d = g.d;
  const double dx = 1.0 / N;
  std::vector<double> dVdx = periodic_d1(V, N, d, dx, order);
  std::vector<double> stretch(N);
  for (int i = 0; i < N; ++i) {
    double sdot = 0.0;
    for (int c = 0; c < d; ++c)
      sdot += dVdx[static_cast<size_t>(i) * d + c] * g.gammaS[static_cast<size_t>(i) * d + c];
    stretch[i] = sdot / g.speed[i];
  }
  double mean = 0.0;
  for (int i = 0; i < N; ++i) mean += stretch[i] * g.speed[i] * dx;
  mean /= g.length;

  std::vector<double> beta(N, 0.0);
  for (int i = 1; i < N; ++i) {
    const double fa = (mean - stretch[i - 1]) * g.speed[i - 1];
    const double fb = (mean - stretch[i]) * g.speed[i];
    beta[i] = beta[i - 1] + 0.5 * dx * (fa + fb);
  }
  // Enforce periodic closure of the integral (discretization residual).
  const double fa = (mean - stretch[N - 1]) * g.speed[N - 1];
  const double fb = (mean - stretch[0]) * g.speed[0];
  const double drift = beta[N - 1] + 0.5 * dx * (fa + fb);
  for (int i = 0; i < N; ++i) beta[i] -= drift * (static_cast<double>(i) / N);
  return beta;
}

inline bool state_valid(const ProfileState& st) {
  for (double v : st.u)
    if (!(v > 0.0) || !std::isfinite(v)) return false;
  for (double v : st.chi)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace pdetail

// One explicit step; dt = cfl * ds_min^2 / (2(n+1)) with reject-and-halve on
// blowup (max|A|^2 * dt > 1 or invalid post-state). After 40 halvings the
// step reports a singularity and leaves the state untouched.
inline StepOutcome step(ProfileState& st, const FlowConfig& cfg,
                        const ProfileGeometry* geoHint = nullptr) {
  ProfileGeometry owned;
  const ProfileGeometry& g = geoHint ? *geoHint : (owned = profile_geometry(st, cfg.derivativeOrder));
  const int N = st.N, d = g.d, k = st.k;
  const double dx = 1.0 / N;

  double dsMin = 1e300;
  for (int i = 0; i < N; ++i) dsMin = std::min(dsMin, g.speed[i] * dx);
  double dt = cfg.cflNumber * dsMin * dsMin / (2.0 * (st.n + 1));

  std::vector<double> V = g.Hvec;
  if (cfg.tangentialRedistribution) {
    std::vector<double> beta = pdetail::redistribution_velocity(g, V, cfg.derivativeOrder);
    for (int i = 0; i < N; ++i)
      for (int c = 0; c < d; ++c)
        V[static_cast<size_t>(i) * d + c] += beta[i] * g.gammaS[static_cast<size_t>(i) * d + c];
  }

  const double maxA2 = g.maxA2();
  StepOutcome out;
  for (int attempt = 0; attempt <= 40; ++attempt) {
    if (maxA2 * dt > 1.0) {
      dt *= 0.5;
      out.halvings++;
      continue;
    }
    ProfileState trial = st;
    for (int i = 0; i < N; ++i) {
      trial.u[i] = st.u[i] + dt * V[static_cast<size_t>(i) * d];
      for (int c = 0; c < k; ++c)
        trial.chiAt(i, c) = st.chiAt(i, c) + dt * V[static_cast<size_t>(i) * d + 1 + c];
    }
    if (!pdetail::state_valid(trial)) {
      dt *= 0.5;
      out.halvings++;
      continue;
    }
    trial.time = st.time + dt;
    st = std::move(trial);
    out.dt = dt;
    return out;
  }
  out.singularity = true;
  return out;
}

// Resample (u, chi) by periodic cubic interpolation so that the measure
// weight(s) ds is equidistributed over the grid. weight == nullptr gives
// uniform arclength; a weight proportional to |A| concentrates points where
// curvature is large (necks), which uniform spacing cannot resolve.
inline void regrid_arclength(ProfileState& st, const ProfileGeometry& g,
                             const std::vector<double>* weight = nullptr) {
  const int N = st.N, k = st.k;
  const double dx = 1.0 / N;

  PeriodicCubicSpline su(st.u, dx);
  std::vector<PeriodicCubicSpline> sc;
  sc.reserve(k);
  for (int c = 0; c < k; ++c) {
    std::vector<double> col(N);
    for (int i = 0; i < N; ++i) col[i] = st.chiAt(i, c);
    sc.emplace_back(std::move(col), dx);
  }
  // Cumulative mass M(x) = integral of weight |gamma_x| dx, trapezoidal.
  std::vector<double> mass(N + 1, 0.0);
  auto w = [&](int i) { return weight ? (*weight)[i % N] : 1.0; };
  for (int i = 1; i <= N; ++i) {
    const double fa = w(i - 1) * g.speed[(i - 1) % N];
    const double fb = w(i) * g.speed[i % N];
    mass[i] = mass[i - 1] + 0.5 * dx * (fa + fb);
  }
  const double total = mass[N];
  // Invert the monotone map x -> M(x) at uniform mass targets.
  std::vector<double> xNew(N);
  xNew[0] = 0.0;
  int seg = 0;
  for (int j = 1; j < N; ++j) {
    const double target = total * j / N;
    while (seg < N - 1 && mass[seg + 1] < target) ++seg;
    const double m0 = mass[seg], m1 = mass[seg + 1];
    const double frac = (m1 > m0) ? (target - m0) / (m1 - m0) : 0.0;
    xNew[j] = (seg + frac) * dx;
  }
  for (int j = 0; j < N; ++j) {
    st.u[j] = su(xNew[j]);
    for (int c = 0; c < k; ++c) st.chiAt(j, c) = sc[c](xNew[j]);
  }
}

inline void regrid_uniform_arclength(ProfileState& st, const ProfileGeometry& g) {
  regrid_arclength(st, g, nullptr);
}

inline std::pair<int, double> max_H_point(const ProfileGeometry& g) {
  double best = 0.0;
  for (double v : g.H2) best = std::max(best, v);
  const double cut = best * (1.0 - 1e-9);
  for (int i = 0; i < g.N; ++i)
    if (g.H2[i] >= cut) return {i, std::sqrt(g.H2[i])};
  return {0, 0.0};
}

inline bool position_bound_check(const ProfileState& st, double R0, double tol = 1e-6) {
  double maxF2 = 0.0;
  for (int i = 0; i < st.N; ++i) {
    double f2 = st.u[i] * st.u[i];
    for (int c = 0; c < st.k; ++c) f2 += st.chiAt(i, c) * st.chiAt(i, c);
    maxF2 = std::max(maxF2, f2);
  }
  return maxF2 <= R0 * R0 - 2.0 * st.n * st.time + tol;
}

struct RescaleMap {
  double rHat = 1.0;       // scale divided out
  double timeCenter = 0.0; // t of the rescale
  std::vector<double> chiCenter;
  double radialCenter = 0.0;  // u at the base point (radial translation is
                              // recorded, not applied, to stay equivariant)
};

// Parabolic rescaling normalizing |H| = n-1 at grid point i. The chi part of
// the base point is translated to the origin; the radial offset is recorded
// in the returned map (an actual radial translation would leave the
// rotationally symmetric class).
inline std::pair<ProfileState, RescaleMap> parabolic_rescale(const ProfileState& st, int i,
                                                             int order = 4) {
  const ProfileGeometry g = profile_geometry(st, order);
  const double Hnorm = std::sqrt(g.H2[i]);
  if (Hnorm <= 1e-14) throw zero_mean_curvature();
  const double rHat = (st.n - 1) / Hnorm;

  RescaleMap map;
  map.rHat = rHat;
  map.timeCenter = st.time;
  map.radialCenter = st.u[i];
  map.chiCenter.assign(st.k, 0.0);
  for (int c = 0; c < st.k; ++c) map.chiCenter[c] = st.chiAt(i, c);

  ProfileState out = st;
  out.time = 0.0;
  for (int j = 0; j < st.N; ++j) {
    out.u[j] = st.u[j] / rHat;
    for (int c = 0; c < st.k; ++c) out.chiAt(j, c) = (st.chiAt(j, c) - map.chiCenter[c]) / rHat;
  }
  return {std::move(out), std::move(map)};
}

// ---- trajectories ---------------------------------------------------------

struct Snapshot {
  double time = 0.0;
  double dt = 0.0;
  ProfileState state;
  double length = 0.0;
  std::vector<double> s, us, rho, kappaNorm, A2, H2, gradA2, gradH2, grad2A2;
  std::vector<double> Hvec;  // N*d, for time differencing
};

inline Snapshot make_snapshot(const ProfileState& st, const ProfileGeometry& g, double dt) {
  Snapshot sn;
  sn.time = st.time;
  sn.dt = dt;
  sn.state = st;
  sn.length = g.length;
  sn.s = g.s;
  sn.us = g.us;
  sn.rho = g.rho;
  sn.kappaNorm = g.kappaNorm;
  sn.A2 = g.A2;
  sn.H2 = g.H2;
  sn.gradA2 = g.gradA2;
  sn.gradH2 = g.gradH2;
  sn.grad2A2 = g.grad2A2;
  sn.Hvec = g.Hvec;
  return sn;
}

struct Trajectory {
  int n = 0, k = 0;
  std::vector<Snapshot> snaps;
};

struct RunSummary {
  ProfileState finalState;
  std::vector<FlowEvent> events;
  long steps = 0;
  bool singularity = false;
  bool hitCurvatureStop = false;
  double finalMaxH = 0.0;
};

// Per-step monitor: receives the pre-step state/geometry and the dt about to
// be attempted (dt of the previous accepted step for the first invocation).
using StepMonitor = std::function<void(const ProfileState&, const ProfileGeometry&, double dt,
                                       const std::vector<FlowEvent>&)>;

inline RunSummary run(ProfileState st, const FlowConfig& cfg,
                      const std::vector<StepMonitor>& monitors = {},
                      Trajectory* record = nullptr) {
  RunSummary sum;
  if (record) {
    record->n = st.n;
    record->k = st.k;
    record->snaps.clear();
  }
  double lastDt = 0.0;
  long sinceRegrid = 0;
  for (long stepIdx = 0;; ++stepIdx) {
    ProfileGeometry g;
    try {
      g = profile_geometry(st, cfg.derivativeOrder);
    } catch (const flow_error&) {
      sum.events.push_back({FlowEvent::Kind::InvariantViolation, st.time, -1, 0.0});
      break;
    }
    for (const auto& m : monitors) m(st, g, lastDt, sum.events);
    if (record && stepIdx % std::max(1, cfg.recordEvery) == 0)
      record->snaps.push_back(make_snapshot(st, g, lastDt));
    sum.finalMaxH = g.maxH();

    if (cfg.stopWhenMaxHExceeds > 0.0 && sum.finalMaxH >= cfg.stopWhenMaxHExceeds) {
      sum.hitCurvatureStop = true;
      break;
    }
    if (st.time >= cfg.tEnd || stepIdx >= cfg.maxSteps) break;

    StepOutcome so = step(st, cfg, &g);
    if (so.singularity) {
      auto [imax, hmax] = max_H_point(g);
      sum.events.push_back({FlowEvent::Kind::SingularityDetected, st.time, imax, hmax});
      sum.singularity = true;
      break;
    }
    // Unresolved neck: curvature scale below grid scale.
    double dsMin = 1e300;
    for (int i = 0; i < st.N; ++i) dsMin = std::min(dsMin, g.speed[i] / st.N);
    if (g.maxA2() * dsMin * dsMin > 4.0) {
      auto [imax, hmax] = max_H_point(g);
      sum.events.push_back({FlowEvent::Kind::SingularityDetected, st.time, imax, hmax});
      sum.singularity = true;
      break;
    }
    lastDt = so.dt;
    sum.steps++;
    if (cfg.regridEvery > 0 && ++sinceRegrid >= cfg.regridEvery) {
      ProfileGeometry g2 = profile_geometry(st, cfg.derivativeOrder);
      if (cfg.curvatureWeightedRegrid) {
        // Equidistribute |A| ds (plus a floor so flat regions stay covered).
        std::vector<double> w(static_cast<size_t>(st.N));
        double mean = 0.0;
        for (int i = 0; i < st.N; ++i) {
          w[i] = std::sqrt(g2.A2[i]);
          mean += w[i];
        }
        mean /= st.N;
        for (double& v : w) v += 0.2 * mean;
        regrid_arclength(st, g2, &w);
      } else {
        regrid_uniform_arclength(st, g2);
      }
      sinceRegrid = 0;
    }
    if (st.time > cfg.tEnd && cfg.tEnd > 0.0) st.time = st.time;  // time may overshoot by < dt
  }
  sum.finalState = std::move(st);
  return sum;
}

// ---- presets ---------------------------------------------------------------

// Product-with-circle preset: u(x) = r (1 + amp cos(2 pi mode x)),
// chi(x) = R (cos 2 pi x, sin 2 pi x, 0, ...).
inline ProfileState product_circle_state(int n, int k, int N, double r, double R,
                                         double bumpAmplitude = 0.0, int bumpMode = 1) {
  if (k < 2) throw config_error("productCircle preset needs k >= 2");
  if (r <= 0.0 || R <= 0.0 || N < 16) throw config_error("invalid productCircle parameters");
  ProfileState st;
  st.n = n;
  st.k = k;
  st.N = N;
  st.u.resize(N);
  st.chi.assign(static_cast<size_t>(N) * k, 0.0);
  const double twoPi = 2.0 * 3.14159265358979323846;
  for (int i = 0; i < N; ++i) {
    const double x = static_cast<double>(i) / N;
    st.u[i] = r * (1.0 + bumpAmplitude * std::cos(twoPi * bumpMode * x));
    if (!(st.u[i] > 0.0)) throw config_error("bump amplitude makes u nonpositive");
    st.chiAt(i, 0) = R * std::cos(twoPi * x);
    st.chiAt(i, 1) = R * std::sin(twoPi * x);
  }
  return st;
}

}  // namespace pinchflow
