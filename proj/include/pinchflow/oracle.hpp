#pragma once

// Independent brute-force curvature computation from explicit chart
// embeddings. Everything here works on ambient, frame-free objects (position,
// metric, vector-valued second fundamental form) so that finite differencing
// is legitimate; orthonormal frames are only introduced at the very end.
// This module is the arbiter for every closed form elsewhere in the library.

#include <cmath>
#include <functional>
#include <vector>

#include "pinchflow/errors.hpp"
#include "pinchflow/tensor.hpp"

namespace pinchflow {

// An m-parameter chart of an m-dimensional submanifold of R^D, given as a
// callable embedding. The oracle samples it on demand with stencil spacing
// hGrid (4th-order central differences throughout).
struct ChartPatch {
  int paramDim = 0;
  int ambientDim = 0;
  double hGrid = 0.02;
  std::function<std::vector<double>(const std::vector<double>&)> embedding;
};

namespace detail {

using Vec = std::vector<double>;

inline Vec axpy(Vec v, double a, const Vec& w) {
  for (size_t i = 0; i < v.size(); ++i) v[i] += a * w[i];
  return v;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Vec shifted(Vec x, int dir, double d) {
  x[dir] += d;
  return x;
}

// 4th-order central first derivative of a vector-valued map.
template <typename F>
Vec d1(const F& f, const Vec& x, int dir, double h) {
  Vec fp1 = f(shifted(x, dir, h));
  Vec fm1 = f(shifted(x, dir, -h));
  Vec fp2 = f(shifted(x, dir, 2 * h));
  Vec fm2 = f(shifted(x, dir, -2 * h));
  Vec out(fp1.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = (-fp2[i] + 8.0 * fp1[i] - 8.0 * fm1[i] + fm2[i]) / (12.0 * h);
  return out;
}

// 4th-order second derivative: pure directions use the 5-point stencil,
// mixed directions compose two first-derivative stencils.
template <typename F>
Vec d2(const F& f, const Vec& x, int a, int b, double h) {
  if (a == b) {
    Vec f0 = f(x);
    Vec fp1 = f(shifted(x, a, h));
    Vec fm1 = f(shifted(x, a, -h));
    Vec fp2 = f(shifted(x, a, 2 * h));
    Vec fm2 = f(shifted(x, a, -2 * h));
    Vec out(f0.size());
    for (size_t i = 0; i < out.size(); ++i)
      out[i] = (-fp2[i] + 16.0 * fp1[i] - 30.0 * f0[i] + 16.0 * fm1[i] - fm2[i]) / (12.0 * h * h);
    return out;
  }
  auto g = [&](const Vec& y) { return d1(f, y, b, h); };
  return d1(g, x, a, h);
}

// Orthonormal tangent frame via modified Gram-Schmidt. Records the transform
// S with t_i = sum_a S[i][a] f_a and reports the conditioning of the chart.
struct TangentFrame {
  std::vector<Vec> coord;   // f_a, coordinate tangent vectors
  std::vector<Vec> ortho;   // t_i, orthonormal
  std::vector<Vec> S;       // m x m, t_i = S[i][a] f_a
  std::vector<Vec> normal;  // nu_alpha, orthonormal normal basis
  double conditionNumber = 1.0;
};

template <typename F>
TangentFrame tangent_frame(const F& f, const Vec& x, int m, int D, double h) {
  TangentFrame tf;
  tf.coord.resize(m);
  for (int a = 0; a < m; ++a) tf.coord[a] = d1(f, x, a, h);

  double minNorm = 1e300, maxNorm = 0.0;
  tf.ortho.resize(m);
  tf.S.assign(m, Vec(m, 0.0));
  for (int i = 0; i < m; ++i) {
    Vec v = tf.coord[i];
    Vec coef(m, 0.0);
    coef[i] = 1.0;
    for (int j = 0; j < i; ++j) {
      double c = dot(v, tf.ortho[j]);
      v = axpy(std::move(v), -c, tf.ortho[j]);
      for (int a = 0; a <= j; ++a) coef[a] -= c * tf.S[j][a];
    }
    double nrm = std::sqrt(dot(v, v));
    double scale = std::sqrt(dot(tf.coord[i], tf.coord[i]));
    if (!(nrm > 1e-10 * std::max(scale, 1e-30)))
      throw rank_deficient("chart Jacobian numerically singular at sample point");
    minNorm = std::min(minNorm, nrm);
    maxNorm = std::max(maxNorm, std::max(nrm, scale));
    for (double& c : v) c /= nrm;
    for (int a = 0; a <= i; ++a) tf.S[i][a] = coef[a] / nrm;
    tf.ortho[i] = std::move(v);
  }
  tf.conditionNumber = maxNorm / minNorm;

  // Deterministic normal basis: Gram-Schmidt of the standard ambient basis
  // against the tangent space, in index order.
  for (int e = 0; e < D && static_cast<int>(tf.normal.size()) < D - m; ++e) {
    Vec v(D, 0.0);
    v[e] = 1.0;
    for (const Vec& t : tf.ortho) v = axpy(std::move(v), -dot(v, t), t);
    for (const Vec& nu : tf.normal) v = axpy(std::move(v), -dot(v, nu), nu);
    double nrm = std::sqrt(dot(v, v));
    if (nrm > 1e-6) {
      for (double& c : v) c /= nrm;
      tf.normal.push_back(std::move(v));
    }
  }
  if (static_cast<int>(tf.normal.size()) != D - m)
    throw rank_deficient("failed to build a normal basis");
  return tf;
}

inline Vec project_normal(const TangentFrame& tf, Vec v) {
  for (const Vec& t : tf.ortho) v = axpy(std::move(v), -dot(v, t), t);
  return v;
}

// Vector-valued second fundamental form in coordinate indices,
// h_ab = (d^2 F / dx^a dx^b)^perp, as ambient vectors.
template <typename F>
std::vector<Vec> hab_field(const F& f, const Vec& x, int m, int D, double h) {
  TangentFrame tf = tangent_frame(f, x, m, D, h);
  std::vector<Vec> hab(static_cast<size_t>(m) * m);
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      Vec v = project_normal(tf, d2(f, x, a, b, h));
      hab[static_cast<size_t>(a) * m + b] = v;
      if (b != a) hab[static_cast<size_t>(b) * m + a] = std::move(v);
    }
  return hab;
}

// Metric and Christoffel symbols from finite differences of the metric.
template <typename F>
std::vector<Vec> metric_at(const F& f, const Vec& x, int m, double h) {
  std::vector<Vec> J(m);
  for (int a = 0; a < m; ++a) J[a] = d1(f, x, a, h);
  std::vector<Vec> g(m, Vec(m, 0.0));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) g[a][b] = dot(J[a], J[b]);
  return g;
}

inline std::vector<Vec> invert(std::vector<Vec> a) {
  const int m = static_cast<int>(a.size());
  std::vector<Vec> inv(m, Vec(m, 0.0));
  for (int i = 0; i < m; ++i) inv[i][i] = 1.0;
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-14) throw rank_deficient("metric not invertible");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    double d = a[col][col];
    for (int c = 0; c < m; ++c) {
      a[col][c] /= d;
      inv[col][c] /= d;
    }
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      double fct = a[r][col];
      for (int c = 0; c < m; ++c) {
        a[r][c] -= fct * a[col][c];
        inv[r][c] -= fct * inv[col][c];
      }
    }
  }
  return inv;
}

// Gamma[d][c][a] = Gamma^d_{ca}
template <typename F>
std::vector<std::vector<Vec>> christoffels(const F& f, const Vec& x, int m, double h) {
  // dg[c][a][b] = partial_c g_ab
  std::vector<std::vector<Vec>> dg(m);
  auto gfield = [&](const Vec& y) {
    std::vector<Vec> g = metric_at(f, y, m, h);
    Vec flat;
    flat.reserve(static_cast<size_t>(m) * m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) flat.push_back(g[a][b]);
    return flat;
  };
  for (int c = 0; c < m; ++c) {
    Vec flat = d1(gfield, x, c, h);
    dg[c].assign(m, Vec(m, 0.0));
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) dg[c][a][b] = flat[static_cast<size_t>(a) * m + b];
  }
  std::vector<Vec> ginv = invert(metric_at(f, x, m, h));
  std::vector<std::vector<Vec>> gamma(m, std::vector<Vec>(m, Vec(m, 0.0)));
  for (int d = 0; d < m; ++d)
    for (int c = 0; c < m; ++c)
      for (int a = 0; a < m; ++a) {
        double s = 0.0;
        for (int e = 0; e < m; ++e) s += ginv[d][e] * (dg[c][e][a] + dg[a][e][c] - dg[e][c][a]);
        gamma[d][c][a] = 0.5 * s;
      }
  return gamma;
}

// Covariant derivative of h in coordinate indices, as ambient vectors:
// (grad h)_{cab} = P_perp(d_c h_ab) - Gamma^d_{ca} h_db - Gamma^d_{cb} h_ad.
template <typename F>
std::vector<Vec> gradh_field(const F& f, const Vec& x, int m, int D, double h) {
  TangentFrame tf = tangent_frame(f, x, m, D, h);
  std::vector<Vec> hab = hab_field(f, x, m, D, h);
  std::vector<std::vector<Vec>> gamma = christoffels(f, x, m, h);

  auto habflat = [&](const Vec& y) {
    std::vector<Vec> hy = hab_field(f, y, m, D, h);
    Vec flat;
    flat.reserve(hy.size() * D);
    for (const Vec& v : hy) flat.insert(flat.end(), v.begin(), v.end());
    return flat;
  };

  std::vector<Vec> out(static_cast<size_t>(m) * m * m, Vec(D, 0.0));
  for (int c = 0; c < m; ++c) {
    Vec dflat = d1(habflat, x, c, h);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        Vec v(D);
        for (int i = 0; i < D; ++i) v[i] = dflat[(static_cast<size_t>(a) * m + b) * D + i];
        v = project_normal(tf, std::move(v));
        for (int d = 0; d < m; ++d) {
          v = axpy(std::move(v), -gamma[d][c][a], hab[static_cast<size_t>(d) * m + b]);
          v = axpy(std::move(v), -gamma[d][c][b], hab[static_cast<size_t>(a) * m + d]);
        }
        out[(static_cast<size_t>(c) * m + a) * m + b] = std::move(v);
      }
  }
  return out;
}

}  // namespace detail

// Curvature frame at an interior sample, by pure finite differences.
inline CurvatureFrame fd_curvature(const ChartPatch& p, const std::vector<double>& at) {
  using namespace detail;
  const int m = p.paramDim, D = p.ambientDim;
  const double h = p.hGrid;
  TangentFrame tf = tangent_frame(p.embedding, at, m, D, h);
  std::vector<Vec> hab = hab_field(p.embedding, at, m, D, h);
  const int q = D - m;

  CurvatureFrame f(m, q);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int al = 0; al < q; ++al) {
        double s = 0.0;
        for (int a = 0; a <= i; ++a)
          for (int b = 0; b <= j; ++b)
            s += tf.S[i][a] * tf.S[j][b] * dot(hab[static_cast<size_t>(a) * m + b], tf.normal[al]);
        f.at(i, j, al) = s;
      }
  f.symmetrize();
  return f;
}

// Curvature frame with covariant derivative (and optionally second covariant
// derivative) of h, all by finite differences plus FD Christoffel corrections.
inline CurvatureFrame fd_grad_curvature(const ChartPatch& p, const std::vector<double>& at,
                                        bool withSecond = false) {
  using namespace detail;
  const int m = p.paramDim, D = p.ambientDim;
  const double h = p.hGrid;
  TangentFrame tf = tangent_frame(p.embedding, at, m, D, h);
  std::vector<Vec> gradh = gradh_field(p.embedding, at, m, D, h);

  CurvatureFrame f = fd_curvature(p, at);
  f.gradA.assign(static_cast<size_t>(m) * m * m * f.q, 0.0);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int al = 0; al < f.q; ++al) {
          double s = 0.0;
          for (int c = 0; c <= k; ++c)
            for (int a = 0; a <= i; ++a)
              for (int b = 0; b <= j; ++b)
                s += tf.S[k][c] * tf.S[i][a] * tf.S[j][b] *
                     dot(gradh[(static_cast<size_t>(c) * m + a) * m + b], tf.normal[al]);
          f.grad_at(k, i, j, al) = s;
        }

  if (withSecond) {
    std::vector<std::vector<Vec>> gamma = christoffels(p.embedding, at, m, h);
    auto gradhflat = [&](const Vec& y) {
      std::vector<Vec> gy = gradh_field(p.embedding, y, m, D, h);
      Vec flat;
      flat.reserve(gy.size() * D);
      for (const Vec& v : gy) flat.insert(flat.end(), v.begin(), v.end());
      return flat;
    };
    // (grad^2 h)_{dcab} as ambient vectors.
    std::vector<Vec> g2(static_cast<size_t>(m) * m * m * m, Vec(D, 0.0));
    for (int d = 0; d < m; ++d) {
      Vec dflat = d1(gradhflat, at, d, h);
      for (int c = 0; c < m; ++c)
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b) {
            Vec v(D);
            const size_t base = ((static_cast<size_t>(c) * m + a) * m + b) * D;
            for (int i = 0; i < D; ++i) v[i] = dflat[base + i];
            v = project_normal(tf, std::move(v));
            for (int e = 0; e < m; ++e) {
              v = axpy(std::move(v), -gamma[e][d][c], gradh[(static_cast<size_t>(e) * m + a) * m + b]);
              v = axpy(std::move(v), -gamma[e][d][a], gradh[(static_cast<size_t>(c) * m + e) * m + b]);
              v = axpy(std::move(v), -gamma[e][d][b], gradh[(static_cast<size_t>(c) * m + a) * m + e]);
            }
            g2[((static_cast<size_t>(d) * m + c) * m + a) * m + b] = std::move(v);
          }
    }
    f.grad2A.assign(static_cast<size_t>(m) * m * m * m * f.q, 0.0);
    for (int l = 0; l < m; ++l)
      for (int k = 0; k < m; ++k)
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j)
            for (int al = 0; al < f.q; ++al) {
              double s = 0.0;
              for (int d = 0; d <= l; ++d)
                for (int c = 0; c <= k; ++c)
                  for (int a = 0; a <= i; ++a)
                    for (int b = 0; b <= j; ++b)
                      s += tf.S[l][d] * tf.S[k][c] * tf.S[i][a] * tf.S[j][b] *
                           dot(g2[((static_cast<size_t>(d) * m + c) * m + a) * m + b],
                               tf.normal[al]);
              f.grad2_at(l, k, i, j, al) = s;
            }
  }
  return f;
}

// Richardson order estimate from three refinements v(h), v(h/2), v(h/4).
inline double convergence_order(double vh, double vh2, double vh4) {
  const double d1 = std::abs(vh - vh2);
  const double d2 = std::abs(vh2 - vh4);
  if (d2 < 1e-300 || d1 < 1e-300) throw indeterminate_order();
  return std::log2(d1 / d2);
}

// ---- chart builders ------------------------------------------------------

// omega: R^d angles -> unit sphere S^d in R^{d+1}
inline std::vector<double> sphere_point(const std::vector<double>& th) {
  const int d = static_cast<int>(th.size());
  std::vector<double> w(d + 1);
  double prod = 1.0;
  for (int i = 0; i < d; ++i) {
    w[i] = prod * std::cos(th[i]);
    prod *= std::sin(th[i]);
  }
  w[d] = prod;
  return w;
}

inline ChartPatch sphere_chart(int n, double r, int codim = 1, double hGrid = 0.02) {
  ChartPatch p;
  p.paramDim = n;
  p.ambientDim = n + codim;
  p.hGrid = hGrid;
  p.embedding = [n, r, codim](const std::vector<double>& x) {
    std::vector<double> w = sphere_point(x);
    std::vector<double> out(n + codim, 0.0);
    for (int i = 0; i <= n; ++i) out[i] = r * w[i];
    return out;
  };
  return p;
}

inline ChartPatch cylinder_chart(int n, double r, int codim = 1, double hGrid = 0.02) {
  ChartPatch p;
  p.paramDim = n;
  p.ambientDim = n + codim;
  p.hGrid = hGrid;
  p.embedding = [n, r, codim](const std::vector<double>& x) {
    std::vector<double> th(x.begin(), x.end() - 1);
    std::vector<double> w = sphere_point(th);
    std::vector<double> out(n + codim, 0.0);
    for (int i = 0; i < n; ++i) out[i] = r * w[i];
    out[n] = x.back();  // axis direction occupies the first normal slot's complement
    return out;
  };
  // Axis coordinate is ambient coordinate n; ambient dim n+codim with the
  // sphere using coordinates 0..n-1 and the axis n, normals fill the rest.
  return p;
}

inline ChartPatch product_spheres_chart(int pdim, double r1, int q2, double r2, int codim = 2,
                                        double hGrid = 0.02) {
  ChartPatch p;
  const int n = pdim + q2;
  p.paramDim = n;
  p.ambientDim = n + codim;
  p.hGrid = hGrid;
  p.embedding = [pdim, q2, r1, r2, n, codim](const std::vector<double>& x) {
    std::vector<double> th1(x.begin(), x.begin() + pdim);
    std::vector<double> th2(x.begin() + pdim, x.end());
    std::vector<double> w1 = sphere_point(th1);
    std::vector<double> w2 = sphere_point(th2);
    std::vector<double> out(n + codim, 0.0);
    for (int i = 0; i <= pdim; ++i) out[i] = r1 * w1[i];
    for (int i = 0; i <= q2; ++i) out[pdim + 1 + i] = r2 * w2[i];
    return out;
  };
  return p;
}

// Rotationally symmetric chart F(x, theta) = (u(x) omega(theta), chi(x))
// for analytic profile callables u: R -> R_+ and chi: R -> R^k.
inline ChartPatch equivariant_chart(int n, int k, std::function<double(double)> u,
                                    std::function<std::vector<double>(double)> chi,
                                    double hGrid = 0.02) {
  ChartPatch p;
  p.paramDim = n;
  p.ambientDim = n + k;
  p.hGrid = hGrid;
  p.embedding = [n, k, u, chi](const std::vector<double>& x) {
    std::vector<double> th(x.begin() + 1, x.end());
    std::vector<double> w = sphere_point(th);
    const double ux = u(x[0]);
    std::vector<double> cx = chi(x[0]);
    std::vector<double> out(n + k, 0.0);
    for (int i = 0; i < n; ++i) out[i] = ux * w[i];
    for (int i = 0; i < k; ++i) out[n + i] = cx[i];
    return out;
  };
  return p;
}

// A generic interior point for the spherical charts above (angles away from
// the coordinate poles).
inline std::vector<double> generic_angles(int m, double base = 0.9) {
  std::vector<double> x(m);
  for (int i = 0; i < m; ++i) x[i] = base + 0.13 * i;
  return x;
}

}  // namespace pinchflow
