#pragma once

// Pointwise multilinear algebra on curvature tensors in an orthonormal
// tangent/normal frame: norms, reaction terms, decompositions and the
// algebraic inequalities the pinched class satisfies.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pinchflow/errors.hpp"

namespace pinchflow {

// Second fundamental form h_{ij a} at a point, expressed in an orthonormal
// tangent frame (i,j < n) and orthonormal normal frame (a < q). Optional
// covariant derivative components (grad_k h)_{ij a} and second derivatives
// (grad_l grad_k h)_{ij a}, same frame conventions.
struct CurvatureFrame {
  int n = 0;
  int q = 0;
  std::vector<double> h;       // n*n*q, index (i*n + j)*q + a
  std::vector<double> gradA;   // n*n*n*q, index ((k*n + i)*n + j)*q + a; empty if absent
  std::vector<double> grad2A;  // n^4*q, index (((l*n+k)*n+i)*n+j)*q + a; empty if absent

  CurvatureFrame() = default;
  CurvatureFrame(int n_, int q_) : n(n_), q(q_), h(static_cast<size_t>(n_) * n_ * q_, 0.0) {}

  double& at(int i, int j, int a) { return h[static_cast<size_t>(i * n + j) * q + a]; }
  double at(int i, int j, int a) const { return h[static_cast<size_t>(i * n + j) * q + a]; }

  bool has_grad() const { return !gradA.empty(); }
  bool has_grad2() const { return !grad2A.empty(); }

  double& grad_at(int k, int i, int j, int a) {
    return gradA[static_cast<size_t>((k * n + i) * n + j) * q + a];
  }
  double grad_at(int k, int i, int j, int a) const {
    return gradA[static_cast<size_t>((k * n + i) * n + j) * q + a];
  }
  double& grad2_at(int l, int k, int i, int j, int a) {
    return grad2A[static_cast<size_t>(((l * n + k) * n + i) * n + j) * q + a];
  }
  double grad2_at(int l, int k, int i, int j, int a) const {
    return grad2A[static_cast<size_t>(((l * n + k) * n + i) * n + j) * q + a];
  }

  void symmetrize() {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int a = 0; a < q; ++a) {
          double s = 0.5 * (at(i, j, a) + at(j, i, a));
          at(i, j, a) = s;
          at(j, i, a) = s;
        }
  }
};

// Parameters (n, q, c, a, eps) defining the quadratic pinching class
// |A|^2 + a <= c |H|^2, with strictness eps.
struct PinchingParams {
  int n = 0;
  int q = 1;
  double c = 0.0;
  double a = 0.0;
  double eps = 0.0;
};

struct ReactionTerms {
  double R1 = 0.0;
  double R2 = 0.0;
  double rmPerpSq = 0.0;  // squared norm of the normal curvature
};

inline double norm_A2(const CurvatureFrame& f) {
  double s = 0.0;
  for (double v : f.h) s += v * v;
  return s;
}

inline std::vector<double> mean_vector(const CurvatureFrame& f) {
  std::vector<double> H(f.q, 0.0);
  for (int a = 0; a < f.q; ++a)
    for (int i = 0; i < f.n; ++i) H[a] += f.at(i, i, a);
  return H;
}

inline double norm_H2(const CurvatureFrame& f) {
  double s = 0.0;
  for (double v : mean_vector(f)) s += v * v;
  return s;
}

inline double norm_gradA2(const CurvatureFrame& f) {
  if (!f.has_grad()) throw missing_gradient();
  double s = 0.0;
  for (double v : f.gradA) s += v * v;
  return s;
}

inline double norm_gradH2(const CurvatureFrame& f) {
  if (!f.has_grad()) throw missing_gradient();
  double s = 0.0;
  for (int k = 0; k < f.n; ++k)
    for (int a = 0; a < f.q; ++a) {
      double t = 0.0;
      for (int i = 0; i < f.n; ++i) t += f.grad_at(k, i, i, a);
      s += t * t;
    }
  return s;
}

inline double norm_grad2A2(const CurvatureFrame& f) {
  if (!f.has_grad2()) throw missing_gradient("frame carries no second derivative data");
  double s = 0.0;
  for (double v : f.grad2A) s += v * v;
  return s;
}

inline ReactionTerms reaction_terms(const CurvatureFrame& f) {
  const int n = f.n, q = f.q;
  ReactionTerms r;
  // R1 first part: sum over normal pairs of the squared full contraction.
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) {
      double dot = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dot += f.at(i, j, a) * f.at(i, j, b);
      r.R1 += dot * dot;
    }
  // Normal curvature: commutators of shape operators.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b) {
          double comm = 0.0;
          for (int p = 0; p < n; ++p)
            comm += f.at(i, p, a) * f.at(j, p, b) - f.at(j, p, a) * f.at(i, p, b);
          r.rmPerpSq += comm * comm;
        }
  r.R1 += r.rmPerpSq;
  const std::vector<double> H = mean_vector(f);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double t = 0.0;
      for (int a = 0; a < q; ++a) t += H[a] * f.at(i, j, a);
      r.R2 += t * t;
    }
  return r;
}

// Splitting of h along and orthogonal to the mean curvature direction.
struct FrameDecomposition {
  std::vector<double> A1;               // n*n, fundamental form in the H direction
  std::vector<double> A1traceless;      // n*n
  std::vector<double> Aminus;           // n*n*q, directions orthogonal to H
  std::vector<double> AminusTraceless;  // n*n*q

  double normA1Sq = 0.0;
  double normA1TracelessSq = 0.0;
  double normAminusSq = 0.0;
  double normAminusTracelessSq = 0.0;
};

inline FrameDecomposition decompose(const CurvatureFrame& f) {
  const int n = f.n, q = f.q;
  const std::vector<double> H = mean_vector(f);
  double h2 = 0.0;
  for (double v : H) h2 += v * v;
  if (h2 <= 0.0) throw zero_mean_curvature();
  const double hnorm = std::sqrt(h2);
  std::vector<double> nu(q);
  for (int a = 0; a < q; ++a) nu[a] = H[a] / hnorm;

  FrameDecomposition d;
  d.A1.assign(static_cast<size_t>(n) * n, 0.0);
  d.A1traceless.assign(static_cast<size_t>(n) * n, 0.0);
  d.Aminus.assign(f.h.size(), 0.0);
  d.AminusTraceless.assign(f.h.size(), 0.0);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = 0.0;
      for (int a = 0; a < q; ++a) v += f.at(i, j, a) * nu[a];
      d.A1[static_cast<size_t>(i) * n + j] = v;
    }
  double trA1 = 0.0;
  for (int i = 0; i < n; ++i) trA1 += d.A1[static_cast<size_t>(i) * n + i];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = d.A1[static_cast<size_t>(i) * n + j];
      d.A1traceless[static_cast<size_t>(i) * n + j] = v - (i == j ? trA1 / n : 0.0);
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < q; ++a) {
        double v = f.at(i, j, a) - d.A1[static_cast<size_t>(i) * n + j] * nu[a];
        d.Aminus[static_cast<size_t>(i * n + j) * q + a] = v;
      }
  for (int a = 0; a < q; ++a) {
    double tr = 0.0;
    for (int i = 0; i < n; ++i) tr += d.Aminus[static_cast<size_t>(i * n + i) * q + a];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d.AminusTraceless[static_cast<size_t>(i * n + j) * q + a] =
            d.Aminus[static_cast<size_t>(i * n + j) * q + a] - (i == j ? tr / n : 0.0);
  }

  for (double v : d.A1) d.normA1Sq += v * v;
  for (double v : d.A1traceless) d.normA1TracelessSq += v * v;
  for (double v : d.Aminus) d.normAminusSq += v * v;
  for (double v : d.AminusTraceless) d.normAminusTracelessSq += v * v;
  return d;
}

inline double pinch_Q(const CurvatureFrame& f, const PinchingParams& p) {
  return norm_A2(f) + p.a - p.c * norm_H2(f);
}

struct ReactionInequality {
  double lhs = 0.0;       // 2 R1 - 2 c R2
  double rhsBound = 0.0;  // refined algebraic bound on the reaction terms
  bool ok = false;
};

// Checks both links of the reaction-term inequality chain: the refined bound
// on 2R1 - 2cR2 in terms of the A1/A- splitting, and nonpositivity of the
// whole expression on pinched frames.
inline ReactionInequality reaction_inequality_check(const CurvatureFrame& f,
                                                    const PinchingParams& p,
                                                    double tol = -1.0) {
  if (p.c <= 1.0 / f.n) throw invalid_slope();
  const double Q = pinch_Q(f, p);
  if (Q > 0.0) throw not_pinched();

  const ReactionTerms r = reaction_terms(f);
  const FrameDecomposition d = decompose(f);
  const double n = f.n;
  const double inv = 1.0 / (p.c - 1.0 / n);

  ReactionInequality out;
  out.lhs = 2.0 * r.R1 - 2.0 * p.c * r.R2;
  out.rhsBound = 2.0 * d.normA1Sq * Q - 2.0 * p.a * d.normA1Sq -
                 (2.0 * p.a / n) * inv * d.normAminusTracelessSq +
                 (2.0 / n) * inv * d.normAminusSq * Q +
                 (6.0 - 2.0 * inv / n) * d.normA1TracelessSq * d.normAminusTracelessSq +
                 (3.0 - 2.0 * inv / n) * d.normAminusTracelessSq * d.normAminusTracelessSq;
  if (tol < 0.0) {
    double scale = norm_A2(f) + norm_H2(f);
    tol = 1e-9 * scale * scale;
  }
  out.ok = (out.lhs <= out.rhsBound + tol) && (out.lhs <= tol);
  return out;
}

struct KatoCheck {
  double lhs = 0.0;  // |grad A|^2
  double rhs = 0.0;  // (3/(n+2)) |grad H|^2
  bool ok = false;
};

inline KatoCheck kato_check(const CurvatureFrame& f, double tol = 1e-12) {
  if (!f.has_grad()) throw missing_gradient();
  KatoCheck k;
  k.lhs = norm_gradA2(f);
  k.rhs = (3.0 / (f.n + 2)) * norm_gradH2(f);
  k.ok = k.lhs >= k.rhs - tol;
  return k;
}

// c_n = min{4/(3n), 1/(n-2)} for n >= 5; smaller n fall back to 4/(3n)
// and are flagged nonstandard.
struct CnConstant {
  long num = 0;
  long den = 1;
  bool standard = true;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline CnConstant c_n_constant(int n) {
  CnConstant c;
  if (n < 5) {
    c.num = 4;
    c.den = 3L * n;
    c.standard = false;
    return c;
  }
  // 4/(3n) <= 1/(n-2) iff n <= 8; equality at n = 8 where both give 1/6.
  if (3L * n <= 4L * (n - 2)) {
    c.num = 1;
    c.den = n - 2;
  } else {
    c.num = 4;
    c.den = 3L * n;
  }
  return c;
}

// Algebraic combination from Simons' identity that must vanish on frames with
// parallel second fundamental form (so Delta h and grad grad H both vanish):
//   (H.h_ip) h_pj - (h_ij.h_pq) h_pq + 2 (h_jq.h_ip) h_pq
//     - (h_iq.h_qp) h_pj - (h_jq.h_qp) h_pi
// Returned as a rank-3 array with the same indexing as h.
inline std::vector<double> simons_residual_parallel(const CurvatureFrame& f) {
  const int n = f.n, q = f.q;
  const std::vector<double> H = mean_vector(f);
  std::vector<double> res(f.h.size(), 0.0);

  // Precompute normal-space dot products.
  auto dot = [&](int i, int j, int k, int l) {
    double s = 0.0;
    for (int a = 0; a < q; ++a) s += f.at(i, j, a) * f.at(k, l, a);
    return s;
  };
  auto hdot = [&](int i, int j) {
    double s = 0.0;
    for (int a = 0; a < q; ++a) s += H[a] * f.at(i, j, a);
    return s;
  };

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < q; ++a) {
        double t = 0.0;
        for (int p = 0; p < n; ++p) {
          t += hdot(i, p) * f.at(p, j, a);
          for (int r = 0; r < n; ++r) {
            t -= dot(i, j, p, r) * f.at(p, r, a);
            t += 2.0 * dot(j, r, i, p) * f.at(p, r, a);
            t -= dot(i, r, r, p) * f.at(p, j, a);
            t -= dot(j, r, r, p) * f.at(p, i, a);
          }
        }
        res[static_cast<size_t>(i * n + j) * q + a] = t;
      }
  return res;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace pinchflow
