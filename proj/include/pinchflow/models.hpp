#pragma once

// Closed-form catalog of model submanifolds: round spheres, round cylinders
// S^{n-1}(r) x R, and products of two round spheres. Each carries an exact
// orthonormal curvature frame (with parallel second fundamental form) and an
// exact shrinking solution.

#include <cmath>
#include <string>

#include "pinchflow/errors.hpp"
#include "pinchflow/tensor.hpp"

namespace pinchflow {

struct ModelGeometry {
  enum class Kind { Sphere, Cylinder, ProductSpheres };

  Kind kind = Kind::Sphere;
  int n = 0;            // tangent dimension
  double r = 1.0;       // sphere/cylinder radius
  int p = 0;            // first factor dimension (products)
  int q2 = 0;           // second factor dimension (products)
  double r1 = 1.0;      // first factor radius
  double r2 = 1.0;      // second factor radius
  int ambientCodim = 1; // >= minimal codimension of the kind

  static ModelGeometry sphere(int n, double r, int codim = 1) {
    ModelGeometry m;
    m.kind = Kind::Sphere;
    m.n = n;
    m.r = r;
    m.ambientCodim = codim;
    if (n < 1 || r <= 0.0 || codim < 1) throw config_error("invalid sphere parameters");
    return m;
  }
  static ModelGeometry cylinder(int n, double r, int codim = 1) {
    ModelGeometry m;
    m.kind = Kind::Cylinder;
    m.n = n;
    m.r = r;
    m.ambientCodim = codim;
    if (n < 2 || r <= 0.0 || codim < 1) throw config_error("invalid cylinder parameters");
    return m;
  }
  static ModelGeometry product_spheres(int p, double r1, int q2, double r2, int codim = 2) {
    ModelGeometry m;
    m.kind = Kind::ProductSpheres;
    m.n = p + q2;
    m.p = p;
    m.q2 = q2;
    m.r1 = r1;
    m.r2 = r2;
    m.ambientCodim = codim;
    if (p < 1 || q2 < 1 || r1 <= 0.0 || r2 <= 0.0 || codim < 2)
      throw config_error("invalid product parameters");
    return m;
  }

  std::string describe() const {
    switch (kind) {
      case Kind::Sphere:
        return "sphere(n=" + std::to_string(n) + ", r=" + std::to_string(r) + ")";
      case Kind::Cylinder:
        return "cylinder(n=" + std::to_string(n) + ", r=" + std::to_string(r) + ")";
      default:
        return "productSpheres(p=" + std::to_string(p) + ", r1=" + std::to_string(r1) +
               ", q2=" + std::to_string(q2) + ", r2=" + std::to_string(r2) + ")";
    }
  }
};

// Exact orthonormal-frame second fundamental form. gradA is present and
// identically zero: these models all have parallel A.
inline CurvatureFrame curvature_frame(const ModelGeometry& m) {
  CurvatureFrame f(m.n, m.ambientCodim);
  switch (m.kind) {
    case ModelGeometry::Kind::Sphere:
      for (int i = 0; i < m.n; ++i) f.at(i, i, 0) = 1.0 / m.r;
      break;
    case ModelGeometry::Kind::Cylinder:
      for (int i = 0; i < m.n - 1; ++i) f.at(i, i, 0) = 1.0 / m.r;
      break;
    case ModelGeometry::Kind::ProductSpheres:
      for (int i = 0; i < m.p; ++i) f.at(i, i, 0) = 1.0 / m.r1;
      for (int i = m.p; i < m.n; ++i) f.at(i, i, 1) = 1.0 / m.r2;
      break;
  }
  f.gradA.assign(static_cast<size_t>(m.n) * m.n * m.n * m.ambientCodim, 0.0);
  return f;
}

inline double pinch_ratio(const ModelGeometry& m) {
  const CurvatureFrame f = curvature_frame(m);
  const double h2 = norm_H2(f);
  if (h2 <= 0.0) throw zero_mean_curvature(m.describe() + " is minimal");
  return norm_A2(f) / h2;
}

// Exact shrinking solution: each round factor obeys r_dot = -dim/r.
inline ModelGeometry shrink_exact(const ModelGeometry& m, double t) {
  auto shrunk = [t](double r, int dim) {
    const double rad = r * r - 2.0 * dim * t;
    if (rad <= 0.0) throw extinct();
    return std::sqrt(rad);
  };
  ModelGeometry out = m;
  switch (m.kind) {
    case ModelGeometry::Kind::Sphere:
      out.r = shrunk(m.r, m.n);
      break;
    case ModelGeometry::Kind::Cylinder:
      out.r = shrunk(m.r, m.n - 1);
      break;
    case ModelGeometry::Kind::ProductSpheres:
      out.r1 = shrunk(m.r1, m.p);
      out.r2 = shrunk(m.r2, m.q2);
      break;
  }
  return out;
}

// Extinction time of the earliest-vanishing factor.
inline double extinction_time(const ModelGeometry& m) {
  switch (m.kind) {
    case ModelGeometry::Kind::Sphere:
      return m.r * m.r / (2.0 * m.n);
    case ModelGeometry::Kind::Cylinder:
      return m.r * m.r / (2.0 * (m.n - 1));
    default:
      return std::min(m.r1 * m.r1 / (2.0 * m.p), m.r2 * m.r2 / (2.0 * m.q2));
  }
}

inline bool is_pinched(const ModelGeometry& m, const PinchingParams& p) {
  return pinch_ratio(m) <= p.c - p.eps;
}

}  // namespace pinchflow
