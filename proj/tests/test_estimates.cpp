#include <doctest.h>

#include <cmath>

#include "pinchflow/estimates.hpp"
#include "pinchflow/models.hpp"
#include "pinchflow/profile.hpp"

using namespace pinchflow;

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

// Torus of revolution S^{n-1} x S^1 in R^{n+1}: profile circle of radius rho
// around (c, 0) in the (u, chi) half-plane. Thick bulge at x = 0, thin neck
// at x = 0.5 when c is just above rho.
ProfileState torus_state(int n, int N, double c, double rho) {
  ProfileState st;
  st.n = n;
  st.k = 1;
  st.N = N;
  st.u.resize(N);
  st.chi.resize(N);
  for (int i = 0; i < N; ++i) {
    const double x = kTwoPi * i / N;
    st.u[i] = c + rho * std::cos(x);
    st.chi[i] = rho * std::sin(x);
  }
  return st;
}

}  // namespace

TEST_CASE("constant formulas") {
  CHECK(d_sharp(5, 0.25) == doctest::Approx(0.03125).epsilon(1e-14));
  const DichotomyParams dp = make_dichotomy_params(0.5, 0.0);
  CHECK(dp.alpha0 == doctest::Approx(kTwoPi).epsilon(1e-12));
  CHECK(dp.gamma0 == doctest::Approx(1.0).epsilon(1e-14));
  const ParabolicNbhd nb = make_parabolic_nbhd(6, 3, 1.0, 2.5, 2.0, 0.5);
  CHECK(nb.rHat * 2.5 == doctest::Approx(5.0).epsilon(1e-12));  // rHat |H| = n-1
  CHECK(nb.radius == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("gradient ratio on a parallel geometry and its scale invariance") {
  PinchingParams p{6, 2, c_n_constant(6).value(), 0.0, 0.0};
  const SampledGeometry cyl = cylinder_sample(6, 1.0);
  const GradientRatio gr = gradient_ratio_monitor(cyl, p);
  CHECK(gr.supRatio == doctest::Approx(0.0));
  CHECK(gr.theoryBound > 0.0);

  // Theoretical-bound arithmetic: n=8, c=1/6, eps=0.1 -> 3*(1/6)/(2*(2/15)*10*0.1).
  PinchingParams p8{8, 2, 1.0 / 6.0, 0.0, 0.0};
  const double cn = c_n_constant(8).value();
  const double kappa = 3.0 / 10.0 - 1.0 / 6.0;
  CHECK(3.0 * cn / (2.0 * kappa * 10 * 0.1) == doctest::Approx(1.875).epsilon(1e-12));

  // Scale invariance under parabolic rescaling of a pinched profile.
  ProfileState st = product_circle_state(8, 2, 128, 0.2, 1.0, 0.05);
  const SampledGeometry a = sampled_geometry(st);
  auto [scaled, map] = parabolic_rescale(st, 17);
  const SampledGeometry b = sampled_geometry(scaled);
  const GradientRatio ra = gradient_ratio_monitor(a, p8);
  const GradientRatio rb = gradient_ratio_monitor(b, p8);
  CHECK(ra.supRatio == doctest::Approx(rb.supRatio).epsilon(1e-8));
  CHECK(ra.epsMeas == doctest::Approx(rb.epsMeas).epsilon(1e-8));
}

TEST_CASE("gradient bound checks and negative control") {
  const SampledGeometry cyl = cylinder_sample(5, 1.0);
  GradientEstimateConsts zero;
  CHECK(gradient_bound_check(cyl, zero).ok);   // grad A = 0
  CHECK(second_deriv_monitor(cyl, zero).ok);

  SampledGeometry bumpy = sampled_geometry(product_circle_state(8, 2, 128, 0.2, 1.0, 0.1));
  CHECK_FALSE(gradient_bound_check(bumpy, zero).ok);  // non-parallel, zero constants
  GradientEstimateConsts fitted;
  fitted.gamma1 = fitted.gamma2 = 1e6;
  CHECK(gradient_bound_check(bumpy, fitted).ok);
}

TEST_CASE("measure_csharp on a static series is zero") {
  ProfileState st = product_circle_state(6, 2, 64, 1.0, 2.0);
  const ProfileGeometry g = profile_geometry(st);
  Trajectory tr;
  tr.n = 6;
  tr.k = 2;
  tr.snaps.push_back(make_snapshot(st, g, 0.0));
  ProfileState st2 = st;
  st2.time = 0.5;
  tr.snaps.push_back(make_snapshot(st2, g, 0.5));
  CHECK(measure_csharp(tr, 0.1) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK_THROWS_AS(measure_csharp(tr, 1e9), no_qualifying_points);
}

TEST_CASE("harnack propagation") {
  // Worked example: |H(p0)| = 10, cSharp = 0.5, d = 0.3 -> lower bound 4.
  SampledGeometry g;
  g.n = 5;
  g.periodic = false;
  g.length = 1.0;
  g.s = {0.0, 0.3};
  g.u = {1.0, 1.0};
  g.us = {0.0, 0.0};
  g.kappaNorm = {0.0, 0.0};
  g.A2 = {25.0, 4.1};
  g.H2 = {100.0, 16.0000001};
  CHECK(harnack_check(g, 0, 0.5, 1.0, 2.5));
  g.H2[1] = 15.2;  // |H| = 3.9 < 4, violates the integrated bound
  CHECK_FALSE(harnack_check(g, 0, 0.5, 1.0, 2.5));
  CHECK_THROWS_AS(harnack_check(g, 0, 0.5, 100.0, 2.5), below_threshold);

  // Cylinder: constant |H|, holds with margin for any constants.
  const SampledGeometry cyl = cylinder_sample(6, 1.0);
  CHECK(harnack_check(cyl, 10, 0.3, 1.0, 2.0));
}

TEST_CASE("half/double on a static cylinder-like trajectory") {
  ProfileState st = product_circle_state(6, 2, 64, 1.0, 4.0);
  const ProfileGeometry g = profile_geometry(st);
  Trajectory tr;
  tr.n = 6;
  tr.k = 2;
  tr.snaps.push_back(make_snapshot(st, g, 0.0));
  ProfileState st2 = st;
  st2.time = 0.01;
  tr.snaps.push_back(make_snapshot(st2, g, 0.01));
  CHECK(half_double_check(tr, 1, 0, 0.25, 0.1));
  CHECK_THROWS_AS(half_double_check(tr, 1, 0, 0.25, 1e9), below_threshold);
  CHECK_THROWS_AS(half_double_check(tr, 5, 0, 0.25, 0.1), insufficient_history);
}

TEST_CASE("neck detection") {
  const SampledGeometry cyl = cylinder_sample(6, 1.0, 256);
  NeckParams np;
  np.epsNeck = 1e-8;
  const NeckDetection nd = neck_detect(cyl, 128, np);
  CHECK(nd.isNeck);
  CHECK(nd.deviation <= 1e-10);

  const SampledGeometry sph = sphere_sample(5, 1.0, 256);
  NeckParams ns;
  ns.epsNeck = 0.3;
  const NeckDetection sd = neck_detect(sph, 128, ns);
  CHECK_FALSE(sd.isNeck);
  CHECK(sd.deviation > 0.3);

  // Window wrapping the whole profile is rejected.
  SampledGeometry small = sampled_geometry(product_circle_state(8, 2, 64, 0.2, 0.05));
  NeckParams wide;
  wide.L = 50.0;
  int best = 0;
  for (int i = 1; i < small.size(); ++i)
    if (small.H2[i] > small.H2[best]) best = i;
  CHECK_THROWS_AS(neck_detect(small, best, wide), window_exceeds_domain);
}

TEST_CASE("cylindrical trend on exact self-similar families") {
  Trajectory tr;
  tr.n = 6;
  tr.k = 1;
  ModelGeometry cyl = ModelGeometry::cylinder(6, 1.0);
  for (int j = 0; j < 20; ++j) {
    const ModelGeometry m = shrink_exact(cyl, 0.004 * j);
    Snapshot sn;
    sn.time = 0.004 * j;
    const CurvatureFrame f = curvature_frame(m);
    sn.A2 = {norm_A2(f)};
    sn.H2 = {norm_H2(f)};
    sn.s = {0.0};
    sn.length = 1.0;
    tr.snaps.push_back(sn);
  }
  const CylindricalTrend t = cylindrical_trend(tr);
  CHECK(t.asymptote == doctest::Approx(0.2).epsilon(1e-10));
  for (const auto& [H, ratio] : t.points) CHECK(ratio == doctest::Approx(0.2).epsilon(1e-10));
}

TEST_CASE("Chen curvature lower bound") {
  CHECK(chen_kmin(curvature_frame(ModelGeometry::sphere(5, 1.0))) ==
        doctest::Approx(0.625).epsilon(1e-12));
  CHECK(0.625 <= 1.0);  // true sphere K_min = 1 dominates the bound
  CHECK(chen_kmin(curvature_frame(ModelGeometry::cylinder(6, 1.3))) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(chen_kmin(curvature_frame(ModelGeometry::product_spheres(6, 0.1, 2, 1.0))) < 0.0);
}

TEST_CASE("dichotomy: sphere is Compact, dumbbell yields a neck candidate") {
  const SampledGeometry sph = sphere_sample(5, 1.0, 256);
  const DichotomyParams dps = make_dichotomy_params(0.03, 0.1);
  const DichotomyResult rs = dichotomy_classify(sph, 128, dps, 0.1);
  CHECK(rs.kind == DichotomyKind::Compact);
  CHECK(rs.minChen > 0.0);

  const SampledGeometry dumb = sampled_geometry(torus_state(8, 512, 1.02, 1.0));
  // Bulge at index 0: most umbilic point of the torus.
  const double bulgeRatio = dumb.A2[0] / dumb.H2[0];
  const DichotomyParams dpd = make_dichotomy_params(0.005, 0.1);
  REQUIRE(bulgeRatio < 1.0 / 7.0 - dpd.eta0);
  const DichotomyResult rd = dichotomy_classify(dumb, 0, dpd, 0.1);
  CHECK(rd.kind == DichotomyKind::NeckCandidate);
  CHECK(rd.hLowerBoundOk);
  CHECK(dumb.A2[rd.index] / dumb.H2[rd.index] >= 1.0 / 7.0 - dpd.eta0);
  CHECK(std::sqrt(dumb.H2[rd.index]) >= std::sqrt(dumb.H2[0]) / dpd.gamma0);

  // Precondition failures are reported as such.
  CHECK_THROWS_AS(dichotomy_classify(dumb, 256, dpd, 0.1), precondition_failed);
  CHECK_THROWS_AS(dichotomy_classify(sph, 128, dps, 1e9), precondition_failed);
}
