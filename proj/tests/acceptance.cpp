// Acceptance gate: thirteen end-to-end criteria, one verdict line each.
// argv[1] is the path to the command-line binary, exercised for the
// determinism criterion and the exit-code contract.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pinchflow/estimates.hpp"
#include "pinchflow/models.hpp"
#include "pinchflow/oracle.hpp"
#include "pinchflow/profile.hpp"
#include "pinchflow/sampling.hpp"
#include "pinchflow/tensor.hpp"

using namespace pinchflow;

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

int failures = 0;

void verdict(int id, bool ok, const std::string& what, const std::string& detail = "") {
  std::printf("%s  criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", id, what.c_str(),
              detail.empty() ? "" : "  [", detail.empty() ? "" : (detail + "]").c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string g_cli;

int cli(const std::string& args) {
  const std::string cmd = "\"" + g_cli + "\" " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Torus of revolution S^{n-1} x S^1: profile circle of radius rho around
// (c, 0); thick bulge at x = 0, thin neck at x = 0.5 when c is just above rho.
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

// Per-run statistics accumulated by a step monitor.
struct RunStats {
  double minPinchGap = 1e300;   // min over time/grid of c|H|^2 - |A|^2 - a
  double maxH2 = 0.0;
  bool positionOk = true;
  long positionChecked = 0;
  double supGradRatio = 0.0;    // max |grad A|^2 / (c|H|^2 - |A|^2)^2
  double minEpsMeas = 1e300;    // min (c|H|^2 - |A|^2)/|A|^2
  double eulerSlack = 0.0;      // accumulated forward-Euler excess of |F|^2
  std::vector<double> g1cand;   // per step: max |grad A|^2 / (1 + |A|^4)
  std::vector<double> epsStep;  // per step: min (c|H|^2 - |A|^2)/|A|^2
  std::vector<std::pair<double, double>> trend;  // per step: (max|H|, ratio at argmax)
};

StepMonitor make_stats_monitor(RunStats* rs, const PinchingParams& p, double R0) {
  return [rs, p, R0](const ProfileState& st, const ProfileGeometry& g, double dt,
                     const std::vector<FlowEvent>&) {
    double g1 = 0.0, stepMaxH2 = 0.0, eps = 1e300;
    int best = 0;
    for (int i = 0; i < g.N; ++i) {
      const double gap = p.c * g.H2[i] - g.A2[i];
      rs->minPinchGap = std::min(rs->minPinchGap, gap - p.a);
      stepMaxH2 = std::max(stepMaxH2, g.H2[i]);
      if (gap > 0.0) {
        rs->supGradRatio = std::max(rs->supGradRatio, g.gradA2[i] / (gap * gap));
        if (g.A2[i] > 0.0) eps = std::min(eps, gap / g.A2[i]);
      }
      g1 = std::max(g1, g.gradA2[i] / (1.0 + g.A2[i] * g.A2[i]));
      if (g.H2[i] > g.H2[best]) best = i;
    }
    rs->minEpsMeas = std::min(rs->minEpsMeas, eps);
    rs->maxH2 = std::max(rs->maxH2, stepMaxH2);
    rs->g1cand.push_back(g1);
    rs->epsStep.push_back(eps);
    rs->trend.push_back({std::sqrt(g.H2[best]), g.A2[best] / g.H2[best]});
    rs->eulerSlack += dt * dt * stepMaxH2;
    rs->positionOk =
        rs->positionOk && position_bound_check(st, R0, 1e-6 + rs->eulerSlack);
    rs->positionChecked++;
  };
}

void criteria_1_2() {
  const auto t0 = std::chrono::steady_clock::now();
  const long total = 100000;
  long bad1 = 0, bad2 = 0;
  double worst = -1e300;
  const int shards = 16;
  for (int shard = 0; shard < shards; ++shard) {
    Rng rng(splitmix64(7ULL ^ (0xA1B2C3ULL + shard)));
    const long lo = total * shard / shards;
    const long hi = total * (shard + 1) / shards;
    for (long idx = lo; idx < hi; ++idx) {
      PinchingParams p;
      p.n = 5 + static_cast<int>(idx % 6);
      p.q = 1 + static_cast<int>((idx / 6) % 4);
      p.c = c_n_constant(p.n).value();
      const CurvatureFrame f = random_pinched_frame(rng, p);
      const double scale = norm_A2(f) + norm_H2(f);
      const ReactionTerms r = reaction_terms(f);
      const double margin = (r.R1 - p.c * r.R2) / (scale * scale);
      worst = std::max(worst, margin);
      if (margin > 1e-9) ++bad1;
      if (!reaction_inequality_check(f, p).ok) ++bad2;
    }
  }
  const double secs = seconds_since(t0);
  verdict(1, bad1 == 0 && secs < 60.0,
          "reaction sign R1 - c R2 <= tol on 1e5 random pinched frames, n in 5..10, q in 1..4",
          "worst=" + fmt(worst) + ", " + fmt(secs) + "s");
  verdict(2, bad2 == 0, "both links of the refined reaction chain on the same sample set",
          "failures=" + std::to_string(bad2));
}

void criterion_3() {
  Rng rng(splitmix64(3ULL ^ 0x4B41544FULL));
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  long bad = 0;
  const int n = 3, k = 2;
  for (int idx = 0; idx < 100; ++idx) {
    const double a1 = 0.15 * uni(rng), a2c = 0.08 * uni(rng), ph1 = 3.0 * uni(rng);
    const double b1 = 0.3 * uni(rng), ph2 = 3.0 * uni(rng);
    auto u = [=](double x) { return 1.0 + a1 * std::sin(x + ph1) + a2c * std::cos(2.0 * x); };
    auto chi = [=](double x) { return std::vector<double>{x, b1 * std::sin(x + ph2)}; };
    const ChartPatch p = equivariant_chart(n, k, u, chi, 0.04);
    std::vector<double> at = generic_angles(n);
    at[0] = 0.5 + 0.2 * uni(rng);
    const CurvatureFrame f = fd_grad_curvature(p, at);
    if (!kato_check(f, 1e-3 * (1.0 + norm_gradA2(f) + norm_gradH2(f))).ok) ++bad;
  }
  double v[3];
  for (int lvl = 0; lvl < 3; ++lvl) {
    const ChartPatch sp = sphere_chart(3, 1.0, 1, 0.08 / (1 << lvl));
    v[lvl] = std::sqrt(norm_H2(fd_curvature(sp, generic_angles(3))));
  }
  const double order = convergence_order(std::abs(v[0] - 3.0), std::abs(v[1] - 3.0),
                                         std::abs(v[2] - 3.0));
  verdict(3, bad == 0 && order >= 1.9,
          "Kato inequality on 100 oracle Codazzi patches, FD order >= 1.9",
          "failures=" + std::to_string(bad) + ", order=" + fmt(order));
}

void criterion_4() {
  double worst = 0.0;
  std::vector<ModelGeometry> catalog;
  for (int n = 2; n <= 8; ++n)
    for (double r : {0.5, 1.0, 1.7}) {
      catalog.push_back(ModelGeometry::sphere(n, r));
      catalog.push_back(ModelGeometry::cylinder(n, r));
    }
  catalog.push_back(ModelGeometry::product_spheres(2, 1.0, 2, 1.0));
  catalog.push_back(ModelGeometry::product_spheres(4, 1.0, 1, 2.0));
  catalog.push_back(ModelGeometry::product_spheres(3, 0.8, 2, 1.3));
  catalog.push_back(ModelGeometry::product_spheres(4, 1.2, 4, 1.2));
  for (const ModelGeometry& m : catalog)
    worst = std::max(worst, max_abs(simons_residual_parallel(curvature_frame(m))));
  verdict(4, worst <= 1e-10, "Simons residual on all parallel catalog frames",
          "worst=" + fmt(worst));
}

// Returns the stats of the exact-product run so later criteria can reuse them.
RunStats criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  ProfileState st = product_circle_state(5, 2, 256, 1.0, 2.0);
  FlowConfig cfg;
  cfg.tEnd = 3.0 / 32.0;  // u(t) = sqrt(1 - 8t) has halved
  PinchingParams p5;
  p5.n = 5;
  p5.q = 2;
  p5.c = c_n_constant(5).value();
  RunStats rs;
  double worstRel = 0.0;
  std::vector<StepMonitor> mons;
  mons.push_back(make_stats_monitor(&rs, p5, std::sqrt(5.0)));
  mons.push_back([&worstRel](const ProfileState& s, const ProfileGeometry&, double,
                             const std::vector<FlowEvent>&) {
    const double uEx = std::sqrt(1.0 - 8.0 * s.time);
    const double rEx = std::sqrt(4.0 - 2.0 * s.time);
    for (int i = 0; i < s.N; i += 7) {
      worstRel = std::max(worstRel, std::abs(s.u[i] - uEx) / uEx);
      const double R = std::hypot(s.chiAt(i, 0), s.chiAt(i, 1));
      worstRel = std::max(worstRel, std::abs(R - rEx) / rEx);
    }
  });
  const RunSummary sum = run(st, cfg, mons);
  const double secs = seconds_since(t0);

  bool lifespanOk = true;
  for (int n = 2; n <= 10; ++n)
    for (double r : {0.5, 1.0, 3.0})
      lifespanOk = lifespanOk && extinction_time(ModelGeometry::sphere(n, r)) == r * r / (2.0 * n);

  verdict(5,
          worstRel <= 1e-3 && sum.finalState.time >= cfg.tEnd && secs < 120.0 && lifespanOk,
          "exact shrinking product tracked to 1e-3 until u halves; sphere lifespan exact",
          "relErr=" + fmt(worstRel) + ", " + fmt(secs) + "s");
  return rs;
}

struct NeckpinchRun {
  RunStats stats;
  Trajectory traj;
  RunSummary summary;
  double initialMaxH = 0.0;
  double seconds = 0.0;
  PinchingParams p8;
};

NeckpinchRun run_neckpinch() {
  NeckpinchRun out;
  const auto t0 = std::chrono::steady_clock::now();
  ProfileState st = product_circle_state(8, 2, 512, 0.2, 1.0, 0.1);
  double R0sq = 0.0;
  for (int i = 0; i < st.N; ++i)
    R0sq = std::max(R0sq, st.u[i] * st.u[i] + st.chiAt(i, 0) * st.chiAt(i, 0) +
                              st.chiAt(i, 1) * st.chiAt(i, 1));
  out.initialMaxH = profile_geometry(st).maxH();

  out.p8.n = 8;
  out.p8.q = 2;
  out.p8.c = c_n_constant(8).value();

  FlowConfig cfg;
  cfg.tEnd = 1.0;  // the curvature stop triggers first
  cfg.stopWhenMaxHExceeds = 60.0 * out.initialMaxH;
  cfg.regridEvery = 10;
  cfg.curvatureWeightedRegrid = true;
  cfg.recordEvery = 25;

  std::vector<StepMonitor> mons;
  mons.push_back(make_stats_monitor(&out.stats, out.p8, std::sqrt(R0sq)));
  out.summary = run(st, cfg, mons, &out.traj);
  out.seconds = seconds_since(t0);
  return out;
}

void criteria_6_7(const RunStats& product, const NeckpinchRun& np) {
  const double m1 = product.minPinchGap + 1e-6 * product.maxH2;
  const double m2 = np.stats.minPinchGap + 1e-6 * np.stats.maxH2;
  verdict(6, m1 >= 0.0 && m2 >= 0.0,
          "pinching preserved along both scenario runs",
          "minGap=" + fmt(std::min(product.minPinchGap, np.stats.minPinchGap)));
  verdict(7, product.positionOk && np.stats.positionOk,
          "position bound |F|^2 <= R0^2 - 2nt at every accepted step",
          "steps=" + std::to_string(product.positionChecked + np.stats.positionChecked));
}

void criterion_8(const NeckpinchRun& np) {
  const int n = 8;
  const double cn = c_n_constant(n).value();
  const double kappaN = 3.0 / (n + 2) - np.p8.c;
  const double theoryBound = 3.0 * cn / (2.0 * kappaN * (n + 2) * np.stats.minEpsMeas);
  const bool supOk = np.stats.supGradRatio <= theoryBound;

  // Fit gamma on the first half: the measured maximum of |grad A|^2/(1+|A|^4)
  // combined with the structural constant bound(epsFirst) (c n - 1)^2, which
  // dominates |grad A|^2/|A|^4 wherever the gradient estimate holds (the gap
  // obeys gap <= (c n - 1)|A|^2 by Cauchy-Schwarz).
  const size_t half = np.stats.g1cand.size() / 2;
  double gFirst = 0.0, gLate = 0.0, epsFirst = 1e300;
  for (size_t i = 0; i < half; ++i) {
    gFirst = std::max(gFirst, np.stats.g1cand[i]);
    epsFirst = std::min(epsFirst, np.stats.epsStep[i]);
  }
  for (size_t i = half; i < np.stats.g1cand.size(); ++i)
    gLate = std::max(gLate, np.stats.g1cand[i]);
  const double boundFirst = 3.0 * cn / (2.0 * kappaN * (n + 2) * epsFirst);
  const double slack = np.p8.c * n - 1.0;
  const double gFit = std::max(gFirst, boundFirst * slack * slack);
  const bool fitOk = gLate <= gFit * (1.0 + 1e-9) + 1e-12;

  verdict(8, supOk && fitOk,
          "gradient ratio below 3c_n/(2 kappa_n (n+2) eps); first-half fit holds later",
          "sup=" + fmt(np.stats.supGradRatio) + ", bound=" + fmt(theoryBound) +
              ", gammaFit=" + fmt(gFit) + ", gammaLate=" + fmt(gLate));
}

void criterion_9(const NeckpinchRun& np) {
  const double gate = 50.0 * np.initialMaxH;
  bool reached = false, allClose = true;
  double worstDev = 0.0;
  for (const auto& [H, ratio] : np.stats.trend) {
    if (H < gate) continue;
    reached = true;
    const double dev = std::abs(ratio - 1.0 / 7.0);
    worstDev = std::max(worstDev, dev);
    allClose = allClose && dev <= 0.02;
  }
  verdict(9, reached && allClose && np.seconds < 300.0,
          "cylindrical ratio within 0.02 of 1/7 once max|H| >= 50x initial (N=512)",
          "worstDev=" + fmt(worstDev) + ", " + fmt(np.seconds) + "s, steps=" +
              std::to_string(np.summary.steps));
}

void criterion_10(const NeckpinchRun& np) {
  const double HSharp = 3.0 * np.initialMaxH;
  const double cSharp = measure_csharp(np.traj, HSharp);
  const double dSharp = d_sharp(8, cSharp);
  const bool dOk = dSharp == 1.0 / (8.0 * 49.0 * cSharp);

  long harTried = 0, harOk = 0;
  for (const Snapshot& sn : np.traj.snaps) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(sn.H2.size()); ++i)
      if (sn.H2[i] > sn.H2[best]) best = i;
    if (std::sqrt(sn.H2[best]) < 2.0 * HSharp) continue;
    ++harTried;
    if (harnack_check(sampled_geometry(sn, 8), best, cSharp, HSharp, 2.0)) ++harOk;
  }

  bool hd = false;
  const size_t last = np.traj.snaps.size() - 1;
  {
    const Snapshot& sn = np.traj.snaps[last];
    int best = 0;
    for (int i = 1; i < static_cast<int>(sn.H2.size()); ++i)
      if (sn.H2[i] > sn.H2[best]) best = i;
    hd = half_double_check(np.traj, last, best, cSharp, HSharp);
  }

  verdict(10, harTried > 0 && harOk == harTried && hd && dOk,
          "Harnack and half/double bounds with measured cSharp, HSharp",
          "cSharp=" + fmt(cSharp) + ", dSharp=" + fmt(dSharp) + ", neighbourhoods=" +
              std::to_string(harTried));
}

void criterion_11(const NeckpinchRun& np) {
  const SampledGeometry cyl = cylinder_sample(8, 1.0, 256);
  NeckParams tight;
  tight.epsNeck = 1e-10;
  const NeckDetection cd = neck_detect(cyl, 128, tight);
  const bool cylOk = cd.isNeck && cd.deviation <= 1e-10;

  const SampledGeometry sph = sphere_sample(5, 1.0, 256);
  NeckParams loose;
  loose.epsNeck = 0.3;
  const bool sphOk = !neck_detect(sph, 128, loose).isNeck;

  const double tFinal = np.traj.snaps.back().time;
  bool anyNeck = false;
  double bestDev = 1e300;
  NeckParams nominal;  // epsNeck = 0.1
  for (const Snapshot& sn : np.traj.snaps) {
    if (sn.time < 0.9 * tFinal) continue;
    const SampledGeometry g = sampled_geometry(sn, 8);
    int best = 0;
    for (int i = 1; i < g.size(); ++i)
      if (g.H2[i] > g.H2[best]) best = i;
    try {
      const NeckDetection nd = neck_detect(g, best, nominal);
      bestDev = std::min(bestDev, std::max(nd.deviation, nd.derivDeviation));
      anyNeck = anyNeck || nd.isNeck;
    } catch (const flow_error&) {
    }
  }
  verdict(11, cylOk && sphOk && anyNeck,
          "neck detection: cylinder exact, sphere rejected, late neckpinch neck at 0.1",
          "cylDev=" + fmt(cd.deviation) + ", lateDev=" + fmt(bestDev));
}

void criterion_12() {
  bool ok = true;
  std::string detail;
  const SampledGeometry sph = sphere_sample(5, 1.0, 256);
  const DichotomyParams dps = make_dichotomy_params(0.03, 0.1);
  const DichotomyResult rs = dichotomy_classify(sph, 128, dps, 0.1);
  ok = ok && rs.kind == DichotomyKind::Compact && rs.minChen > 0.0;

  const SampledGeometry dumb = sampled_geometry(torus_state(8, 512, 1.02, 1.0));
  const DichotomyParams dpd = make_dichotomy_params(0.005, 0.1);
  ok = ok && dumb.A2[0] / dumb.H2[0] < 1.0 / 7.0 - dpd.eta0;
  const DichotomyResult rd = dichotomy_classify(dumb, 0, dpd, 0.1);
  ok = ok && rd.kind == DichotomyKind::NeckCandidate && rd.hLowerBoundOk;
  if (rd.index >= 0)
    ok = ok && std::sqrt(dumb.H2[rd.index]) >= std::sqrt(dumb.H2[0]) / dpd.gamma0;
  detail = "sphere=" + std::string(rs.kind == DichotomyKind::Compact ? "Compact" : "other") +
           ", dumbbell=" +
           std::string(rd.kind == DichotomyKind::NeckCandidate ? "NeckCandidate" : "other");
  verdict(12, ok, "dichotomy: sphere Compact, dumbbell NeckCandidate with curvature bound",
          detail);
}

void criterion_13() {
  namespace fs = std::filesystem;
  const fs::path base = fs::path("acceptance_out");
  fs::create_directories(base);
  const fs::path cfgPath = base / "determinism.cfg";
  {
    std::ofstream cfg(cfgPath);
    cfg << "scenario.name = determinism\n"
           "pinching.n = 8\n"
           "pinching.q = 2\n"
           "geometry.kind = productCircle\n"
           "geometry.N = 128\n"
           "geometry.r = 0.2\n"
           "geometry.R = 1.0\n"
           "geometry.bumpAmplitude = 0.1\n"
           "flow.tEnd = 0.0005\n"
           "flow.regridEvery = 10\n"
           "flow.recordEvery = 5\n"
           "monitors.pinching = true\n"
           "monitors.positionBound = true\n";
  }
  const std::string cfgArg = "--config \"" + cfgPath.string() + "\"";
  const int rcA = cli("run " + cfgArg + " --out \"" + (base / "a").string() + "\"");
  const int rcB = cli("run " + cfgArg + " --out \"" + (base / "b").string() + "\"");
  const std::string csvA = slurp((base / "a" / "series.csv").string());
  const std::string csvB = slurp((base / "b" / "series.csv").string());

  // Exit-code contract: inverted suite fails with 1, bad inputs with 2.
  const int rcInv = cli("verify --suite algebraic --samples 200 --seed 1 --invert");
  const int rcBadSuite = cli("verify --suite nosuch");
  const int rcBadCfg = cli("run --config \"" + (base / "missing.cfg").string() + "\" --out \"" +
                           (base / "c").string() + "\"");
  const bool codesOk = rcInv == 1 && rcBadSuite == 2 && rcBadCfg == 2;

  verdict(13,
          rcA == 0 && rcB == 0 && !csvA.empty() && csvA == csvB && codesOk,
          "repeated runs produce bitwise-identical CSV; exit codes 0/1/2 honoured",
          "bytes=" + std::to_string(csvA.size()) + ", run=" + std::to_string(rcA) +
              ", invert=" + std::to_string(rcInv) + ", badSuite=" + std::to_string(rcBadSuite) +
              ", badCfg=" + std::to_string(rcBadCfg));
}

template <typename F>
void guarded(int id, const std::string& what, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    verdict(id, false, what, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-cli>\n");
    return 2;
  }
  g_cli = argv[1];

  guarded(1, "reaction sign suite", [] { criteria_1_2(); });
  guarded(3, "Kato suite", [] { criterion_3(); });
  guarded(4, "Simons residual", [] { criterion_4(); });

  RunStats product;
  guarded(5, "exact shrinking product", [&] { product = criterion_5(); });

  NeckpinchRun np;
  bool haveNp = false;
  try {
    np = run_neckpinch();
    haveNp = true;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "neckpinch run failed: %s\n", e.what());
  }
  if (haveNp) {
    guarded(6, "pinching preservation", [&] { criteria_6_7(product, np); });
    guarded(8, "gradient estimate", [&] { criterion_8(np); });
    guarded(9, "cylindrical estimate", [&] { criterion_9(np); });
    guarded(10, "Harnack and half/double", [&] { criterion_10(np); });
    guarded(11, "neck detection", [&] { criterion_11(np); });
  } else {
    for (int id : {6, 7, 8, 9, 10, 11}) verdict(id, false, "neckpinch run unavailable");
  }
  guarded(12, "dichotomy", [] { criterion_12(); });
  guarded(13, "determinism", [] { criterion_13(); });

  std::printf("%d of 13 criteria passed\n", 13 - failures);
  return failures == 0 ? 0 : 1;
}
