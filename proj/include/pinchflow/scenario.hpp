#pragma once

// Scenario execution: a parsed config selects a geometry (catalog model or
// profile preset), a flow configuration, and a set of estimate monitors; the
// runner produces the time-series CSV and a key-value report with stable
// pass/fail entries.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "pinchflow/config.hpp"
#include "pinchflow/csv.hpp"
#include "pinchflow/errors.hpp"
#include "pinchflow/estimates.hpp"
#include "pinchflow/models.hpp"
#include "pinchflow/profile.hpp"
#include "pinchflow/report.hpp"

namespace pinchflow {

struct Scenario {
  std::string name;
  PinchingParams pinching;
  bool usesProfile = false;

  // Catalog geometry (usesProfile == false).
  ModelGeometry model;

  // Profile preset (usesProfile == true): productCircle.
  int presetK = 2, presetN = 256;
  double presetR = 1.0, presetBigR = 1.0, bumpAmplitude = 0.0;
  int bumpMode = 1;

  FlowConfig flow;
  std::set<std::string> monitors;
  NeckParams neck;
  double dichotomyEta0 = 0.01;
  double HSharpFraction = 0.1;  // HSharp = fraction * final max|H|
  long catalogSamples = 200;
};

inline Scenario parse_scenario(const Config& cfg) {
  Scenario sc;
  sc.name = cfg.get_string("scenario.name", "unnamed");

  sc.pinching.n = static_cast<int>(cfg.get_int("pinching.n"));
  sc.pinching.q = static_cast<int>(cfg.get_int("pinching.q", 1));
  const std::string cSpec = cfg.get_string("pinching.c", "cn");
  sc.pinching.c = (cSpec == "cn") ? c_n_constant(sc.pinching.n).value()
                                  : cfg.get_double("pinching.c");
  sc.pinching.a = cfg.get_double("pinching.a", 0.0);
  sc.pinching.eps = cfg.get_double("pinching.eps", 0.0);

  const std::string kind = cfg.get_string("geometry.kind");
  if (kind == "productCircle") {
    sc.usesProfile = true;
    sc.presetK = static_cast<int>(cfg.get_int("geometry.k", 2));
    sc.presetN = static_cast<int>(cfg.get_int("geometry.N", 256));
    sc.presetR = cfg.get_double("geometry.r");
    sc.presetBigR = cfg.get_double("geometry.R");
    sc.bumpAmplitude = cfg.get_double("geometry.bumpAmplitude", 0.0);
    sc.bumpMode = static_cast<int>(cfg.get_int("geometry.bumpMode", 1));
    if (sc.presetR * (1.0 - std::abs(sc.bumpAmplitude)) <= 0.0)
      throw config_error("preset radius must stay positive");
  } else if (kind == "sphere") {
    sc.model = ModelGeometry::sphere(sc.pinching.n, cfg.get_double("geometry.r"));
  } else if (kind == "cylinder") {
    sc.model = ModelGeometry::cylinder(sc.pinching.n, cfg.get_double("geometry.r"));
  } else if (kind == "productSpheres") {
    sc.model = ModelGeometry::product_spheres(
        static_cast<int>(cfg.get_int("geometry.p")), cfg.get_double("geometry.r1"),
        static_cast<int>(cfg.get_int("geometry.q2")), cfg.get_double("geometry.r2"));
  } else {
    throw config_error("unknown geometry.kind: " + kind);
  }

  sc.flow.cflNumber = cfg.get_double("flow.cflNumber", 0.4);
  sc.flow.derivativeOrder = static_cast<int>(cfg.get_int("flow.derivativeOrder", 4));
  if (sc.flow.derivativeOrder != 2 && sc.flow.derivativeOrder != 4)
    throw config_error("flow.derivativeOrder must be 2 or 4");
  sc.flow.tEnd = cfg.get_double("flow.tEnd", 0.0);
  sc.flow.stopWhenMaxHExceeds = cfg.get_double("flow.stopWhenMaxHExceeds", 0.0);
  sc.flow.regridEvery = static_cast<int>(cfg.get_int("flow.regridEvery", 0));
  sc.flow.curvatureWeightedRegrid = cfg.get_bool("flow.curvatureWeightedRegrid", false);
  sc.flow.tangentialRedistribution = cfg.get_bool("flow.tangentialRedistribution", false);
  sc.flow.recordEvery = static_cast<int>(cfg.get_int("flow.recordEvery", 25));
  if (sc.flow.cflNumber <= 0.0 || sc.flow.cflNumber > 1.0)
    throw config_error("flow.cflNumber must lie in (0, 1]");

  static const char* known[] = {"pinching",  "gradientRatio", "gradientBound",
                                "secondDeriv", "harnack",     "halfDouble",
                                "neck",      "cylindricalTrend", "positionBound",
                                "dichotomy"};
  for (const char* m : known)
    if (cfg.get_bool(std::string("monitors.") + m, false)) sc.monitors.insert(m);

  sc.neck.epsNeck = cfg.get_double("neck.epsNeck", 0.1);
  sc.neck.kReg = static_cast<int>(cfg.get_int("neck.kReg", 2));
  sc.neck.L = cfg.get_double("neck.L", 2.0);
  sc.dichotomyEta0 = cfg.get_double("dichotomy.eta0", 0.01);
  sc.HSharpFraction = cfg.get_double("estimates.HSharpFraction", 0.1);
  sc.catalogSamples = cfg.get_int("catalog.samples", 200);
  return sc;
}

struct ScenarioOutcome {
  int exitCode = 0;
  EstimateReport report;
  std::string csv;
};

namespace sdetail {

// Per-step aggregates gathered by a flow monitor; small enough to keep for
// every accepted step even on long runs.
struct StepStat {
  double t = 0.0, dt = 0.0;
  double maxH2 = 0.0, maxA2 = 0.0, maxRatio = 0.0;
  double minQ = 0.0, minU = 0.0;
  double supGradRatio = 0.0, epsMeas = 0.0;
  double g1cand = 0.0, g3cand = 0.0;  // gradient-constant candidates
  double maxF2 = 0.0;
  bool pinchedEverywhere = true;
};

inline StepStat collect(const ProfileState& st, const ProfileGeometry& g, double dt,
                        const PinchingParams& p) {
  StepStat s;
  s.t = st.time;
  s.dt = dt;
  s.minQ = 1e300;
  s.minU = 1e300;
  s.epsMeas = 1e300;
  for (int i = 0; i < g.N; ++i) {
    s.maxH2 = std::max(s.maxH2, g.H2[i]);
    s.maxA2 = std::max(s.maxA2, g.A2[i]);
    s.maxRatio = std::max(s.maxRatio, g.A2[i] / g.H2[i]);
    s.minQ = std::min(s.minQ, g.A2[i] + p.a - p.c * g.H2[i]);
    s.minU = std::min(s.minU, st.u[i]);
    const double gap = p.c * g.H2[i] - g.A2[i];
    if (gap > 0.0) {
      s.supGradRatio = std::max(s.supGradRatio, g.gradA2[i] / (gap * gap));
      if (g.A2[i] > 0.0) s.epsMeas = std::min(s.epsMeas, gap / g.A2[i]);
    } else {
      s.pinchedEverywhere = false;
    }
    s.g1cand = std::max(s.g1cand, g.gradA2[i] / (1.0 + g.A2[i] * g.A2[i]));
    s.g3cand = std::max(s.g3cand, g.grad2A2[i] / (1.0 + g.A2[i] * g.A2[i] * g.A2[i]));
    double f2 = st.u[i] * st.u[i];
    for (int c = 0; c < st.k; ++c) f2 += st.chiAt(i, c) * st.chiAt(i, c);
    s.maxF2 = std::max(s.maxF2, f2);
  }
  return s;
}

inline SeriesRow to_row(const StepStat& s, long neckCount, const std::string& event) {
  SeriesRow r;
  r.t = s.t;
  r.dt = s.dt;
  r.maxH = std::sqrt(s.maxH2);
  r.maxA2 = s.maxA2;
  r.maxRatio = s.maxRatio;
  r.minQ = s.minQ;
  r.minU = s.minU;
  r.gradRatio = s.supGradRatio;
  r.neckCount = neckCount;
  r.event = event;
  return r;
}

inline long neck_count_at_max(const SampledGeometry& sg, const NeckParams& np) {
  int best = 0;
  for (int i = 1; i < sg.size(); ++i)
    if (sg.H2[i] > sg.H2[best]) best = i;
  try {
    return neck_detect(sg, best, np).isNeck ? 1 : 0;
  } catch (const flow_error&) {
    return 0;
  }
}

inline ScenarioOutcome run_catalog(const Scenario& sc) {
  ScenarioOutcome out;
  std::ostringstream csv;
  CsvWriter w(csv);
  const double T = sc.flow.tEnd;
  const long samples = std::max<long>(2, sc.catalogSamples);
  const double dt = T / (samples - 1);
  double minQ = 1e300, maxH2 = 0.0, ratioLo = 1e300, ratioHi = -1e300;
  for (long j = 0; j < samples; ++j) {
    const double t = dt * j;
    ModelGeometry m = shrink_exact(sc.model, t);
    const CurvatureFrame f = curvature_frame(m);
    const double A2 = norm_A2(f), H2 = norm_H2(f);
    const double ratio = A2 / H2;
    ratioLo = std::min(ratioLo, ratio);
    ratioHi = std::max(ratioHi, ratio);
    minQ = std::min(minQ, A2 + sc.pinching.a - sc.pinching.c * H2);
    maxH2 = std::max(maxH2, H2);
    SeriesRow r;
    r.t = t;
    r.dt = dt;
    r.maxH = std::sqrt(H2);
    r.maxA2 = A2;
    r.maxRatio = ratio;
    r.minQ = A2 + sc.pinching.a - sc.pinching.c * H2;
    r.minU = (m.kind == ModelGeometry::Kind::ProductSpheres) ? std::min(m.r1, m.r2) : m.r;
    r.gradRatio = 0.0;
    r.neckCount = (m.kind == ModelGeometry::Kind::Cylinder) ? 1 : 0;
    r.event = (j + 1 == samples) ? "Step" : "";
    w.row(r);
  }
  out.csv = csv.str();
  out.report.set("scenario.name", sc.name);
  out.report.set("scenario.kind", std::string("catalog"));
  out.report.set("series.maxH", std::sqrt(maxH2));
  out.report.set("series.ratioSpread", ratioHi - ratioLo);
  if (sc.monitors.count("pinching")) {
    const bool ok = -minQ >= -1e-6 * maxH2;
    out.report.set("check.pinching.pass", ok);
    out.report.set("check.pinching.worstGap", -minQ);
  }
  if (!out.report.all_pass()) out.exitCode = 1;
  return out;
}

}  // namespace sdetail

inline ScenarioOutcome run_scenario(const Scenario& sc) {
  if (!sc.usesProfile) return sdetail::run_catalog(sc);

  ScenarioOutcome out;
  ProfileState st = product_circle_state(sc.pinching.n, sc.presetK, sc.presetN, sc.presetR,
                                         sc.presetBigR, sc.bumpAmplitude, sc.bumpMode);
  double R0sq = 0.0;
  for (int i = 0; i < st.N; ++i) {
    double f2 = st.u[i] * st.u[i];
    for (int c = 0; c < st.k; ++c) f2 += st.chiAt(i, c) * st.chiAt(i, c);
    R0sq = std::max(R0sq, f2);
  }

  std::vector<sdetail::StepStat> stats;
  StepMonitor collector = [&](const ProfileState& s, const ProfileGeometry& g, double dt,
                              const std::vector<FlowEvent>&) {
    stats.push_back(sdetail::collect(s, g, dt, sc.pinching));
  };

  Trajectory traj;
  RunSummary sum = run(std::move(st), sc.flow, {collector}, &traj);

  bool invariantViolation = false;
  for (const FlowEvent& e : sum.events)
    if (e.kind == FlowEvent::Kind::InvariantViolation) invariantViolation = true;

  // CSV: one row per recorded snapshot, terminal event on the last row.
  std::ostringstream csv;
  CsvWriter w(csv);
  const int every = std::max(1, sc.flow.recordEvery);
  for (size_t k = 0; k < traj.snaps.size(); ++k) {
    const size_t statIdx = k * every;
    if (statIdx >= stats.size()) break;
    const Snapshot& sn = traj.snaps[k];
    long necks = 0;
    if (sc.monitors.count("neck"))
      necks = sdetail::neck_count_at_max(sampled_geometry(sn, sc.pinching.n), sc.neck);
    std::string ev;
    if (k + 1 == traj.snaps.size()) {
      if (sum.singularity) ev = "SingularityDetected";
      else if (invariantViolation) ev = "InvariantViolation";
      else ev = "Step";
    }
    w.row(sdetail::to_row(stats[statIdx], necks, ev));
  }
  out.csv = csv.str();

  EstimateReport& rep = out.report;
  rep.set("scenario.name", sc.name);
  rep.set("scenario.kind", std::string("profile"));
  rep.set("run.steps", sum.steps);
  rep.set("run.finalTime", sum.finalState.time);
  rep.set("run.finalMaxH", sum.finalMaxH);
  rep.set("run.singularity", sum.singularity);

  double minQ = 1e300, maxH2 = 0.0, supGradRatio = 0.0, epsMeas = 1e300;
  double worstPos = -1e300;
  const double tEnd = stats.empty() ? 0.0 : stats.back().t;
  double g1first = 0.0, g3first = 0.0, g1second = 0.0, g3second = 0.0;
  double epsFirst = 1e300;
  bool pinchedAll = true;
  double eulerSlack = 0.0;  // forward-Euler excess of |F|^2 per step: dt^2 |H|^2
  for (const auto& s : stats) {
    minQ = std::min(minQ, s.minQ);
    maxH2 = std::max(maxH2, s.maxH2);
    supGradRatio = std::max(supGradRatio, s.supGradRatio);
    epsMeas = std::min(epsMeas, s.epsMeas);
    eulerSlack += s.dt * s.dt * s.maxH2;
    worstPos = std::max(worstPos, s.maxF2 - (R0sq - 2.0 * sc.pinching.n * s.t + eulerSlack));
    pinchedAll = pinchedAll && s.pinchedEverywhere;
    if (s.t <= 0.5 * tEnd) {
      g1first = std::max(g1first, s.g1cand);
      g3first = std::max(g3first, s.g3cand);
      epsFirst = std::min(epsFirst, s.epsMeas);
    } else {
      g1second = std::max(g1second, s.g1cand);
      g3second = std::max(g3second, s.g3cand);
    }
  }

  if (sc.monitors.count("pinching")) {
    const bool ok = minQ <= 1e-6 * maxH2;  // min(c|H|^2-|A|^2-a) >= -1e-6 max|H|^2
    rep.set("check.pinching.pass", ok);
    rep.set("check.pinching.minGap", -minQ);
    rep.set("check.pinching.maxH2", maxH2);
  }
  if (sc.monitors.count("positionBound")) {
    rep.set("check.positionBound.pass", worstPos <= 1e-6);
    rep.set("check.positionBound.worstMargin", worstPos);
  }
  if (sc.monitors.count("gradientRatio")) {
    const double cn = c_n_constant(sc.pinching.n).value();
    const double kappaN = 3.0 / (sc.pinching.n + 2) - sc.pinching.c;
    const double bound =
        (pinchedAll && kappaN > 0.0 && epsMeas < 1e300)
            ? 3.0 * cn / (2.0 * kappaN * (sc.pinching.n + 2) * epsMeas)
            : 0.0;
    rep.set("check.gradientRatio.pass", pinchedAll && supGradRatio <= bound);
    rep.set("check.gradientRatio.supRatio", supGradRatio);
    rep.set("check.gradientRatio.bound", bound);
    rep.set("check.gradientRatio.epsMeas", epsMeas);
  }
  if (sc.monitors.count("gradientBound")) {
    // First-half fit: measured maximum of |grad A|^2/(1+|A|^4) joined with the
    // structural constant bound(epsFirst) (c n - 1)^2 implied by the gradient
    // estimate and gap <= (c n - 1)|A|^2.
    const double cn = c_n_constant(sc.pinching.n).value();
    const double kappaN = 3.0 / (sc.pinching.n + 2) - sc.pinching.c;
    double gamma1 = g1first;
    if (pinchedAll && kappaN > 0.0 && epsFirst < 1e300) {
      const double slack = sc.pinching.c * sc.pinching.n - 1.0;
      if (slack > 0.0)
        gamma1 = std::max(gamma1, 3.0 * cn * slack * slack /
                                      (2.0 * kappaN * (sc.pinching.n + 2) * epsFirst));
    }
    rep.set("check.gradientBound.pass", g1second <= gamma1 * (1.0 + 1e-9) + 1e-12);
    rep.set("const.gamma1", gamma1);
    rep.set("const.gamma2", gamma1);
    rep.set("check.gradientBound.secondHalfMax", g1second);
  }
  if (sc.monitors.count("secondDeriv")) {
    rep.set("check.secondDeriv.pass", g3second <= g3first * (1.0 + 1e-9) + 1e-12);
    rep.set("const.gamma3", g3first);
    rep.set("const.gamma4", g3first);
    rep.set("check.secondDeriv.secondHalfMax", g3second);
  }

  const double HSharp = sc.HSharpFraction * std::sqrt(maxH2);
  double cSharp = 0.0;
  bool haveCSharp = false;
  if (sc.monitors.count("harnack") || sc.monitors.count("halfDouble") ||
      sc.monitors.count("dichotomy")) {
    try {
      cSharp = measure_csharp(traj, HSharp);
      haveCSharp = true;
      rep.set("const.cSharp", cSharp);
      rep.set("const.HSharp", HSharp);
      rep.set("const.dSharp", d_sharp(sc.pinching.n, cSharp));
    } catch (const no_qualifying_points&) {
      rep.set("const.cSharp", std::string("unavailable"));
    }
  }
  if (sc.monitors.count("harnack")) {
    bool pass = haveCSharp;
    if (haveCSharp) {
      for (const Snapshot& sn : traj.snaps) {
        SampledGeometry sg = sampled_geometry(sn, sc.pinching.n);
        int best = 0;
        for (int i = 1; i < sg.size(); ++i)
          if (sg.H2[i] > sg.H2[best]) best = i;
        try {
          if (!harnack_check(sg, best, cSharp, HSharp, 2.0)) pass = false;
        } catch (const below_threshold&) {
        }
      }
    }
    rep.set("check.harnack.pass", pass);
  }
  if (sc.monitors.count("halfDouble")) {
    bool pass = haveCSharp;
    if (haveCSharp && !traj.snaps.empty()) {
      const size_t last = traj.snaps.size() - 1;
      const Snapshot& sn = traj.snaps[last];
      int best = 0;
      for (int i = 1; i < static_cast<int>(sn.H2.size()); ++i)
        if (sn.H2[i] > sn.H2[best]) best = i;
      try {
        pass = half_double_check(traj, last, best, cSharp, HSharp);
      } catch (const flow_error&) {
        pass = false;
      }
    }
    rep.set("check.halfDouble.pass", pass);
  }
  if (sc.monitors.count("neck")) {
    // A neck must appear in the final 10% of the run (by time).
    bool found = false;
    double bestDev = 1e300;
    for (const Snapshot& sn : traj.snaps) {
      if (sn.time < 0.9 * tEnd) continue;
      SampledGeometry sg = sampled_geometry(sn, sc.pinching.n);
      int best = 0;
      for (int i = 1; i < sg.size(); ++i)
        if (sg.H2[i] > sg.H2[best]) best = i;
      try {
        NeckDetection nd = neck_detect(sg, best, sc.neck);
        bestDev = std::min(bestDev, std::max(nd.deviation, nd.derivDeviation));
        if (nd.isNeck) found = true;
      } catch (const flow_error&) {
      }
    }
    rep.set("check.neck.pass", found);
    rep.set("check.neck.bestDeviation", bestDev);
  }
  if (sc.monitors.count("cylindricalTrend")) {
    const CylindricalTrend tr = cylindrical_trend(traj);
    rep.set("trend.asymptote", tr.asymptote);
    const double target = 1.0 / (sc.pinching.n - 1);
    double initialH = tr.points.empty() ? 0.0 : tr.points.front().first;
    bool pass = true;
    bool reached = false;
    for (const auto& [H, ratio] : tr.points)
      if (initialH > 0.0 && H >= 50.0 * initialH) {
        reached = true;
        if (std::abs(ratio - target) > 0.02) pass = false;
      }
    rep.set("check.cylindricalTrend.pass", pass && reached);
    rep.set("check.cylindricalTrend.reached50x", reached);
  }
  if (sc.monitors.count("dichotomy") && haveCSharp && !traj.snaps.empty()) {
    const Snapshot& sn = traj.snaps.back();
    SampledGeometry sg = sampled_geometry(sn, sc.pinching.n);
    // Base point: minimal ratio (most spherical available point).
    int base = 0;
    for (int i = 1; i < sg.size(); ++i)
      if (sg.A2[i] / sg.H2[i] < sg.A2[base] / sg.H2[base]) base = i;
    try {
      DichotomyParams dp = make_dichotomy_params(sc.dichotomyEta0, cSharp);
      DichotomyResult dr = dichotomy_classify(sg, base, dp, HSharp / dp.gamma0);
      rep.set("dichotomy.kind", std::string(dr.kind == DichotomyKind::Compact ? "Compact"
                                            : dr.kind == DichotomyKind::NeckCandidate
                                                ? "NeckCandidate"
                                                : "Inconclusive"));
      if (dr.kind == DichotomyKind::NeckCandidate)
        rep.set("check.dichotomy.pass", dr.hLowerBoundOk);
    } catch (const flow_error& e) {
      rep.set("dichotomy.kind", std::string("unavailable: ") + e.what());
    }
  }

  if (invariantViolation) {
    out.exitCode = 3;  // blowup that escaped singularity classification
  } else if (!rep.all_pass()) {
    out.exitCode = 1;
  }
  return out;
}

inline ScenarioOutcome run_scenario_files(const std::string& configPath,
                                          const std::string& outDir) {
  const Config cfg = Config::parse_file(configPath);
  const Scenario sc = parse_scenario(cfg);
  ScenarioOutcome out = run_scenario(sc);
  {
    std::ofstream f(outDir + "/series.csv", std::ios::binary);
    if (!f) throw config_error("cannot write " + outDir + "/series.csv");
    f << out.csv;
  }
  out.report.write_file(outDir + "/report.txt");
  return out;
}

}  // namespace pinchflow
