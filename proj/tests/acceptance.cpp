// Acceptance gate: twelve numbered criteria covering fixed-point algebra,
// multiplier degeneracies, Lorenz saddle conditions, Lyapunov identities,
// the direction-field continuity dichotomy, cycle and bifurcation values,
// the butterfly bracket, the quadratic normal-form criterion, chart
// consistency, and the property suites. One PASS/FAIL line per criterion;
// exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dlorenz/bifurcation.hpp"
#include "dlorenz/chart.hpp"
#include "dlorenz/lyapunov.hpp"
#include "dlorenz/manifolds.hpp"
#include "dlorenz/maps.hpp"
#include "dlorenz/pseudohyp.hpp"
#include "dlorenz/spectral.hpp"
#include "oracles.hpp"

using namespace dlorenz;

namespace {

struct Gate {
  std::vector<std::string> fails;

  void require(bool ok, const std::string& msg) {
    if (!ok) fails.push_back(msg);
  }
  template <class T>
  void close(T got, T want, T tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      std::ostringstream os;
      os << what << ": got " << got << ", want " << want << " +- " << tol;
      fails.push_back(os.str());
    }
  }
};

double maxnorm(const State& a, const State& b) {
  return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])});
}

double line_angle_any(const State& a, const State& b) {
  const double na = std::sqrt(dot(a, a)), nb = std::sqrt(dot(b, b));
  const State c = cross(a, b);
  return std::atan2(std::sqrt(dot(c, c)), std::abs(dot(a, b))) * (na > 0 && nb > 0 ? 1.0 : 0.0);
}

// Spectra for the two reference parameter sets are shared by criteria 4 and 5.
struct SpectrumRun {
  MapSpec map;
  LyapunovSpectrum sp;
  double seconds = 0.0;
};
std::vector<SpectrumRun> g_runs;

void ensure_spectra() {
  if (!g_runs.empty()) return;
  for (double m2 : {0.85, 0.815}) {
    SpectrumRun r{MapSpec::henon3d(0.0, m2, 0.7), {}, 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    r.sp = lyapunov_spectrum(r.map, {0.1, 0.1, 0.1}, {});
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    g_runs.push_back(std::move(r));
  }
}

void c1_fixed_point_algebra(Gate& g) {
  const MapSpec m = MapSpec::henon3d(0.0, 0.85, 0.7);
  auto recs = fixed_point_records(m);  // warm
  const auto t0 = std::chrono::steady_clock::now();
  recs = fixed_point_records(m);
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  g.require(recs.size() == 2, "expected 2 fixed points, got " + std::to_string(recs.size()));
  if (recs.size() == 2) {
    g.close(recs[0].points[0][0], 0.0, 1e-12, "lower fixed point");
    g.close(recs[1].points[0][0], 0.55, 1e-12, "upper fixed point");
    for (const auto& r : recs) {
      g.require(maxnorm(m.eval(r.points[0]), r.points[0]) < 1e-12, "fixed-point residual");
      g.require(r.points[0][0] == r.points[0][1] && r.points[0][1] == r.points[0][2],
                "fixed point off the diagonal");
    }
  }
  g.require(sec < 1e-3, "runtime " + std::to_string(sec) + " s, need < 1 ms");
}

void c2_triple_multiplier_point(Gate& g) {
  const MapSpec m = MapSpec::henon3d(-0.25, 1.0, 1.0);
  auto recs = fixed_point_records(m);  // warm
  const auto t0 = std::chrono::steady_clock::now();
  recs = fixed_point_records(m);
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const EquilibriumRecord* hit = nullptr;
  for (const auto& r : recs)
    if (maxnorm(r.points[0], {0.5, 0.5, 0.5}) < 1e-8) hit = &r;
  g.require(hit != nullptr, "no fixed point at (0.5, 0.5, 0.5)");
  if (hit) {
    auto mult = hit->multipliers;
    std::sort(mult.begin(), mult.end(),
              [](const Complex& a, const Complex& b) { return a.real() < b.real(); });
    const double targets[3] = {-1.0, -1.0, 1.0};
    for (int k = 0; k < 3; ++k) {
      g.require(std::abs(mult[k] - Complex(targets[k], 0.0)) < 1e-8,
                "multiplier " + std::to_string(k) + " not within 1e-8 of " +
                    std::to_string(targets[k]));
    }
  }
  g.require(sec < 1e-3, "runtime " + std::to_string(sec) + " s, need < 1 ms");
}

void c3_lorenz_saddle_conditions(Gate& g) {
  const MapSpec m = MapSpec::henon3d(0.0, 0.85, 0.7);
  auto recs = fixed_point_records(m);  // warm
  const auto t0 = std::chrono::steady_clock::now();
  recs = fixed_point_records(m);
  const EquilibriumRecord* saddle = nullptr;
  for (const auto& r : recs)
    if (classify(r).lorenz_saddle()) saddle = &r;
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  g.require(saddle != nullptr, "no fixed point satisfies the Lorenz sign conditions");
  if (!saddle) return;
  const auto rep = classify(*saddle);
  g.require(rep.cond_a && rep.cond_b && rep.cond_c, "conditions (a)-(c) not all satisfied");
  g.require(rep.sigma > 1.0, "saddle value sigma <= 1");
  const double xi = saddle->points[0][0];
  const auto dk = oracles::cubic_roots_dk(2.0 * xi, -0.85, -0.7);
  for (const auto& root : dk) {
    double best = 1e9;
    for (const auto& lam : saddle->multipliers) best = std::min(best, std::abs(lam - root));
    g.require(best < 1e-8, "multiplier disagrees with the independent cubic oracle");
  }
  g.require(sec < 1e-3, "runtime " + std::to_string(sec) + " s, need < 1 ms");
}

void c4_lyapunov_sum_identity(Gate& g) {
  ensure_spectra();
  const double lnb = std::log(0.7);
  for (const auto& r : g_runs) {
    g.require(!r.sp.escaped, r.map.describe() + ": orbit escaped");
    const double sum = r.sp.exponents[0] + r.sp.exponents[1] + r.sp.exponents[2];
    g.close(sum, lnb, 1e-3, r.map.describe() + ": exponent sum vs ln|B|");
    g.close(sum, -0.35667, 1.1e-3, r.map.describe() + ": exponent sum vs analytic value");
    g.require(r.seconds < 2.0,
              r.map.describe() + ": runtime " + std::to_string(r.seconds) + " s, need < 2 s");
  }
}

void c5_expansion_sign_pattern(Gate& g) {
  ensure_spectra();
  for (const auto& r : g_runs) {
    const auto signs = check_sign_conditions(r.sp, 1e-3);
    g.require(signs[0], r.map.describe() + ": L1 > 0 fails");
    g.require(signs[1], r.map.describe() + ": L1 + L2 > 0 fails");
    g.require(signs[2], r.map.describe() + ": sum < 0 fails");
  }
}

void c6_continuity_test_dichotomy(Gate& g) {
  struct Case {
    double m2;
    LMPStatus want;
  };
  for (const Case c : {Case{0.815, LMPStatus::ConsistentPseudohyperbolic},
                       Case{0.85, LMPStatus::ContinuityViolated}}) {
    const MapSpec m = MapSpec::henon3d(0.0, c.m2, 0.7);
    const auto t0 = std::chrono::steady_clock::now();
    const OrbitSegment seg = orbit(m, {0.1, 0.1, 0.1}, 10000, 1000000, 1e6);
    const auto samples = strong_contracting_field(m, seg, 1000);
    const LMPGraph graph = lmp_graph(samples, 100000, 1, 1, 24, 1e-7);
    const LMPVerdict v = lmp_verdict(graph, 0.1);
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string tag = m.describe();
    g.require(v.status == c.want, tag + ": verdict " + lmp_status_name(v.status) + ", want " +
                                      lmp_status_name(c.want) +
                                      (v.note.empty() ? "" : " (" + v.note + ")"));
    if (c.want == LMPStatus::ConsistentPseudohyperbolic) {
      g.require(v.smallest_bin_p95 < 0.1, tag + ": smallest-bin p95 " +
                                              std::to_string(v.smallest_bin_p95) +
                                              ", need < 0.1 rad");
    } else {
      g.require(v.smallest_bin_p95 > 0.5, tag + ": smallest-bin p95 " +
                                              std::to_string(v.smallest_bin_p95) +
                                              ", need > 0.5 rad");
    }
    g.require(sec < 30.0, tag + ": runtime " + std::to_string(sec) + " s, need < 30 s");
  }
}

void c7_period2_cycle_location(Gate& g) {
  const MapSpec m = MapSpec::henon3d(1.77, -0.925, -0.95);
  const EquilibriumRecord rec = find_cycle(m, 2, {0.85, 0.13, 0.85});
  g.require(rec.period == 2, "period != 2");
  double bx = 1e9, by = 1e9;
  for (const auto& p : rec.points) {
    if (std::abs(p[0] - 0.85) < bx) {
      bx = std::abs(p[0] - 0.85);
      by = std::abs(p[1] - 0.126);
    }
  }
  g.require(bx <= 0.01, "cycle x0 off by " + std::to_string(bx) + ", need <= 0.01");
  g.require(by <= 0.01, "cycle y0 off by " + std::to_string(by) + ", need <= 0.01");
}

void expect_event(Gate& g, const BranchResult& br, BifurcationKind kind, double where, double tol,
                  bool check_minus_one, const std::string& tag) {
  const BifurcationEvent* hit = nullptr;
  for (const auto& ev : br.events)
    if (ev.kind == kind && std::abs(ev.param_value - where) <= tol) hit = &ev;
  if (!hit) {
    std::ostringstream os;
    os << tag << ": no " << bifurcation_kind_name(kind) << " event within " << tol << " of "
       << where << " (events:";
    for (const auto& ev : br.events)
      os << " " << bifurcation_kind_name(ev.kind) << "@" << ev.param_value;
    os << ")";
    g.fails.push_back(os.str());
    return;
  }
  if (check_minus_one) {
    double best = 1e9;
    for (const auto& lam : hit->multipliers) best = std::min(best, std::abs(lam - Complex(-1, 0)));
    g.require(best < 1e-6, tag + ": refined event multiplier not within 1e-6 of -1 (off by " +
                               std::to_string(best) + ")");
  }
}

void c8_continuation_values(Gate& g) {
  const MapSpec base = MapSpec::henon3d(2.1, -1.05, -0.8);

  auto t0 = std::chrono::steady_clock::now();
  const auto recs = fixed_point_records(base);
  g.require(!recs.empty() && recs.back().topo_type == std::pair<int, int>{3, 0},
            "expected a sink fixed point at the branch start");
  const BranchResult b1 = continue_branch(base, "M1", {2.1, 2.3}, 1e-3, recs.back());
  double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  expect_event(g, b1, BifurcationKind::PeriodDoubling, 2.172, 0.005, true, "fixed-point branch");
  g.require(sec < 10.0, "fixed-point branch: runtime " + std::to_string(sec) + " s, need < 10 s");

  // Period-2 cycle from its closed-form diagonal coordinates at M1 = 2.19.
  const double s = 1.0 + (-0.8) - (-1.05);
  const double prod = s * (1.0 - (-1.05)) - 2.19;
  const double sq = std::sqrt(s * s - 4.0 * prod);
  const State seed2{0.5 * (s + sq), 0.5 * (s - sq), 0.5 * (s + sq)};
  const MapSpec m2 = base.with("M1", 2.19);
  t0 = std::chrono::steady_clock::now();
  const BranchResult b2 =
      continue_branch(m2, "M1", {2.19, 2.25}, 1e-3, find_cycle(m2, 2, seed2));
  sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  expect_event(g, b2, BifurcationKind::PeriodDoubling, 2.223, 0.005, true, "period-2 branch");
  g.require(sec < 10.0, "period-2 branch: runtime " + std::to_string(sec) + " s, need < 10 s");

  const MapSpec m3 = base.with("M1", -1.9);
  t0 = std::chrono::steady_clock::now();
  const auto recs3 = fixed_point_records(m3);
  g.require(!recs3.empty(), "no fixed point at M1 = -1.9");
  const BranchResult b3 = continue_branch(m3, "M1", {-1.9, -2.1}, 1e-3, recs3.back());
  sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  expect_event(g, b3, BifurcationKind::Fold, -2.03, 0.01, false, "lower stability boundary");
  g.require(sec < 10.0, "fold branch: runtime " + std::to_string(sec) + " s, need < 10 s");
}

void c9_butterfly_bracket(Gate& g) {
  const MapSpec m = MapSpec::henon3d(2.275, -1.05, -0.8);
  ButterflyOpts bo;
  bo.period = 2;
  bo.cycle_seed = {0.31, 0.94, 0.31};
  bo.arclength_budget = 120.0;
  bo.tol_param = 5e-5;
  const auto t0 = std::chrono::steady_clock::now();
  const ButterflyResult res = butterfly_bisect(m, "M1", {2.27, 2.28}, bo);
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  g.require(res.value > 2.27 && res.value < 2.28,
            "value " + std::to_string(res.value) + " outside (2.27, 2.28)");
  const double width = res.bracket.second - res.bracket.first;
  g.require(width <= 1e-4, "final bracket width " + std::to_string(width) + ", need <= 1e-4");
  g.require(res.iterations > 0, "no bisection iterations recorded");
  g.require(sec < 60.0, "runtime " + std::to_string(sec) + " s, need < 60 s");
}

void c10_normal_form_criterion(Gate& g) {
  const NormalFormData h = normal_form_coeffs(MapSpec::henon3d(0.0, 0.0, -1.0));
  g.require(h.a == 0.0 && h.b == 0.0 && h.c == -1.0,
            "quadratic coefficients not exactly (0, 0, -1)");
  g.require(h.prop1_value == 1.0 && h.prop1_holds, "criterion does not hold exactly");

  const NormalFormData mi = normal_form_coeffs(MapSpec::mira3d(1.0, 0.0, 0.5));
  g.require(mi.a == -1.0 && mi.b == 0.0 && mi.c == 0.0,
            "quadratic coefficients not exactly (-1, 0, 0)");
  g.require(mi.prop1_value == -1.0 && !mi.prop1_holds, "criterion does not fail exactly");
}

void c11_chart_consistency(Gate& g) {
  ChartSpec spec{.base = MapSpec::henon3d(1.95, -0.85, -0.8),
                 .axis1 = {"M1", 1.45, 2.45, 500},
                 .axis2 = {"M2", -1.1, -0.6, 250}};
  spec.lyap = LyapunovSettings{.n_transient = 2000, .frame_warmup = 200, .n_iter = 20000};
  // A seed near the fixed-point diagonal: the basins in this window exclude
  // the origin's neighborhood.
  spec.s0 = {0.6, 0.6, 0.6};
  spec.workers = 8;
  const auto t0 = std::chrono::steady_clock::now();
  const ChartResult res = compute_chart(spec);
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  auto nearest = [](double t, const ChartAxis& ax) {
    const double w = (ax.hi - ax.lo) / ax.n;
    long i = std::lround((t - ax.lo) / w - 0.5);
    return std::clamp(i, 0L, static_cast<long>(ax.n) - 1);
  };
  auto cls_at = [&](double m1, double m2) {
    const long i = nearest(m1, spec.axis1), j = nearest(m2, spec.axis2);
    return static_cast<AttractorKind>(res.cls[static_cast<std::size_t>(j) * spec.axis1.n + i]);
  };
  auto name = [](AttractorKind k) { return std::string(attractor_kind_name(k)); };

  const AttractorKind A = cls_at(2.29, -1.05);
  g.require(A == AttractorKind::Chaotic, "cell nearest (2.29, -1.05) is " + name(A));
  const AttractorKind C = cls_at(1.732, -0.814);
  g.require(C == AttractorKind::Chaotic, "cell nearest (1.732, -0.814) is " + name(C));
  const AttractorKind S = cls_at(2.0, -1.05);
  g.require(S == AttractorKind::StablePoint || S == AttractorKind::StableCycle,
            "cell nearest (2.0, -1.05) is " + name(S));
  g.require(sec < 600.0,
            "full 500x250 chart took " + std::to_string(sec) + " s, need < 600 s");

  ChartSpec sub{.base = spec.base,
                .axis1 = {"M1", 2.2, 2.36, 40},
                .axis2 = {"M2", -1.09, -1.01, 20}};
  sub.lyap = spec.lyap;
  sub.s0 = spec.s0;
  sub.workers = 1;
  const ChartResult r1 = compute_chart(sub);
  sub.workers = 8;
  const ChartResult r8 = compute_chart(sub);
  g.require(r1.cls == r8.cls, "class grid differs between 1 and 8 workers");
  g.require(r1.l1.size() == r8.l1.size() &&
                std::memcmp(r1.l1.data(), r8.l1.data(), r1.l1.size() * sizeof(double)) == 0,
            "exponent grid not bitwise identical between 1 and 8 workers");
  g.require(r8.workers_used > 1, "worker pool did not engage");
}

void c12_property_suites(Gate& g) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<MapSpec> maps = {
      MapSpec::henon3d(0.0, 0.85, 0.7), MapSpec::mira3d(1.77, -0.925, -0.95),
      MapSpec::generalized_henon3d(-0.3, 0.0, -0.25, 2.2, 0.3, -0.2, 0.15),
      MapSpec::epsilon_normal_form(0.1, 0.2, 0.3, -1.0, 0.5, -2.0)};
  std::mt19937_64 rng(0xacce97ed);
  auto uni = [&](double lo, double hi) {
    return lo + (hi - lo) * (double(rng() >> 11) * 0x1.0p-53);
  };

  // Analytic Jacobian against central differences; inverse round-trip.
  for (const auto& m : maps) {
    for (int trial = 0; trial < 20; ++trial) {
      const State s{uni(-1, 1), uni(-1, 1), uni(-1, 1)};
      const Mat3 ja = m.jacobian(s);
      const double h = 1e-6;
      for (int col = 0; col < 3; ++col) {
        State sp = s, sm = s;
        sp[col] += h;
        sm[col] -= h;
        const State fp = m.eval(sp), fm = m.eval(sm);
        for (int row = 0; row < 3; ++row) {
          const double fd = (fp[row] - fm[row]) / (2.0 * h);
          const double an = ja(row, col);
          g.require(std::abs(fd - an) <= 1e-6 * (1.0 + std::abs(an)),
                    m.describe() + ": Jacobian entry vs finite difference");
        }
      }
      const State rt = m.eval_inverse(m.eval(s));
      g.require(maxnorm(rt, s) <= 1e-10 * (1.0 + std::abs(s[0]) + std::abs(s[1]) + std::abs(s[2])),
                m.describe() + ": inverse round-trip");
      if (!g.fails.empty()) break;  // one witness per class is enough
    }
  }

  // The strong-contracting field is invariant under the differential.
  {
    const MapSpec m = MapSpec::henon3d(0.0, 0.85, 0.7);
    const OrbitSegment seg = orbit(m, {0.1, 0.1, 0.1}, 10000, 20000, 1e6);
    const auto samples = strong_contracting_field(m, seg, 1000);
    g.require(samples.size() > 1000, "direction field too short");
    for (std::size_t k = 0; k + 1 < samples.size(); k += 97) {
      const State mapped = m.jacobian(samples[k].point) * samples[k].direction;
      const double ang = line_angle_any(mapped, samples[k + 1].direction);
      if (!(ang < 1e-5)) {
        g.fails.push_back("field invariance: line angle " + std::to_string(ang) + " at sample " +
                          std::to_string(k));
        break;
      }
    }
  }

  // Separatrix points reproduce the iterated images of their recorded sources.
  {
    const MapSpec m = MapSpec::henon3d(0.0, 0.85, 0.7);
    const auto recs = fixed_point_records(m);
    const SeparatrixPolyline poly =
        trace_separatrix(m, recs.back(), Branch::Plus, 6.0, 0.01, {});
    g.require(poly.points.size() > 100, "separatrix trace too short");
    long checked = 0;
    for (std::size_t i = 0; i < poly.points.size(); i += 53) {
      if (poly.source_seg[i] < 0) continue;  // seed segment has no source
      State q = poly.sources[i];
      for (int k = 0; k < poly.effective_power; ++k) q = m.eval(q);
      if (!(maxnorm(q, poly.points[i]) <= 1e-8)) {
        g.fails.push_back("separatrix self-consistency broken at point " + std::to_string(i));
        break;
      }
      ++checked;
    }
    g.require(checked > 10, "too few separatrix source checks");
  }

  // On a linear map the field must align with the weakest eigendirection.
  {
    const MapSpec lin = MapSpec::generalized_henon3d(-0.3, 0.0, -0.25, 2.2, 0.0, 0.0, 0.0);
    OrbitSegment seg;
    seg.points.assign(3000, State{0.0, 0.0, 0.0});
    const auto samples = strong_contracting_field(lin, seg, 1000);
    g.require(!samples.empty(), "no samples on the linear map");
    const State expected{1.0, -0.3, 0.09};  // eigenvector of the -0.3 eigenvalue
    for (const auto& s : {samples.front(), samples.back()}) {
      const double ang = line_angle_any(s.direction, expected);
      g.require(ang < 1e-8,
                "linear-map direction off by " + std::to_string(ang) + " rad, need < 1e-8");
    }
  }

  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  g.require(sec < 300.0, "property suite took " + std::to_string(sec) + " s, need < 5 min");
}

}  // namespace

int main() {
  struct Criterion {
    const char* label;
    std::function<void(Gate&)> body;
  };
  const std::vector<Criterion> criteria = {
      {"fixed-point algebra", c1_fixed_point_algebra},
      {"triple multiplier point", c2_triple_multiplier_point},
      {"Lorenz saddle conditions", c3_lorenz_saddle_conditions},
      {"Lyapunov sum identity", c4_lyapunov_sum_identity},
      {"expansion sign pattern", c5_expansion_sign_pattern},
      {"continuity-test dichotomy", c6_continuity_test_dichotomy},
      {"period-2 cycle location", c7_period2_cycle_location},
      {"continuation bifurcation values", c8_continuation_values},
      {"butterfly bisection bracket", c9_butterfly_bracket},
      {"quadratic normal-form criterion", c10_normal_form_criterion},
      {"chart consistency", c11_chart_consistency},
      {"property suites", c12_property_suites},
  };

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Gate gate;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[k].body(gate);
    } catch (const std::exception& e) {
      gate.fails.push_back(std::string("exception: ") + e.what());
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2zu %s %8.2f s  %s\n", k + 1, gate.fails.empty() ? "PASS" : "FAIL",
                sec, criteria[k].label);
    for (const auto& f : gate.fails) std::printf("    - %s\n", f.c_str());
    if (!gate.fails.empty()) ++failures;
    std::fflush(stdout);
  }
  std::printf("acceptance: %zu/%zu criteria passed\n", criteria.size() - failures,
              criteria.size());
  return failures;
}
