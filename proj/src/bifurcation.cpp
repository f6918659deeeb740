#include "dlorenz/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

namespace dlorenz {

const char* bifurcation_kind_name(BifurcationKind k) {
  switch (k) {
    case BifurcationKind::PeriodDoubling: return "PeriodDoubling";
    case BifurcationKind::NeimarkSacker: return "NeimarkSacker";
    case BifurcationKind::Fold: return "Fold";
    case BifurcationKind::LossOfReturn: return "LossOfReturn";
  }
  return "?";
}

namespace {

std::string fmt_param(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", p);
  return buf;
}

CharCoeffs coeffs_of(const std::array<Complex, 3>& m) {
  const Complex sum = m[0] + m[1] + m[2];
  const Complex pair = m[0] * m[1] + m[0] * m[2] + m[1] * m[2];
  const Complex prod = m[0] * m[1] * m[2];
  return {-sum.real(), pair.real(), -prod.real()};
}

// chi(-1): zero when a real multiplier sits at -1.
double f_pd(const CharCoeffs& k) { return -1.0 + k.a - k.b + k.c; }
// chi(+1): zero when a real multiplier sits at +1.
double f_fold(const CharCoeffs& k) { return 1.0 + k.a + k.b + k.c; }
// Zero when a root pair has product 1: a unit-modulus complex pair or a
// real neutral saddle; certification separates the two.
double f_ns(const CharCoeffs& k) { return k.b - 1.0 - k.a * k.c + k.c * k.c; }

bool certify_pd(const std::array<Complex, 3>& m) {
  for (const auto& l : m)
    if (l.imag() == 0.0 && std::abs(l.real() + 1.0) <= 1e-6) return true;
  return false;
}
bool certify_fold(const std::array<Complex, 3>& m, double tol) {
  for (const auto& l : m)
    if (l.imag() == 0.0 && std::abs(l.real() - 1.0) <= tol) return true;
  return false;
}
bool certify_ns(const std::array<Complex, 3>& m) {
  for (const auto& l : m)
    if (l.imag() != 0.0 && std::abs(std::abs(l) - 1.0) <= 1e-6) return true;
  return false;
}

}  // namespace

BranchResult continue_branch(const MapSpec& map_template, const std::string& param_axis,
                             std::pair<double, double> range, double step,
                             const EquilibriumRecord& seed_record,
                             const ContinueOpts& opts) {
  if (!map_template.has_param(param_axis)) {
    throw usage_error("unknown parameter axis: " + param_axis);
  }
  if (!(step > 0.0)) throw usage_error("step must be positive");
  if (range.first == range.second) throw usage_error("degenerate parameter range");

  const int period = seed_record.period;
  const double dir = range.second > range.first ? 1.0 : -1.0;

  BranchResult res;

  auto solve_at = [&](double p, const State& seed) {
    return find_cycle(map_template.with(param_axis, p), period, seed, opts.newton);
  };

  EquilibriumRecord rec;
  try {
    rec = solve_at(range.first, seed_record.points.at(0));
  } catch (const error& e) {
    throw error("seed record does not converge at range start: " + std::string(e.what()));
  }
  res.points.push_back({range.first, rec});

  // Bisects one functional's sign change inside [pa, pb] down to a parameter
  // width well under refine_tol so the certifying multiplier lands within
  // 1e-6 of its target even when d(multiplier)/d(param) exceeds 1.
  auto refine_event = [&](double pa, const EquilibriumRecord& ra, double fa, double pb,
                          double fb, double (*func)(const CharCoeffs&))
      -> std::optional<std::pair<double, EquilibriumRecord>> {
    (void)fb;
    State seed = ra.points.at(0);
    EquilibriumRecord best = ra;
    double lo = pa, hi = pb, flo = fa;
    const double width = std::max(opts.refine_tol * 1e-2, 1e-12);
    while (std::abs(hi - lo) > width) {
      const double mid = 0.5 * (lo + hi);
      EquilibriumRecord rm;
      try {
        rm = solve_at(mid, seed);
      } catch (const error&) {
        res.notes.push_back("event refinement lost the branch near " + param_axis + "=" +
                            fmt_param(mid));
        return std::nullopt;
      }
      seed = rm.points.at(0);
      const double fm = func(coeffs_of(rm.multipliers));
      best = rm;
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return std::make_pair(0.5 * (lo + hi), best);
  };

  auto detect_events = [&](double pa, const EquilibriumRecord& ra, double pb,
                           const EquilibriumRecord& rb) {
    const CharCoeffs ka = coeffs_of(ra.multipliers);
    const CharCoeffs kb = coeffs_of(rb.multipliers);
    struct Probe {
      BifurcationKind kind;
      double (*func)(const CharCoeffs&);
    };
    static constexpr Probe probes[] = {
        {BifurcationKind::PeriodDoubling, f_pd},
        {BifurcationKind::Fold, f_fold},
        {BifurcationKind::NeimarkSacker, f_ns},
    };
    std::vector<BifurcationEvent> found;
    for (const Probe& pr : probes) {
      const double fa = pr.func(ka), fb = pr.func(kb);
      if (!(fa * fb < 0.0)) continue;
      auto refined = refine_event(pa, ra, fa, pb, fb, pr.func);
      if (!refined) continue;
      const auto& [p_ev, r_ev] = *refined;
      bool ok = false;
      switch (pr.kind) {
        case BifurcationKind::PeriodDoubling: ok = certify_pd(r_ev.multipliers); break;
        case BifurcationKind::Fold: ok = certify_fold(r_ev.multipliers, 1e-6); break;
        case BifurcationKind::NeimarkSacker: ok = certify_ns(r_ev.multipliers); break;
        default: break;
      }
      if (!ok) {
        res.notes.push_back(std::string(bifurcation_kind_name(pr.kind)) +
                            " functional zero without a certifying multiplier near " +
                            param_axis + "=" + fmt_param(p_ev) +
                            " (neutral saddle?) - discarded");
        continue;
      }
      found.push_back({pr.kind, p_ev, r_ev.multipliers});
    }
    std::sort(found.begin(), found.end(), [&](const auto& x, const auto& y) {
      return dir * x.param_value < dir * y.param_value;
    });
    for (auto& ev : found) {
      if (!res.events.empty() && res.events.back().kind == ev.kind &&
          std::abs(res.events.back().param_value - ev.param_value) < 10.0 * opts.refine_tol) {
        continue;  // same zero straddling a grid point
      }
      res.events.push_back(std::move(ev));
    }
  };

  // Newton failed at p_bad: refine the convergence boundary from the last
  // good point and classify it.
  auto terminate_branch = [&](double p_good, const EquilibriumRecord& r_good, double p_bad) {
    double lo = p_good, hi = p_bad;
    EquilibriumRecord r_lo = r_good;
    while (std::abs(hi - lo) > opts.refine_tol) {
      const double mid = 0.5 * (lo + hi);
      try {
        r_lo = solve_at(mid, r_lo.points.at(0));
        lo = mid;
      } catch (const error&) {
        hi = mid;
      }
    }
    const bool fold = certify_fold(r_lo.multipliers, 1e-2);
    res.events.push_back({fold ? BifurcationKind::Fold : BifurcationKind::LossOfReturn,
                          0.5 * (lo + hi), r_lo.multipliers});
    if (!fold) {
      res.notes.push_back("branch lost at " + param_axis + "=" + fmt_param(0.5 * (lo + hi)) +
                          " with no near-unit real multiplier");
    }
  };

  double p = range.first;
  double h = step;
  double deriv_est = 0.0;  // |dstate/dparam| from the last accepted step
  int halvings = 0;

  while (p != range.second) {
    double p_next = p + dir * h;
    if (dir * (p_next - range.second) >= 0.0) p_next = range.second;
    const double dp = std::abs(p_next - p);

    EquilibriumRecord nxt;
    bool converged = false;
    try {
      nxt = solve_at(p_next, rec.points.at(0));
      converged = true;
    } catch (const error&) {
    }

    if (converged) {
      const double jump = norm(nxt.points.at(0) - rec.points.at(0));
      const double allowed = 10.0 * dp * std::max(deriv_est, 1.0);
      if (jump > allowed) {
        if (halvings < opts.max_halvings) {
          ++halvings;
          h *= 0.5;
          res.notes.push_back("state jump " + fmt_param(jump) + " > " + fmt_param(allowed) +
                              " at " + param_axis + "=" + fmt_param(p_next) +
                              "; step halved to " + fmt_param(h));
          continue;
        }
        res.notes.push_back("state jump persists at minimal step near " + param_axis + "=" +
                            fmt_param(p_next) + "; accepting (possible branch switch)");
      }
      detect_events(p, rec, p_next, nxt);
      deriv_est = jump / dp;
      p = p_next;
      rec = nxt;
      res.points.push_back({p, rec});
      h = std::min(step, 2.0 * h);
      halvings = 0;
      continue;
    }

    if (halvings < opts.max_halvings) {
      ++halvings;
      h *= 0.5;
      res.notes.push_back("Newton failed at " + param_axis + "=" + fmt_param(p_next) +
                          "; step halved to " + fmt_param(h));
      continue;
    }
    terminate_branch(p, rec, p_next);
    break;
  }
  return res;
}

NormalFormData normal_form_coeffs(const MapSpec& map) {
  const std::vector<State> fps = find_fixed_points(map);
  if (fps.empty()) throw error("map has no fixed point");
  const double xi = fps.back()[0];
  const Kernel& k = map.kernel();
  NormalFormData d;
  d.B = k.B;
  d.C = k.g.dy(xi, xi);
  d.A = k.g.dz(xi, xi);
  d.a = k.g.gyy;
  d.b = k.g.gyz;
  d.c = k.g.gzz;
  d.epsilons = {1.0 - d.B, 1.0 - d.C, -(1.0 + d.A)};
  d.prop1_value = (d.c - d.a) * (d.a - d.b + d.c);
  d.prop1_holds = d.prop1_value > 0.0;
  return d;
}

MapSpec normal_form_map(const NormalFormData& d) {
  return MapSpec::generalized_henon3d(d.B, 0.0, d.C, d.A, d.a, d.b, d.c);
}

namespace {

// First event of the given kind, in walk order.
const BifurcationEvent* first_event(const BranchResult& br, BifurcationKind kind) {
  for (const auto& ev : br.events)
    if (ev.kind == kind) return &ev;
  return nullptr;
}

const BranchPoint* nearest_point(const BranchResult& br, double p) {
  const BranchPoint* best = nullptr;
  double dist = 0.0;
  for (const auto& bp : br.points) {
    const double d = std::abs(bp.param_value - p);
    if (!best || d < dist) {
      best = &bp;
      dist = d;
    }
  }
  return best;
}

}  // namespace

ScenarioStageLog scenario_probe(const MapSpec& map_template, const std::string& param_axis,
                                std::pair<double, double> range, const ScenarioOpts& opts) {
  if (!map_template.has_param(param_axis)) {
    throw usage_error("unknown parameter axis: " + param_axis);
  }
  if (!(range.first < range.second)) {
    throw usage_error("scenario range must be increasing");
  }

  ScenarioStageLog log;
  auto add = [&](const char* label, double p, int period, std::string detail) {
    log.stages.push_back({label, p, period, std::move(detail)});
  };

  // Where a following-stage seed comes from: the latest known cycle point.
  State probe_seed{0.1, 0.1, 0.1};
  double resume_from = range.first;

  // Spawns a doubled-period cycle just past a PD event by stepping off the
  // parent cycle along the -1 eigendirection of its monodromy.
  auto spawn_doubled = [&](const BranchResult& parent, const BifurcationEvent& pd,
                           int child_period) -> std::optional<EquilibriumRecord> {
    const double p_child = pd.param_value + opts.step;
    const BranchPoint* bp = nearest_point(parent, p_child);
    if (!bp) return std::nullopt;
    const MapSpec m = map_template.with(param_axis, p_child);
    EquilibriumRecord parent_here;
    try {
      parent_here = find_cycle(m, bp->record.period, bp->record.points.at(0), opts.cont.newton);
    } catch (const error&) {
      return std::nullopt;
    }
    std::vector<State> orbit_pts(parent_here.points.begin(), parent_here.points.end());
    const Mat3 mono = monodromy(m, orbit_pts);
    double lam = 0.0;
    for (const auto& l : parent_here.multipliers)
      if (l.imag() == 0.0 && (lam == 0.0 || std::abs(l.real() + 1.0) < std::abs(lam + 1.0)))
        lam = l.real();
    State v;
    try {
      v = real_eigenvector(mono, lam);
    } catch (const std::domain_error&) {
      return std::nullopt;
    }
    const double scale = 1.0 + norm(parent_here.points.at(0));
    for (double eta : {1e-4, 1e-3, 1e-2, 5e-2}) {
      const State kicked = parent_here.points.at(0) + (eta * scale) * v;
      // Just past a supercritical doubling the child cycle is the attractor,
      // so relaxing the kicked point keeps Newton out of the parent's basin.
      State settled = kicked;
      bool bounded = true;
      try {
        for (int k = 0; k < 20000; ++k) settled = m.eval(settled);
      } catch (const error&) {
        bounded = false;
      }
      for (const State& seed : {settled, kicked}) {
        if (&seed == &settled && !bounded) continue;
        try {
          return find_cycle(m, child_period, seed, opts.cont.newton);
        } catch (const error&) {
        }
      }
    }
    return std::nullopt;
  };

  // Empirical criticality: does a stable child object live just past the event?
  auto class_just_past = [&](double p_ev, const State& seed) {
    const MapSpec m = map_template.with(param_axis, std::min(p_ev + opts.step, range.second));
    const LyapunovSpectrum sp = lyapunov_spectrum(m, seed + State{1e-3, 0.0, 0.0}, opts.lyap);
    return classify_spectrum(sp, opts.class_tol);
  };

  // Stage 1: stable fixed point at the range start.
  std::optional<EquilibriumRecord> sink;
  for (const auto& r : fixed_point_records(map_template.with(param_axis, range.first)))
    if (r.topo_type == std::pair<int, int>{3, 0}) sink = r;
  if (!sink) {
    add("gap", range.first, 1, "no stable fixed point at range start");
  } else {
    add("sink", range.first, 1, "stable fixed point");
    probe_seed = sink->points.at(0);
  }

  // Stage 2: period-doubling cascade bookkeeping.
  const BifurcationEvent* ns_event = nullptr;
  int ns_period = 0;
  const BranchResult* ns_branch = nullptr;
  BranchResult b1, b2, b4;
  if (sink) {
    b1 = continue_branch(map_template, param_axis, range, opts.step, *sink, opts.cont);
    const BifurcationEvent* pd1 = first_event(b1, BifurcationKind::PeriodDoubling);
    if (!pd1) {
      add("gap", range.second, 1, "no period doubling on the period-1 branch");
    } else {
      add("period_doubling", pd1->param_value, 1, "fixed point loses stability");
      resume_from = pd1->param_value;
      auto rec2 = spawn_doubled(b1, *pd1, 2);
      if (!rec2) {
        add("gap", pd1->param_value, 2, "period-2 cycle not found past the PD");
      } else {
        add("sink", pd1->param_value, 2,
            rec2->topo_type == std::pair<int, int>{3, 0} ? "stable period-2 cycle"
                                                         : "period-2 cycle (not a sink)");
        probe_seed = rec2->points.at(0);
        b2 = continue_branch(map_template, param_axis,
                             {pd1->param_value + opts.step, range.second}, opts.step, *rec2,
                             opts.cont);
        const BifurcationEvent* ns2 = first_event(b2, BifurcationKind::NeimarkSacker);
        const BifurcationEvent* pd2 = first_event(b2, BifurcationKind::PeriodDoubling);
        const bool pd_first =
            pd2 && (!ns2 || pd2->param_value < ns2->param_value);
        if (pd_first) {
          add("period_doubling", pd2->param_value, 2, "period-2 cycle loses stability");
          resume_from = pd2->param_value;
          auto rec4 = spawn_doubled(b2, *pd2, 4);
          if (!rec4) {
            add("gap", pd2->param_value, 4, "period-4 cycle not found past the PD");
          } else {
            add("sink", pd2->param_value, 4,
                rec4->topo_type == std::pair<int, int>{3, 0} ? "stable period-4 cycle"
                                                             : "period-4 cycle (not a sink)");
            probe_seed = rec4->points.at(0);
            b4 = continue_branch(map_template, param_axis,
                                 {pd2->param_value + opts.step, range.second}, opts.step,
                                 *rec4, opts.cont);
            ns_event = first_event(b4, BifurcationKind::NeimarkSacker);
            ns_period = 4;
            ns_branch = &b4;
            if (!ns_event) add("gap", range.second, 4, "no Neimark-Sacker on the period-4 branch");
            log.scenario = "sc3";
          }
        } else if (ns2) {
          ns_event = ns2;
          ns_period = 2;
          ns_branch = &b2;
        } else {
          add("gap", range.second, 2, "no event on the period-2 branch");
        }
      }
    }
  }

  if (ns_event) {
    const BranchPoint* at_ns = nearest_point(*ns_branch, ns_event->param_value);
    if (at_ns) probe_seed = at_ns->record.points.at(0);
    const AttractorClass child = class_just_past(ns_event->param_value, probe_seed);
    const bool super = child.kind == AttractorKind::InvariantCurve;
    add("neimark_sacker", ns_event->param_value, ns_period,
        super ? "supercritical: stable invariant curve observed past the event"
              : "subcritical: no stable invariant curve observed past the event");
    if (super) {
      add("invariant_curve", ns_event->param_value, 0, "stable closed invariant curve");
    }
    if (ns_period == 2) log.scenario = super ? "sc2" : "sc1";
    resume_from = ns_event->param_value;
  }

  // Final stage: first Chaotic classification past the last known stage.
  const int n = std::max(opts.class_samples, 2);
  for (int i = 1; i <= n; ++i) {
    const double p = resume_from + (range.second - resume_from) * i / n;
    const MapSpec m = map_template.with(param_axis, p);
    const LyapunovSpectrum sp =
        lyapunov_spectrum(m, probe_seed + State{1e-3, 0.0, 0.0}, opts.lyap);
    const AttractorClass cls = classify_spectrum(sp, opts.class_tol);
    if (cls.kind == AttractorKind::Chaotic) {
      add("chaotic", p, 0, "positive maximal Lyapunov exponent");
      log.complete = true;
      break;
    }
  }
  return log;
}

}  // namespace dlorenz
