#include "dlorenz/manifolds.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace dlorenz {

const char* branch_name(Branch b) { return b == Branch::Plus ? "plus" : "minus"; }

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Tracer {
  const Kernel& kernel;
  int n_apply;
  double escape_bound;
  double max_spacing;
  double source_floor;
  long max_points;

  SeparatrixPolyline* poly;
  bool stop = false;

  bool apply(const State& s, State& out) const {
    State x = s;
    for (int i = 0; i < n_apply; ++i) {
      x = kernel.eval(x);
      if (!finite(x) || norm_inf(x) > escape_bound) return false;
    }
    out = x;
    return true;
  }

  void push(const State& q, const State& source, long seg) {
    if (!poly->points.empty()) poly->arclength += norm(q - poly->points.back());
    poly->points.push_back(q);
    poly->sources.push_back(source);
    poly->source_seg.push_back(seg);
    if (static_cast<long>(poly->points.size()) >= max_points) stop = true;
  }

  // Images of the source chord [a, b]: splits the chord until images are
  // closer than max_spacing, emitting interior points in polyline order.
  // Sa and Sb are already known; Sb itself is pushed by the caller.
  void refine(const State& a, const State& sa, const State& b, const State& sb, long seg) {
    if (stop) return;
    if (norm(sa - sb) <= max_spacing) return;
    if (norm(a - b) <= source_floor * (1.0 + norm_inf(a))) {
      ++poly->spacing_violations;
      return;
    }
    const State m = 0.5 * (a + b);
    State sm;
    if (!apply(m, sm)) {
      poly->escaped = true;
      stop = true;
      return;
    }
    refine(a, sa, m, sm, seg);
    if (stop) return;
    push(sm, m, seg);
    if (stop) return;
    refine(m, sm, b, sb, seg);
  }
};

}  // namespace

SeparatrixPolyline trace_separatrix(const MapSpec& map, const EquilibriumRecord& saddle,
                                    Branch branch, double arclength_budget,
                                    double max_spacing, const TraceOpts& opts) {
  if (saddle.topo_type != std::pair<int, int>{2, 1}) {
    throw error("separatrix tracing needs a saddle of type (2,1)");
  }
  if (saddle.multipliers[0].imag() != 0.0) {
    throw error("separatrix tracing needs a real unstable multiplier");
  }
  if (max_spacing <= 0.0) throw usage_error("max_spacing must be positive");
  if (arclength_budget <= 0.0) throw usage_error("arclength_budget must be positive");

  int power = opts.power > 0 ? opts.power : saddle.period;
  if (power % saddle.period != 0) {
    throw usage_error("power must be a multiple of the cycle period");
  }

  const State p = saddle.points.at(0);
  std::vector<State> power_orbit(static_cast<std::size_t>(power));
  power_orbit[0] = p;
  for (int i = 1; i < power; ++i) power_orbit[static_cast<std::size_t>(i)] =
      map.kernel().eval(power_orbit[static_cast<std::size_t>(i - 1)]);
  const Mat3 mono = monodromy(map, power_orbit);

  const double gamma = std::pow(saddle.multipliers[0].real(),
                                static_cast<double>(power / saddle.period));
  State v = real_eigenvector(mono, gamma);
  // Deterministic orientation: largest-magnitude component positive, so the
  // Plus/Minus split is stable under parameter perturbations.
  {
    int k = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(v[i]) > std::abs(v[k])) k = i;
    if (v[k] < 0.0) v = -1.0 * v;
  }

  SeparatrixPolyline poly;
  poly.branch = branch;
  poly.max_spacing = max_spacing;
  poly.gamma = gamma;
  poly.unstable_dir = v;

  // A negative multiplier swaps the two branches each application; iterate
  // the square so the traced branch maps into itself.
  const int n_apply = gamma < 0.0 ? 2 * power : power;
  poly.effective_power = n_apply;
  const double lambda = gamma < 0.0 ? gamma * gamma : gamma;

  const double eps = opts.seed_offset > 0.0 ? opts.seed_offset : 1e-7 * (1.0 + norm(p));
  poly.seed_offset = eps;

  Tracer tr{map.kernel(), n_apply, opts.escape_bound, max_spacing,
            opts.source_floor, opts.max_points, &poly};

  // Fundamental domain [eps, lambda*eps) on the eigenline, half-open so each
  // generation's first image continues the previous one seamlessly.
  const double sgn = branch == Branch::Plus ? 1.0 : -1.0;
  const int m0 = 16;
  for (int k = 0; k < m0; ++k) {
    const double t = eps * (1.0 + (lambda - 1.0) * k / m0);
    tr.push(p + (sgn * t) * v, State{kNaN, kNaN, kNaN}, -1);
  }
  poly.seed_count = m0;

  long gen_begin = 0, gen_end = m0;
  double prev_inc = -1.0, peak_inc = 0.0;
  int decay_streak = 0;
  while (!tr.stop && poly.arclength < arclength_budget) {
    const long next_begin = static_cast<long>(poly.points.size());
    const double len_before = poly.arclength;
    // Source chords start one point early so the chord joining the previous
    // generation's last point to this generation's first is refined too;
    // otherwise that boundary gap would grow by ~gamma each generation. The
    // image of that early point is bitwise the last point already traced.
    long first;
    State a, sa;
    if (gen_begin == 0) {
      first = 0;
      a = poly.points[0];
      if (!tr.apply(a, sa)) {
        poly.escaped = true;
        break;
      }
      tr.push(sa, a, 0);
    } else {
      first = gen_begin - 1;
      a = poly.points[static_cast<std::size_t>(first)];
      sa = poly.points[static_cast<std::size_t>(next_begin - 1)];
    }
    for (long i = first; i + 1 < gen_end && !tr.stop; ++i) {
      const State b = poly.points[static_cast<std::size_t>(i + 1)];
      State sb;
      if (!tr.apply(b, sb)) {
        poly.escaped = true;
        tr.stop = true;
        break;
      }
      tr.refine(a, sa, b, sb, i);
      if (tr.stop) break;
      tr.push(sb, b, i);
      a = b;
      sa = sb;
      if (poly.arclength >= arclength_budget) tr.stop = true;
    }
    gen_begin = next_begin;
    gen_end = static_cast<long>(poly.points.size());
    if (gen_end - gen_begin < 2) break;  // generation collapsed (escape/limits)
    // When the curve accumulates onto an attractor, generation increments
    // decay geometrically toward zero while point counts stay flat; cut the
    // tail off once increments have collapsed far below their running peak.
    const double inc = poly.arclength - len_before;
    peak_inc = std::max(peak_inc, inc);
    decay_streak = prev_inc >= 0.0 && inc < prev_inc ? decay_streak + 1 : 0;
    prev_inc = inc;
    if (decay_streak >= 2 && inc < 1e-5 * peak_inc) break;
  }
  return poly;
}

ClosestApproach closest_approach(const SeparatrixPolyline& poly,
                                 const EquilibriumRecord& saddle,
                                 double capture_radius) {
  if (capture_radius <= 0.0) throw usage_error("capture_radius must be positive");
  const State p = saddle.points.at(0);
  bool left = false;
  for (std::size_t i = 0; i < poly.points.size(); ++i) {
    const double d = norm(poly.points[i] - p);
    if (!left) {
      if (d > capture_radius) left = true;
      continue;
    }
    if (d <= capture_radius) {
      ClosestApproach ca;
      ca.entry_index = static_cast<long>(i);
      ca.entry_point = poly.points[i];
      ca.distance = d;
      ca.unstable_component = dot(poly.points[i] - p, poly.unstable_dir);
      return ca;
    }
  }
  throw error(left ? "separatrix did not return to the capture ball within budget"
                   : "separatrix never left the capture ball");
}

namespace {

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

ButterflyResult butterfly_bisect(const MapSpec& map_template, const std::string& param_axis,
                                 std::pair<double, double> bracket,
                                 const ButterflyOpts& opts) {
  if (!(bracket.first < bracket.second)) throw usage_error("bracket must satisfy lo < hi");
  if (!map_template.has_param(param_axis)) {
    throw usage_error("unknown parameter axis: " + param_axis);
  }

  ButterflyResult res;
  State seed = opts.cycle_seed;

  TraceOpts trace = opts.trace;
  trace.power = opts.period;

  // Freeze the geometric scales from a coarse pilot trace at the low end so
  // every bisection iterate evaluates the same functional.
  double radius = opts.capture_radius;
  double spacing = opts.max_spacing;
  {
    const MapSpec m0 = map_template.with(param_axis, bracket.first);
    const EquilibriumRecord rec0 = find_cycle(m0, opts.period, seed);
    seed = rec0.points.at(0);
    if (radius <= 0.0) {
      SeparatrixPolyline pilot =
          trace_separatrix(m0, rec0, opts.branch, opts.arclength_budget, 1e9, trace);
      State lo = pilot.points.at(0), hi = lo;
      for (const State& q : pilot.points) {
        for (int c = 0; c < 3; ++c) {
          lo[c] = std::min(lo[c], q[c]);
          hi[c] = std::max(hi[c], q[c]);
        }
      }
      radius = 2.5e-2 * norm(hi - lo);
      if (radius <= 0.0) throw error("degenerate pilot trace: zero bounding box");
    }
    if (spacing <= 0.0) spacing = radius / 4.0;
  }
  res.capture_radius = radius;
  res.max_spacing = spacing;

  auto functional = [&](double param) -> double {
    const MapSpec m = map_template.with(param_axis, param);
    EquilibriumRecord rec;
    try {
      rec = find_cycle(m, opts.period, seed);
    } catch (const error& e) {
      throw error("cycle continuation failed at " + param_axis + "=" +
                  std::to_string(param) + ": " + e.what());
    }
    seed = rec.points.at(0);
    const SeparatrixPolyline poly =
        trace_separatrix(m, rec, opts.branch, opts.arclength_budget, spacing, trace);
    // Signed unstable component at the closest return: the distance minimum
    // over everything at least one whole gap of arclength past the exit from
    // the capture ball, so exit-adjacent vertices cannot shadow the return.
    const State p = rec.points.at(0);
    const double gap = 10.0 * radius;
    double acc = 0.0, exit_len = -1.0;
    double best_d = std::numeric_limits<double>::infinity();
    double best_comp = 0.0;
    for (std::size_t i = 0; i < poly.points.size(); ++i) {
      if (i) acc += norm(poly.points[i] - poly.points[i - 1]);
      const double d = norm(poly.points[i] - p);
      if (exit_len < 0.0) {
        if (d > radius) exit_len = acc;
        continue;
      }
      if (acc < exit_len + gap) continue;
      if (d < best_d) {
        best_d = d;
        best_comp = dot(poly.points[i] - p, poly.unstable_dir);
      }
    }
    if (exit_len < 0.0) {
      throw error("separatrix never left the capture ball at " + param_axis + "=" +
                  std::to_string(param));
    }
    if (!std::isfinite(best_d)) {
      throw error("separatrix did not return within the arclength budget at " + param_axis +
                  "=" + std::to_string(param));
    }
    res.functional_history.emplace_back(param, best_comp);
    return best_comp;
  };

  double lo = bracket.first, hi = bracket.second;
  const double f_lo = functional(lo);
  const double f_hi = functional(hi);
  if (sign_of(f_lo) == sign_of(f_hi) || f_lo == 0.0 || f_hi == 0.0) {
    // An exact zero at an endpoint gives no side to bisect toward either.
    if (f_lo == 0.0) {
      res.value = lo;
      res.bracket = {lo, lo};
      return res;
    }
    if (f_hi == 0.0) {
      res.value = hi;
      res.bracket = {hi, hi};
      return res;
    }
    throw error("invalid bracket: unstable_component has the same sign at both ends");
  }

  const double s_lo = sign_of(f_lo);
  int it = 0;
  while (hi - lo > opts.tol_param && it < opts.max_bisect) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = functional(mid);
    ++it;
    if (f_mid == 0.0) {
      lo = hi = mid;
      break;
    }
    if (sign_of(f_mid) == s_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  res.value = 0.5 * (lo + hi);
  res.bracket = {lo, hi};
  res.iterations = it;
  return res;
}

}  // namespace dlorenz
