#include "dlorenz/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace dlorenz {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

bool modulus_less(const Complex& x, const Complex& y) {
  double mx = std::abs(x), my = std::abs(y);
  if (mx != my) return mx < my;
  if (x.real() != y.real()) return x.real() < y.real();
  return x.imag() < y.imag();
}

std::array<Complex, 3> sorted_multipliers(const Mat3& m) {
  auto cc = char_coeffs(m);
  auto roots = solve_monic_cubic(cc.a, cc.b, cc.c);
  std::sort(roots.begin(), roots.end(),
            [](const Complex& x, const Complex& y) { return modulus_less(y, x); });
  return roots;
}

}  // namespace

Mat3 monodromy(const MapSpec& map, std::span<const State> cycle_points) {
  const Kernel& k = map.kernel();
  Mat3 m = Mat3::identity();
  for (const State& p : cycle_points) m = k.jacobian(p) * m;
  return m;
}

EquilibriumRecord analyze_cycle(const MapSpec& map, const State& point, int period) {
  if (period < 1) throw usage_error("period must be >= 1");
  const Kernel& k = map.kernel();

  EquilibriumRecord rec;
  rec.period = period;
  rec.points.reserve(static_cast<size_t>(period));
  State cur = point;
  for (int i = 0; i < period; ++i) {
    rec.points.push_back(cur);
    cur = k.eval(cur);
  }
  rec.residual = norm_inf(cur - point);
  rec.multipliers = sorted_multipliers(monodromy(map, rec.points));

  int n_stable = 0, n_unstable = 0;
  double prod = 1.0;
  double max_stable = 0.0, min_unstable = 0.0;
  bool complex_pair = false;
  for (const Complex& l : rec.multipliers) {
    double m = std::abs(l);
    prod *= l.real();  // complex entries handled below via pair product
    if (m < 1.0) {
      ++n_stable;
      max_stable = std::max(max_stable, m);
    } else if (m > 1.0) {
      ++n_unstable;
      min_unstable = (min_unstable == 0.0) ? m : std::min(min_unstable, m);
    }
    if (l.imag() > 0.0) {
      complex_pair = true;
      rec.resonance_angle = std::arg(l);
    }
  }
  if (complex_pair) {
    // Product of the conjugate pair is |pair|^2 > 0; recompute sign cleanly.
    prod = 1.0;
    for (const Complex& l : rec.multipliers)
      if (l.imag() == 0.0) prod *= l.real();
  }
  rec.topo_type = {n_stable, n_unstable};
  rec.orientation = (prod > 0.0) ? 1 : (prod < 0.0 ? -1 : 0);
  bool saddle = n_stable > 0 && n_unstable > 0 && n_stable + n_unstable == 3;
  rec.saddle_value = saddle ? max_stable * min_unstable : kNan;
  rec.is_saddle_focus = complex_pair && saddle;
  return rec;
}

std::vector<EquilibriumRecord> fixed_point_records(const MapSpec& map) {
  std::vector<EquilibriumRecord> out;
  for (const State& p : find_fixed_points(map)) out.push_back(analyze_cycle(map, p, 1));
  return out;
}

EquilibriumRecord find_cycle(const MapSpec& map, int period, const State& seed,
                             const FindCycleOpts& opts) {
  if (period < 1) throw usage_error("period must be >= 1");
  const Kernel& k = map.kernel();

  auto cycle_map = [&](const State& s, Mat3* jac) {
    State cur = s;
    Mat3 m = Mat3::identity();
    for (int i = 0; i < period; ++i) {
      if (jac) m = k.jacobian(cur) * m;
      cur = k.eval(cur);
      if (!finite(cur))
        throw error("cycle iteration overflowed during Newton solve");
    }
    if (jac) *jac = m;
    return cur;
  };

  State s = seed;
  double res = norm_inf(cycle_map(s, nullptr) - s);
  for (int it = 0; it < opts.max_iter && res > opts.tol; ++it) {
    Mat3 dp;
    State f = cycle_map(s, &dp) - s;
    Mat3 j = dp - Mat3::identity();
    State step;
    try {
      step = solve3(j, f);
    } catch (const std::domain_error&) {
      throw error("Newton Jacobian singular while refining period-" +
                  std::to_string(period) + " cycle (fold or degenerate seed)");
    }
    // Damped update: halve until the residual stops increasing.
    double lambda = 1.0;
    State snew = s - step;
    double rnew = norm_inf(cycle_map(snew, nullptr) - snew);
    int halvings = 0;
    while (rnew > res && halvings < 30) {
      lambda *= 0.5;
      snew = s - lambda * step;
      rnew = norm_inf(cycle_map(snew, nullptr) - snew);
      ++halvings;
    }
    if (rnew > res && res < 1e-9) break;  // stagnated at numerical floor
    if (rnew > res)
      throw error("cycle Newton diverged from seed (residual " +
                  std::to_string(res) + " not reducible)");
    s = snew;
    res = rnew;
  }
  if (!(res <= opts.tol) && res > 1e-11)
    throw error("cycle Newton did not converge: residual " + std::to_string(res));

  // Reject convergence onto a cycle whose true period properly divides `period`.
  for (int q = 1; q < period; ++q) {
    if (period % q != 0) continue;
    State cur = s;
    for (int i = 0; i < q; ++i) cur = k.eval(cur);
    if (norm_inf(cur - s) < opts.lower_period_tol)
      throw error("seed converged to a period-" + std::to_string(q) +
                  " point, not a proper period-" + std::to_string(period) + " cycle");
  }
  return analyze_cycle(map, s, period);
}

std::string_view variant_name(LorenzVariant v) {
  switch (v) {
    case LorenzVariant::OrientableNegative: return "orientable_negative";
    case LorenzVariant::NonorientablePositivePair: return "nonorientable_positive_pair";
    case LorenzVariant::PositiveUnstable: return "positive_unstable";
  }
  return "?";
}

LorenzConditionReport classify_multipliers(const std::array<Complex, 3>& mult,
                                           const ClassifyOpts& opts) {
  LorenzConditionReport rep;
  rep.sigma = kNan;

  int n_stable = 0, n_unstable = 0;
  double max_stable = 0.0, min_unstable = 0.0;
  for (const Complex& l : mult) {
    double m = std::abs(l);
    if (std::abs(m - 1.0) <= opts.unit_circle_tol) {
      rep.nonhyperbolic = true;
      continue;
    }
    if (m < 1.0) {
      ++n_stable;
      max_stable = std::max(max_stable, m);
    } else {
      ++n_unstable;
      min_unstable = (min_unstable == 0.0) ? m : std::min(min_unstable, m);
    }
    if (l.imag() > 0.0) {
      rep.resonance_angle = std::arg(l);
      const double pi = 3.14159265358979323846;
      rep.near_resonance_1_4 = std::abs(*rep.resonance_angle - pi / 2) < opts.resonance_window;
      rep.near_resonance_1_3 = std::abs(*rep.resonance_angle - 2 * pi / 3) < opts.resonance_window;
    }
  }
  rep.topo_type = {n_stable, n_unstable};
  if (rep.nonhyperbolic) return rep;

  bool complex_pair = bool(rep.resonance_angle);
  bool saddle = n_stable > 0 && n_unstable > 0;
  if (saddle) rep.sigma = max_stable * min_unstable;
  rep.is_saddle_focus = complex_pair && saddle;

  if (n_stable == 2 && n_unstable == 1 && !complex_pair) {
    // All real; l1, l2 are the stable multipliers with |l1| >= |l2|.
    double l1 = 0, l2 = 0, gamma = 0;
    double m1 = -1, m2 = -1;
    for (const Complex& l : mult) {
      double m = std::abs(l);
      if (m > 1.0) {
        gamma = l.real();
      } else if (m > m1) {
        l2 = l1;
        m2 = m1;
        l1 = l.real();
        m1 = m;
      } else {
        l2 = l.real();
        m2 = m;
      }
    }
    (void)m2;
    rep.cond_a =(l1 > 0.0 && l1 < 1.0) && (l2 > -1.0 && l2 < 0.0) &&
                 (gamma < -1.0) && (std::abs(l1 * l2 * gamma) < 1.0);
    rep.cond_b = std::abs(l1) > std::abs(l2);
    rep.cond_c = rep.sigma > 1.0;
    if (l1 > 0.0 && l1 < 1.0 && l2 > -1.0 && l2 < 0.0 && gamma < -1.0)
      rep.variant = LorenzVariant::OrientableNegative;
    else if (l2 > 0.0 && l1 > l2 && l1 < 1.0 && gamma < -1.0)
      rep.variant = LorenzVariant::NonorientablePositivePair;
    else if (l2 > 0.0 && l1 > l2 && l1 < 1.0 && gamma > 1.0)
      rep.variant = LorenzVariant::PositiveUnstable;
  }
  return rep;
}

LorenzConditionReport classify(const EquilibriumRecord& rec, const ClassifyOpts& opts) {
  return classify_multipliers(rec.multipliers, opts);
}

}  // namespace dlorenz
