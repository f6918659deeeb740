#pragma once
// Periodic orbit records: multipliers, topological type, saddle value, and the
// sign-pattern conditions a discrete Lorenz-like saddle must satisfy:
//
//   (a) 0 < l1 < 1,  -1 < l2 < 0,  gamma < -1,  |l1*l2*gamma| < 1
//   (b) |l1| > |l2|
//   (c) sigma = |l1 * gamma| > 1
//
// with l1, l2 the stable multipliers (|l1| >= |l2|) and gamma the unstable one.

#include <complex>
#include <optional>
#include <span>

#include "dlorenz/maps.hpp"

namespace dlorenz {

struct EquilibriumRecord {
  int period = 1;
  std::vector<State> points;  // orbit of the cycle, points[k+1] = T(points[k])
  // Sorted by descending modulus; ties by descending real, then imaginary part.
  std::array<Complex, 3> multipliers{};
  std::pair<int, int> topo_type{0, 0};  // (dim W^s, dim W^u), unit-circle multipliers in neither
  double saddle_value = 0;              // NaN unless the point is a saddle
  int orientation = 0;                  // sign of the multiplier product (= sign(B^period))
  bool is_saddle_focus = false;
  std::optional<double> resonance_angle;  // argument of the complex pair, in (0, pi)
  double residual = 0;                    // max-norm of T^period(p) - p
};

// Ordered Jacobian product along the cycle: DT(p_last) * ... * DT(p_0).
Mat3 monodromy(const MapSpec& map, std::span<const State> cycle_points);

// Build the full record for a known periodic point (multipliers via the
// characteristic cubic in closed form plus one Newton polish per root).
EquilibriumRecord analyze_cycle(const MapSpec& map, const State& point, int period);

// Fixed points from the closed-form diagonal solve, fully analyzed.
std::vector<EquilibriumRecord> fixed_point_records(const MapSpec& map);

struct FindCycleOpts {
  int max_iter = 50;
  double tol = 1e-13;              // Newton target on max-norm residual
  double lower_period_tol = 1e-8;  // rejection threshold against proper divisors
};

// Newton on T^period(s) - s with analytic chain-rule Jacobian and step
// halving on residual increase. Throws on divergence and when the result is
// actually a cycle of lower period dividing `period`.
EquilibriumRecord find_cycle(const MapSpec& map, int period, const State& seed,
                             const FindCycleOpts& opts = {});

enum class LorenzVariant {
  OrientableNegative,        // 0 < l1 < 1, -1 < l2 < 0, gamma < -1
  NonorientablePositivePair, // 0 < l2 < l1 < 1, gamma < -1
  PositiveUnstable,          // 0 < l2 < l1 < 1, gamma > 1
};
std::string_view variant_name(LorenzVariant v);

struct ClassifyOpts {
  double unit_circle_tol = 1e-9;  // |.|-1 within this -> non-hyperbolic
  double resonance_window = 0.1;  // radians around pi/2 (1:4) and 2pi/3 (1:3)
};

struct LorenzConditionReport {
  bool nonhyperbolic = false;  // some multiplier on the unit circle: conditions not evaluated
  bool cond_a = false;
  bool cond_b = false;
  bool cond_c = false;
  std::optional<LorenzVariant> variant;
  std::pair<int, int> topo_type{0, 0};
  double sigma = 0;  // NaN unless saddle
  bool is_saddle_focus = false;
  std::optional<double> resonance_angle;
  bool near_resonance_1_4 = false;  // |phi - pi/2| inside the window
  bool near_resonance_1_3 = false;  // |phi - 2pi/3| inside the window

  bool lorenz_saddle() const { return cond_a && cond_b && cond_c; }
};

LorenzConditionReport classify_multipliers(const std::array<Complex, 3>& mult,
                                           const ClassifyOpts& opts = {});
LorenzConditionReport classify(const EquilibriumRecord& rec,
                               const ClassifyOpts& opts = {});

}  // namespace dlorenz
