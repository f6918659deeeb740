#pragma once

// One-dimensional unstable separatrices of saddles, traced as adaptive
// polylines, plus the closest-approach functional used to bisect for
// homoclinic-butterfly parameter values.

#include <utility>
#include <vector>

#include "dlorenz/maps.hpp"
#include "dlorenz/spectral.hpp"

namespace dlorenz {

enum class Branch { Plus, Minus };

const char* branch_name(Branch b);

struct TraceOpts {
  // Iterated map is T^power; 0 means the record's period. When the unstable
  // multiplier of T^power is negative the tracer iterates (T^power)^2 so each
  // branch maps into itself; effective_power reports the result.
  int power = 0;
  double seed_offset = 0.0;  // 0 means 1e-7 * (1 + |saddle|)
  double escape_bound = 1e6;
  long max_points = 2'000'000;
  // Refinement of a too-long image segment bisects its source chord; stop
  // splitting once the source chord is this short (relative floor).
  double source_floor = 1e-12;
};

struct SeparatrixPolyline {
  Branch branch = Branch::Plus;
  std::vector<State> points;
  // points[i] for i >= seed_count was computed as S(sources[i]) where S is
  // T^effective_power and sources[i] lies on the chord
  // [points[source_seg[i]], points[source_seg[i] + 1]] of an earlier
  // generation. The seed segment (i < seed_count) samples the fundamental
  // domain [saddle + eps*v, S(saddle + eps*v)).
  std::vector<State> sources;
  std::vector<long> source_seg;  // -1 for seed-segment entries
  long seed_count = 0;

  double seed_offset = 0.0;
  double max_spacing = 0.0;
  double arclength = 0.0;
  long spacing_violations = 0;  // gaps the source-floor cutoff left unsplit
  bool escaped = false;         // trace stopped at the escape bound

  int effective_power = 1;
  double gamma = 0.0;     // unstable multiplier of T^power at the saddle
  State unstable_dir{};   // unit eigenvector, oriented so Plus leaves along +
};

// Grows the branch polyline until its arclength reaches arclength_budget,
// keeping consecutive spacing <= max_spacing (up to source_floor cutoffs).
// Throws error unless the record is a saddle of type (2,1) with a real
// unstable multiplier.
SeparatrixPolyline trace_separatrix(const MapSpec& map, const EquilibriumRecord& saddle,
                                    Branch branch, double arclength_budget,
                                    double max_spacing, const TraceOpts& opts = {});

struct ClosestApproach {
  long entry_index = 0;
  State entry_point{};
  // Coordinate of entry_point - saddle along the unit unstable eigenvector;
  // its sign tells which side of W^s_loc the separatrix comes back on.
  double unstable_component = 0.0;
  double distance = 0.0;
};

// First polyline vertex inside the ball of radius capture_radius around the
// saddle after the polyline has left that ball. Throws error when the
// polyline never leaves or never returns.
ClosestApproach closest_approach(const SeparatrixPolyline& poly,
                                 const EquilibriumRecord& saddle,
                                 double capture_radius);

struct ButterflyOpts {
  int period = 1;           // saddle cycle period (iterated map is T^period)
  Branch branch = Branch::Plus;
  double arclength_budget = 200.0;
  double max_spacing = 0.0;    // 0: capture_radius / 4
  double capture_radius = 0.0; // 0: 1e-2 * bbox diagonal of the first trace
  double tol_param = 1e-5;     // final bracket width
  int max_bisect = 64;
  TraceOpts trace;
  State cycle_seed{0.0, 0.0, 0.0};  // Newton seed for the cycle at bracket lo
};

struct ButterflyResult {
  double value = 0.0;  // bracket midpoint after bisection
  std::pair<double, double> bracket{0.0, 0.0};
  int iterations = 0;
  // (param, unstable_component) for every evaluation, bracket ends first.
  std::vector<std::pair<double, double>> functional_history;
  double capture_radius = 0.0;
  double max_spacing = 0.0;
};

// Bisects param_axis on the sign of closest_approach().unstable_component.
// Both bracket ends must return to the capture ball with opposite signs;
// same signs -> error("invalid bracket..."), a non-returning iterate ->
// error naming the offending parameter value.
ButterflyResult butterfly_bisect(const MapSpec& map_template, const std::string& param_axis,
                                 std::pair<double, double> bracket,
                                 const ButterflyOpts& opts = {});

}  // namespace dlorenz
