#pragma once

// One-parameter continuation of periodic orbits with period-doubling /
// Neimark-Sacker / fold detection, normal-form coefficient extraction at the
// common skew form, and a heuristic scenario-stage log over a parameter range.

#include <string>
#include <utility>
#include <vector>

#include "dlorenz/lyapunov.hpp"
#include "dlorenz/spectral.hpp"

namespace dlorenz {

struct BranchPoint {
  double param_value = 0.0;
  EquilibriumRecord record;
};

enum class BifurcationKind { PeriodDoubling, NeimarkSacker, Fold, LossOfReturn };
const char* bifurcation_kind_name(BifurcationKind k);

struct BifurcationEvent {
  BifurcationKind kind = BifurcationKind::LossOfReturn;
  double param_value = 0.0;                // bisection-refined
  std::array<Complex, 3> multipliers{};    // snapshot at the refined parameter
};

struct ContinueOpts {
  double refine_tol = 1e-6;  // parameter width of event bisection
  int max_halvings = 12;     // step halvings on suspected branch jumps
  FindCycleOpts newton;
};

struct BranchResult {
  std::vector<BranchPoint> points;
  std::vector<BifurcationEvent> events;
  std::vector<std::string> notes;  // step halvings, discarded neutral saddles, ...
};

// Predictor-corrector walk of param_axis from range.first to range.second
// (either direction), reseeding Newton from the previous solution. Events are
// located by sign changes of three functionals of the characteristic
// polynomial chi of the cycle monodromy:
//
//   period doubling: chi(-1),  fold: chi(+1),
//   Neimark-Sacker:  b - 1 - a*c + c^2   (chi = l^3 + a*l^2 + b*l + c),
//
// each refined by bisection and then certified on the multipliers
// (PD: a real multiplier within 1e-6 of -1; NS: a complex pair within 1e-6 of
// the unit circle - real "neutral saddle" zeros of the NS functional are
// discarded). Newton failure terminates the branch: the convergence boundary
// is refined by bisection and reported as Fold when a multiplier sits near +1
// there, as LossOfReturn otherwise.
BranchResult continue_branch(const MapSpec& map_template, const std::string& param_axis,
                             std::pair<double, double> range, double step,
                             const EquilibriumRecord& seed_record,
                             const ContinueOpts& opts = {});

// Coefficients of the map written at a fixed point moved to the origin:
//   (x, y, z) -> (y, z, B*x + C*y + A*z + a*y^2 + b*y*z + c*z^2).
// Extraction uses the fixed point with the largest diagonal coordinate, which
// makes reconstruction (normal_form_map) and re-extraction an exact
// round-trip: the reconstructed map's largest fixed point is the origin.
struct NormalFormData {
  double A = 0, C = 0, B = 0;  // linear part, as above
  double a = 0, b = 0, c = 0;  // quadratic part
  std::array<double, 3> epsilons{};  // (1 - B, 1 - C, -(1 + A))
  double prop1_value = 0;            // (c - a) * (a - b + c)
  bool prop1_holds = false;          // prop1_value > 0
};

NormalFormData normal_form_coeffs(const MapSpec& map);
MapSpec normal_form_map(const NormalFormData& d);

struct ScenarioStage {
  std::string label;  // sink | period_doubling | neimark_sacker | invariant_curve | chaotic | gap
  double param_value = 0.0;
  int period = 0;  // cycle period the stage refers to; 0 for attractor classes
  std::string detail;
};

struct ScenarioStageLog {
  std::vector<ScenarioStage> stages;
  std::string scenario;  // "sc1" | "sc2" | "sc3" | "" when undetermined
  bool complete = false; // a Chaotic classification was reached in range
};

struct ScenarioOpts {
  double step = 1e-3;
  ContinueOpts cont;
  // Class probing is many short runs, not one long one.
  LyapunovSettings lyap{.n_transient = 5000, .frame_warmup = 500, .n_iter = 30000};
  double class_tol = 1e-3;
  int class_samples = 64;  // parameter samples for the chaotic-onset scan
};

// Orders continuation events and attractor-class transitions into the staged
// sink -> PD -> period-2 sink -> {NS | PD -> period-4 -> NS} -> chaotic log.
// Criticality of each NS is judged empirically: a stable invariant curve
// right after the event means supercritical. Missing prerequisite stages
// appear as "gap" entries; labels are descriptive, not certified.
ScenarioStageLog scenario_probe(const MapSpec& map_template, const std::string& param_axis,
                                std::pair<double, double> range,
                                const ScenarioOpts& opts = {});

}  // namespace dlorenz
