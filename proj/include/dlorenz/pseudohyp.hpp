#pragma once

// Strong-contracting direction field estimation and the angle-vs-distance
// continuity test for pseudohyperbolicity.
//
// The field N1 assigns to each orbit point the most-contracted direction of
// long forward Jacobian products. It is computed by power iteration on the
// inverse cocycle: a unit vector transported by J(x)^{-1} along the
// time-reversed orbit converges (for hyperbolic-like products) to the right
// singular vector of the smallest singular value. Directions are reported
// modulo sign.
//
// Continuity of N1 over the attractor is probed statistically: sample point
// pairs, record (dx, dphi) with dphi the line angle between their directions,
// bin on a log dx grid, and check that the 95th-percentile angle decays as
// dx -> 0.

#include <cstdint>
#include <optional>
#include <vector>

#include "dlorenz/linalg.hpp"
#include "dlorenz/maps.hpp"

namespace dlorenz {

struct DirectionSample {
  State point;
  State direction;  // unit vector, defined up to sign
  // Line angle between this sample's direction and an independently seeded
  // shadow vector transported the same way. After warm-up both transports
  // have collapsed onto N1, so the angle measures residual non-convergence.
  double convergence_residual = 0.0;
  bool converged = true;
};

struct FieldOpts {
  long warmup = 1000;       // leading samples discarded (transport not yet converged)
  double align_tol = 1e-6;  // residual above this after warm-up flags the sample
};

// Estimates N1 at orbit.points[0 .. n-warmup): the transport runs backward
// from the orbit end, so the last `warmup` indices carry unconverged
// directions and are dropped. Output sample k sits at orbit.points[k].
// Streaming: one backward pass, O(1) vectors. Throws error when the map is
// non-invertible, the orbit escaped, or the orbit is shorter than warmup + 2.
std::vector<DirectionSample> strong_contracting_field(const MapSpec& map,
                                                      const OrbitSegment& orbit,
                                                      long warmup,
                                                      const FieldOpts& opts = {});

// Same transport for an arbitrary Jacobian-bearing map; used by linear-map
// oracles in tests. Points must form an orbit of `map`.
template <Map3 M>
std::vector<DirectionSample> strong_contracting_field_points(const M& map,
                                                             const std::vector<State>& points,
                                                             long warmup,
                                                             const FieldOpts& opts = {});

struct LMPGraph {
  std::vector<std::pair<double, double>> pairs;  // (dx, dphi), dphi in [0, pi/2]
  long stride = 1;
  long n_pairs = 0;
  std::uint64_t seed = 0;
  double diameter = 0.0;  // bounding-box diagonal of the strided sample cloud
  struct Bin {
    double dx_lo, dx_hi;
    long count = 0;
    double p95 = 0.0;  // 95th-percentile dphi of the bin
  };
  std::vector<Bin> bins;  // log-spaced over [dx_min, diameter]
};

// Draws n_pairs index pairs uniformly (seeded, deterministic) from every
// stride-th sample and populates the binned graph. dx is Euclidean distance,
// dphi = arccos(|<u,v>|).
LMPGraph lmp_graph(const std::vector<DirectionSample>& samples, long n_pairs,
                   long stride, std::uint64_t seed, int n_bins = 24,
                   double dx_min = 1e-7);

enum class LMPStatus { ConsistentPseudohyperbolic, ContinuityViolated, Inconclusive };

const char* lmp_status_name(LMPStatus s);

struct LMPVerdict {
  LMPStatus status = LMPStatus::Inconclusive;
  double smallest_bin_p95 = 0.0;  // p95 of the smallest populated dx bin
  double trend_slope = 0.0;       // log-log fit of binned p95 vs dx
  std::string note;
};

// Verdict rule, monotone in phi_tol:
//   smallest_bin_p95 >= phi_tol            -> ContinuityViolated
//   smallest_bin_p95 <  phi_tol, slope > 0 -> ConsistentPseudohyperbolic
//   otherwise                              -> Inconclusive
// Degraded inputs short-circuit to Inconclusive: fewer than 1e3 pairs, a dx
// bin range under 3 decades (collapsed sample cloud), or no bin reaching the
// minimum pair count.
LMPVerdict lmp_verdict(const LMPGraph& graph, double phi_tol = 0.1);

namespace detail {
// Shared transport loop. JacAt(i) must return the Jacobian at points[i].
template <class JacAt>
std::vector<DirectionSample> transport_field(const std::vector<State>& points,
                                             long warmup, const FieldOpts& opts,
                                             JacAt&& jac_at);
}  // namespace detail

template <Map3 M>
std::vector<DirectionSample> strong_contracting_field_points(const M& map,
                                                             const std::vector<State>& points,
                                                             long warmup,
                                                             const FieldOpts& opts) {
  return detail::transport_field(points, warmup, opts,
                                 [&](std::size_t i) { return map.jacobian(points[i]); });
}

namespace detail {

template <class JacAt>
std::vector<DirectionSample> transport_field(const std::vector<State>& points,
                                             long warmup, const FieldOpts& opts,
                                             JacAt&& jac_at) {
  const long n = static_cast<long>(points.size());
  if (warmup < 1) throw usage_error("direction-field warm-up must be >= 1");
  if (n < warmup + 2) throw error("orbit too short for direction-field warm-up");

  // Backward transport: v_i = normalize(J(x_i)^{-1} v_{i+1}), seeded at the
  // orbit end. v_i is then the most-contracted direction of the forward
  // product over [x_i, x_n), converged once that product spans >= warmup
  // steps. The last `warmup` orbit indices have younger products and are
  // discarded, so out[k] sits at points[k] for k in [0, n - warmup).
  const long n_keep = n - warmup;
  std::vector<DirectionSample> out(static_cast<std::size_t>(n_keep));
  State v{1.0, 0.0, 0.0};
  State w{0.0, 1.0, 0.0};  // shadow vector, independent seed
  for (long i = n - 1; i >= 0; --i) {
    const Mat3 jac = jac_at(static_cast<std::size_t>(i));
    v = normalized(solve3(jac, v));
    w = normalized(solve3(jac, w));
    if (i < n_keep) {
      DirectionSample& s = out[static_cast<std::size_t>(i)];
      s.point = points[static_cast<std::size_t>(i)];
      s.direction = v;
      s.convergence_residual = line_angle(v, w);
      s.converged = s.convergence_residual < opts.align_tol;
    }
  }
  return out;
}

}  // namespace detail

}  // namespace dlorenz
