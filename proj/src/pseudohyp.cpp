#include "dlorenz/pseudohyp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dlorenz {

std::vector<DirectionSample> strong_contracting_field(const MapSpec& map,
                                                      const OrbitSegment& orbit,
                                                      long warmup,
                                                      const FieldOpts& opts) {
  if (!map.invertible()) throw error("direction field needs an invertible map (B != 0)");
  if (orbit.escaped) throw error("direction field needs a non-escaped orbit");
  const auto& pts = orbit.points;
  const long n = static_cast<long>(pts.size());
  if (warmup < 1) throw usage_error("direction-field warm-up must be >= 1");
  if (n < warmup + 2) throw error("orbit too short for direction-field warm-up");

  // Same scheme as detail::transport_field, but through the closed-form
  // inverse tangent of the skew kernel instead of a per-step linear solve.
  const Kernel& k = map.kernel();
  const long n_keep = n - warmup;
  std::vector<DirectionSample> out(static_cast<std::size_t>(n_keep));
  State v{1.0, 0.0, 0.0};
  State w{0.0, 1.0, 0.0};
  for (long i = n - 1; i >= 0; --i) {
    const State& x = pts[static_cast<std::size_t>(i)];
    v = normalized(k.tangent_inverse(x, v));
    w = normalized(k.tangent_inverse(x, w));
    if (i < n_keep) {
      DirectionSample& s = out[static_cast<std::size_t>(i)];
      s.point = x;
      s.direction = v;
      s.convergence_residual = line_angle(v, w);
      s.converged = s.convergence_residual < opts.align_tol;
    }
  }
  return out;
}

namespace {

// Uniform integer in [0, n) by rejection; avoids std::uniform_int_distribution
// so streams are identical across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

double percentile95(std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const std::size_t k = static_cast<std::size_t>(0.95 * static_cast<double>(v.size() - 1) + 0.5);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

}  // namespace

LMPGraph lmp_graph(const std::vector<DirectionSample>& samples, long n_pairs,
                   long stride, std::uint64_t seed, int n_bins, double dx_min) {
  if (stride < 1) throw usage_error("stride must be >= 1");
  if (n_pairs < 1) throw usage_error("n_pairs must be >= 1");
  if (n_bins < 2) throw usage_error("n_bins must be >= 2");

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < samples.size(); i += static_cast<std::size_t>(stride)) {
    idx.push_back(i);
  }
  if (idx.size() < 2) throw error("need at least 2 strided samples");

  LMPGraph g;
  g.stride = stride;
  g.n_pairs = n_pairs;
  g.seed = seed;

  State lo = samples[idx[0]].point, hi = lo;
  for (std::size_t i : idx) {
    const State& p = samples[i].point;
    for (int c = 0; c < 3; ++c) {
      lo[c] = std::min(lo[c], p[c]);
      hi[c] = std::max(hi[c], p[c]);
    }
  }
  g.diameter = norm(hi - lo);

  const double bin_hi = std::max(g.diameter, dx_min * 10.0);
  const double l0 = std::log10(dx_min), l1 = std::log10(bin_hi);
  g.bins.resize(static_cast<std::size_t>(n_bins));
  std::vector<std::vector<double>> bin_phi(g.bins.size());
  for (int b = 0; b < n_bins; ++b) {
    g.bins[static_cast<std::size_t>(b)].dx_lo = std::pow(10.0, l0 + (l1 - l0) * b / n_bins);
    g.bins[static_cast<std::size_t>(b)].dx_hi = std::pow(10.0, l0 + (l1 - l0) * (b + 1) / n_bins);
  }

  std::mt19937_64 rng(seed);
  g.pairs.reserve(static_cast<std::size_t>(n_pairs));
  const std::uint64_t m = idx.size();
  for (long p = 0; p < n_pairs; ++p) {
    std::uint64_t a = bounded(rng, m), b = bounded(rng, m);
    while (b == a) b = bounded(rng, m);
    const DirectionSample& u = samples[idx[a]];
    const DirectionSample& w = samples[idx[b]];
    const double dx = norm(u.point - w.point);
    const double dphi = line_angle(u.direction, w.direction);
    g.pairs.emplace_back(dx, dphi);
    int bin = 0;
    if (dx > dx_min) {
      bin = static_cast<int>(std::floor((std::log10(dx) - l0) / (l1 - l0) * n_bins));
      bin = std::clamp(bin, 0, n_bins - 1);
    }
    bin_phi[static_cast<std::size_t>(bin)].push_back(dphi);
  }
  for (std::size_t b = 0; b < g.bins.size(); ++b) {
    g.bins[b].count = static_cast<long>(bin_phi[b].size());
    g.bins[b].p95 = percentile95(bin_phi[b]);
  }
  return g;
}

const char* lmp_status_name(LMPStatus s) {
  switch (s) {
    case LMPStatus::ConsistentPseudohyperbolic: return "ConsistentPseudohyperbolic";
    case LMPStatus::ContinuityViolated: return "ContinuityViolated";
    case LMPStatus::Inconclusive: return "Inconclusive";
  }
  return "?";
}

LMPVerdict lmp_verdict(const LMPGraph& graph, double phi_tol) {
  // A bin participates once it holds >= 20 pairs: the 95th percentile of a
  // thinner bin is noise, not statistics.
  constexpr long kMinBinCount = 20;
  constexpr double kPhiFloor = 1e-9;  // below angle resolution; keeps log fits finite

  LMPVerdict v;
  std::vector<std::pair<double, double>> fit;  // (log10 dx_center, log10 p95)
  bool any = false;
  for (const auto& b : graph.bins) {
    if (b.count < kMinBinCount) continue;
    const double center = std::sqrt(b.dx_lo * b.dx_hi);
    if (!any) {
      v.smallest_bin_p95 = b.p95;
      any = true;
    }
    fit.emplace_back(std::log10(center), std::log10(std::max(b.p95, kPhiFloor)));
  }

  if (static_cast<long>(graph.pairs.size()) < 1000) {
    v.note = "fewer than 1e3 pairs";
    return v;
  }
  // The dx axis must cover enough scales to say anything about dx -> 0. The
  // bin grid runs [dx_min, max(diameter, 10*dx_min)], so this only trips on
  // degenerate (near-collapsed) sample clouds.
  if (std::log10(graph.bins.back().dx_hi / graph.bins.front().dx_lo) < 3.0) {
    v.note = "dx range spans fewer than 3 decades";
    return v;
  }
  if (!any) {
    v.note = "no dx bin reached the minimum pair count";
    return v;
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : fit) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double nf = static_cast<double>(fit.size());
  const double den = nf * sxx - sx * sx;
  v.trend_slope = den > 0 ? (nf * sxy - sx * sy) / den : 0.0;

  if (v.smallest_bin_p95 >= phi_tol) {
    v.status = LMPStatus::ContinuityViolated;
  } else if (v.trend_slope > 0) {
    v.status = LMPStatus::ConsistentPseudohyperbolic;
  } else {
    v.note = "small-angle head but non-increasing trend";
  }
  return v;
}

}  // namespace dlorenz
