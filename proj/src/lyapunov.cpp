#include "dlorenz/lyapunov.hpp"

#include <cmath>
#include <limits>

namespace dlorenz {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
// Flush the running stretch products into log sums every this many steps.
// Products of per-step factors stay far from the double range within a batch,
// and batching keeps log() off the per-step path.
constexpr long kFlushStride = 32;
}  // namespace

LyapunovSpectrum lyapunov_spectrum(const MapSpec& map, const State& s0,
                                   const LyapunovSettings& st) {
  const Kernel k = map.kernel();
  LyapunovSpectrum out;

  State s = s0;
  for (long i = 0; i < st.n_transient; ++i) {
    if (norm_inf(s) > st.escape_bound) {
      out.escaped = true;
      out.exponents = {kNan, kNan, kNan};
      out.final_state = s;
      return out;
    }
    s = k.eval(s);
  }

  State q0 = st.frame.col(0), q1 = st.frame.col(1), q2 = st.frame.col(2);
  auto step_frame = [&]() -> std::array<double, 3> {
    q0 = k.tangent(s, q0);
    q1 = k.tangent(s, q1);
    q2 = k.tangent(s, q2);
    double r0 = norm(q0);
    q0 = (1.0 / r0) * q0;
    q1 = q1 - dot(q0, q1) * q0;
    double r1 = norm(q1);
    q1 = (1.0 / r1) * q1;
    q2 = q2 - dot(q0, q2) * q0;
    q2 = q2 - dot(q1, q2) * q1;
    double r2 = norm(q2);
    q2 = (1.0 / r2) * q2;
    s = k.eval(s);
    return {r0, r1, r2};
  };

  for (long i = 0; i < st.frame_warmup; ++i) {
    if (norm_inf(s) > st.escape_bound) {
      out.escaped = true;
      out.exponents = {kNan, kNan, kNan};
      out.final_state = s;
      return out;
    }
    step_frame();
  }

  double sum[3] = {0, 0, 0};
  double prod[3] = {1, 1, 1};
  const long tail_start = st.n_iter - st.n_iter / 10;
  double tail_lo[3], tail_hi[3];
  bool tail_seen = false;

  long n = 0;
  for (; n < st.n_iter; ++n) {
    if (norm_inf(s) > st.escape_bound) {
      out.escaped = true;
      out.exponents = {kNan, kNan, kNan};
      out.iters_used = n;
      out.final_state = s;
      return out;
    }
    auto r = step_frame();
    prod[0] *= r[0];
    prod[1] *= r[1];
    prod[2] *= r[2];
    if ((n + 1) % kFlushStride == 0 || n + 1 == st.n_iter) {
      for (int j = 0; j < 3; ++j) {
        sum[j] += std::log(prod[j]);
        prod[j] = 1.0;
      }
      if (n + 1 >= tail_start) {
        for (int j = 0; j < 3; ++j) {
          double running = sum[j] / double(n + 1);
          if (!tail_seen) {
            tail_lo[j] = tail_hi[j] = running;
          } else {
            tail_lo[j] = std::min(tail_lo[j], running);
            tail_hi[j] = std::max(tail_hi[j], running);
          }
        }
        tail_seen = true;
      }
    }
  }
  out.iters_used = n;
  out.final_state = s;
  out.exponents = {sum[0] / double(n), sum[1] / double(n), sum[2] / double(n)};
  // QR ordering makes these descending in practice; enforce it regardless.
  if (out.exponents[0] < out.exponents[1]) std::swap(out.exponents[0], out.exponents[1]);
  if (out.exponents[1] < out.exponents[2]) std::swap(out.exponents[1], out.exponents[2]);
  if (out.exponents[0] < out.exponents[1]) std::swap(out.exponents[0], out.exponents[1]);
  if (tail_seen)
    for (int j = 0; j < 3; ++j)
      out.tail_variation = std::max(out.tail_variation, tail_hi[j] - tail_lo[j]);
  return out;
}

std::array<bool, 3> check_sign_conditions(const LyapunovSpectrum& sp, double tol) {
  const auto& L = sp.exponents;
  return {L[0] > tol, L[0] + L[1] > tol, L[0] + L[1] + L[2] < -tol};
}

std::string_view attractor_kind_name(AttractorKind k) {
  switch (k) {
    case AttractorKind::Divergent: return "divergent";
    case AttractorKind::StablePoint: return "stable_point";
    case AttractorKind::StableCycle: return "stable_cycle";
    case AttractorKind::InvariantCurve: return "invariant_curve";
    case AttractorKind::Chaotic: return "chaotic";
  }
  return "?";
}

AttractorClass classify_spectrum(const LyapunovSpectrum& sp, double tol) {
  AttractorClass c;
  if (sp.escaped) {
    c.kind = AttractorKind::Divergent;
    return c;
  }
  c.signs = check_sign_conditions(sp, tol);
  double l1 = sp.exponents[0];
  if (l1 > tol)
    c.kind = AttractorKind::Chaotic;
  else if (l1 >= -tol)
    c.kind = AttractorKind::InvariantCurve;
  else
    c.kind = AttractorKind::StablePoint;
  return c;
}

}  // namespace dlorenz
