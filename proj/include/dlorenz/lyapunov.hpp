#pragma once
// Benettin-style Lyapunov spectra: propagate an orthonormal tangent frame,
// re-orthonormalize by QR every step, accumulate log stretching factors.
// For the families here the exponent sum must equal ln|B| identically, which
// doubles as a per-run integrity check.

#include <array>
#include <cstdint>

#include "dlorenz/maps.hpp"

namespace dlorenz {

struct LyapunovSettings {
  long n_transient = 10000;
  // Extra steps after the transient that propagate the frame without
  // accumulating, so measurement starts from the converged frame. Without
  // this the O(1/n) frame-alignment bias dominates sink spectra.
  long frame_warmup = 1000;
  long n_iter = 1000000;
  double escape_bound = 1e6;
  Mat3 frame = Mat3::identity();
};

struct LyapunovSpectrum {
  std::array<double, 3> exponents{};  // descending; NaN when escaped
  bool escaped = false;
  // Max drift of any running exponent over the last 10% of accumulation
  // (sampled on the internal flush grid); a convergence diagnostic.
  double tail_variation = 0;
  long iters_used = 0;
  State final_state{};  // last orbit point visited (pre-escape when escaped)
};

LyapunovSpectrum lyapunov_spectrum(const MapSpec& map, const State& s0,
                                   const LyapunovSettings& settings = {});

// Sign pattern {L1 > tol, L1+L2 > tol, L1+L2+L3 < -tol}.
std::array<bool, 3> check_sign_conditions(const LyapunovSpectrum& sp, double tol = 1e-3);

enum class AttractorKind : std::uint8_t {
  Divergent = 0,
  StablePoint = 1,
  StableCycle = 2,
  InvariantCurve = 3,
  Chaotic = 4,
};
std::string_view attractor_kind_name(AttractorKind k);

struct AttractorClass {
  AttractorKind kind = AttractorKind::Divergent;
  std::array<bool, 3> signs{false, false, false};
};

// From the spectrum alone a stable fixed point and a stable cycle are
// indistinguishable; the negative-L1 bucket reports StablePoint and renders
// identically to StableCycle everywhere. A zero-L1 spectrum with L2 < -tol is
// an invariant curve; L1, L2 both near zero (torus) folds into the same bucket.
AttractorClass classify_spectrum(const LyapunovSpectrum& sp, double tol = 1e-3);

}  // namespace dlorenz
