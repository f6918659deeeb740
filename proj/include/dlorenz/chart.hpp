#pragma once

// Lyapunov-exponent charts over rectangular parameter windows: parallel
// per-cell spectra, class rasters, and reproducible on-disk exports.

#include <cstdint>
#include <string>
#include <vector>

#include "dlorenz/lyapunov.hpp"
#include "dlorenz/maps.hpp"

namespace dlorenz {

enum class SeedPolicy : std::uint8_t {
  // Every cell starts from the same point: cells are independent, so grids
  // are bitwise-identical for any worker count.
  FixedPoint = 0,
  // Each cell starts from the previous cell's final orbit state along a
  // deterministic serpentine row order. Single-pass sequential by
  // construction (still worker-count independent), path-dependent under
  // multistability; meant for basin-continuation studies.
  InheritNeighbor = 1,
};

const char* seed_policy_name(SeedPolicy p);

struct ChartAxis {
  std::string param;
  double lo = 0.0, hi = 0.0;
  int n = 0;  // >= 2 cells; cell i is centered at lo + (i + 0.5) * (hi - lo) / n
};

struct ChartSpec {
  MapSpec base;  // family and fixed parameters; axis params overwritten per cell
  ChartAxis axis1, axis2;
  LyapunovSettings lyap{.n_transient = 2000, .frame_warmup = 200, .n_iter = 20000};
  State s0{0.1, 0.1, 0.1};
  SeedPolicy seed_policy = SeedPolicy::FixedPoint;
  double class_tol = 1e-3;
  int workers = 0;        // 0: hardware concurrency
  std::uint64_t seed = 0; // recorded in the manifest; reserved for seeded policies
};

struct ChartResult {
  ChartSpec spec;
  // Row-major cell grids, index j * axis1.n + i.
  std::vector<double> l1;
  std::vector<std::uint8_t> cls;  // AttractorKind values
  double wall_seconds = 0.0;
  int workers_used = 1;
  std::string tool_version;

  double param1(int i) const {
    return spec.axis1.lo + (spec.axis1.hi - spec.axis1.lo) * (i + 0.5) / spec.axis1.n;
  }
  double param2(int j) const {
    return spec.axis2.lo + (spec.axis2.hi - spec.axis2.lo) * (j + 0.5) / spec.axis2.n;
  }
};

// One Lyapunov run per cell. Escaping cells are recorded as Divergent and
// never abort the sweep. The grid is a pure function of the spec: identical
// for 1 and N workers.
ChartResult compute_chart(const ChartSpec& spec);

struct Palette {
  std::array<std::uint8_t, 3> stable{0, 0, 255};
  std::array<std::uint8_t, 3> curve{0, 200, 0};
  std::array<std::uint8_t, 3> chaotic{255, 105, 180};
  std::array<std::uint8_t, 3> divergent{255, 255, 255};
  bool modulate_chaotic = false;  // scale chaotic pixels by L1 / max L1
};

// RGB8 raster, one pixel per cell, row 0 at the top = max of axis2.
std::vector<std::uint8_t> render_chart(const ChartResult& result, const Palette& palette = {});

// Writes chart.csv ("i,j,p1,p2,L1,class"), chart.ppm, and manifest.json into
// dir (created if missing). Data files are byte-identical across re-exports
// of the same result. Returns the three paths written.
std::vector<std::string> export_chart(const ChartResult& result, const std::string& dir,
                                      const Palette& palette = {});

}  // namespace dlorenz
