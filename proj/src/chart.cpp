#include "dlorenz/chart.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "dlorenz/io.hpp"
#include "json.hpp"

namespace dlorenz {

const char* seed_policy_name(SeedPolicy p) {
  return p == SeedPolicy::FixedPoint ? "fixed_point" : "inherit_neighbor";
}

namespace {

void validate(const ChartSpec& spec) {
  for (const ChartAxis* ax : {&spec.axis1, &spec.axis2}) {
    if (ax->n < 2) throw usage_error("axis resolution must be >= 2: " + ax->param);
    if (!(ax->lo < ax->hi)) throw usage_error("degenerate axis window: " + ax->param);
    if (!spec.base.has_param(ax->param)) {
      throw usage_error("axis parameter not in family: " + ax->param);
    }
  }
  if (spec.axis1.param == spec.axis2.param) {
    throw usage_error("the two chart axes must sweep different parameters");
  }
}

}  // namespace

ChartResult compute_chart(const ChartSpec& spec) {
  validate(spec);
  const auto t0 = std::chrono::steady_clock::now();

  ChartResult res{.spec = spec};
  res.tool_version = std::string(kToolVersion);
  const int n1 = spec.axis1.n, n2 = spec.axis2.n;
  res.l1.assign(static_cast<std::size_t>(n1) * n2, 0.0);
  res.cls.assign(static_cast<std::size_t>(n1) * n2, 0);

  auto run_cell = [&](int i, int j, const State& s0) {
    const MapSpec m =
        spec.base.with(spec.axis1.param, res.param1(i)).with(spec.axis2.param, res.param2(j));
    const LyapunovSpectrum sp = lyapunov_spectrum(m, s0, spec.lyap);
    const AttractorClass c = classify_spectrum(sp, spec.class_tol);
    const std::size_t idx = static_cast<std::size_t>(j) * n1 + i;
    res.l1[idx] = sp.exponents[0];
    res.cls[idx] = static_cast<std::uint8_t>(c.kind);
    return sp;
  };

  if (spec.seed_policy == SeedPolicy::InheritNeighbor) {
    // Serpentine scan: j ascending, i alternating direction, each cell seeded
    // with its predecessor's final orbit state. The order is part of the
    // contract, so this path is sequential regardless of the worker setting.
    res.workers_used = 1;
    State carry = spec.s0;
    for (int j = 0; j < n2; ++j) {
      for (int k = 0; k < n1; ++k) {
        const int i = (j % 2 == 0) ? k : n1 - 1 - k;
        const LyapunovSpectrum sp = run_cell(i, j, carry);
        carry = sp.escaped ? spec.s0 : sp.final_state;
      }
    }
  } else {
    int nw = spec.workers > 0 ? spec.workers
                              : static_cast<int>(std::thread::hardware_concurrency());
    nw = std::max(1, std::min(nw, n2));
    res.workers_used = nw;
    std::atomic<int> next_row{0};
    auto worker = [&]() {
      for (;;) {
        const int j = next_row.fetch_add(1, std::memory_order_relaxed);
        if (j >= n2) return;
        for (int i = 0; i < n1; ++i) run_cell(i, j, spec.s0);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nw) - 1);
    for (int t = 1; t < nw; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  }

  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

std::vector<std::uint8_t> render_chart(const ChartResult& result, const Palette& palette) {
  const int n1 = result.spec.axis1.n, n2 = result.spec.axis2.n;
  if (result.cls.size() != static_cast<std::size_t>(n1) * n2) {
    throw error("chart grid does not match its spec dimensions");
  }
  double l1_max = 0.0;
  if (palette.modulate_chaotic) {
    for (std::size_t k = 0; k < result.cls.size(); ++k) {
      if (result.cls[k] == static_cast<std::uint8_t>(AttractorKind::Chaotic)) {
        l1_max = std::max(l1_max, result.l1[k]);
      }
    }
  }

  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(n1) * n2 * 3);
  for (int j = 0; j < n2; ++j) {
    const int row = n2 - 1 - j;  // raster row 0 = top = max of axis2
    for (int i = 0; i < n1; ++i) {
      const std::size_t idx = static_cast<std::size_t>(j) * n1 + i;
      std::array<std::uint8_t, 3> px{};
      switch (static_cast<AttractorKind>(result.cls[idx])) {
        case AttractorKind::StablePoint:
        case AttractorKind::StableCycle: px = palette.stable; break;
        case AttractorKind::InvariantCurve: px = palette.curve; break;
        case AttractorKind::Chaotic:
          px = palette.chaotic;
          if (palette.modulate_chaotic && l1_max > 0.0) {
            const double f = std::max(0.3, std::min(1.0, result.l1[idx] / l1_max));
            for (auto& ch : px) ch = static_cast<std::uint8_t>(std::lround(ch * f));
          }
          break;
        case AttractorKind::Divergent: px = palette.divergent; break;
      }
      const std::size_t o = (static_cast<std::size_t>(row) * n1 + i) * 3;
      rgb[o] = px[0];
      rgb[o + 1] = px[1];
      rgb[o + 2] = px[2];
    }
  }
  return rgb;
}

std::vector<std::string> export_chart(const ChartResult& result, const std::string& dir,
                                      const Palette& palette) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw error("cannot create output directory " + dir + ": " + ec.message());

  const fs::path csv_path = fs::path(dir) / "chart.csv";
  const fs::path ppm_path = fs::path(dir) / "chart.ppm";
  const fs::path manifest_path = fs::path(dir) / "manifest.json";

  {
    std::ofstream os(csv_path, std::ios::binary);
    if (!os) throw error("cannot open " + csv_path.string());
    os << "i,j,p1,p2,L1,class\n";
    const int n1 = result.spec.axis1.n, n2 = result.spec.axis2.n;
    for (int j = 0; j < n2; ++j) {
      for (int i = 0; i < n1; ++i) {
        const std::size_t idx = static_cast<std::size_t>(j) * n1 + i;
        os << i << ',' << j << ',' << g17(result.param1(i)) << ',' << g17(result.param2(j))
           << ',' << g17(result.l1[idx]) << ','
           << attractor_kind_name(static_cast<AttractorKind>(result.cls[idx])) << '\n';
      }
    }
    if (!os.flush()) throw error("short write to " + csv_path.string());
  }

  const auto rgb = render_chart(result, palette);
  write_ppm(ppm_path, result.spec.axis1.n, result.spec.axis2.n, rgb);

  {
    nlohmann::json j;
    j["tool_version"] = result.tool_version;
    j["family"] = std::string(family_name(result.spec.base.family()));
    auto& fixed = j["fixed_params"];
    for (const auto& [name, value] : result.spec.base.params()) {
      if (name == result.spec.axis1.param || name == result.spec.axis2.param) continue;
      fixed[name] = value;
    }
    auto axis_json = [](const ChartAxis& ax) {
      return nlohmann::json{{"param", ax.param}, {"min", ax.lo}, {"max", ax.hi}, {"n", ax.n}};
    };
    j["axis1"] = axis_json(result.spec.axis1);
    j["axis2"] = axis_json(result.spec.axis2);
    j["lyapunov"] = {{"n_transient", result.spec.lyap.n_transient},
                     {"frame_warmup", result.spec.lyap.frame_warmup},
                     {"n_iter", result.spec.lyap.n_iter},
                     {"escape_bound", result.spec.lyap.escape_bound}};
    j["s0"] = {result.spec.s0[0], result.spec.s0[1], result.spec.s0[2]};
    j["seed_policy"] = seed_policy_name(result.spec.seed_policy);
    j["class_tol"] = result.spec.class_tol;
    j["workers_requested"] = result.spec.workers;
    j["workers_used"] = result.workers_used;
    j["seed"] = result.spec.seed;
    j["wall_seconds"] = result.wall_seconds;
    j["outputs"] = {{"chart.csv", hex64(fnv1a64_file(csv_path))},
                    {"chart.ppm", hex64(fnv1a64_file(ppm_path))}};
    std::ofstream os(manifest_path, std::ios::binary);
    if (!os) throw error("cannot open " + manifest_path.string());
    os << j.dump(2) << '\n';
    if (!os.flush()) throw error("short write to " + manifest_path.string());
  }

  return {csv_path.string(), ppm_path.string(), manifest_path.string()};
}

}  // namespace dlorenz
