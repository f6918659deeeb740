// Command-line front end: one subcommand per library operation, plain-text
// config files, and reproduction recipes for the standard parameter sets.
// Exit codes: 0 success, 1 domain error (escape, invalid bracket, lost
// branch), 2 usage error.

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dlorenz/bifurcation.hpp"
#include "dlorenz/chart.hpp"
#include "dlorenz/io.hpp"
#include "dlorenz/manifolds.hpp"
#include "dlorenz/maps.hpp"
#include "dlorenz/pseudohyp.hpp"

namespace fs = std::filesystem;
using namespace dlorenz;
using nlohmann::json;

namespace {

const std::vector<std::string> kSubcommands = {
    "orbit", "fixed-points", "cycle",          "classify", "lyapunov", "lmp",
    "manifold", "butterfly-scan", "scan", "chart",    "repro"};

double parse_double(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw usage_error("bad " + what + " '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    if (next == std::string::npos) return out;
    pos = next + 1;
  }
}

State parse_state(const std::string& s, const std::string& what) {
  auto parts = split(s, ',');
  if (parts.size() != 3) throw usage_error(what + " must be 'x,y,z', got '" + s + "'");
  return {parse_double(parts[0], what), parse_double(parts[1], what),
          parse_double(parts[2], what)};
}

ChartAxis parse_axis(const std::string& s, const std::string& what) {
  auto parts = split(s, ':');
  if (parts.size() != 4) throw usage_error(what + " must be 'PARAM:LO:HI:N', got '" + s + "'");
  ChartAxis ax;
  ax.param = parts[0];
  ax.lo = parse_double(parts[1], what + " lo");
  ax.hi = parse_double(parts[2], what + " hi");
  ax.n = static_cast<int>(parse_double(parts[3], what + " n"));
  return ax;
}

struct MapFlags {
  std::string family;
  std::vector<std::string> fixes;
};

void add_map_flags(CLI::App& app, MapFlags& mf) {
  app.add_option("--family", mf.family,
                 "map family: henon3d | mira3d | generalized_henon3d | epsilon_normal_form")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--fix", mf.fixes, "set a family parameter, NAME=VALUE (repeatable)");
}

MapSpec build_map(const MapFlags& mf) {
  if (mf.family.empty()) throw usage_error("--family is required");
  auto fam = family_from_name(mf.family);
  if (!fam) {
    throw usage_error("unknown family '" + mf.family +
                      "' (henon3d, mira3d, generalized_henon3d, epsilon_normal_form)");
  }
  std::map<std::string, double> vals;
  for (const auto& f : mf.fixes) {
    const std::size_t eq = f.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw usage_error("--fix expects NAME=VALUE, got '" + f + "'");
    }
    vals[f.substr(0, eq)] = parse_double(f.substr(eq + 1), "--fix " + f.substr(0, eq));
  }
  return MapSpec(*fam, {vals.begin(), vals.end()});
}

fs::path resolve_out(const std::string& flag_value, const std::string& fallback) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("DLORENZ_OUT"); env && *env) return env;
  return fallback;
}

// Output bookkeeping for one run: files written plus the run.json manifest
// that records how they were produced and their digests.
struct RunCtx {
  std::vector<std::string> command_line;
  std::optional<ConfigFile> config;
  fs::path out_dir;
  std::uint64_t seed = 0;
  std::string started = iso8601_utc_now();
  std::vector<fs::path> outputs;

  std::ofstream open(const std::string& name) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw error("cannot create output directory " + out_dir.string() + ": " + ec.message());
    const fs::path p = out_dir / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw error("cannot open " + p.string() + " for writing");
    outputs.push_back(p);
    return os;
  }

  json run_fields() const {
    json j;
    j["tool_version"] = std::string(kToolVersion);
    j["command_line"] = command_line;
    if (config) {
      j["config"] = {{"source", config->source.string()}, {"text", config->text}};
    } else {
      j["config"] = nullptr;
    }
    j["seed"] = seed;
    j["started"] = started;
    j["finished"] = iso8601_utc_now();
    return j;
  }

  void write_manifest() {
    if (outputs.empty()) return;
    json j = run_fields();
    auto& out = j["outputs"];
    for (const auto& p : outputs) out[p.filename().string()] = hex64(fnv1a64_file(p));
    const fs::path p = out_dir / "run.json";
    std::ofstream os(p, std::ios::binary);
    if (!os) throw error("cannot open " + p.string() + " for writing");
    os << j.dump(2) << '\n';
    if (!os.flush()) throw error("short write to " + p.string());
    std::cout << "manifest " << p.string() << "\n";
  }
};

// The chart exporter writes its own manifest.json; fold the run fields into
// it so each output directory keeps exactly one manifest.
void amend_chart_manifest(const fs::path& manifest_path, const RunCtx& ctx) {
  std::ifstream is(manifest_path, std::ios::binary);
  if (!is) throw error("cannot read " + manifest_path.string());
  json j = json::parse(is);
  j.update(ctx.run_fields());
  std::ofstream os(manifest_path, std::ios::binary);
  if (!os) throw error("cannot open " + manifest_path.string() + " for writing");
  os << j.dump(2) << '\n';
  std::cout << "manifest " << manifest_path.string() << "\n";
}

std::string state_str(const State& s) {
  return "(" + g17(s[0]) + "," + g17(s[1]) + "," + g17(s[2]) + ")";
}

void print_record(const EquilibriumRecord& rec) {
  const auto rep = classify(rec);
  std::ostringstream os;
  os << "period=" << rec.period << " point=" << state_str(rec.points.at(0)) << " multipliers=[";
  for (int k = 0; k < 3; ++k) {
    os << (k ? " " : "") << "(" << g17(rec.multipliers[k].real()) << ","
       << g17(rec.multipliers[k].imag()) << ")";
  }
  os << "] type=(" << rec.topo_type.first << "," << rec.topo_type.second << ")"
     << " sigma=" << g17(rec.saddle_value) << " residual=" << g17(rec.residual)
     << " variant=" << (rep.variant ? variant_name(*rep.variant) : "none")
     << " cond_a=" << rep.cond_a << " cond_b=" << rep.cond_b << " cond_c=" << rep.cond_c
     << " lorenz_saddle=" << rep.lorenz_saddle() << " saddle_focus=" << rep.is_saddle_focus;
  if (rep.resonance_angle) {
    os << " resonance_angle=" << g17(*rep.resonance_angle) << " near_1_4=" << rep.near_resonance_1_4
       << " near_1_3=" << rep.near_resonance_1_3;
  }
  std::cout << os.str() << "\n";
}

// Shared by `lmp` and the repro recipes: orbit, direction field, pair graph,
// verdict; writes <prefix>pairs.csv, <prefix>bins.csv, <prefix>lmp.json.
struct LmpParams {
  State s0{0.1, 0.1, 0.1};
  long transient = 10000;
  long orbit_n = 1000000;
  long warmup = 1000;
  long pairs = 100000;
  long stride = 1;
  int bins = 24;
  double dx_min = 1e-7;
  double phi_tol = 0.1;
  double escape_bound = 1e6;
};

LMPVerdict run_lmp(RunCtx& ctx, const MapSpec& m, const LmpParams& p, const std::string& prefix) {
  const OrbitSegment seg = orbit(m, p.s0, p.transient, p.orbit_n, p.escape_bound);
  if (seg.escaped) {
    throw error("orbit escaped at iterate " + std::to_string(seg.escape_index.value_or(-1)) +
                " for " + m.describe());
  }
  const auto samples = strong_contracting_field(m, seg, p.warmup);
  const LMPGraph graph = lmp_graph(samples, p.pairs, p.stride, ctx.seed, p.bins, p.dx_min);
  const LMPVerdict v = lmp_verdict(graph, p.phi_tol);

  {
    auto os = ctx.open(prefix + "pairs.csv");
    os << "dx,dphi\n";
    for (const auto& [dx, dphi] : graph.pairs) os << g17(dx) << ',' << g17(dphi) << '\n';
  }
  {
    auto os = ctx.open(prefix + "bins.csv");
    os << "dx_lo,dx_hi,count,p95\n";
    for (const auto& b : graph.bins) {
      os << g17(b.dx_lo) << ',' << g17(b.dx_hi) << ',' << b.count << ',' << g17(b.p95) << '\n';
    }
  }
  {
    json j;
    j["map"] = m.describe();
    j["verdict"] = lmp_status_name(v.status);
    j["smallest_bin_p95"] = v.smallest_bin_p95;
    j["trend_slope"] = v.trend_slope;
    j["note"] = v.note;
    j["phi_tol"] = p.phi_tol;
    j["stride"] = graph.stride;
    j["n_pairs"] = graph.n_pairs;
    j["n_samples"] = static_cast<long>(samples.size());
    j["diameter"] = graph.diameter;
    j["seed"] = graph.seed;
    auto os = ctx.open(prefix + "lmp.json");
    os << j.dump(2) << '\n';
  }
  std::cout << prefix << "verdict=" << lmp_status_name(v.status)
            << " smallest_bin_p95=" << g17(v.smallest_bin_p95)
            << " trend_slope=" << g17(v.trend_slope);
  if (!v.note.empty()) std::cout << " note=\"" << v.note << "\"";
  std::cout << "\n";
  return v;
}

void write_branch_files(RunCtx& ctx, const BranchResult& br, const std::string& prefix) {
  {
    auto os = ctx.open(prefix + "branch.csv");
    os << "param,x,y,z,re1,im1,re2,im2,re3,im3\n";
    for (const auto& bp : br.points) {
      const State& p = bp.record.points.at(0);
      os << g17(bp.param_value) << ',' << g17(p[0]) << ',' << g17(p[1]) << ',' << g17(p[2]);
      for (const auto& mlt : bp.record.multipliers)
        os << ',' << g17(mlt.real()) << ',' << g17(mlt.imag());
      os << '\n';
    }
  }
  {
    auto os = ctx.open(prefix + "events.jsonl");
    for (const auto& ev : br.events) {
      json j;
      j["kind"] = bifurcation_kind_name(ev.kind);
      j["param"] = ev.param_value;
      auto& ms = j["multipliers"];
      for (const auto& mlt : ev.multipliers) ms.push_back({mlt.real(), mlt.imag()});
      os << j.dump() << '\n';
    }
  }
  for (const auto& ev : br.events) {
    std::cout << "event kind=" << bifurcation_kind_name(ev.kind) << " param=" << g17(ev.param_value)
              << "\n";
  }
  for (const auto& note : br.notes) std::cout << "note: " << note << "\n";
}

void write_scenario_files(RunCtx& ctx, const ScenarioStageLog& log, const std::string& name) {
  auto os = ctx.open(name);
  for (const auto& st : log.stages) {
    json j;
    j["label"] = st.label;
    j["param"] = st.param_value;
    j["period"] = st.period;
    j["detail"] = st.detail;
    os << j.dump() << '\n';
  }
  for (const auto& st : log.stages) {
    std::cout << "stage label=" << st.label << " param=" << g17(st.param_value)
              << " period=" << st.period << " detail=\"" << st.detail << "\"\n";
  }
  std::cout << "scenario=" << (log.scenario.empty() ? "undetermined" : log.scenario)
            << " complete=" << (log.complete ? "true" : "false") << "\n";
}

void write_orbit_file(RunCtx& ctx, const MapSpec& m, const State& s0, long transient, long keep,
                      double escape_bound, const std::string& name) {
  const OrbitSegment seg = orbit(m, s0, transient, keep, escape_bound);
  if (seg.escaped) {
    throw error("orbit escaped at iterate " + std::to_string(seg.escape_index.value_or(-1)) +
                " for " + m.describe());
  }
  auto os = ctx.open(name);
  write_orbit_csv(os, seg.points);
  std::cout << "wrote " << (ctx.out_dir / name).string() << " (" << seg.points.size()
            << " points)\n";
}

EquilibriumRecord pick_saddle_record(const MapSpec& m) {
  auto recs = fixed_point_records(m);
  for (auto it = recs.rbegin(); it != recs.rend(); ++it) {
    if (it->topo_type == std::pair<int, int>{2, 1}) return *it;
  }
  throw error("no type (2,1) saddle fixed point for " + m.describe() + "; pass --seed");
}

void write_manifold_rows(std::ostream& os, const SeparatrixPolyline& poly) {
  for (std::size_t i = 0; i < poly.points.size(); ++i) {
    const State& q = poly.points[i];
    os << branch_name(poly.branch) << ',' << i << ',' << g17(q[0]) << ',' << g17(q[1]) << ','
       << g17(q[2]) << '\n';
  }
}

struct ChartFlags {
  MapFlags map;
  std::string axis1, axis2;
  long transient = 2000, warmup = 200, iters = 20000;
  double escape_bound = 1e6;
  std::string s0 = "0.1,0.1,0.1";
  std::string seed_policy = "fixed";
  double class_tol = 1e-3;
  int threads = 0;
  std::uint64_t rng_seed = 1;
  std::string out;
};

void run_chart(RunCtx& ctx, const ChartFlags& cf) {
  ChartSpec spec{.base = build_map(cf.map),
                 .axis1 = parse_axis(cf.axis1, "--axis1"),
                 .axis2 = parse_axis(cf.axis2, "--axis2")};
  spec.lyap = LyapunovSettings{.n_transient = cf.transient,
                               .frame_warmup = cf.warmup,
                               .n_iter = cf.iters,
                               .escape_bound = cf.escape_bound};
  spec.s0 = parse_state(cf.s0, "--s0");
  if (cf.seed_policy == "fixed") {
    spec.seed_policy = SeedPolicy::FixedPoint;
  } else if (cf.seed_policy == "inherit") {
    spec.seed_policy = SeedPolicy::InheritNeighbor;
  } else {
    throw usage_error("--seed-policy must be 'fixed' or 'inherit', got '" + cf.seed_policy + "'");
  }
  spec.class_tol = cf.class_tol;
  spec.workers = cf.threads;
  spec.seed = ctx.seed;

  const ChartResult res = compute_chart(spec);
  const auto paths = export_chart(res, ctx.out_dir.string());
  amend_chart_manifest(paths.at(2), ctx);
  std::cout << "chart " << spec.axis1.n << "x" << spec.axis2.n << " cells in "
            << g17(res.wall_seconds) << " s, workers=" << res.workers_used << "\n";
  for (const auto& p : paths) std::cout << "wrote " << p << "\n";
}

int run_subcommand(const std::string& sub, std::vector<std::string> args,
                   const std::vector<std::string>& full_cmdline);

// ---- repro recipes ------------------------------------------------------

void repro_target(RunCtx& ctx, const std::string& target, int threads) {
  const State s0{0.1, 0.1, 0.1};
  if (target == "fig1a" || target == "fig1b") {
    const double m2 = target == "fig1a" ? 0.85 : 0.815;
    write_orbit_file(ctx, MapSpec::henon3d(0.0, m2, 0.7), s0, 1000, 100000, 1e6, "orbit.csv");
  } else if (target == "fig1d") {
    const MapSpec m = MapSpec::henon3d(1.77, -0.925, -0.95);
    write_orbit_file(ctx, m, s0, 1000, 100000, 1e6, "orbit.csv");
    const EquilibriumRecord rec = find_cycle(m, 2, State{0.85, 0.13, 0.85});
    auto os = ctx.open("cycle.csv");
    write_records_csv(os, std::span<const EquilibriumRecord>(&rec, 1));
    print_record(rec);
  } else if (target == "fig5") {
    const MapSpec m = MapSpec::henon3d(-0.07, 0.85, 0.7);
    auto seed = fixed_point_records(m).back();
    write_branch_files(ctx, continue_branch(m, "M1", {-0.07, 0.01}, 1e-3, seed), "");
    write_scenario_files(ctx, scenario_probe(m, "M1", {-0.07, 0.01}), "stages.jsonl");
  } else if (target == "fig7") {
    LmpParams p;
    run_lmp(ctx, MapSpec::henon3d(0.0, 0.85, 0.7), p, "m2_0.850_");
    run_lmp(ctx, MapSpec::henon3d(0.0, 0.815, 0.7), p, "m2_0.815_");
  } else if (target == "fig10") {
    const MapSpec m = MapSpec::henon3d(2.1, -1.05, -0.8);
    auto seed = fixed_point_records(m).back();
    write_branch_files(ctx, continue_branch(m, "M1", {2.1, 2.35}, 1e-3, seed), "o_");
    write_scenario_files(ctx, scenario_probe(m, "M1", {2.1, 2.35}), "stages.jsonl");
  } else if (target == "fig11") {
    const MapSpec m = MapSpec::henon3d(2.29, -1.05, -0.8);
    write_orbit_file(ctx, m, s0, 1000, 100000, 1e6, "orbit.csv");
    LmpParams p;
    p.stride = 4;  // period-2 components: compare directions within one component
    run_lmp(ctx, m, p, "");
  } else if (target == "fig12") {
    const MapSpec m = MapSpec::henon3d(1.732, -0.814, -0.8);
    write_orbit_file(ctx, m, s0, 1000, 100000, 1e6, "orbit.csv");
    {
      auto os = ctx.open("fixed_points.csv");
      auto recs = fixed_point_records(m);
      write_records_csv(os, recs);
      for (const auto& r : recs) print_record(r);
    }
    const LyapunovSpectrum sp = lyapunov_spectrum(m, s0, {});
    const AttractorClass cls = classify_spectrum(sp);
    json j;
    j["map"] = m.describe();
    j["exponents"] = {sp.exponents[0], sp.exponents[1], sp.exponents[2]};
    j["class"] = std::string(attractor_kind_name(cls.kind));
    j["tail_variation"] = sp.tail_variation;
    auto os = ctx.open("lyapunov.json");
    os << j.dump(2) << '\n';
  } else if (target == "fig13") {
    ChartFlags cf;
    cf.map.family = "henon3d";
    cf.map.fixes = {"B=-0.8", "M1=1.95", "M2=-0.85"};
    cf.axis1 = "M1:1.45:2.45:500";
    cf.axis2 = "M2:-1.1:-0.6:250";
    cf.s0 = "0.6,0.6,0.6";  // basins in this window exclude the origin
    cf.threads = threads;
    run_chart(ctx, cf);
    return;  // the chart manifest is the run manifest
  } else {
    throw usage_error("unknown repro target '" + target +
                      "' (fig1a, fig1b, fig1d, fig5, fig7, fig10, fig11, fig12, fig13)");
  }
  ctx.write_manifest();
}

// ---- dispatch ------------------------------------------------------------

std::optional<ConfigFile> extract_config(std::vector<std::string>& args) {
  std::optional<ConfigFile> cfg;
  for (std::size_t i = 0; i < args.size();) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw usage_error("--config needs a file path");
      cfg = ConfigFile::parse_file(args[i + 1]);
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      cfg = ConfigFile::parse_file(args[i].substr(std::strlen("--config=")));
      args.erase(args.begin() + static_cast<long>(i));
    } else {
      ++i;
    }
  }
  return cfg;
}

// Config entries become --key=value tokens ahead of the explicit flags, so
// with TakeLast the command line wins. Keys must name options of the invoked
// subcommand; sections select which subcommand the entries belong to.
std::vector<std::string> config_tokens(const ConfigFile& cfg, const std::string& sub,
                                       const CLI::App& app) {
  for (const auto& sec : cfg.sections) {
    if (!sec.name.empty() &&
        std::find(kSubcommands.begin(), kSubcommands.end(), sec.name) == kSubcommands.end()) {
      throw usage_error(cfg.source.string() + ": unknown section '[" + sec.name + "]'");
    }
  }
  std::vector<std::string> out;
  for (const auto& sec : cfg.sections) {
    if (!sec.name.empty() && sec.name != sub) continue;
    for (const auto& e : sec.entries) {
      if (app.get_option_no_throw("--" + e.key) == nullptr) {
        throw usage_error(cfg.source.string() + ":" + std::to_string(e.line) + ": unknown key '" +
                          e.key + "' for subcommand '" + sub + "'");
      }
      out.push_back("--" + e.key + "=" + e.value);
    }
  }
  return out;
}

void print_global_usage(std::ostream& os) {
  os << "dlorenz " << kToolVersion
     << " - discrete Lorenz attractor toolbox\n"
        "usage: dlorenz SUBCOMMAND [flags]\n\n"
        "subcommands:\n"
        "  orbit           iterate a map and dump the orbit as CSV\n"
        "  fixed-points    locate and classify all fixed points\n"
        "  cycle           Newton-solve a periodic orbit from a seed\n"
        "  classify        Lorenz-condition report for fixed points or a cycle\n"
        "  lyapunov        Lyapunov spectrum, sign conditions, attractor class\n"
        "  lmp             strong-contracting field continuity test (verdict + graphs)\n"
        "  manifold        trace unstable separatrices of a saddle\n"
        "  butterfly-scan  bisect a parameter for the homoclinic butterfly\n"
        "  scan            continue a cycle branch / scenario stage probe\n"
        "  chart           parallel Lyapunov class chart over a parameter window\n"
        "  repro           built-in reproduction recipes (fig1a fig1b fig1d fig5\n"
        "                  fig7 fig10 fig11 fig12 fig13)\n\n"
        "common flags: --config FILE ('key = value' lines, [subcommand] sections),\n"
        "  --out DIR (default: $DLORENZ_OUT or '.'), --help, --version\n";
}

template <class Body>
int drive(CLI::App& app, std::vector<std::string>& args, const std::string& sub,
          std::optional<ConfigFile>& cfg, Body&& body) {
  try {
    std::vector<std::string> tokens;
    if (cfg) tokens = config_tokens(*cfg, sub, app);
    tokens.insert(tokens.end(), args.begin(), args.end());
    std::reverse(tokens.begin(), tokens.end());  // CLI11 consumes from the back
    app.parse(tokens);
    return body();
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

CLI::Option* single(CLI::Option* o) {
  return o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

int run_subcommand(const std::string& sub, std::vector<std::string> args,
                   const std::vector<std::string>& full_cmdline) {
  std::optional<ConfigFile> cfg = extract_config(args);

  CLI::App app{std::string("dlorenz ") + sub};
  app.name("dlorenz " + sub);
  app.set_version_flag("--version", std::string(kToolVersion));

  RunCtx ctx;
  ctx.command_line = full_cmdline;

  MapFlags mf;
  std::string out_flag;
  std::string s0_str = "0.1,0.1,0.1";
  std::string seed_str;
  double escape_bound = 1e6;

  auto finish = [&](const std::string& fallback_dir) {
    ctx.config = cfg;
    ctx.out_dir = resolve_out(out_flag, fallback_dir);
  };

  if (sub == "orbit") {
    long transient = 1000, iters = 100000;
    add_map_flags(app, mf);
    single(app.add_option("--s0", s0_str, "initial state x,y,z"));
    single(app.add_option("--transient", transient, "iterates discarded before recording"));
    single(app.add_option("--iters", iters, "iterates recorded"));
    single(app.add_option("--escape-bound", escape_bound, "max-norm escape threshold"));
    single(app.add_option("--out", out_flag, "output directory"));
    return drive(app, args, sub, cfg, [&] {
      finish(".");
      write_orbit_file(ctx, build_map(mf), parse_state(s0_str, "--s0"), transient, iters,
                       escape_bound, "orbit.csv");
      ctx.write_manifest();
      return 0;
    });
  }

  if (sub == "fixed-points") {
    add_map_flags(app, mf);
    single(app.add_option("--out", out_flag, "also write fixed_points.csv here"));
    return drive(app, args, sub, cfg, [&] {
      const MapSpec m = build_map(mf);
      auto recs = fixed_point_records(m);
      write_records_csv(std::cout, recs);
      if (!out_flag.empty()) {
        finish(".");
        auto os = ctx.open("fixed_points.csv");
        write_records_csv(os, recs);
        ctx.write_manifest();
      }
      return 0;
    });
  }

  if (sub == "cycle") {
    int period = 1;
    add_map_flags(app, mf);
    single(app.add_option("--period", period, "cycle period"));
    single(app.add_option("--seed", seed_str, "Newton seed x,y,z")->required());
    single(app.add_option("--out", out_flag, "also write cycle.csv here"));
    return drive(app, args, sub, cfg, [&] {
      const MapSpec m = build_map(mf);
      const EquilibriumRecord rec = find_cycle(m, period, parse_state(seed_str, "--seed"));
      write_records_csv(std::cout, std::span<const EquilibriumRecord>(&rec, 1));
      std::cout << "residual=" << g17(rec.residual) << "\n";
      if (!out_flag.empty()) {
        finish(".");
        auto os = ctx.open("cycle.csv");
        write_records_csv(os, std::span<const EquilibriumRecord>(&rec, 1));
        ctx.write_manifest();
      }
      return 0;
    });
  }

  if (sub == "classify") {
    int period = 0;
    add_map_flags(app, mf);
    single(app.add_option("--period", period, "classify the cycle of this period (needs --seed)"));
    single(app.add_option("--seed", seed_str, "Newton seed x,y,z for --period"));
    return drive(app, args, sub, cfg, [&] {
      const MapSpec m = build_map(mf);
      if (period > 0) {
        if (seed_str.empty()) throw usage_error("--period needs --seed");
        print_record(find_cycle(m, period, parse_state(seed_str, "--seed")));
      } else {
        auto recs = fixed_point_records(m);
        if (recs.empty()) std::cout << "no fixed points for " << m.describe() << "\n";
        for (const auto& r : recs) print_record(r);
      }
      return 0;
    });
  }

  if (sub == "lyapunov") {
    long transient = 10000, warmup = 1000, iters = 1000000;
    double tol = 1e-3;
    add_map_flags(app, mf);
    single(app.add_option("--s0", s0_str, "initial state x,y,z"));
    single(app.add_option("--transient", transient, "iterates before accumulation"));
    single(app.add_option("--warmup", warmup, "frame warm-up iterates"));
    single(app.add_option("--iters", iters, "accumulation iterates"));
    single(app.add_option("--escape-bound", escape_bound, "max-norm escape threshold"));
    single(app.add_option("--tol", tol, "classification tolerance on exponents"));
    single(app.add_option("--out", out_flag, "write lyapunov.json here"));
    return drive(app, args, sub, cfg, [&] {
      const MapSpec m = build_map(mf);
      const LyapunovSettings st{.n_transient = transient,
                                .frame_warmup = warmup,
                                .n_iter = iters,
                                .escape_bound = escape_bound};
      const LyapunovSpectrum sp = lyapunov_spectrum(m, parse_state(s0_str, "--s0"), st);
      if (sp.escaped) {
        throw error("orbit escaped at spectrum iterate " + std::to_string(sp.iters_used) +
                    ", last state " + state_str(sp.final_state));
      }
      const AttractorClass cls = classify_spectrum(sp, tol);
      const auto signs = check_sign_conditions(sp, tol);
      const double sum = sp.exponents[0] + sp.exponents[1] + sp.exponents[2];
      const double lnB = std::log(std::abs(m.jacobian_det()));
      std::cout << "L1=" << g17(sp.exponents[0]) << " L2=" << g17(sp.exponents[1])
                << " L3=" << g17(sp.exponents[2]) << "\n"
                << "sum=" << g17(sum) << " ln_abs_det=" << g17(lnB) << " diff=" << g17(sum - lnB)
                << "\n"
                << "class=" << attractor_kind_name(cls.kind) << " signs=" << signs[0] << ","
                << signs[1] << "," << signs[2] << "\n"
                << "tail_variation=" << g17(sp.tail_variation) << " iters=" << sp.iters_used
                << "\n";
      if (!out_flag.empty()) {
        finish(".");
        json j;
        j["map"] = m.describe();
        j["exponents"] = {sp.exponents[0], sp.exponents[1], sp.exponents[2]};
        j["sum"] = sum;
        j["ln_abs_det"] = lnB;
        j["class"] = std::string(attractor_kind_name(cls.kind));
        j["signs"] = {signs[0], signs[1], signs[2]};
        j["tail_variation"] = sp.tail_variation;
        j["iters_used"] = sp.iters_used;
        auto os = ctx.open("lyapunov.json");
        os << j.dump(2) << '\n';
        ctx.write_manifest();
      }
      return 0;
    });
  }

  if (sub == "lmp") {
    LmpParams p;
    std::uint64_t rng_seed = 1;
    add_map_flags(app, mf);
    single(app.add_option("--s0", s0_str, "initial state x,y,z"));
    single(app.add_option("--transient", p.transient, "iterates discarded before the orbit"));
    single(app.add_option("--orbit", p.orbit_n, "orbit length"));
    single(app.add_option("--warmup", p.warmup, "direction-field warm-up (tail discarded)"));
    single(app.add_option("--pairs", p.pairs, "sampled point pairs"));
    single(app.add_option("--stride", p.stride, "sample thinning stride (2^(n+1) for period-2^n)"));
    single(app.add_option("--bins", p.bins, "log-spaced dx bins"));
    single(app.add_option("--dx-min", p.dx_min, "smallest bin edge"));
    single(app.add_option("--phi-tol", p.phi_tol, "small-angle threshold (rad)"));
    single(app.add_option("--escape-bound", p.escape_bound, "max-norm escape threshold"));
    single(app.add_option("--rng-seed", rng_seed, "pair-sampling seed (recorded in manifest)"));
    single(app.add_option("--out", out_flag, "output directory"));
    return drive(app, args, sub, cfg, [&] {
      finish(".");
      ctx.seed = rng_seed;
      p.s0 = parse_state(s0_str, "--s0");
      run_lmp(ctx, build_map(mf), p, "");
      ctx.write_manifest();
      return 0;
    });
  }

  if (sub == "manifold") {
    int period = 1, power = 0;
    std::string branch = "both";
    double budget = 200.0, spacing = 0.01;
    add_map_flags(app, mf);
    single(app.add_option("--period", period, "saddle cycle period"));
    single(app.add_option("--seed", seed_str, "cycle seed x,y,z (default: saddle fixed point)"));
    single(app.add_option("--branch", branch, "plus | minus | both"));
    single(app.add_option("--power", power, "iterate T^power (0: the record's period)"));
    single(app.add_option("--budget", budget, "arclength budget"));
    single(app.add_option("--spacing", spacing, "max spacing between polyline points"));
    single(app.add_option("--out", out_flag, "output directory"));
    return drive(app, args, sub, cfg, [&] {
      finish(".");
      const MapSpec m = build_map(mf);
      const EquilibriumRecord rec = seed_str.empty()
                                        ? pick_saddle_record(m)
                                        : find_cycle(m, period, parse_state(seed_str, "--seed"));
      std::vector<Branch> branches;
      if (branch == "plus") {
        branches = {Branch::Plus};
      } else if (branch == "minus") {
        branches = {Branch::Minus};
      } else if (branch == "both") {
        branches = {Branch::Plus, Branch::Minus};
      } else {
        throw usage_error("--branch must be plus, minus, or both, got '" + branch + "'");
      }
      TraceOpts topts;
      topts.power = power;
      auto os = ctx.open("manifold.csv");
      os << "branch,i,x,y,z\n";
      for (Branch b : branches) {
        const SeparatrixPolyline poly = trace_separatrix(m, rec, b, budget, spacing, topts);
        write_manifold_rows(os, poly);
        std::cout << "branch " << branch_name(poly.branch) << " points=" << poly.points.size()
                  << " arclength=" << g17(poly.arclength)
                  << " spacing_violations=" << poly.spacing_violations
                  << " escaped=" << (poly.escaped ? "true" : "false")
                  << " effective_power=" << poly.effective_power << " gamma=" << g17(poly.gamma)
                  << "\n";
      }
      ctx.write_manifest();
      return 0;
    });
  }

  if (sub == "butterfly-scan") {
    std::string axis;
    double lo = 0.0, hi = 0.0;
    ButterflyOpts bo;
    std::string branch = "plus";
    add_map_flags(app, mf);
    single(app.add_option("--axis", axis, "parameter to bisect")->required());
    single(app.add_option("--lo", lo, "bracket low end")->required());
    single(app.add_option("--hi", hi, "bracket high end")->required());
    single(app.add_option("--period", bo.period, "saddle cycle period"));
    single(app.add_option("--seed", seed_str, "cycle Newton seed x,y,z"));
    single(app.add_option("--branch", branch, "separatrix branch: plus | minus"));
    single(app.add_option("--budget", bo.arclength_budget, "arclength budget per trace"));
    single(app.add_option("--spacing", bo.max_spacing, "max spacing (0: capture radius / 4)"));
    single(app.add_option("--radius", bo.capture_radius, "capture radius (0: 1e-2 * extent)"));
    single(app.add_option("--tol", bo.tol_param, "final bracket width"));
    single(app.add_option("--max-bisect", bo.max_bisect, "bisection step limit"));
    single(app.add_option("--out", out_flag, "output directory"));
    return drive(app, args, sub, cfg, [&] {
      finish(".");
      if (branch == "plus") {
        bo.branch = Branch::Plus;
      } else if (branch == "minus") {
        bo.branch = Branch::Minus;
      } else {
        throw usage_error("--branch must be plus or minus, got '" + branch + "'");
      }
      if (!seed_str.empty()) bo.cycle_seed = parse_state(seed_str, "--seed");
      const ButterflyResult res = butterfly_bisect(build_map(mf), axis, {lo, hi}, bo);
      json j;
      j["param_axis"] = axis;
      j["bracket"] = {res.bracket.first, res.bracket.second};
      j["value"] = res.value;
      j["iterations"] = res.iterations;
      j["capture_radius"] = res.capture_radius;
      j["max_spacing"] = res.max_spacing;
      auto& hist = j["functional_history"];
      for (const auto& [pv, fv] : res.functional_history) hist.push_back({pv, fv});
      auto os = ctx.open("butterfly.json");
      os << j.dump(2) << '\n';
      std::cout << "value=" << g17(res.value) << " bracket=[" << g17(res.bracket.first) << ","
                << g17(res.bracket.second) << "] width=" << g17(res.bracket.second - res.bracket.first)
                << " iterations=" << res.iterations << "\n";
      ctx.write_manifest();
      return 0;
    });
  }

  if (sub == "scan") {
    std::string axis;
    double lo = 0.0, hi = 0.0, step = 1e-3;
    int period = 1;
    bool scenario = false;
    add_map_flags(app, mf);
    single(app.add_option("--axis", axis, "parameter to sweep")->required());
    single(app.add_option("--lo", lo, "range start")->required());
    single(app.add_option("--hi", hi, "range end")->required());
    single(app.add_option("--step", step, "parameter step"));
    single(app.add_option("--period", period, "cycle period to continue"));
    single(app.add_option("--seed", seed_str, "cycle seed x,y,z (default: largest fixed point)"));
    app.add_flag("--scenario", scenario, "run the staged scenario probe instead");
    single(app.add_option("--out", out_flag, "output directory"));
    return drive(app, args, sub, cfg, [&] {
      finish(".");
      const MapSpec m = build_map(mf);
      if (scenario) {
        ScenarioOpts so;
        so.step = step;
        write_scenario_files(ctx, scenario_probe(m, axis, {lo, hi}, so), "stages.jsonl");
      } else {
        const MapSpec m_lo = m.with(axis, lo);
        EquilibriumRecord seed;
        if (!seed_str.empty()) {
          seed = find_cycle(m_lo, period, parse_state(seed_str, "--seed"));
        } else {
          auto recs = fixed_point_records(m_lo);
          if (recs.empty()) throw error("no fixed point at range start; pass --seed");
          seed = recs.back();
        }
        write_branch_files(ctx, continue_branch(m, axis, {lo, hi}, step, seed), "");
      }
      ctx.write_manifest();
      return 0;
    });
  }

  if (sub == "chart") {
    ChartFlags cf;
    add_map_flags(app, cf.map);
    single(app.add_option("--axis1", cf.axis1, "first axis PARAM:LO:HI:N")->required());
    single(app.add_option("--axis2", cf.axis2, "second axis PARAM:LO:HI:N")->required());
    single(app.add_option("--transient", cf.transient, "per-cell transient"));
    single(app.add_option("--warmup", cf.warmup, "per-cell frame warm-up"));
    single(app.add_option("--iters", cf.iters, "per-cell accumulation iterates"));
    single(app.add_option("--escape-bound", cf.escape_bound, "max-norm escape threshold"));
    single(app.add_option("--s0", cf.s0, "per-cell initial state x,y,z"));
    single(app.add_option("--seed-policy", cf.seed_policy, "fixed | inherit"));
    single(app.add_option("--class-tol", cf.class_tol, "classification tolerance"));
    single(app.add_option("--threads", cf.threads, "worker threads (0: hardware)"));
    single(app.add_option("--rng-seed", cf.rng_seed, "seed recorded in the manifest"));
    single(app.add_option("--out", out_flag, "output directory"));
    return drive(app, args, sub, cfg, [&] {
      finish("chart_out");
      ctx.seed = cf.rng_seed;
      run_chart(ctx, cf);
      return 0;
    });
  }

  if (sub == "repro") {
    std::string target;
    int threads = 0;
    app.add_option("target", target,
                   "fig1a | fig1b | fig1d | fig5 | fig7 | fig10 | fig11 | fig12 | fig13")
        ->required();
    single(app.add_option("--threads", threads, "worker threads for chart targets"));
    single(app.add_option("--out", out_flag, "output directory (default repro_<target>)"));
    return drive(app, args, sub, cfg, [&] {
      finish("repro_" + target);
      ctx.seed = 1;
      repro_target(ctx, target, threads);
      return 0;
    });
  }

  std::cerr << "error: unknown subcommand '" << sub << "'\n\n";
  print_global_usage(std::cerr);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> all(argv, argv + argc);
  if (argc < 2 || std::strcmp(argv[1], "--help") == 0 || std::strcmp(argv[1], "-h") == 0 ||
      std::strcmp(argv[1], "help") == 0) {
    print_global_usage(std::cout);
    return argc < 2 ? 2 : 0;
  }
  if (std::strcmp(argv[1], "--version") == 0) {
    std::cout << kToolVersion << "\n";
    return 0;
  }
  try {
    return run_subcommand(argv[1], {all.begin() + 2, all.end()}, all);
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
