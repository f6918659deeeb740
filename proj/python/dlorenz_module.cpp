// Python bindings for the core operations: map construction, orbits, fixed
// points and cycles, Lyapunov spectra, the direction-field continuity test,
// separatrix tracing, branch continuation, and parameter charts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <complex>

#include "dlorenz/bifurcation.hpp"
#include "dlorenz/chart.hpp"
#include "dlorenz/io.hpp"
#include "dlorenz/lyapunov.hpp"
#include "dlorenz/manifolds.hpp"
#include "dlorenz/maps.hpp"
#include "dlorenz/pseudohyp.hpp"
#include "dlorenz/spectral.hpp"

namespace py = pybind11;
using namespace dlorenz;

namespace {

py::dict record_dict(const EquilibriumRecord& rec) {
  py::dict d;
  d["period"] = rec.period;
  d["points"] = rec.points;
  py::list mult;
  for (const auto& m : rec.multipliers) mult.append(std::complex<double>(m.real(), m.imag()));
  d["multipliers"] = mult;
  d["topo_type"] = rec.topo_type;
  d["saddle_value"] = rec.saddle_value;
  d["orientation"] = rec.orientation;
  d["residual"] = rec.residual;
  const auto rep = classify(rec);
  d["lorenz_saddle"] = rep.lorenz_saddle();
  d["variant"] = rep.variant ? py::cast(std::string(variant_name(*rep.variant)))
                             : py::object(py::none());
  d["sigma"] = rep.sigma;
  d["is_saddle_focus"] = rep.is_saddle_focus;
  return d;
}

}  // namespace

PYBIND11_MODULE(_dlorenz, m) {
  m.doc() = "discrete Lorenz attractor toolbox";
  m.attr("__version__") = std::string(kToolVersion);

  py::register_exception<usage_error>(m, "UsageError", PyExc_ValueError);

  py::class_<MapSpec>(m, "MapSpec")
      .def_static("henon3d", &MapSpec::henon3d, py::arg("m1"), py::arg("m2"), py::arg("b"))
      .def_static("mira3d", &MapSpec::mira3d, py::arg("m1"), py::arg("m2"), py::arg("b"))
      .def_static("generalized_henon3d", &MapSpec::generalized_henon3d, py::arg("b"),
                  py::arg("g0"), py::arg("gy"), py::arg("gz"), py::arg("gyy"), py::arg("gyz"),
                  py::arg("gzz"))
      .def_static("epsilon_normal_form", &MapSpec::epsilon_normal_form, py::arg("e1"),
                  py::arg("e2"), py::arg("e3"), py::arg("a"), py::arg("b"), py::arg("c"))
      .def("param", &MapSpec::param)
      .def("has_param", &MapSpec::has_param)
      .def("with_param",
           [](const MapSpec& s, const std::string& name, double v) { return s.with(name, v); })
      .def("jacobian_det", &MapSpec::jacobian_det)
      .def("eval", &MapSpec::eval)
      .def("eval_inverse", &MapSpec::eval_inverse)
      .def("__repr__", &MapSpec::describe);

  m.def(
      "orbit",
      [](const MapSpec& map, const State& s0, long transient, long iters, double escape_bound) {
        const OrbitSegment seg = orbit(map, s0, transient, iters, escape_bound);
        py::dict d;
        d["points"] = seg.points;
        d["escaped"] = seg.escaped;
        d["escape_index"] =
            seg.escape_index ? py::cast(*seg.escape_index) : py::object(py::none());
        return d;
      },
      py::arg("map"), py::arg("s0"), py::arg("transient") = 1000, py::arg("iters") = 100000,
      py::arg("escape_bound") = 1e6);

  m.def("fixed_points", [](const MapSpec& map) {
    py::list out;
    for (const auto& rec : fixed_point_records(map)) out.append(record_dict(rec));
    return out;
  });

  m.def(
      "find_cycle",
      [](const MapSpec& map, int period, const State& seed) {
        return record_dict(find_cycle(map, period, seed));
      },
      py::arg("map"), py::arg("period"), py::arg("seed"));

  m.def(
      "lyapunov",
      [](const MapSpec& map, const State& s0, long transient, long warmup, long iters,
         double escape_bound, double tol) {
        const LyapunovSettings st{.n_transient = transient,
                                  .frame_warmup = warmup,
                                  .n_iter = iters,
                                  .escape_bound = escape_bound};
        const LyapunovSpectrum sp = lyapunov_spectrum(map, s0, st);
        py::dict d;
        d["exponents"] = sp.exponents;
        d["escaped"] = sp.escaped;
        d["tail_variation"] = sp.tail_variation;
        d["iters_used"] = sp.iters_used;
        d["class"] = std::string(attractor_kind_name(classify_spectrum(sp, tol).kind));
        return d;
      },
      py::arg("map"), py::arg("s0") = State{0.1, 0.1, 0.1}, py::arg("transient") = 10000,
      py::arg("warmup") = 1000, py::arg("iters") = 1000000, py::arg("escape_bound") = 1e6,
      py::arg("tol") = 1e-3);

  m.def(
      "lmp_test",
      [](const MapSpec& map, const State& s0, long transient, long orbit_n, long warmup,
         long pairs, long stride, std::uint64_t seed, int bins, double dx_min, double phi_tol) {
        const OrbitSegment seg = orbit(map, s0, transient, orbit_n, 1e6);
        const auto samples = strong_contracting_field(map, seg, warmup);
        const LMPGraph graph = lmp_graph(samples, pairs, stride, seed, bins, dx_min);
        const LMPVerdict v = lmp_verdict(graph, phi_tol);
        py::dict d;
        d["verdict"] = std::string(lmp_status_name(v.status));
        d["smallest_bin_p95"] = v.smallest_bin_p95;
        d["trend_slope"] = v.trend_slope;
        d["note"] = v.note;
        py::list bl;
        for (const auto& b : graph.bins) {
          py::dict bd;
          bd["dx_lo"] = b.dx_lo;
          bd["dx_hi"] = b.dx_hi;
          bd["count"] = b.count;
          bd["p95"] = b.p95;
          bl.append(bd);
        }
        d["bins"] = bl;
        d["n_pairs"] = graph.n_pairs;
        d["diameter"] = graph.diameter;
        return d;
      },
      py::arg("map"), py::arg("s0") = State{0.1, 0.1, 0.1}, py::arg("transient") = 10000,
      py::arg("orbit_n") = 1000000, py::arg("warmup") = 1000, py::arg("pairs") = 100000,
      py::arg("stride") = 1, py::arg("seed") = 1, py::arg("bins") = 24, py::arg("dx_min") = 1e-7,
      py::arg("phi_tol") = 0.1);

  m.def(
      "trace_separatrix",
      [](const MapSpec& map, int period, const State& seed, const std::string& branch,
         double budget, double spacing, int power) {
        const EquilibriumRecord rec = period == 1 && seed == State{0, 0, 0}
                                          ? fixed_point_records(map).back()
                                          : find_cycle(map, period, seed);
        Branch b;
        if (branch == "plus") {
          b = Branch::Plus;
        } else if (branch == "minus") {
          b = Branch::Minus;
        } else {
          throw usage_error("branch must be 'plus' or 'minus', got '" + branch + "'");
        }
        TraceOpts opts;
        opts.power = power;
        const SeparatrixPolyline poly = trace_separatrix(map, rec, b, budget, spacing, opts);
        py::dict d;
        d["branch"] = std::string(branch_name(poly.branch));
        d["points"] = poly.points;
        d["arclength"] = poly.arclength;
        d["escaped"] = poly.escaped;
        d["effective_power"] = poly.effective_power;
        d["gamma"] = poly.gamma;
        d["spacing_violations"] = poly.spacing_violations;
        return d;
      },
      py::arg("map"), py::arg("period") = 1, py::arg("seed") = State{0, 0, 0},
      py::arg("branch") = "plus", py::arg("budget") = 10.0, py::arg("spacing") = 0.01,
      py::arg("power") = 0);

  m.def(
      "continue_branch",
      [](const MapSpec& map, const std::string& axis, double lo, double hi, double step,
         int period, const State& seed) {
        const MapSpec at_lo = map.with(axis, lo);
        const EquilibriumRecord start = period == 1 && seed == State{0, 0, 0}
                                            ? fixed_point_records(at_lo).back()
                                            : find_cycle(at_lo, period, seed);
        const BranchResult br = continue_branch(map, axis, {lo, hi}, step, start);
        py::dict d;
        py::list pts, events;
        for (const auto& bp : br.points) {
          py::dict pd;
          pd["param"] = bp.param_value;
          pd["point"] = bp.record.points.at(0);
          py::list mult;
          for (const auto& mm : bp.record.multipliers)
            mult.append(std::complex<double>(mm.real(), mm.imag()));
          pd["multipliers"] = mult;
          pts.append(pd);
        }
        for (const auto& ev : br.events) {
          py::dict ed;
          ed["kind"] = std::string(bifurcation_kind_name(ev.kind));
          ed["param"] = ev.param_value;
          py::list mult;
          for (const auto& mm : ev.multipliers)
            mult.append(std::complex<double>(mm.real(), mm.imag()));
          ed["multipliers"] = mult;
          events.append(ed);
        }
        d["points"] = pts;
        d["events"] = events;
        d["notes"] = br.notes;
        return d;
      },
      py::arg("map"), py::arg("axis"), py::arg("lo"), py::arg("hi"), py::arg("step") = 1e-3,
      py::arg("period") = 1, py::arg("seed") = State{0, 0, 0});

  m.def(
      "chart",
      [](const MapSpec& base, const std::string& p1, double lo1, double hi1, int n1,
         const std::string& p2, double lo2, double hi2, int n2, long transient, long warmup,
         long iters, int workers, const State& s0, const std::string& out_dir) {
        ChartSpec spec{.base = base, .axis1 = {p1, lo1, hi1, n1}, .axis2 = {p2, lo2, hi2, n2}};
        spec.lyap = LyapunovSettings{.n_transient = transient, .frame_warmup = warmup,
                                     .n_iter = iters};
        spec.s0 = s0;
        spec.workers = workers;
        const ChartResult res = compute_chart(spec);
        py::dict d;
        d["l1"] = res.l1;
        py::list classes;
        for (auto c : res.cls)
          classes.append(std::string(attractor_kind_name(static_cast<AttractorKind>(c))));
        d["classes"] = classes;
        d["shape"] = py::make_tuple(n2, n1);
        d["wall_seconds"] = res.wall_seconds;
        d["workers_used"] = res.workers_used;
        if (!out_dir.empty()) d["files"] = export_chart(res, out_dir);
        return d;
      },
      py::arg("base"), py::arg("param1"), py::arg("lo1"), py::arg("hi1"), py::arg("n1"),
      py::arg("param2"), py::arg("lo2"), py::arg("hi2"), py::arg("n2"),
      py::arg("transient") = 2000, py::arg("warmup") = 200, py::arg("iters") = 20000,
      py::arg("workers") = 0, py::arg("s0") = State{0.1, 0.1, 0.1}, py::arg("out_dir") = "");
}
