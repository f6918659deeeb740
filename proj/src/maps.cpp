#include "dlorenz/maps.hpp"

#include <cmath>
#include <cstdio>

namespace dlorenz {

namespace {

std::string format_state(const State& s) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "(%.17g, %.17g, %.17g)", s[0], s[1], s[2]);
  return buf;
}

Kernel build_kernel(MapFamily family, const std::vector<std::pair<std::string, double>>& p) {
  auto get = [&](std::string_view name) {
    for (const auto& [k, v] : p)
      if (k == name) return v;
    throw usage_error("missing parameter '" + std::string(name) + "'");
  };
  Kernel k;
  switch (family) {
    case MapFamily::Henon3D:
      // zbar = M1 + B*x + M2*y - z^2
      k.B = get("B");
      k.g = {get("M1"), get("M2"), 0, 0, 0, -1};
      break;
    case MapFamily::Mira3D:
      // zbar = M1 + B*x + M2*z - y^2
      k.B = get("B");
      k.g = {get("M1"), 0, get("M2"), -1, 0, 0};
      break;
    case MapFamily::GeneralizedHenon3D:
      k.B = get("B");
      k.g = {get("g0"), get("gy"), get("gz"), get("gyy"), get("gyz"), get("gzz")};
      break;
    case MapFamily::EpsilonNormalForm:
      // zbar = (1-eps1)*x + (1-eps2)*y - (1+eps3)*z + a*y^2 + b*y*z + c*z^2
      k.B = 1.0 - get("eps1");
      k.g = {0, 1.0 - get("eps2"), -(1.0 + get("eps3")),
             get("a"), get("b"), get("c")};
      break;
  }
  return k;
}

const char* const kFamilyNames[] = {"henon3d", "generalized_henon3d", "mira3d",
                                    "epsilon_normal_form"};

std::vector<std::string_view> expected_params(MapFamily f) {
  switch (f) {
    case MapFamily::Henon3D:
    case MapFamily::Mira3D:
      return {"M1", "M2", "B"};
    case MapFamily::GeneralizedHenon3D:
      return {"B", "g0", "gy", "gz", "gyy", "gyz", "gzz"};
    case MapFamily::EpsilonNormalForm:
      return {"eps1", "eps2", "eps3", "a", "b", "c"};
  }
  return {};
}

}  // namespace

std::string_view family_name(MapFamily f) {
  return kFamilyNames[static_cast<int>(f)];
}

std::optional<MapFamily> family_from_name(std::string_view name) {
  for (int i = 0; i < 4; ++i)
    if (name == kFamilyNames[i]) return static_cast<MapFamily>(i);
  return std::nullopt;
}

MapSpec::MapSpec(MapFamily family, std::vector<std::pair<std::string, double>> params)
    : family_(family), params_(std::move(params)) {
  auto expected = expected_params(family);
  for (const auto& [k, v] : params_) {
    bool known = false;
    for (auto e : expected) known = known || (k == e);
    if (!known)
      throw usage_error("unknown parameter '" + k + "' for family " +
                        std::string(family_name(family)));
    if (!std::isfinite(v))
      throw usage_error("non-finite value for parameter '" + k + "'");
  }
  kernel_ = build_kernel(family_, params_);
}

MapSpec MapSpec::henon3d(double m1, double m2, double b) {
  return MapSpec(MapFamily::Henon3D, {{"M1", m1}, {"M2", m2}, {"B", b}});
}
MapSpec MapSpec::mira3d(double m1, double m2, double b) {
  return MapSpec(MapFamily::Mira3D, {{"M1", m1}, {"M2", m2}, {"B", b}});
}
MapSpec MapSpec::generalized_henon3d(double b, double g0, double gy, double gz,
                                     double gyy, double gyz, double gzz) {
  return MapSpec(MapFamily::GeneralizedHenon3D,
                 {{"B", b}, {"g0", g0}, {"gy", gy}, {"gz", gz},
                  {"gyy", gyy}, {"gyz", gyz}, {"gzz", gzz}});
}
MapSpec MapSpec::epsilon_normal_form(double e1, double e2, double e3,
                                     double a, double b, double c) {
  return MapSpec(MapFamily::EpsilonNormalForm,
                 {{"eps1", e1}, {"eps2", e2}, {"eps3", e3},
                  {"a", a}, {"b", b}, {"c", c}});
}

double MapSpec::param(std::string_view name) const {
  for (const auto& [k, v] : params_)
    if (k == name) return v;
  throw usage_error("map has no parameter '" + std::string(name) + "'");
}

bool MapSpec::has_param(std::string_view name) const {
  for (const auto& [k, v] : params_)
    if (k == name) return true;
  return false;
}

MapSpec MapSpec::with(std::string_view name, double value) const {
  auto params = params_;
  for (auto& [k, v] : params)
    if (k == name) {
      v = value;
      return MapSpec(family_, std::move(params));
    }
  throw usage_error("map has no parameter '" + std::string(name) + "'");
}

State MapSpec::eval(const State& s) const {
  State r = kernel_.eval(s);
  if (!finite(r))
    throw error("map evaluation overflowed at input " + format_state(s));
  return r;
}

State MapSpec::eval_inverse(const State& s) const {
  if (kernel_.B == 0.0)
    throw error("inverse undefined: Jacobian determinant B = 0");
  State r = kernel_.eval_inverse(s);
  if (!finite(r))
    throw error("inverse evaluation overflowed at input " + format_state(s));
  return r;
}

std::string MapSpec::describe() const {
  std::string out(family_name(family_));
  out += "(";
  bool first = true;
  for (const auto& [k, v] : params_) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s=%.17g", k.c_str(), v);
    if (!first) out += ", ";
    out += buf;
    first = false;
  }
  out += ")";
  return out;
}

OrbitSegment orbit(const MapSpec& map, const State& s0, long n_transient,
                   long n_keep, double escape_bound) {
  const Kernel k = map.kernel();
  OrbitSegment seg;
  State cur = s0;
  for (long i = 0; i < n_transient; ++i) {
    if (norm_inf(cur) > escape_bound) {
      seg.escaped = true;
      seg.escape_index = i;
      return seg;
    }
    cur = k.eval(cur);
  }
  seg.points.reserve(static_cast<size_t>(n_keep));
  for (long i = 0; i < n_keep; ++i) {
    if (norm_inf(cur) > escape_bound) {
      seg.escaped = true;
      seg.escape_index = n_transient + i;
      return seg;
    }
    seg.points.push_back(cur);
    cur = k.eval(cur);
  }
  return seg;
}

std::vector<State> find_fixed_points(const MapSpec& map) {
  const Kernel& k = map.kernel();
  const QuadForm& g = k.g;
  // Diagonal x=y=z=t: t = B*t + G(t,t), i.e. Q*t^2 + L*t + C = 0.
  double Q = g.gyy + g.gyz + g.gzz;
  double L = g.gy + g.gz + k.B - 1.0;
  double C = g.g0;

  auto f = [&](double t) { return Q * t * t + L * t + C; };
  auto df = [&](double t) { return 2.0 * Q * t + L; };

  std::vector<double> roots;
  if (Q == 0.0) {
    if (L != 0.0) roots.push_back(-C / L);
  } else {
    double r[2];
    int n = solve_monic_quadratic(L / Q, C / Q, r);
    for (int i = 0; i < n; ++i) roots.push_back(r[i]);
  }
  std::vector<State> out;
  for (double t : roots) {
    for (int it = 0; it < 3; ++it) {  // polish to residual ~ machine epsilon
      double d = df(t);
      if (d == 0.0) break;
      double step = f(t) / d;
      if (!std::isfinite(step) || step == 0.0) break;
      t -= step;
    }
    out.push_back({t, t, t});
  }
  return out;
}

}  // namespace dlorenz
