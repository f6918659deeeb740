#pragma once
// Map families under study. All four are polynomial diffeomorphisms of R^3 of
// the common skew form
//
//   (x, y, z) -> (y, z, B*x + G(y, z)),   G quadratic,
//
// so the Jacobian determinant is the constant B, every fixed point lies on the
// diagonal x = y = z, and the inverse is closed-form whenever B != 0.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dlorenz/linalg.hpp"

namespace dlorenz {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Bad flags, bad config files, malformed parameter lists.
struct usage_error : error {
  using error::error;
};

enum class MapFamily { Henon3D, GeneralizedHenon3D, Mira3D, EpsilonNormalForm };

std::string_view family_name(MapFamily f);
std::optional<MapFamily> family_from_name(std::string_view name);

// G(y, z) = g0 + gy*y + gz*z + gyy*y^2 + gyz*y*z + gzz*z^2
struct QuadForm {
  double g0 = 0, gy = 0, gz = 0, gyy = 0, gyz = 0, gzz = 0;

  double eval(double y, double z) const {
    return g0 + gy * y + gz * z + gyy * y * y + gyz * y * z + gzz * z * z;
  }
  double dy(double y, double z) const { return gy + 2.0 * gyy * y + gyz * z; }
  double dz(double y, double z) const { return gz + gyz * y + 2.0 * gzz * z; }
};

// Flattened evaluation core shared by all families. Hot loops hoist one of
// these instead of re-reading the named parameter list each step.
struct Kernel {
  double B = 0;
  QuadForm g;

  State eval(const State& s) const {
    return {s[1], s[2], B * s[0] + g.eval(s[1], s[2])};
  }
  Mat3 jacobian(const State& s) const {
    return Mat3::from_rows({0, 1, 0}, {0, 0, 1},
                           {B, g.dy(s[1], s[2]), g.dz(s[1], s[2])});
  }
  // J(s) * v without forming the matrix (companion structure).
  State tangent(const State& s, const State& v) const {
    return {v[1], v[2],
            B * v[0] + g.dy(s[1], s[2]) * v[1] + g.dz(s[1], s[2]) * v[2]};
  }
  // J(s)^{-1} * v, closed form; requires B != 0.
  State tangent_inverse(const State& s, const State& v) const {
    return {(v[2] - g.dy(s[1], s[2]) * v[0] - g.dz(s[1], s[2]) * v[1]) / B,
            v[0], v[1]};
  }
  State eval_inverse(const State& s) const {
    return {(s[2] - g.eval(s[0], s[1])) / B, s[0], s[1]};
  }
};

// A map instance: family tag plus its ordered named-parameter list.
class MapSpec {
 public:
  MapSpec(MapFamily family, std::vector<std::pair<std::string, double>> params);

  static MapSpec henon3d(double m1, double m2, double b);
  static MapSpec mira3d(double m1, double m2, double b);
  static MapSpec generalized_henon3d(double b, double g0, double gy, double gz,
                                     double gyy, double gyz, double gzz);
  static MapSpec epsilon_normal_form(double e1, double e2, double e3,
                                     double a, double b, double c);

  MapFamily family() const { return family_; }
  const std::vector<std::pair<std::string, double>>& params() const { return params_; }
  double param(std::string_view name) const;
  bool has_param(std::string_view name) const;
  // New spec with one named parameter replaced (continuation steps use this).
  MapSpec with(std::string_view name, double value) const;

  const Kernel& kernel() const { return kernel_; }
  double jacobian_det() const { return kernel_.B; }
  bool invertible() const { return kernel_.B != 0.0; }

  State eval(const State& s) const;  // throws on non-finite result
  Mat3 jacobian(const State& s) const { return kernel_.jacobian(s); }
  State eval_inverse(const State& s) const;  // throws when B == 0

  std::string describe() const;  // "henon3d(M1=..., M2=..., B=...)"

 private:
  MapFamily family_;
  std::vector<std::pair<std::string, double>> params_;
  Kernel kernel_;
};

// Maps-as-inputs concept for algorithms that must also accept synthetic test
// systems (e.g. constant-Jacobian linear maps).
template <class M>
concept Map3 = requires(const M& m, const State& s) {
  { m.eval(s) } -> std::convertible_to<State>;
  { m.jacobian(s) } -> std::convertible_to<Mat3>;
};

struct OrbitSegment {
  std::vector<State> points;  // points[k] = T^(n_transient + k)(s0)
  bool escaped = false;
  std::optional<long> escape_index;  // iterate count from s0 at first bound violation
};

OrbitSegment orbit(const MapSpec& map, const State& s0, long n_transient,
                   long n_keep, double escape_bound = 1e6);

// All fixed points (they necessarily sit on the diagonal), ascending by
// coordinate, each polished to residual below 1e-12.
std::vector<State> find_fixed_points(const MapSpec& map);

}  // namespace dlorenz
