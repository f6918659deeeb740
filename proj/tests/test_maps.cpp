#include <cmath>
#include <string>

#include "doctest.h"
#include "dlorenz/maps.hpp"
#include "oracles.hpp"

using namespace dlorenz;

namespace {

std::vector<MapSpec> sample_maps() {
  return {
      MapSpec::henon3d(0.0, 0.85, 0.7),
      MapSpec::henon3d(2.29, -1.05, -0.8),
      MapSpec::henon3d(1.77, -0.925, -0.95),
      MapSpec::mira3d(0.5, -0.8, 0.6),
      MapSpec::generalized_henon3d(-0.7, 0.3, -0.2, 1.1, 0.4, -0.9, 0.25),
      MapSpec::epsilon_normal_form(0.2, -0.1, 0.15, 0.0, 0.0, -1.0),
  };
}

}  // namespace

TEST_CASE("family names round-trip and parameter lists are validated") {
  for (auto f : {MapFamily::Henon3D, MapFamily::GeneralizedHenon3D, MapFamily::Mira3D,
                 MapFamily::EpsilonNormalForm}) {
    auto name = family_name(f);
    REQUIRE(family_from_name(name).has_value());
    CHECK(*family_from_name(name) == f);
  }
  CHECK(!family_from_name("henon2d").has_value());

  CHECK_THROWS_AS(MapSpec(MapFamily::Henon3D, {{"M1", 0.0}, {"M2", 0.0}, {"Q", 1.0}}),
                  usage_error);
  CHECK_THROWS_AS(MapSpec(MapFamily::Henon3D, {{"M1", 0.0 / 0.0}, {"M2", 0.0}, {"B", 0.5}}),
                  usage_error);
  CHECK_THROWS_AS(MapSpec(MapFamily::Henon3D, {{"M2", 0.0}, {"B", 0.5}}).eval({0, 0, 0}),
                  usage_error);  // missing M1 surfaces at kernel build
}

TEST_CASE("evaluation matches the defining formulas") {
  const State s{0.3, -0.4, 0.9};

  auto h = MapSpec::henon3d(1.2, -0.5, 0.7);
  State hr = h.eval(s);
  CHECK(hr[0] == -0.4);
  CHECK(hr[1] == 0.9);
  CHECK(hr[2] == doctest::Approx(1.2 + 0.7 * 0.3 + (-0.5) * (-0.4) - 0.9 * 0.9).epsilon(1e-15));

  auto m = MapSpec::mira3d(1.2, -0.5, 0.7);
  State mr = m.eval(s);
  CHECK(mr[2] == doctest::Approx(1.2 + 0.7 * 0.3 + (-0.5) * 0.9 - (-0.4) * (-0.4)).epsilon(1e-15));

  auto e = MapSpec::epsilon_normal_form(0.2, -0.1, 0.15, 0.5, -0.3, 0.7);
  State er = e.eval(s);
  double want = (1 - 0.2) * 0.3 + (1 + 0.1) * (-0.4) - (1 + 0.15) * 0.9 +
                0.5 * 0.16 + (-0.3) * (-0.4) * 0.9 + 0.7 * 0.81;
  CHECK(er[2] == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("inverse round-trips within 1e-10 on random states") {
  auto rng = oracles::test_rng(10);
  for (const auto& map : sample_maps()) {
    CAPTURE(map.describe());
    REQUIRE(map.invertible());
    for (int trial = 0; trial < 100; ++trial) {
      State s{oracles::uniform(rng, -2, 2), oracles::uniform(rng, -2, 2),
              oracles::uniform(rng, -2, 2)};
      State fwd = map.eval_inverse(map.eval(s));
      State bwd = map.eval(map.eval_inverse(s));
      CHECK(norm(fwd - s) < 1e-10 * (1.0 + norm(s)));
      CHECK(norm(bwd - s) < 1e-10 * (1.0 + norm(s)));
    }
  }
  auto degenerate = MapSpec::henon3d(0.0, 0.85, 0.0);
  CHECK(!degenerate.invertible());
  CHECK_THROWS_AS(degenerate.eval_inverse({0, 0, 0}), error);
}

TEST_CASE("analytic Jacobian matches central differences within 1e-6 relative") {
  auto rng = oracles::test_rng(11);
  for (const auto& map : sample_maps()) {
    CAPTURE(map.describe());
    for (int trial = 0; trial < 50; ++trial) {
      State s{oracles::uniform(rng, -2, 2), oracles::uniform(rng, -2, 2),
              oracles::uniform(rng, -2, 2)};
      Mat3 want = oracles::fd_jacobian([&](const State& x) { return map.eval(x); }, s);
      Mat3 got = map.jacobian(s);
      double scale = 0.0, diff = 0.0;
      for (int i = 0; i < 9; ++i) {
        scale = std::max(scale, std::abs(want.a[i]));
        diff = std::max(diff, std::abs(got.a[i] - want.a[i]));
      }
      CHECK(diff < 1e-6 * (1.0 + scale));
    }
  }
}

TEST_CASE("tangent and tangent_inverse agree with the Jacobian and each other") {
  auto rng = oracles::test_rng(12);
  for (const auto& map : sample_maps()) {
    const Kernel& k = map.kernel();
    for (int trial = 0; trial < 50; ++trial) {
      State s{oracles::uniform(rng, -2, 2), oracles::uniform(rng, -2, 2),
              oracles::uniform(rng, -2, 2)};
      State v{oracles::uniform(rng, -1, 1), oracles::uniform(rng, -1, 1),
              oracles::uniform(rng, -1, 1)};
      CHECK(norm(k.tangent(s, v) - map.jacobian(s) * v) < 1e-14);
      CHECK(norm(k.tangent_inverse(s, k.tangent(s, v)) - v) < 1e-12 * (1.0 + norm(v)));
    }
    CHECK(map.jacobian_det() == doctest::Approx(map.jacobian({0.3, -0.2, 0.5}).det())
                                    .epsilon(1e-14));
  }
}

TEST_CASE("fixed points on the diagonal with tight residuals") {
  auto map = MapSpec::henon3d(0.0, 0.85, 0.7);
  auto fps = find_fixed_points(map);
  REQUIRE(fps.size() == 2);
  CHECK(fps[0][0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(fps[1][0] == doctest::Approx(0.55).epsilon(1e-14));
  for (const auto& p : fps) {
    CHECK(p[0] == p[1]);
    CHECK(p[1] == p[2]);
    CHECK(norm(map.eval(p) - p) < 1e-12);
  }
}

TEST_CASE("fixed point merge and disappearance across the fold") {
  // Double root at M1 = -0.25, M2 = 1, B = 1: xi^2 - xi + 0.25 = 0.
  auto at_fold = MapSpec::henon3d(-0.25, 1.0, 1.0);
  auto fps = find_fixed_points(at_fold);
  REQUIRE(fps.size() == 1);
  CHECK(fps[0][0] == 0.5);  // exact: discriminant is exactly zero here

  // Slightly below the fold no real fixed point survives.
  CHECK(find_fixed_points(MapSpec::henon3d(-0.2501, 1.0, 1.0)).empty());

  // Well below the fold for the reference window too.
  CHECK(find_fixed_points(MapSpec::henon3d(-1.0, 0.85, 0.7)).empty());
}

TEST_CASE("orbit indexing, transient handling, and escape reporting") {
  auto map = MapSpec::henon3d(0.0, 0.85, 0.7);
  const State s0{0.1, 0.1, 0.1};

  auto seg = orbit(map, s0, 5, 10);
  REQUIRE(!seg.escaped);
  REQUIRE(seg.points.size() == 10);
  State cur = s0;
  for (int i = 0; i < 5; ++i) cur = map.eval(cur);
  CHECK(norm(seg.points[0] - cur) == 0.0);
  for (int i = 0; i + 1 < 10; ++i)
    CHECK(norm(seg.points[i + 1] - map.eval(seg.points[i])) == 0.0);

  auto esc = orbit(map, {1e7, 0, 0}, 3, 5);
  REQUIRE(esc.escaped);
  REQUIRE(esc.escape_index.has_value());
  CHECK(*esc.escape_index == 0);

  // Escape during the keep phase: strongly expanding parameters.
  auto runaway = orbit(MapSpec::henon3d(-3.0, 0.0, 0.7), {2.0, 2.0, 2.0}, 0, 100000, 1e6);
  CHECK(runaway.escaped);
  CHECK(runaway.points.size() < 100000);
}

TEST_CASE("with() replaces one parameter and validates the name") {
  auto map = MapSpec::henon3d(0.0, 0.85, 0.7);
  auto moved = map.with("M1", 2.29);
  CHECK(moved.param("M1") == 2.29);
  CHECK(moved.param("M2") == 0.85);
  CHECK(moved.param("B") == 0.7);
  CHECK(map.param("M1") == 0.0);  // original untouched
  CHECK_THROWS_AS(map.with("nope", 1.0), usage_error);
  CHECK(map.has_param("M2"));
  CHECK(!map.has_param("gy"));
}

TEST_CASE("describe names the family and the full parameter list") {
  // Dyadic parameter values so the shortest %.17g form is the literal.
  auto d = MapSpec::henon3d(0.0, 0.75, 0.5).describe();
  CHECK(d.find("henon3d") != std::string::npos);
  CHECK(d.find("M2=0.75") != std::string::npos);
  CHECK(d.find("B=0.5") != std::string::npos);
}

TEST_CASE("evaluation overflow raises a domain error naming the input") {
  auto map = MapSpec::henon3d(0.0, 0.85, 0.7);
  State huge{1e200, 1e200, 1e200};
  CHECK_THROWS_WITH_AS(map.eval(huge), doctest::Contains("overflowed"), error);
}
