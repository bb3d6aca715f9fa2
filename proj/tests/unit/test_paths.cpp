#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "svtime/diagnostics.hpp"
#include "svtime/errors.hpp"
#include "svtime/models.hpp"
#include "svtime/paths.hpp"

using namespace svtime;
using testing_util::mean;
using testing_util::var;

TEST_CASE("time grid validation") {
  CHECK_THROWS_AS(TimeGrid(std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(TimeGrid({0.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(TimeGrid({1.0, 0.5}), ValidationError);
  CHECK_THROWS_AS(TimeGrid({0.0, NAN}), ValidationError);
  CHECK(TimeGrid({0.0}).size() == 1);
  const TimeGrid g = TimeGrid::uniform(0.0, 2.0, 4);
  CHECK(g.size() == 5);
  CHECK(g[2] == doctest::Approx(1.0));
  CHECK(g.back() == 2.0);
}

TEST_CASE("path validation and interpolation") {
  CHECK_THROWS_AS(Path(TimeGrid({0.0, 1.0}), {1.0}), ValidationError);
  CHECK_THROWS_AS(Path(TimeGrid({0.0, 1.0}), {1.0, INFINITY}), ValidationError);
  const Path p(TimeGrid({0.0, 1.0, 3.0}), {0.0, 2.0, 4.0});
  CHECK(p.interpolate(0.5) == doctest::Approx(1.0));
  CHECK(p.interpolate(2.0) == doctest::Approx(3.0));
  CHECK(p.interpolate(-1.0) == 0.0);
  CHECK(p.interpolate(9.0) == 4.0);
}

TEST_CASE("brownian motion: degenerate grid and anchoring") {
  RandomStream rng(1);
  const Path one = sample_brownian_motion(TimeGrid({0.0}), 0.0, rng);
  CHECK(one.size() == 1);
  CHECK(one.value(0) == 0.0);
  for (int r = 0; r < 20; ++r) {
    CHECK(sample_brownian_motion(TimeGrid({0.0, 1.0}), 5.0, rng).value(0) == 5.0);
  }
}

TEST_CASE("brownian motion: increment variance equals the time step") {
  RandomStream rng(42);
  const TimeGrid g({0.0, 1.0, 2.0});
  const int n = 100000;
  std::vector<double> inc1(n), inc2(n);
  for (int r = 0; r < n; ++r) {
    const Path p = sample_brownian_motion(g, 0.0, rng);
    inc1[r] = p.value(1) - p.value(0);
    inc2[r] = p.value(2) - p.value(1);
  }
  // SE of a sample variance of N(0,1) draws: sqrt(2/n).
  const double se = std::sqrt(2.0 / n);
  CHECK(std::abs(var(inc1) - 1.0) < 3 * se);
  CHECK(std::abs(var(inc2) - 1.0) < 3 * se);
  CHECK(std::abs(mean(inc1)) < 4 * std::sqrt(1.0 / n));
}

TEST_CASE("brownian motion: refined then restricted equals coarse in law") {
  RandomStream rng(7);
  const int n = 10000;
  const TimeGrid fine = TimeGrid::uniform(0.0, 1.0, 50);
  const TimeGrid coarse({0.0, 1.0});
  std::vector<double> a(n), b(n);
  for (int r = 0; r < n; ++r) {
    a[r] = sample_brownian_motion(fine, 0.0, rng).values().back();
    b[r] = sample_brownian_motion(coarse, 0.0, rng).values().back();
  }
  CHECK(ks_two_sample(a, b) > 0.01);
}

TEST_CASE("random stream reproducibility") {
  RandomStream a(99, 3), b(99, 3), c(99, 4);
  const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 100);
  const Path pa = sample_brownian_motion(g, 0.0, a);
  const Path pb = sample_brownian_motion(g, 0.0, b);
  const Path pc = sample_brownian_motion(g, 0.0, c);
  bool same = true;
  bool differs = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    same = same && pa.value(i) == pb.value(i);
    differs = differs || pa.value(i) != pc.value(i);
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("bridge moments closed form") {
  const BridgeMoments m = bridge_moments(0.0, 1.0, 4.0, 5.0, 1.0);
  CHECK(m.mean == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.variance == doctest::Approx(0.75).epsilon(1e-14));
  const BridgeMoments flat = bridge_moments(0.0, 3.0, 2.0, 3.0, 1.3);
  CHECK(flat.mean == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("bridge point sampling") {
  RandomStream rng(5);
  SUBCASE("midpoint of a pinned bridge") {
    const int n = 100000;
    std::vector<double> v(n);
    for (int r = 0; r < n; ++r) v[r] = sample_bridge_point(0.0, 0.0, 1.0, 0.0, 0.5, rng);
    CHECK(std::abs(mean(v)) < 4 * std::sqrt(0.25 / n));
    CHECK(std::abs(var(v) - 0.25) < 4 * 0.25 * std::sqrt(2.0 / n));
  }
  SUBCASE("asymmetric bridge matches closed form") {
    const int n = 100000;
    std::vector<double> v(n);
    for (int r = 0; r < n; ++r) v[r] = sample_bridge_point(0.0, 1.0, 4.0, 5.0, 1.0, rng);
    CHECK(std::abs(mean(v) - 2.0) < 4 * std::sqrt(0.75 / n));
    CHECK(std::abs(var(v) - 0.75) < 4 * 0.75 * std::sqrt(2.0 / n));
  }
  SUBCASE("endpoints are deterministic and consume no randomness") {
    RandomStream a(8), b(8);
    CHECK(sample_bridge_point(0.0, 1.5, 2.0, 3.0, 0.0, a) == 1.5);
    CHECK(sample_bridge_point(0.0, 1.5, 2.0, 3.0, 2.0, a) == 3.0);
    CHECK(a.normal() == b.normal());
  }
  SUBCASE("contract violations") {
    CHECK_THROWS_AS(sample_bridge_point(1.0, 0.0, 1.0, 2.0, 1.0, rng), ValidationError);
    CHECK_THROWS_AS(sample_bridge_point(0.0, 0.0, 1.0, 0.0, 2.0, rng), ValidationError);
  }
}

TEST_CASE("quadratic variation") {
  CHECK(quadratic_variation(Path(TimeGrid({0.0, 1.0, 2.0}), {3.0, 3.0, 3.0})) == 0.0);
  const Path p(TimeGrid({0.0, 1.0, 2.0, 3.0}), {0.0, 1.0, 0.0, 1.0});
  CHECK(quadratic_variation(p) == doctest::Approx(3.0));
  CHECK_THROWS_AS(quadratic_variation(Path(TimeGrid({0.0}), {1.0})), ValidationError);

  SUBCASE("reversal and shift invariance") {
    RandomStream rng(3);
    const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 200);
    const Path b = sample_brownian_motion(g, 0.0, rng);
    std::vector<double> rev(b.values().rbegin(), b.values().rend());
    std::vector<double> shifted(b.values().begin(), b.values().end());
    for (double& v : shifted) v += 17.25;
    const double qv = quadratic_variation(b);
    CHECK(quadratic_variation(Path(g, rev)) == doctest::Approx(qv).epsilon(1e-12));
    CHECK(quadratic_variation(Path(g, shifted)) == doctest::Approx(qv).epsilon(1e-9));
  }

  SUBCASE("scaled brownian path has QV near sigma^2 T") {
    const ModelSpec m = make_model("const-vol-scalar");
    const std::vector<double> theta{0.0, 0.0, 0.4};
    RandomStream rng(11);
    const auto [x, a] = euler_simulate(m, theta, 0.0, 0.0, TimeGrid::uniform(0.0, 10.0, 100000), rng);
    CHECK(std::abs(quadratic_variation(x) - 1.6) / 1.6 < 0.05);
  }
}

TEST_CASE("left riemann quadrature") {
  const TimeGrid g = TimeGrid::uniform(0.0, 2.0, 4);
  CHECK(integrate_left_riemann(g, std::vector<double>(5, 1.0)) == doctest::Approx(2.0));
  CHECK(integrate_left_riemann(TimeGrid({0.0, 1.0, 2.0}), std::vector<double>{0.0, 1.0, 2.0}) ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(integrate_left_riemann(g, std::vector<double>(3, 1.0)), ValidationError);

  double prev_err = INFINITY;
  for (std::size_t n : {10u, 100u, 1000u}) {
    const TimeGrid grid = TimeGrid::uniform(0.0, 2.0, n - 1);
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = grid[i] * grid[i];
    const double err = std::abs(integrate_left_riemann(grid, f) - 8.0 / 3.0);
    CHECK(err < prev_err);
    prev_err = err;
  }
  CHECK(prev_err < 1e-2);
}
