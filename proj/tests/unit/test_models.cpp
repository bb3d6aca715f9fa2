#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "svtime/errors.hpp"
#include "svtime/models.hpp"

using namespace svtime;
using testing_util::mean;
using testing_util::var;

namespace {

const std::vector<double> kSvTruth{0.2, 0.1, 0.3, -0.2, 0.4, -0.5, -0.2};

double corr(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("registry") {
  for (const auto& name : registered_models()) CHECK(make_model(name).name == name);
  CHECK_THROWS_AS(make_model("heston"), ValidationError);
  const ModelSpec m = make_model("ou-sv-leverage");
  CHECK(m.param_names() ==
        std::vector<std::string>{"kappa_x", "mu_x", "kappa_a", "mu_a", "sigma", "rho", "alpha0"});
  CHECK(m.index_of("rho") == 5);
}

TEST_CASE("parameter vectors respect supports") {
  const ModelSpec m = make_model("ou-sv-leverage");
  CHECK_NOTHROW(ParamVector(m.params, kSvTruth));
  auto bad = kSvTruth;
  bad[5] = 1.0;
  CHECK_THROWS_AS(ParamVector(m.params, bad), ValidationError);
  ParamVector p(m.params, kSvTruth);
  CHECK(p.at("sigma") == 0.4);
  CHECK_THROWS_AS(p.set("sigma", -1.0), ValidationError);
  CHECK_THROWS_AS(p.index_of("nope"), ValidationError);
}

TEST_CASE("euler: brownian motion when drift vanishes") {
  const ModelSpec m = make_model("const-vol-scalar");
  RandomStream rng(1);
  const auto [x, a] =
      euler_simulate(m, std::vector<double>{0.0, 0.0, 1.0}, 0.0, 0.0, TimeGrid::uniform(0, 10, 100000), rng);
  CHECK(x.value(0) == 0.0);
  CHECK(std::abs(quadratic_variation(x) - 10.0) < 0.5);
}

TEST_CASE("euler: simulation study layout gives 501 observations") {
  const ModelSpec m = make_model("ou-sv-leverage");
  RandomStream rng(2);
  const TimeGrid g = TimeGrid::uniform(0.0, 500.0, 500000);
  const auto [x, a] = euler_simulate(m, kSvTruth, 0.1, -0.2, g, rng);
  std::size_t rows = 0;
  for (std::size_t i = 0; i < x.size(); i += 1000) ++rows;
  CHECK(rows == 501);
}

TEST_CASE("euler: leverage drives correlated increments") {
  const ModelSpec m = make_model("ou-sv-leverage");
  for (double rho : {1.0 - 1e-12, -(1.0 - 1e-12), 0.0}) {
    auto theta = kSvTruth;
    theta[5] = rho;
    RandomStream rng(3);
    const TimeGrid g = TimeGrid::uniform(0.0, 50.0, 50000);
    const auto [x, a] = euler_simulate(m, theta, 0.0, -0.2, g, rng);
    std::vector<double> dx(g.size() - 1), da(g.size() - 1);
    for (std::size_t i = 1; i < g.size(); ++i) {
      dx[i - 1] = (x.value(i) - x.value(i - 1)) / m.vol_x(a.value(i - 1), theta);
      da[i - 1] = (a.value(i) - a.value(i - 1)) / theta[4];
    }
    CHECK(std::abs(corr(dx, da) - rho) < 0.03);
  }
}

TEST_CASE("euler: quadratic variation matches integrated variance") {
  const ModelSpec m = make_model("ou-sv-leverage");
  RandomStream rng(4);
  const TimeGrid g = TimeGrid::uniform(0.0, 100.0, 1000000);
  const auto [x, a] = euler_simulate(m, kSvTruth, 0.1, -0.2, g, rng);
  std::vector<double> var_path(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) var_path[i] = std::exp(a.value(i));
  const double iv = integrate_left_riemann(g, var_path);
  CHECK(std::abs(quadratic_variation(x) - iv) / iv < 0.05);
}

TEST_CASE("euler: OU endpoint law") {
  const ModelSpec m = make_model("const-vol-scalar");
  const std::vector<double> theta{0.0, 1.0, 1.0};
  const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 1000);
  RandomStream rng(5);
  const int n = 100000;
  std::vector<double> end(n);
  for (int r = 0; r < n; ++r) end[r] = euler_simulate(m, theta, 1.0, 0.0, g, rng).first.values().back();
  const double mu = std::exp(-1.0);
  const double v = (1.0 - std::exp(-2.0)) / 2.0;
  CHECK(std::abs(mean(end) - mu) < 4 * std::sqrt(v / n));
  CHECK(std::abs(var(end) - v) < 4 * v * std::sqrt(2.0 / n));
}

TEST_CASE("euler: explosion is reported with a time") {
  ModelSpec m = make_model("const-vol-scalar");
  RandomStream rng(6);
  const std::vector<double> theta{0.0, -1e300, 1.0};
  CHECK_THROWS_AS(euler_simulate(m, theta, 1.0, 0.0, TimeGrid::uniform(0, 1, 100), rng), NumericalError);
  CHECK_THROWS_AS(euler_simulate(m, std::vector<double>{0.0, 0.0, -1.0}, 0.0, 0.0,
                                 TimeGrid::uniform(0, 1, 10), rng),
                  ValidationError);
}

TEST_CASE("alpha and gamma transforms") {
  const ModelSpec m = make_model("ou-sv-leverage");
  auto theta = kSvTruth;
  theta[6] = 0.0;
  const TimeGrid g({0.0, 1.0, 2.0});
  const Path alpha(g, {0.0, 0.4, 0.8});
  const Path gamma = alpha_to_gamma(alpha, theta, m.latent);
  CHECK(gamma.value(0) == 0.0);
  CHECK(gamma.value(1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gamma.value(2) == doctest::Approx(2.0).epsilon(1e-14));

  const Path constant(g, {-0.3, -0.3, -0.3});
  const Path flat_gamma = alpha_to_gamma(constant, theta, m.latent);
  for (double v : flat_gamma.values()) CHECK(v == 0.0);

  const Path a2 = gamma_to_alpha(Path(TimeGrid({0.0, 1.0}), {0.0, 1.0}), 0.4, -0.2);
  CHECK(a2.value(0) == doctest::Approx(-0.2));
  CHECK(a2.value(1) == doctest::Approx(0.2));
  const Path no_scale = gamma_to_alpha(Path(g, {0.0, 3.0, -1.0}), 0.0, 0.7);
  const Path no_move = gamma_to_alpha(Path(g, {0.0, 0.0, 0.0}), 0.4, 0.7);
  for (double v : no_scale.values()) CHECK(v == 0.7);
  for (double v : no_move.values()) CHECK(v == 0.7);

  SUBCASE("round trips") {
    RandomStream rng(9);
    for (int c = 0; c < 1000; ++c) {
      const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 20);
      std::vector<double> a(grid.size());
      for (double& v : a) v = 3.0 * rng.normal();
      theta[4] = 0.05 + 2.0 * rng.uniform();
      const Path ap(grid, a);
      const Path back = gamma_to_alpha(alpha_to_gamma(ap, theta, m.latent), theta, m.latent, a[0]);
      const Path back_lin = gamma_to_alpha(alpha_to_gamma(ap, theta, m.latent), theta[4], a[0]);
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(testing_util::rel_err(back.value(i), a[i]) <= 1e-12);
        CHECK(testing_util::rel_err(back_lin.value(i), a[i]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("lamperti transform") {
  const ModelSpec cv = make_model("const-vol-scalar");
  const auto id = lamperti(2.5, std::vector<double>{0, 0, 1}, cv);
  CHECK(id.first == 2.5);
  CHECK(id.second == 0.0);

  const ModelSpec tb = make_model("tbill-logsv");
  const std::vector<double> theta{0.13, 0.013, 2.4, -4.0, 2.8, -4.0};
  const auto [h, jac] = lamperti(std::exp(1.0), theta, tb);
  CHECK(h == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(jac == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK_THROWS_AS(lamperti(-1.0, theta, tb), ValidationError);

  for (const auto& name : registered_models()) {
    const ModelSpec m = make_model(name);
    if (!m.lamperti) continue;
    for (double r : {0.05, 0.7, 3.0, 12.0}) {
      const double eps = 1e-6 * r;
      const double fd = (m.lamperti->forward(r + eps, theta) - m.lamperti->forward(r - eps, theta)) / (2 * eps);
      CHECK(std::abs(fd * m.lamperti->state_vol(r, theta) - 1.0) < 1e-6);
      CHECK(testing_util::rel_err(m.lamperti->inverse(m.lamperti->forward(r, theta), theta), r) <= 1e-12);
    }
  }
}

TEST_CASE("leverage adjustment") {
  const ModelSpec m = make_model("ou-sv-leverage");
  RandomStream rng(12);
  const TimeGrid g = TimeGrid::uniform(0.0, 2.0, 40);
  const Path x = sample_brownian_motion(g, 0.3, rng);
  const Path gamma = sample_brownian_motion(g, 0.0, rng);

  SUBCASE("no correlation leaves X unchanged") {
    auto theta = kSvTruth;
    theta[5] = 0.0;
    const Path h = leverage_adjust(x, gamma, theta, m, LeverageDirection::forward);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(h.value(i) == x.value(i));
  }
  SUBCASE("constant volatility gives rho c gamma") {
    ModelSpec c = m;
    c.vol_x = [](double, ParamView) { return 1.7; };
    const Path h = leverage_adjust(x, gamma, kSvTruth, c, LeverageDirection::forward);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(x.value(i) - h.value(i) == doctest::Approx(-0.5 * 1.7 * gamma.value(i)).epsilon(1e-12));
    }
  }
  SUBCASE("forward and inverse are inverse maps") {
    for (int c = 0; c < 1000; ++c) {
      auto theta = kSvTruth;
      theta[5] = 2.0 * rng.uniform() - 1.0;
      theta[6] = rng.normal();
      const Path xc = sample_brownian_motion(g, rng.normal(), rng);
      const Path gc = sample_brownian_motion(g, 0.0, rng);
      const Path h = leverage_adjust(xc, gc, theta, m, LeverageDirection::forward);
      const Path back = leverage_adjust(h, gc, theta, m, LeverageDirection::inverse);
      for (std::size_t i = 0; i < xc.size(); ++i) {
        CHECK(testing_util::rel_err(back.value(i), xc.value(i)) <= 1e-12);
      }
    }
  }
  SUBCASE("gamma must cover x") {
    const Path short_gamma(TimeGrid({0.0, 1.0}), {0.0, 0.5});
    CHECK_THROWS_AS(leverage_adjust(x, short_gamma, kSvTruth, m, LeverageDirection::forward),
                    ValidationError);
  }
}
