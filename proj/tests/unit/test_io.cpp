#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "svtime/errors.hpp"
#include "svtime/io.hpp"

using namespace svtime;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("svtime_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kStudyConfig = R"({
  "model": "ou-sv-leverage",
  "params": {"kappa_x": 0.2, "mu_x": 0.1, "kappa_a": 0.3, "mu_a": -0.2,
             "sigma": 0.4, "rho": -0.5, "alpha0": -0.2},
  "simulate": {"x0": 0.1, "delta": 0.001, "horizon": 500, "thin": 1000, "seed": 7}
})";

const char* kSmallFit = R"({
  "model": "const-vol-scalar",
  "params": {"sigma": 1.0, "theta0": 0.1, "theta1": 0.5},
  "prior": {"theta0": [-2, 2], "theta1": [0, 3], "sigma": [0.1, null]},
  "sampler": {"m": 4, "n_iter": 100, "n_burn": 20, "thin": 2, "seed": 5},
  "simulate": {"x0": 0.0, "delta": 0.01, "horizon": 10, "thin": 50, "seed": 3}
})";

}  // namespace

TEST_CASE("csv ingestion") {
  const Observations two = parse_csv("time,value\n0,1\n1,2\n", {});
  REQUIRE(two.size() == 2);
  CHECK(two.times[0] == 0.0);
  CHECK(two.values[0] == 1.0);
  CHECK(two.times[1] == 1.0);
  CHECK(two.values[1] == 2.0);
  CHECK(parse_csv("0,1\n1,2\n", {}).size() == 2);

  std::string weekly = "value\n";
  for (int i = 0; i < 1809; ++i) weekly += std::to_string(5.0 + 0.001 * i) + "\n";
  const Observations w = parse_csv(weekly, {5.0 / 252.0});
  REQUIRE(w.size() == 1809);
  CHECK(w.times.back() == doctest::Approx(35.873).epsilon(1e-4));
  CHECK(w.times.back() == doctest::Approx(1808.0 * 5.0 / 252.0).epsilon(1e-14));
  CHECK_THROWS_AS(parse_csv(weekly, {}), ValidationError);

  try {
    parse_csv("time,value\n0,1\n2,2\n1,3\n", {});
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_csv("time,value\n0,1\n1,abc\n", {}), ValidationError);
  CHECK_THROWS_AS(parse_csv("time,value\n0,1,2\n1,2\n", {}), ValidationError);
  CHECK_THROWS_AS(parse_csv("time,value\n0,1\n", {}), ValidationError);

  const ModelSpec tbill = make_model("tbill-logsv");
  CHECK(parse_csv("0,1\n1,2\n", {}, &tbill).size() == 2);
  CHECK_THROWS_AS(parse_csv("0,1\n1,-2\n", {}, &tbill), ValidationError);
}

TEST_CASE("config parsing") {
  const RunConfig c = parse_config(kSmallFit);
  CHECK(c.model == "const-vol-scalar");
  REQUIRE(c.params);
  CHECK((*c.params)[0] == 0.1);
  CHECK((*c.params)[2] == 1.0);
  CHECK(c.column_order == std::vector<std::string>{"sigma", "theta0", "theta1"});
  CHECK(std::isinf(c.prior.upper[2]));
  CHECK(c.sampler.m == 4);
  CHECK(c.sampler.n_burn == 20);

  const RunConfig mid = parse_config(R"({"model": "const-vol-scalar", "params": "prior-midpoint"})");
  CHECK_FALSE(mid.params);
  CHECK(mid.column_order == std::vector<std::string>{"theta0", "theta1", "sigma"});

  CHECK_THROWS_AS(parse_config("{"), ValidationError);
  CHECK_THROWS_AS(parse_config("[]"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"params": {}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"model": "heston"})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"model": "const-vol-scalar", "params": {"theta0": 0}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"model": "const-vol-scalar",
      "params": {"theta0": 0, "theta1": 1, "sigma": -1}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"model": "const-vol-scalar", "prior": {"sigma": [2, 1]}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"model": "const-vol-scalar", "prior": {"nu": [0, 1]}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"model": "const-vol-scalar",
      "sampler": {"n_iter": 10, "n_burn": 10}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"model": "const-vol-scalar", "sampler": {"m": 0}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"model": "const-vol-scalar", "sampler": {"m": "ten"}})"),
                  ValidationError);
}

TEST_CASE("dataset simulation") {
  const RunConfig study = parse_config(kStudyConfig);
  const SimulationOutput sim = simulate_dataset(study);
  CHECK(sim.observations.size() == 501);
  CHECK(sim.x.size() == 500001);
  CHECK(sim.observations.times.back() == doctest::Approx(500.0));
  CHECK(sim.observations.values[1] == sim.x.value(1000));
  CHECK(sim.alpha.value(0) == -0.2);

  RunConfig fine = study;
  fine.simulate.delta = 0.0005;
  fine.simulate.obs_spacing = 1.0;
  const SimulationOutput sf = simulate_dataset(fine);
  CHECK(sf.observations.size() == 501);
  CHECK(sf.observations.values[0] == sim.observations.values[0]);
  CHECK(sf.observations.values[10] != sim.observations.values[10]);

  RunConfig full = study;
  full.simulate.horizon = 2.0;
  full.simulate.thin = 1;
  const SimulationOutput sk = simulate_dataset(full);
  REQUIRE(sk.observations.size() == sk.x.size());
  for (std::size_t i = 0; i < sk.x.size(); ++i) CHECK(sk.observations.values[i] == sk.x.value(i));

  RunConfig again = study;
  CHECK(simulate_dataset(again).observations.values == sim.observations.values);

  RunConfig bad = study;
  bad.simulate.thin = 7;
  CHECK_THROWS_AS(simulate_dataset(bad), ValidationError);
  bad = study;
  bad.params.reset();
  CHECK_THROWS_AS(simulate_dataset(bad), ValidationError);
}

TEST_CASE("simulate, fit and diagnose commands") {
  const fs::path dir = scratch("cmds");
  const RunConfig cfg = parse_config(kSmallFit);
  cmd_simulate(cfg, dir / "sim");
  CHECK(fs::exists(dir / "sim" / "truth.csv"));
  CHECK(fs::exists(dir / "sim" / "truth_params.csv"));
  const ModelSpec model = make_model(cfg.model);
  const Observations obs = ingest_csv(dir / "sim" / "observations.csv", {}, &model);
  CHECK(obs.size() == 21);

  cmd_fit(cfg, dir / "sim" / "observations.csv", dir / "fit1");
  cmd_fit(cfg, dir / "sim" / "observations.csv", dir / "fit2");
  for (const char* f : {"trace.csv", "summary.csv", "acceptance.json"}) {
    CHECK(fs::exists(dir / "fit1" / f));
  }
  const std::string trace = slurp(dir / "fit1" / "trace.csv");
  CHECK(trace.rfind("iter,sigma,theta0,theta1,loglik\n", 0) == 0);
  CHECK(trace == slurp(dir / "fit2" / "trace.csv"));
  const Trace t = read_trace(dir / "fit1" / "trace.csv");
  CHECK(t.rows() == 40);
  CHECK(slurp(dir / "fit1" / "summary.csv").rfind("param,mean,sd,q2.5,median,q97.5\n", 0) == 0);
  CHECK(slurp(dir / "fit1" / "acceptance.json").find("\"z\"") != std::string::npos);

  RunConfig two = cfg;
  two.chains = 2;
  cmd_fit(two, dir / "sim" / "observations.csv", dir / "fit3");
  CHECK(fs::exists(dir / "fit3" / "trace_1.csv"));
  CHECK(fs::exists(dir / "fit3" / "trace_2.csv"));
  CHECK(slurp(dir / "fit3" / "trace_1.csv") == trace);
  CHECK(slurp(dir / "fit3" / "trace_2.csv") != trace);

  cmd_diagnose(dir / "fit1" / "trace.csv", 10, dir / "diag");
  CHECK(slurp(dir / "diag" / "acf.csv").rfind("lag,sigma,theta0,theta1\n", 0) == 0);
  CHECK_THROWS_AS(cmd_diagnose(dir / "fit1" / "trace.csv", 40, dir / "diag"), ValidationError);

  {
    std::ofstream one(dir / "one.csv");
    one << "iter,sigma,loglik\n";
    for (int i = 1; i <= 120; ++i) one << i << ',' << std::sin(0.7 * i) + 1.5 << ",-3\n";
  }
  cmd_diagnose(dir / "one.csv", 5, dir / "diag1");
  CHECK(slurp(dir / "diag1" / "acf.csv").rfind("lag,sigma\n", 0) == 0);
  CHECK(slurp(dir / "diag1" / "iact.csv").find("sigma,") != std::string::npos);
  CHECK(slurp(dir / "diag1" / "kde.csv").find("sigma,") != std::string::npos);

  {
    std::ofstream broken(dir / "broken.csv");
    broken << "iter,sigma\n1,2\n";
  }
  CHECK_THROWS_AS(cmd_diagnose(dir / "broken.csv", 1, dir / "diag2"), ValidationError);
  fs::remove_all(dir);
}
