// svtime: simulate, fit and diagnose stochastic volatility diffusions.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "svtime/errors.hpp"
#include "svtime/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bayesian estimation of stochastic volatility diffusions"};
  app.require_subcommand(1);

  std::string config_path;
  std::string data_path;
  std::string trace_path;
  std::string out_dir;
  std::size_t max_lag = 50;
  std::size_t kde_points = 256;

  auto* simulate = app.add_subcommand("simulate", "Simulate a data set by the Euler scheme");
  simulate->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", out_dir, "Output directory")->required();

  auto* fit = app.add_subcommand("fit", "Run the MCMC sampler on a data set");
  fit->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  fit->add_option("--data", data_path, "Observations CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--out", out_dir, "Output directory")->required();

  auto* diagnose = app.add_subcommand("diagnose", "ACF, IACT and kernel densities of a trace");
  diagnose->add_option("--trace", trace_path, "trace.csv from fit")->required()->check(CLI::ExistingFile);
  diagnose->add_option("--max-lag", max_lag, "Largest ACF lag");
  diagnose->add_option("--kde-points", kde_points, "KDE grid size");
  diagnose->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*simulate) {
      svtime::cmd_simulate(svtime::load_config(config_path), out_dir);
    } else if (*fit) {
      svtime::cmd_fit(svtime::load_config(config_path), data_path, out_dir);
    } else if (*diagnose) {
      svtime::cmd_diagnose(trace_path, max_lag, out_dir, kde_points);
    }
  } catch (const svtime::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
