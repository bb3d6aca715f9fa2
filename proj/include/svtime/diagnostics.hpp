#pragma once

// Posterior summaries, autocorrelation, kernel densities and the
// joint-distribution ("getting it right") check of the sampler.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "svtime/mcmc.hpp"
#include "svtime/models.hpp"
#include "svtime/state.hpp"

namespace svtime {

struct SummaryRow {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double median = 0.0;
  double q975 = 0.0;
};

using SummaryTable = std::vector<SummaryRow>;

// Sample quantile, linear interpolation between order statistics.
double quantile(std::vector<double> values, double p);

SummaryTable summarize(const Trace& trace);
SummaryRow summarize_column(const std::string& name, const std::vector<double>& draws);

// Biased sample autocorrelation at lags 0..max_lag.
std::vector<double> acf(const std::vector<double>& series, std::size_t max_lag);

// 1 + 2 sum rho(k), summed over Geyer's initial positive sequence.
double iact(const std::vector<double>& series);

// Gaussian KDE with Silverman's bandwidth on an even grid spanning the data
// range padded by five bandwidths.
std::vector<std::pair<double, double>> kde_export(const std::vector<double>& series,
                                                  std::size_t grid_points);

// Kolmogorov-Smirnov tests; return p-values (asymptotic distribution).
double ks_pvalue(double statistic, double effective_n);
double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Transition kernel used by the getting-it-right loop: given simulated data and
// the true (theta, latent knots), return the retained parameter vector.
struct RecoveryKernel {
  enum class Kind { sampler, prior_only };
  Kind kind = Kind::sampler;
};

struct RecoverySetup {
  std::vector<double> base_theta;  // values of parameters held fixed
  std::vector<std::string> free;   // parameters drawn from the prior and sampled
  std::size_t n_obs = 6;
  double spacing = 1.0;
  double x0 = 0.0;  // observed-scale start of X
  std::size_t sweeps = 50;
  std::uint64_t seed = 1;
};

struct RecoveryResult {
  std::vector<std::string> names;
  std::vector<double> p_values;
  std::vector<std::vector<double>> retained;  // per free parameter
};

// Draws theta from the (proper) prior, simulates X on the imputation grid by
// the Euler scheme, starts the chain from the truth and runs `setup.sweeps`
// sweeps; compares the retained draws with the prior by KS.
RecoveryResult prior_recovery_test(const ModelSpec& model, const PriorSpec& prior,
                                   const SamplerConfig& config, const RecoverySetup& setup,
                                   std::size_t replications,
                                   RecoveryKernel kernel = {RecoveryKernel::Kind::sampler});

}  // namespace svtime
