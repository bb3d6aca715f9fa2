#pragma once

// The MCMC state in the time-changed parametrisation, and the machinery that
// maps it to likelihood terms.
//
// Every observation interval k carries m interior X-time knots at spacing
// delta_k = (t_k - t_{k-1}) / (m + 1). The latent gamma lives on the union of
// these knots (n (m + 1) + 1 values, gamma_0 = 0). Per interval the stored
// path component is Z at the Z-times s_0 = 0 < s_1 < ... < s_m implied by the
// current (theta, gamma); every other quantity (U-times, U, X) is derived.

#include <cstddef>
#include <limits>
#include <vector>

#include "svtime/models.hpp"
#include "svtime/observations.hpp"
#include "svtime/paths.hpp"

namespace svtime {

struct LogLikBreakdown {
  std::vector<double> log_g;  // per-interval Girsanov term on U-time
  std::vector<double> log_f;  // per-interval endpoint density (incl. state-transform Jacobian)
  double log_l_gamma = 0.0;   // latent marginal against Wiener measure
  double log_prior = 0.0;
  double total = 0.0;

  double loglik() const { return total - log_prior; }
};

// Independent flat priors, truncated to [lower, upper] intersected with each
// parameter's support. Improper unless every bound is finite.
struct PriorSpec {
  std::vector<double> lower;
  std::vector<double> upper;

  static PriorSpec flat(const ModelSpec& model);
  bool contains(const ModelSpec& model, ParamView theta) const;
  double log_density(const ModelSpec& model, ParamView theta) const;
  bool proper(const std::vector<std::size_t>& free_params) const;
};

struct IntervalState {
  double y0 = 0.0;       // working-scale start value
  double y1 = 0.0;       // working-scale end value with the leverage term removed
  double log_jac = 0.0;  // log|h'(r_k)| of the interval's end observation
  double T = 0.0;        // U-time length

  std::vector<double> alpha;      // m + 2 latent values at the X-time knots
  std::vector<double> vol;        // sigma_x(alpha_j)
  std::vector<double> lat_drift;  // drift of the unit-volatility latent at alpha_j
  std::vector<double> adj;        // cumulative leverage adjustment X - H
  std::vector<double> tau;        // U-times, tau_0 = 0, tau_{m+1} = T
  std::vector<double> s;          // Z-times of the stored knots, s_0 = 0
  std::vector<double> z;          // Z values at s, z_0 = 0
  std::vector<double> u;          // U values, u_0 = y0, u_{m+1} = y1

  // Transient Z knots off the likelihood grid (dropped whenever s changes).
  std::vector<double> extra_s;
  std::vector<double> extra_z;

  double log_g = 0.0;
  double log_f = 0.0;
  double log_lg = 0.0;  // gamma steps inside this interval
};

struct AugmentedState {
  std::size_t m = 0;
  std::vector<double> theta;
  std::vector<double> gamma;
  std::vector<IntervalState> intervals;
  LogLikBreakdown cache;
};

// Binds a model, data set, prior, and imputation level; evaluates states.
class AugmentedPosterior {
 public:
  AugmentedPosterior(const ModelSpec& model, const Observations& data, PriorSpec prior,
                     std::size_t m);

  const ModelSpec& model() const { return *model_; }
  const Observations& data() const { return *data_; }
  const PriorSpec& prior() const { return prior_; }
  std::size_t m() const { return m_; }
  std::size_t n_intervals() const { return data_->intervals(); }
  std::size_t n_knots() const { return n_intervals() * (m_ + 1) + 1; }
  double knot_time(std::size_t k, std::size_t j) const;
  double step(std::size_t k) const;

  // gamma = 0 and Z = 0 (U equal to the chord between observations).
  AugmentedState initial_state(std::vector<double> theta) const;

  // Builds the state whose derived X and alpha equal the given knot values
  // (working-scale X, n_knots() entries each). alpha0 in theta is overwritten
  // with alpha.front() for stochastic-volatility models.
  AugmentedState state_from_paths(std::vector<double> theta, const std::vector<double>& x,
                                  const std::vector<double>& alpha) const;

  // Geometry of interval k: alpha, vol, drift, leverage, U-times, endpoints, Z-times.
  void fill_geometry(std::size_t k, ParamView theta, const std::vector<double>& gamma,
                     IntervalState& out) const;
  // U values from Z, then log_g, log_f and log_lg. Geometry must be filled.
  void fill_values(std::size_t k, ParamView theta, const std::vector<double>& gamma,
                   IntervalState& out) const;

  // Proposal evaluation for interval k under (theta, gamma): Z at the new
  // Z-times is reused where times coincide with `current`'s and otherwise drawn
  // retrospectively from `current`'s stored knots.
  void evaluate_interval(std::size_t k, ParamView theta, const std::vector<double>& gamma,
                         const IntervalState& current, RandomStream& rng,
                         IntervalState& out) const;

  // Sums cached interval terms; fixed order.
  LogLikBreakdown aggregate(const AugmentedState& state) const;
  // Recomputes every interval from the stored Z values (no randomness).
  LogLikBreakdown recompute(const AugmentedState& state) const;

  // Working-scale X at all knots.
  std::vector<double> x_knots(const AugmentedState& state) const;

 private:
  const ModelSpec* model_;
  const Observations* data_;
  PriorSpec prior_;
  std::size_t m_;
};

}  // namespace svtime
