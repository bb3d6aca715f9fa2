#pragma once

// Metropolis-within-Gibbs sampler on the time-changed augmented state.
//
// One sweep: every Z path (independence proposal), every gamma block (bridge
// proposal), the time-scale parameters, the drift parameters, then alpha0.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "svtime/models.hpp"
#include "svtime/observations.hpp"
#include "svtime/paths.hpp"
#include "svtime/state.hpp"

namespace svtime {

struct SamplerConfig {
  std::size_t m = 10;
  std::size_t block_len = 2;  // observation intervals per gamma block
  std::vector<double> rw_scales;  // per parameter on the transformed scale; empty: 0.1 each
  std::size_t n_iter = 1000;
  std::size_t n_burn = 0;
  std::size_t thin = 1;
  std::uint64_t seed = 1;
  std::vector<std::string> fixed;  // parameters held at their initial values
  bool adapt = true;               // tune rw_scales toward 0.3 acceptance during burn-in
  // Extra retrospective Z knots inserted per interval after each sweep.
  std::size_t extra_knots = 0;
  // Every log acceptance ratio is multiplied by this. 1 gives the correct
  // sampler; anything else exists to check that validation tests can fail.
  double ratio_power = 1.0;
};

void validate_config(const SamplerConfig& cfg, std::size_t n_intervals, std::size_t n_params);

struct AcceptanceTally {
  std::size_t proposed = 0;
  std::size_t accepted = 0;
  double rate() const { return proposed == 0 ? 0.0 : double(accepted) / double(proposed); }
};

struct Trace {
  std::vector<std::string> param_names;
  std::vector<std::size_t> iters;
  std::vector<std::vector<double>> draws;  // one row per retained sweep
  std::vector<double> loglik;
  std::map<std::string, AcceptanceTally> acceptance;
  std::vector<double> final_scales;
  SamplerConfig config;

  std::size_t rows() const { return draws.size(); }
  std::vector<double> column(std::size_t param) const;
  std::vector<double> column(const std::string& name) const;
};

// Parameter proposal pieces: target log-density difference and the
// log-Jacobian of the random-walk transform.
struct ProposalRatio {
  double log_target = 0.0;
  double log_jacobian = 0.0;
  bool in_prior = true;
};

class Sampler {
 public:
  Sampler(const AugmentedPosterior& posterior, SamplerConfig config, AugmentedState initial);

  const AugmentedState& state() const { return state_; }
  const SamplerConfig& config() const { return cfg_; }
  RandomStream& rng() { return rng_; }
  std::vector<std::size_t> free_params() const;
  const std::vector<double>& scales() const { return scales_; }

  bool update_z_path(std::size_t k);
  // Resamples gamma strictly between knots c0 and c1 as a Brownian bridge, or
  // on (c0, c1] as a free Brownian path when c1 is the last knot.
  bool update_gamma_block(std::size_t c0, std::size_t c1);
  // Random-walk update of one parameter; time-scale parameters refresh Z
  // retrospectively at the moved Z-times.
  bool update_param(std::size_t i);
  // Evaluates a move of parameter i to `value` without accepting it. Consumes
  // randomness for retrospective draws when Z-times move.
  ProposalRatio evaluate_param_move(std::size_t i, double value);
  // Adds `count` retrospective Z knots per interval at uniform U-times.
  void insert_extra_knots(std::size_t count);

  void sweep();
  // Largest relative discrepancy between the cache and a fresh recomputation.
  double cache_error() const;

  const std::map<std::string, AcceptanceTally>& tallies() const { return tallies_; }
  void reset_tallies() { tallies_.clear(); }
  void adapt_scales(std::size_t batch_index);

 private:
  bool accept(double log_ratio);
  void tally(const std::string& key, bool accepted);

  const AugmentedPosterior* post_;
  SamplerConfig cfg_;
  AugmentedState state_;
  RandomStream rng_;
  std::vector<double> scales_;
  std::vector<bool> is_fixed_;
  std::vector<IntervalState> scratch_;
  std::map<std::string, AcceptanceTally> tallies_;
  std::vector<AcceptanceTally> batch_;
};

// Starting parameter values: prior-support midpoints, with alpha0 matched to
// the data's realized variance when its prior is unbounded.
std::vector<double> default_initial_theta(const ModelSpec& model, const PriorSpec& prior,
                                          const Observations& data);

Trace run_chain(const SamplerConfig& config, const Observations& data, const ModelSpec& model,
                const PriorSpec& prior,
                const std::optional<std::vector<double>>& initial_theta = std::nullopt);

// Same, starting from a supplied augmented state (latent paths included).
Trace run_chain_from(const SamplerConfig& config, const AugmentedPosterior& posterior,
                     AugmentedState initial);

}  // namespace svtime
