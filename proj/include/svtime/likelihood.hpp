#pragma once

// Log-densities for the time-changed representation and the Euler oracle.

#include <functional>

#include "svtime/models.hpp"
#include "svtime/observations.hpp"
#include "svtime/paths.hpp"
#include "svtime/state.hpp"

namespace svtime {

// log dP/dW for a unit-volatility path U with drift b(t, u):
// sum b(t_{i-1}, U_{i-1}) dU_i - 1/2 sum b(t_{i-1}, U_{i-1})^2 dt_i.
double log_girsanov_U(const Path& u, const std::function<double(double t, double u)>& drift);

// log N(y1; y0, T).
double log_end_density(double y1, double y0, double T);

// Girsanov term of gamma (gamma_0 = 0) against standard Brownian motion, with
// the drift gamma inherits from the latent process.
double log_latent_marginal(const Path& gamma, ParamView theta, const ModelSpec& model);

// Full breakdown for a state, recomputed from scratch. The prior term is 0
// inside the prior box and -inf outside.
LogLikBreakdown log_augmented_posterior(const AugmentedState& state, const Observations& data,
                                        const ModelSpec& model, const PriorSpec& prior);

// Euler log-density of the (X, alpha) skeleton, X on the model's working scale.
// Test oracle. For constant-volatility models alpha is ignored.
double euler_loglik(const Path& x, const Path& alpha, ParamView theta, const ModelSpec& model);

}  // namespace svtime
