#include "svtime/likelihood.hpp"

#include <cmath>
#include <string>

#include "svtime/errors.hpp"

namespace svtime {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

}  // namespace

double log_girsanov_U(const Path& u, const std::function<double(double, double)>& drift) {
  const auto t = u.times();
  double acc = 0.0;
  for (std::size_t i = 1; i < u.size(); ++i) {
    const double b = drift(t[i - 1], u.value(i - 1));
    acc += b * (u.value(i) - u.value(i - 1)) - 0.5 * b * b * (t[i] - t[i - 1]);
  }
  if (!std::isfinite(acc)) throw NumericalError("log_girsanov_U: non-finite result");
  return acc;
}

double log_end_density(double y1, double y0, double T) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw ValidationError("log_end_density: T must be positive and finite");
  }
  const double d = y1 - y0;
  return -0.5 * (kLogTwoPi + std::log(T)) - 0.5 * d * d / T;
}

double log_latent_marginal(const Path& gamma, ParamView theta, const ModelSpec& model) {
  if (!model.stochastic_vol) return 0.0;
  if (gamma.value(0) != 0.0) throw ValidationError("log_latent_marginal: gamma must start at 0");
  const auto t = gamma.times();
  double acc = 0.0;
  for (std::size_t i = 1; i < gamma.size(); ++i) {
    const double a = model.alpha_of_gamma(gamma.value(i - 1), theta);
    const double c = model.latent.beta_drift(a, theta);
    acc += c * (gamma.value(i) - gamma.value(i - 1)) - 0.5 * c * c * (t[i] - t[i - 1]);
  }
  return acc;
}

LogLikBreakdown log_augmented_posterior(const AugmentedState& state, const Observations& data,
                                        const ModelSpec& model, const PriorSpec& prior) {
  const AugmentedPosterior post(model, data, prior, state.m);
  return post.recompute(state);
}

double euler_loglik(const Path& x, const Path& alpha, ParamView theta, const ModelSpec& model) {
  const auto t = x.times();
  if (model.stochastic_vol && alpha.size() != x.size()) {
    throw ValidationError("euler_loglik: X and alpha grids differ in length");
  }
  const double rho = model.rho(theta);
  if (model.stochastic_vol && std::abs(rho) >= 1.0) {
    throw NumericalError("euler_loglik: |rho| = 1 gives a singular transition");
  }
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double dt = t[i] - t[i - 1];
    const double a = model.stochastic_vol ? alpha.value(i - 1) : 0.0;
    const double sx = model.vol_x(a, theta);
    const double ex = x.value(i) - x.value(i - 1) - model.drift_x(t[i - 1], x.value(i - 1), a, theta) * dt;
    if (!model.stochastic_vol) {
      const double v = sx * sx * dt;
      acc += -0.5 * (kLogTwoPi + std::log(v)) - 0.5 * ex * ex / v;
      continue;
    }
    const double sa = model.vol_a(a, theta);
    const double ea = alpha.value(i) - a - model.drift_a(a, theta) * dt;
    const double px = ex / (sx * std::sqrt(dt));
    const double pa = ea / (sa * std::sqrt(dt));
    const double one_m = 1.0 - rho * rho;
    acc += -kLogTwoPi - std::log(sx * sa * dt) - 0.5 * std::log(one_m) -
           (px * px - 2.0 * rho * px * pa + pa * pa) / (2.0 * one_m);
  }
  if (!std::isfinite(acc)) throw NumericalError("euler_loglik: non-finite result");
  return acc;
}

}  // namespace svtime
