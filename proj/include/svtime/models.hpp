#pragma once

// Model definitions for the observed diffusion X and its latent log-variance
// process alpha:
//
//   dX     = mu_x(t, X, alpha) dt + sigma_x(alpha) (rho dW + sqrt(1 - rho^2) dB)
//   dalpha = mu_a(alpha) dt + sigma_a(alpha) dW
//
// optionally observed through a state transform (Lamperti) so that the data
// live on r with X = h(r).

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "svtime/paths.hpp"

namespace svtime {

enum class Support { unbounded, positive, symmetric_unit };  // symmetric_unit: (-1, 1)

bool in_support(Support s, double v);
std::string to_string(Support s);

struct ParamInfo {
  std::string name;
  Support support = Support::unbounded;
  // Enters the time change (volatility of X, leverage, or the latent origin).
  bool timescale = false;
};

using ParamView = std::span<const double>;

// Named parameter values checked against their supports.
class ParamVector {
 public:
  ParamVector() = default;
  ParamVector(std::vector<ParamInfo> info, std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  std::size_t index_of(std::string_view name) const;
  double at(std::string_view name) const { return values_[index_of(name)]; }
  void set(std::string_view name, double v);
  ParamView values() const { return values_; }
  const std::vector<ParamInfo>& info() const { return info_; }

 private:
  std::vector<ParamInfo> info_;
  std::vector<double> values_;
};

// beta = h(alpha) with dh/dalpha = 1 / sigma_a, gamma = beta - beta_0.
struct LatentTransform {
  std::function<double(double alpha, ParamView)> to_beta;
  std::function<double(double beta, ParamView)> from_beta;
  // Drift of beta (unit diffusion coefficient) expressed in alpha.
  std::function<double(double alpha, ParamView)> beta_drift;

  // h(alpha) = alpha / sigma with sigma = theta[sigma_index].
  static LatentTransform affine(std::size_t sigma_index,
                                std::function<double(double, ParamView)> drift_a);
};

// Lamperti transform x_dot = h(x) with dh/dx = 1 / state_vol(x).
struct StateTransform {
  std::function<double(double x, ParamView)> forward;
  std::function<double(double x_dot, ParamView)> inverse;
  std::function<double(double x, ParamView)> state_vol;
};

struct ModelSpec {
  std::string name;
  std::vector<ParamInfo> params;
  bool stochastic_vol = false;
  std::optional<std::size_t> rho_index;
  std::optional<std::size_t> alpha0_index;

  // All functions act on the working (transformed) scale of X.
  std::function<double(double t, double x, double alpha, ParamView)> drift_x;
  std::function<double(double alpha, ParamView)> vol_x;
  std::function<double(double alpha, ParamView)> drift_a;
  std::function<double(double alpha, ParamView)> vol_a;
  LatentTransform latent;
  std::optional<StateTransform> lamperti;
  // Latent level giving instantaneous variance `rate` for X; used to seed alpha0.
  std::function<double(double rate)> alpha_for_variance;

  std::size_t index_of(std::string_view param) const;
  std::vector<std::string> param_names() const;
  double rho(ParamView theta) const { return rho_index ? theta[*rho_index] : 0.0; }
  double alpha0(ParamView theta) const { return alpha0_index ? theta[*alpha0_index] : 0.0; }
  // alpha = h^{-1}(h(alpha0) + gamma)
  double alpha_of_gamma(double gamma, ParamView theta) const;
};

// Registry names: "const-vol-scalar", "ou-sv-leverage", "tbill-logsv".
ModelSpec make_model(std::string_view name);
std::vector<std::string> registered_models();

// Variant of "tbill-logsv" working directly on log r with no state transform.
ModelSpec make_tbill_logsv_direct();

// Euler scheme on `grid`. Returns (X on the observed scale, alpha). For models
// with a state transform the recursion runs on h(X) and maps back.
std::pair<Path, Path> euler_simulate(const ModelSpec& model, ParamView theta, double x0,
                                     double alpha0, const TimeGrid& grid, RandomStream& rng);

Path alpha_to_gamma(const Path& alpha, ParamView theta, const LatentTransform& transform);
Path gamma_to_alpha(const Path& gamma, double sigma, double alpha0);
Path gamma_to_alpha(const Path& gamma, ParamView theta, const LatentTransform& transform,
                    double alpha0);

// Returns (h(x), log|h'(x)|). Identity when the model has no state transform.
std::pair<double, double> lamperti(double x, ParamView theta, const ModelSpec& model);

enum class LeverageDirection { forward, inverse };

// forward: H = X - int rho sigma_x(alpha) dW, inverse: X = H + int ... .
// dW is taken as the increment of gamma (linearly interpolated onto x's grid),
// sigma_x at the left end of each step.
Path leverage_adjust(const Path& x, const Path& gamma, ParamView theta, const ModelSpec& model,
                     LeverageDirection direction);

}  // namespace svtime
