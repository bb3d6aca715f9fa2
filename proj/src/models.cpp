#include "svtime/models.hpp"

#include <cmath>
#include <string>

#include "svtime/errors.hpp"

namespace svtime {

bool in_support(Support s, double v) {
  if (!std::isfinite(v)) return false;
  switch (s) {
    case Support::unbounded:
      return true;
    case Support::positive:
      return v > 0.0;
    case Support::symmetric_unit:
      return v > -1.0 && v < 1.0;
  }
  return false;
}

std::string to_string(Support s) {
  switch (s) {
    case Support::unbounded:
      return "unbounded";
    case Support::positive:
      return "positive";
    case Support::symmetric_unit:
      return "interval(-1,1)";
  }
  return "?";
}

ParamVector::ParamVector(std::vector<ParamInfo> info, std::vector<double> values)
    : info_(std::move(info)), values_(std::move(values)) {
  if (info_.size() != values_.size()) throw ValidationError("ParamVector: size mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!in_support(info_[i].support, values_[i])) {
      throw ValidationError("parameter " + info_[i].name + " = " + std::to_string(values_[i]) +
                            " outside support " + to_string(info_[i].support));
    }
  }
}

std::size_t ParamVector::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < info_.size(); ++i) {
    if (info_[i].name == name) return i;
  }
  throw ValidationError("unknown parameter: " + std::string(name));
}

void ParamVector::set(std::string_view name, double v) {
  const std::size_t i = index_of(name);
  if (!in_support(info_[i].support, v)) {
    throw ValidationError("parameter " + info_[i].name + " outside support");
  }
  values_[i] = v;
}

LatentTransform LatentTransform::affine(std::size_t sigma_index,
                                        std::function<double(double, ParamView)> drift_a) {
  LatentTransform t;
  t.to_beta = [sigma_index](double a, ParamView th) { return a / th[sigma_index]; };
  t.from_beta = [sigma_index](double b, ParamView th) { return b * th[sigma_index]; };
  t.beta_drift = [sigma_index, drift_a = std::move(drift_a)](double a, ParamView th) {
    return drift_a(a, th) / th[sigma_index];
  };
  return t;
}

std::size_t ModelSpec::index_of(std::string_view param) const {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name == param) return i;
  }
  throw ValidationError("model " + name + " has no parameter " + std::string(param));
}

std::vector<std::string> ModelSpec::param_names() const {
  std::vector<std::string> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.name);
  return out;
}

double ModelSpec::alpha_of_gamma(double gamma, ParamView theta) const {
  if (!stochastic_vol) return 0.0;
  const double a0 = alpha0(theta);
  return latent.from_beta(latent.to_beta(a0, theta) + gamma, theta);
}

namespace {

ModelSpec const_vol_scalar() {
  // dX = (theta0 - theta1 X) dt + sigma dW
  ModelSpec m;
  m.name = "const-vol-scalar";
  m.params = {{"theta0", Support::unbounded, false},
              {"theta1", Support::unbounded, false},
              {"sigma", Support::positive, true}};
  m.drift_x = [](double, double x, double, ParamView th) { return th[0] - th[1] * x; };
  m.vol_x = [](double, ParamView th) { return th[2]; };
  return m;
}

ModelSpec ou_sv_leverage() {
  ModelSpec m;
  m.name = "ou-sv-leverage";
  m.params = {{"kappa_x", Support::positive, false}, {"mu_x", Support::unbounded, false},
              {"kappa_a", Support::positive, false}, {"mu_a", Support::unbounded, false},
              {"sigma", Support::positive, true},    {"rho", Support::symmetric_unit, true},
              {"alpha0", Support::unbounded, true}};
  m.stochastic_vol = true;
  m.rho_index = 5;
  m.alpha0_index = 6;
  m.drift_x = [](double, double x, double, ParamView th) { return th[0] * (th[1] - x); };
  m.vol_x = [](double a, ParamView) { return std::exp(0.5 * a); };
  m.drift_a = [](double a, ParamView th) { return th[2] * (th[3] - a); };
  m.vol_a = [](double, ParamView th) { return th[4]; };
  m.latent = LatentTransform::affine(4, m.drift_a);
  m.alpha_for_variance = [](double rate) { return std::log(rate); };
  return m;
}

ModelSpec tbill_direct() {
  // dr = (theta0 - theta1 r) dt + r exp(alpha/2) dB, written for X = log r:
  // dX = (theta0 e^{-X} - theta1 - e^alpha / 2) dt + exp(alpha/2) dB
  ModelSpec m;
  m.name = "tbill-logsv";
  m.params = {{"theta0", Support::unbounded, false}, {"theta1", Support::unbounded, false},
              {"kappa", Support::positive, false},   {"mu", Support::unbounded, false},
              {"sigma", Support::positive, true},    {"alpha0", Support::unbounded, true}};
  m.stochastic_vol = true;
  m.alpha0_index = 5;
  m.drift_x = [](double, double x, double a, ParamView th) {
    return th[0] * std::exp(-x) - th[1] - 0.5 * std::exp(a);
  };
  m.vol_x = [](double a, ParamView) { return std::exp(0.5 * a); };
  m.drift_a = [](double a, ParamView th) { return th[2] * (th[3] - a); };
  m.vol_a = [](double, ParamView th) { return th[4]; };
  m.latent = LatentTransform::affine(4, m.drift_a);
  m.alpha_for_variance = [](double rate) { return std::log(rate); };
  return m;
}

ModelSpec tbill_logsv() {
  ModelSpec m = tbill_direct();
  // psi = 1: state_vol(r) = r, h = log.
  m.lamperti = StateTransform{
      [](double r, ParamView) { return std::log(r); },
      [](double x, ParamView) { return std::exp(x); },
      [](double r, ParamView) { return r; },
  };
  return m;
}

}  // namespace

ModelSpec make_model(std::string_view name) {
  if (name == "const-vol-scalar") return const_vol_scalar();
  if (name == "ou-sv-leverage") return ou_sv_leverage();
  if (name == "tbill-logsv") return tbill_logsv();
  throw ValidationError("unknown model: " + std::string(name));
}

std::vector<std::string> registered_models() {
  return {"const-vol-scalar", "ou-sv-leverage", "tbill-logsv"};
}

ModelSpec make_tbill_logsv_direct() { return tbill_direct(); }

std::pair<Path, Path> euler_simulate(const ModelSpec& model, ParamView theta, double x0,
                                     double alpha0, const TimeGrid& grid, RandomStream& rng) {
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    if (!in_support(model.params[i].support, theta[i])) {
      throw ValidationError("euler_simulate: parameter " + model.params[i].name +
                            " outside support");
    }
  }
  const auto ts = grid.times();
  const std::size_t n = ts.size();
  const double rho = model.rho(theta);
  const double rho_c = std::sqrt(1.0 - rho * rho);

  double x = model.lamperti ? model.lamperti->forward(x0, theta) : x0;
  double a = alpha0;
  std::vector<double> xs(n), as(n);
  xs[0] = x;
  as[0] = a;
  for (std::size_t i = 1; i < n; ++i) {
    const double dt = ts[i] - ts[i - 1];
    const double sdt = std::sqrt(dt);
    const double vol = model.vol_x(a, theta);
    const double mu = model.drift_x(ts[i - 1], x, a, theta);
    if (model.stochastic_vol) {
      const double dw = sdt * rng.normal();
      const double db = sdt * rng.normal();
      const double a_next = a + model.drift_a(a, theta) * dt + model.vol_a(a, theta) * dw;
      x = x + mu * dt + vol * (rho * dw + rho_c * db);
      a = a_next;
    } else {
      x = x + mu * dt + vol * sdt * rng.normal();
    }
    if (!std::isfinite(x) || !std::isfinite(a)) {
      throw NumericalError("euler_simulate: explosion at t = " + std::to_string(ts[i]));
    }
    xs[i] = x;
    as[i] = a;
  }
  if (model.lamperti) {
    for (auto& v : xs) {
      v = model.lamperti->inverse(v, theta);
      if (!std::isfinite(v)) throw NumericalError("euler_simulate: overflow mapping back to r");
    }
  }
  return {Path(grid, std::move(xs)), Path(grid, std::move(as))};
}

Path alpha_to_gamma(const Path& alpha, ParamView theta, const LatentTransform& transform) {
  const auto v = alpha.values();
  const double b0 = transform.to_beta(v[0], theta);
  std::vector<double> g(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) g[i] = transform.to_beta(v[i], theta) - b0;
  g[0] = 0.0;
  return Path(alpha.grid(), std::move(g));
}

Path gamma_to_alpha(const Path& gamma, double sigma, double alpha0) {
  const auto v = gamma.values();
  std::vector<double> a(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) a[i] = alpha0 + sigma * v[i];
  return Path(gamma.grid(), std::move(a));
}

Path gamma_to_alpha(const Path& gamma, ParamView theta, const LatentTransform& transform,
                    double alpha0) {
  const double b0 = transform.to_beta(alpha0, theta);
  const auto v = gamma.values();
  std::vector<double> a(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) a[i] = transform.from_beta(b0 + v[i], theta);
  return Path(gamma.grid(), std::move(a));
}

std::pair<double, double> lamperti(double x, ParamView theta, const ModelSpec& model) {
  if (!model.lamperti) return {x, 0.0};
  const double s2 = model.lamperti->state_vol(x, theta);
  if (!(s2 > 0.0) || !std::isfinite(s2)) {
    throw ValidationError("lamperti: state volatility not positive at x = " + std::to_string(x));
  }
  return {model.lamperti->forward(x, theta), -std::log(s2)};
}

Path leverage_adjust(const Path& x, const Path& gamma, ParamView theta, const ModelSpec& model,
                     LeverageDirection direction) {
  const auto xt = x.times();
  const double tol = 1e-12 * std::max(1.0, std::abs(xt.back()));
  if (gamma.times().front() > xt.front() + tol || gamma.times().back() < xt.back() - tol) {
    throw ValidationError("leverage_adjust: gamma grid does not cover the x grid");
  }
  const double rho = model.rho(theta);
  const auto xv = x.values();
  const double sign = direction == LeverageDirection::forward ? -1.0 : 1.0;
  std::vector<double> out(xv.size());
  double adj = 0.0;
  double g_prev = gamma.interpolate(xt[0]);
  out[0] = xv[0];
  for (std::size_t i = 1; i < xv.size(); ++i) {
    const double g = gamma.interpolate(xt[i]);
    adj += rho * model.vol_x(model.alpha_of_gamma(g_prev, theta), theta) * (g - g_prev);
    out[i] = xv[i] + sign * adj;
    g_prev = g;
  }
  return Path(x.grid(), std::move(out));
}

}  // namespace svtime
