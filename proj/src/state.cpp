#include "svtime/state.hpp"

#include <cmath>
#include <string>

#include "svtime/errors.hpp"
#include "svtime/timechange.hpp"

namespace svtime {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

}  // namespace

void validate_observations(const Observations& obs, const ModelSpec* model) {
  if (obs.times.size() != obs.values.size()) {
    throw ValidationError("observations: times and values differ in length");
  }
  if (obs.size() < 2) throw ValidationError("observations: need at least 2 rows");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!std::isfinite(obs.times[i]) || !std::isfinite(obs.values[i])) {
      throw ValidationError("observations: non-finite entry at row " + std::to_string(i + 1));
    }
    if (i > 0 && !(obs.times[i] > obs.times[i - 1])) {
      throw ValidationError("observations: times not strictly increasing at row " +
                            std::to_string(i + 1));
    }
    if (model != nullptr && model->lamperti && !(obs.values[i] > 0.0)) {
      throw ValidationError("observations: nonpositive value at row " + std::to_string(i + 1) +
                            " for log-transformed model " + model->name);
    }
  }
}

PriorSpec PriorSpec::flat(const ModelSpec& model) {
  const double inf = std::numeric_limits<double>::infinity();
  return {std::vector<double>(model.params.size(), -inf),
          std::vector<double>(model.params.size(), inf)};
}

bool PriorSpec::contains(const ModelSpec& model, ParamView theta) const {
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    if (!in_support(model.params[i].support, theta[i])) return false;
    if (theta[i] < lower[i] || theta[i] > upper[i]) return false;
  }
  return true;
}

double PriorSpec::log_density(const ModelSpec& model, ParamView theta) const {
  return contains(model, theta) ? 0.0 : -std::numeric_limits<double>::infinity();
}

bool PriorSpec::proper(const std::vector<std::size_t>& free_params) const {
  for (std::size_t i : free_params) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i])) return false;
  }
  return true;
}

AugmentedPosterior::AugmentedPosterior(const ModelSpec& model, const Observations& data,
                                       PriorSpec prior, std::size_t m)
    : model_(&model), data_(&data), prior_(std::move(prior)), m_(m) {
  if (m_ < 1) throw ValidationError("imputation level m must be >= 1");
  validate_observations(data, &model);
  if (prior_.lower.size() != model.params.size() || prior_.upper.size() != model.params.size()) {
    throw ValidationError("prior does not match the model's parameter count");
  }
}

double AugmentedPosterior::step(std::size_t k) const {
  return (data_->times[k + 1] - data_->times[k]) / static_cast<double>(m_ + 1);
}

double AugmentedPosterior::knot_time(std::size_t k, std::size_t j) const {
  if (j == m_ + 1) return data_->times[k + 1];
  return data_->times[k] + static_cast<double>(j) * step(k);
}

void AugmentedPosterior::fill_geometry(std::size_t k, ParamView theta,
                                       const std::vector<double>& gamma,
                                       IntervalState& out) const {
  const ModelSpec& mod = *model_;
  const std::size_t nk = m_ + 2;
  const std::size_t base = k * (m_ + 1);
  out.alpha.resize(nk);
  out.vol.resize(nk);
  out.lat_drift.resize(nk);
  out.adj.resize(nk);
  out.tau.resize(nk);
  out.s.resize(m_ + 1);

  double yk = data_->values[k + 1];
  out.y0 = data_->values[k];
  out.log_jac = 0.0;
  if (mod.lamperti) {
    out.y0 = mod.lamperti->forward(out.y0, theta);
    out.log_jac = -std::log(mod.lamperti->state_vol(yk, theta));
    yk = mod.lamperti->forward(yk, theta);
  }

  if (mod.stochastic_vol) {
    const double b0 = mod.latent.to_beta(mod.alpha0(theta), theta);
    for (std::size_t j = 0; j < nk; ++j) {
      const double a = mod.latent.from_beta(b0 + gamma[base + j], theta);
      out.alpha[j] = a;
      out.vol[j] = mod.vol_x(a, theta);
      out.lat_drift[j] = mod.latent.beta_drift(a, theta);
    }
  } else {
    const double vol = mod.vol_x(0.0, theta);
    std::fill(out.alpha.begin(), out.alpha.end(), 0.0);
    std::fill(out.vol.begin(), out.vol.end(), vol);
    std::fill(out.lat_drift.begin(), out.lat_drift.end(), 0.0);
  }

  const double rho = mod.rho(theta);
  const double factor = 1.0 - rho * rho;
  const double dt = step(k);
  out.adj[0] = 0.0;
  out.tau[0] = 0.0;
  for (std::size_t j = 1; j < nk; ++j) {
    out.adj[j] = out.adj[j - 1] + rho * out.vol[j - 1] * (gamma[base + j] - gamma[base + j - 1]);
    out.tau[j] = out.tau[j - 1] + factor * out.vol[j - 1] * out.vol[j - 1] * dt;
  }
  if (rho == 0.0) std::fill(out.adj.begin(), out.adj.end(), 0.0);
  out.T = out.tau[nk - 1];
  out.y1 = yk - out.adj[nk - 1];
  const double T = out.T;
  out.s[0] = 0.0;
  for (std::size_t j = 1; j <= m_; ++j) out.s[j] = out.tau[j] / (T * (T - out.tau[j]));
}

void AugmentedPosterior::fill_values(std::size_t k, ParamView theta,
                                     const std::vector<double>& gamma,
                                     IntervalState& out) const {
  const ModelSpec& mod = *model_;
  const std::size_t nk = m_ + 2;
  const double T = out.T;
  out.u.resize(nk);
  for (std::size_t j = 0; j <= m_; ++j) {
    const double w = out.tau[j] / T;
    out.u[j] = (T - out.tau[j]) * out.z[j] + (1.0 - w) * out.y0 + w * out.y1;
  }
  out.u[0] = out.y0;
  out.u[nk - 1] = out.y1;

  const double rho = mod.rho(theta);
  const double factor = 1.0 - rho * rho;
  const double dt = step(k);
  double lg = 0.0;
  for (std::size_t j = 0; j + 1 < nk; ++j) {
    const double t = knot_time(k, j);
    const double x = out.u[j] + out.adj[j];
    const double d = mod.drift_x(t, x, out.alpha[j], theta) - rho * out.vol[j] * out.lat_drift[j];
    const double v = factor * out.vol[j] * out.vol[j];
    lg += d / v * (out.u[j + 1] - out.u[j]) - 0.5 * d * d * dt / v;
  }
  out.log_g = lg;

  const double dy = out.y1 - out.y0;
  out.log_f = -0.5 * (kLogTwoPi + std::log(T)) - 0.5 * dy * dy / T + out.log_jac;

  double latent = 0.0;
  if (mod.stochastic_vol) {
    const std::size_t base = k * (m_ + 1);
    for (std::size_t j = 0; j + 1 < nk; ++j) {
      const double c = out.lat_drift[j];
      latent += c * (gamma[base + j + 1] - gamma[base + j]) - 0.5 * c * c * dt;
    }
  }
  out.log_lg = latent;
}

void AugmentedPosterior::evaluate_interval(std::size_t k, ParamView theta,
                                           const std::vector<double>& gamma,
                                           const IntervalState& current, RandomStream& rng,
                                           IntervalState& out) const {
  fill_geometry(k, theta, gamma, out);
  bool valid = std::isfinite(out.T) && out.T > 0.0 && std::isfinite(out.y1);
  for (std::size_t j = 1; valid && j <= m_; ++j) {
    valid = std::isfinite(out.s[j]) && out.s[j] > out.s[j - 1];
  }
  if (!valid) {
    out.z.assign(m_ + 1, 0.0);
    out.log_g = std::numeric_limits<double>::quiet_NaN();
    out.log_f = out.log_lg = out.log_g;
    return;
  }

  if (out.s == current.s) {
    out.z = current.z;
    out.extra_s = current.extra_s;
    out.extra_z = current.extra_z;
  } else {
    out.z.resize(m_ + 1);
    out.extra_s.clear();
    out.extra_z.clear();
    if (current.extra_s.empty()) {
      draw_retrospective(current.s, current.z, out.s, rng, out.z);
    } else {
      std::vector<double> st;
      std::vector<double> sv;
      st.reserve(current.s.size() + current.extra_s.size());
      sv.reserve(st.capacity());
      std::size_t i = 0;
      std::size_t j = 0;
      while (i < current.s.size() || j < current.extra_s.size()) {
        if (j == current.extra_s.size() ||
            (i < current.s.size() && current.s[i] <= current.extra_s[j])) {
          st.push_back(current.s[i]);
          sv.push_back(current.z[i]);
          ++i;
        } else {
          st.push_back(current.extra_s[j]);
          sv.push_back(current.extra_z[j]);
          ++j;
        }
      }
      draw_retrospective(st, sv, out.s, rng, out.z);
    }
  }
  fill_values(k, theta, gamma, out);
}

LogLikBreakdown AugmentedPosterior::aggregate(const AugmentedState& state) const {
  LogLikBreakdown b;
  const std::size_t n = state.intervals.size();
  b.log_g.resize(n);
  b.log_f.resize(n);
  double sum = 0.0;
  double latent = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const IntervalState& iv = state.intervals[k];
    b.log_g[k] = iv.log_g;
    b.log_f[k] = iv.log_f;
    latent += iv.log_lg;
    sum += iv.log_g + iv.log_f;
  }
  b.log_l_gamma = latent;
  b.log_prior = prior_.log_density(*model_, state.theta);
  b.total = latent + sum + b.log_prior;
  return b;
}

LogLikBreakdown AugmentedPosterior::recompute(const AugmentedState& state) const {
  if (state.m != m_ || state.intervals.size() != n_intervals() ||
      state.gamma.size() != n_knots() || state.theta.size() != model_->params.size()) {
    throw ValidationError("augmented state dimensions do not match the posterior");
  }
  AugmentedState fresh = state;
  for (std::size_t k = 0; k < n_intervals(); ++k) {
    IntervalState& iv = fresh.intervals[k];
    if (iv.z.size() != m_ + 1) throw ValidationError("augmented state: bad Z length");
    fill_geometry(k, fresh.theta, fresh.gamma, iv);
    fill_values(k, fresh.theta, fresh.gamma, iv);
  }
  return aggregate(fresh);
}

AugmentedState AugmentedPosterior::initial_state(std::vector<double> theta) const {
  if (theta.size() != model_->params.size()) {
    throw ValidationError("initial_state: wrong parameter count");
  }
  AugmentedState st;
  st.m = m_;
  st.theta = std::move(theta);
  st.gamma.assign(n_knots(), 0.0);
  st.intervals.resize(n_intervals());
  for (std::size_t k = 0; k < n_intervals(); ++k) {
    IntervalState& iv = st.intervals[k];
    fill_geometry(k, st.theta, st.gamma, iv);
    iv.z.assign(m_ + 1, 0.0);
    fill_values(k, st.theta, st.gamma, iv);
  }
  st.cache = aggregate(st);
  return st;
}

AugmentedState AugmentedPosterior::state_from_paths(std::vector<double> theta,
                                                    const std::vector<double>& x,
                                                    const std::vector<double>& alpha) const {
  if (x.size() != n_knots() || alpha.size() != n_knots()) {
    throw ValidationError("state_from_paths: expected " + std::to_string(n_knots()) + " knots");
  }
  const ModelSpec& mod = *model_;
  AugmentedState st;
  st.m = m_;
  st.theta = std::move(theta);
  st.gamma.assign(n_knots(), 0.0);
  if (mod.stochastic_vol) {
    st.theta[*mod.alpha0_index] = alpha.front();
    const double b0 = mod.latent.to_beta(alpha.front(), st.theta);
    for (std::size_t i = 1; i < n_knots(); ++i) {
      st.gamma[i] = mod.latent.to_beta(alpha[i], st.theta) - b0;
    }
  }
  st.intervals.resize(n_intervals());
  for (std::size_t k = 0; k < n_intervals(); ++k) {
    IntervalState& iv = st.intervals[k];
    fill_geometry(k, st.theta, st.gamma, iv);
    iv.z.assign(m_ + 1, 0.0);
    const std::size_t base = k * (m_ + 1);
    for (std::size_t j = 1; j <= m_; ++j) {
      const double h = x[base + j] - iv.adj[j];
      const double w = iv.tau[j] / iv.T;
      iv.z[j] = (h - (1.0 - w) * iv.y0 - w * iv.y1) / (iv.T - iv.tau[j]);
    }
    fill_values(k, st.theta, st.gamma, iv);
  }
  st.cache = aggregate(st);
  return st;
}

std::vector<double> AugmentedPosterior::x_knots(const AugmentedState& state) const {
  std::vector<double> x(n_knots());
  for (std::size_t k = 0; k < n_intervals(); ++k) {
    const IntervalState& iv = state.intervals[k];
    const std::size_t base = k * (m_ + 1);
    for (std::size_t j = 0; j < m_ + 2; ++j) x[base + j] = iv.u[j] + iv.adj[j];
  }
  return x;
}

}  // namespace svtime
