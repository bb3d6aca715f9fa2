#include "svtime/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svtime/errors.hpp"
#include "svtime/timechange.hpp"

namespace svtime {

namespace {

// Random-walk scale: log for positive, atanh for (-1, 1), identity otherwise.
double to_walk(Support s, double v) {
  switch (s) {
    case Support::positive:
      return std::log(v);
    case Support::symmetric_unit:
      return std::atanh(v);
    default:
      return v;
  }
}

double from_walk(Support s, double w) {
  switch (s) {
    case Support::positive:
      return std::exp(w);
    case Support::symmetric_unit:
      return std::tanh(w);
    default:
      return w;
  }
}

// log |d value / d walk|
double log_walk_jacobian(Support s, double v) {
  switch (s) {
    case Support::positive:
      return std::log(v);
    case Support::symmetric_unit:
      return std::log1p(-v * v);
    default:
      return 0.0;
  }
}

double interval_total(const IntervalState& iv) { return iv.log_g + iv.log_f + iv.log_lg; }

}  // namespace

void validate_config(const SamplerConfig& cfg, std::size_t n_intervals, std::size_t n_params) {
  if (cfg.m < 1) throw ValidationError("sampler: m must be >= 1");
  if (cfg.block_len < 1 || cfg.block_len > n_intervals) {
    throw ValidationError("sampler: block_len must lie in [1, " + std::to_string(n_intervals) + "]");
  }
  if (cfg.n_burn >= cfg.n_iter) throw ValidationError("sampler: n_burn must be < n_iter");
  if (cfg.thin < 1) throw ValidationError("sampler: thin must be >= 1");
  if (!cfg.rw_scales.empty() && cfg.rw_scales.size() != n_params) {
    throw ValidationError("sampler: rw_scales needs one entry per parameter");
  }
  for (double s : cfg.rw_scales) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("sampler: rw_scales must be >= 0");
  }
}

std::vector<double> Trace::column(std::size_t param) const {
  std::vector<double> out(draws.size());
  for (std::size_t r = 0; r < draws.size(); ++r) out[r] = draws[r][param];
  return out;
}

std::vector<double> Trace::column(const std::string& name) const {
  for (std::size_t i = 0; i < param_names.size(); ++i) {
    if (param_names[i] == name) return column(i);
  }
  throw ValidationError("trace has no column " + name);
}

Sampler::Sampler(const AugmentedPosterior& posterior, SamplerConfig config, AugmentedState initial)
    : post_(&posterior),
      cfg_(std::move(config)),
      state_(std::move(initial)),
      rng_(cfg_.seed, 0) {
  const ModelSpec& mod = post_->model();
  validate_config(cfg_, post_->n_intervals(), mod.params.size());
  if (cfg_.m != post_->m()) throw ValidationError("sampler: m differs from the posterior's");
  scales_ = cfg_.rw_scales.empty() ? std::vector<double>(mod.params.size(), 0.1) : cfg_.rw_scales;
  is_fixed_.assign(mod.params.size(), false);
  for (const auto& name : cfg_.fixed) is_fixed_[mod.index_of(name)] = true;
  if (!std::isfinite(state_.cache.total)) {
    throw ValidationError("sampler: initial posterior density is not finite");
  }
  scratch_.resize(post_->n_intervals());
  batch_.resize(mod.params.size());
}

std::vector<std::size_t> Sampler::free_params() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < is_fixed_.size(); ++i) {
    if (!is_fixed_[i]) out.push_back(i);
  }
  return out;
}

bool Sampler::accept(double log_ratio) {
  const double r = cfg_.ratio_power * log_ratio;
  if (std::isnan(r)) return false;
  if (r >= 0.0) return true;
  return std::log(rng_.uniform()) < r;
}

void Sampler::tally(const std::string& key, bool accepted) {
  auto& t = tallies_[key];
  ++t.proposed;
  if (accepted) ++t.accepted;
}

bool Sampler::update_z_path(std::size_t k) {
  IntervalState& cur = state_.intervals[k];
  IntervalState& prop = scratch_[k];
  prop = cur;
  prop.extra_s.clear();
  prop.extra_z.clear();
  prop.z[0] = 0.0;
  for (std::size_t j = 1; j < prop.s.size(); ++j) {
    prop.z[j] = prop.z[j - 1] + std::sqrt(prop.s[j] - prop.s[j - 1]) * rng_.normal();
  }
  post_->fill_values(k, state_.theta, state_.gamma, prop);
  const bool ok = accept(prop.log_g - cur.log_g);
  if (ok) {
    std::swap(cur, prop);
    state_.cache = post_->aggregate(state_);
  }
  tally("z", ok);
  return ok;
}

bool Sampler::update_gamma_block(std::size_t c0, std::size_t c1) {
  const std::size_t last = post_->n_knots() - 1;
  const bool free_end = c1 == last;
  const std::size_t c_hi = free_end ? c1 : c1 - 1;
  if (c1 <= c0 || c_hi <= c0 || !post_->model().stochastic_vol) return false;

  std::vector<double> gamma = state_.gamma;
  const std::size_t mk = post_->m() + 1;
  auto time_of = [&](std::size_t i) {
    const std::size_t k = std::min(i / mk, post_->n_intervals() - 1);
    return post_->knot_time(k, i - k * mk);
  };
  for (std::size_t i = c0 + 1; i <= c_hi; ++i) {
    const double tp = time_of(i - 1);
    const double ti = time_of(i);
    if (free_end) {
      gamma[i] = gamma[i - 1] + std::sqrt(ti - tp) * rng_.normal();
    } else {
      gamma[i] = sample_bridge_point(tp, gamma[i - 1], time_of(c1), gamma[c1], ti, rng_);
    }
  }

  const std::size_t k_lo = c0 / mk;
  const std::size_t k_hi = std::min(post_->n_intervals() - 1, c_hi / mk);
  double diff = 0.0;
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    post_->evaluate_interval(k, state_.theta, gamma, state_.intervals[k], rng_, scratch_[k]);
    diff += interval_total(scratch_[k]) - interval_total(state_.intervals[k]);
  }
  const bool ok = accept(diff);
  if (ok) {
    state_.gamma = std::move(gamma);
    for (std::size_t k = k_lo; k <= k_hi; ++k) std::swap(state_.intervals[k], scratch_[k]);
    state_.cache = post_->aggregate(state_);
  }
  tally("gamma", ok);
  return ok;
}

ProposalRatio Sampler::evaluate_param_move(std::size_t i, double value) {
  const ModelSpec& mod = post_->model();
  ProposalRatio r;
  std::vector<double> theta = state_.theta;
  theta[i] = value;
  if (!post_->prior().contains(mod, theta)) {
    r.in_prior = false;
    return r;
  }
  const Support sup = mod.params[i].support;
  r.log_jacobian = log_walk_jacobian(sup, value) - log_walk_jacobian(sup, state_.theta[i]);
  double diff = 0.0;
  for (std::size_t k = 0; k < post_->n_intervals(); ++k) {
    post_->evaluate_interval(k, theta, state_.gamma, state_.intervals[k], rng_, scratch_[k]);
    diff += interval_total(scratch_[k]) - interval_total(state_.intervals[k]);
  }
  r.log_target = diff;
  return r;
}

bool Sampler::update_param(std::size_t i) {
  const ModelSpec& mod = post_->model();
  const Support sup = mod.params[i].support;
  const double proposal =
      from_walk(sup, to_walk(sup, state_.theta[i]) + scales_[i] * rng_.normal());
  const ProposalRatio r = evaluate_param_move(i, proposal);
  bool ok = false;
  if (r.in_prior) ok = accept(r.log_target + r.log_jacobian);
  if (ok) {
    state_.theta[i] = proposal;
    std::swap(state_.intervals, scratch_);
    state_.cache = post_->aggregate(state_);
  }
  tally(mod.params[i].name, ok);
  ++batch_[i].proposed;
  if (ok) ++batch_[i].accepted;
  return ok;
}

void Sampler::insert_extra_knots(std::size_t count) {
  if (count == 0) return;
  for (IntervalState& iv : state_.intervals) {
    std::vector<double> st(iv.s);
    std::vector<double> sv(iv.z);
    st.insert(st.end(), iv.extra_s.begin(), iv.extra_s.end());
    sv.insert(sv.end(), iv.extra_z.begin(), iv.extra_z.end());
    std::vector<std::size_t> order(st.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return st[a] < st[b]; });
    std::vector<double> ts(st.size());
    std::vector<double> vs(st.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      ts[i] = st[order[i]];
      vs[i] = sv[order[i]];
    }
    std::vector<double> targets;
    for (std::size_t c = 0; c < count; ++c) {
      const double t = iv.T * rng_.uniform();
      if (t > 0.0 && t < iv.T * (1.0 - 1e-9)) targets.push_back(z_time(t, iv.T));
    }
    std::sort(targets.begin(), targets.end());
    std::erase_if(targets, [&](double t) { return std::binary_search(ts.begin(), ts.end(), t); });
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    std::vector<double> drawn(targets.size());
    draw_retrospective(ts, vs, targets, rng_, drawn);
    iv.extra_s.insert(iv.extra_s.end(), targets.begin(), targets.end());
    iv.extra_z.insert(iv.extra_z.end(), drawn.begin(), drawn.end());
    std::vector<std::size_t> ord(iv.extra_s.size());
    for (std::size_t i = 0; i < ord.size(); ++i) ord[i] = i;
    std::sort(ord.begin(), ord.end(),
              [&](auto a, auto b) { return iv.extra_s[a] < iv.extra_s[b]; });
    std::vector<double> es(ord.size());
    std::vector<double> ez(ord.size());
    for (std::size_t i = 0; i < ord.size(); ++i) {
      es[i] = iv.extra_s[ord[i]];
      ez[i] = iv.extra_z[ord[i]];
    }
    iv.extra_s = std::move(es);
    iv.extra_z = std::move(ez);
  }
}

void Sampler::sweep() {
  const ModelSpec& mod = post_->model();
  for (std::size_t k = 0; k < post_->n_intervals(); ++k) update_z_path(k);

  if (mod.stochastic_vol) {
    const std::size_t len = cfg_.block_len * (cfg_.m + 1);
    const std::size_t last = post_->n_knots() - 1;
    const auto offset = static_cast<std::size_t>(rng_.uniform() * static_cast<double>(len));
    std::size_t c0 = 0;
    std::size_t c1 = std::min(offset == 0 ? len : offset, last);
    while (true) {
      update_gamma_block(c0, c1);
      if (c1 == last) break;
      c0 = c1;
      c1 = std::min(c1 + len, last);
    }
  }

  const auto alpha0 = mod.alpha0_index;
  for (std::size_t i = 0; i < mod.params.size(); ++i) {
    if (!is_fixed_[i] && mod.params[i].timescale && i != alpha0) update_param(i);
  }
  for (std::size_t i = 0; i < mod.params.size(); ++i) {
    if (!is_fixed_[i] && !mod.params[i].timescale) update_param(i);
  }
  if (alpha0 && !is_fixed_[*alpha0]) update_param(*alpha0);

  insert_extra_knots(cfg_.extra_knots);
}

void Sampler::adapt_scales(std::size_t batch_index) {
  const double gain = std::min(0.5, 1.0 / std::sqrt(static_cast<double>(batch_index + 1)));
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    if (batch_[i].proposed == 0) continue;
    scales_[i] *= std::exp(gain * 3.0 * (batch_[i].rate() - 0.3));
    scales_[i] = std::clamp(scales_[i], 1e-6, 1e3);
    batch_[i] = {};
  }
}

double Sampler::cache_error() const {
  const LogLikBreakdown fresh = post_->recompute(state_);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
  double err = rel(state_.cache.total, fresh.total);
  for (std::size_t k = 0; k < fresh.log_g.size(); ++k) {
    err = std::max(err, rel(state_.cache.log_g[k], fresh.log_g[k]));
    err = std::max(err, rel(state_.cache.log_f[k], fresh.log_f[k]));
  }
  return std::max(err, rel(state_.cache.log_l_gamma, fresh.log_l_gamma));
}

std::vector<double> default_initial_theta(const ModelSpec& model, const PriorSpec& prior,
                                          const Observations& data) {
  std::vector<double> theta(model.params.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double lo = prior.lower[i];
    const double hi = prior.upper[i];
    double v = 0.0;
    if (std::isfinite(lo) && std::isfinite(hi)) {
      v = 0.5 * (lo + hi);
    } else {
      v = model.params[i].support == Support::positive ? 1.0 : 0.0;
      if (std::isfinite(lo) && v <= lo) v = lo + 1.0;
      if (std::isfinite(hi) && v >= hi) v = std::isfinite(lo) ? 0.5 * (lo + hi) : hi - 1.0;
      if (model.params[i].support == Support::positive && !(v > 0.0)) v = 0.5 * hi;
    }
    theta[i] = v;
  }
  if (model.alpha0_index) {
    const std::size_t a = *model.alpha0_index;
    if (!std::isfinite(prior.lower[a]) && !std::isfinite(prior.upper[a])) {
      double acc = 0.0;
      for (std::size_t k = 0; k + 1 < data.size(); ++k) {
        double y0 = data.values[k];
        double y1 = data.values[k + 1];
        if (model.lamperti) {
          y0 = model.lamperti->forward(y0, theta);
          y1 = model.lamperti->forward(y1, theta);
        }
        acc += (y1 - y0) * (y1 - y0) / (data.times[k + 1] - data.times[k]);
      }
      const double rate = acc / static_cast<double>(data.size() - 1);
      if (rate > 0.0 && std::isfinite(rate)) theta[a] = model.alpha_for_variance(rate);
    }
  }
  return theta;
}

Trace run_chain_from(const SamplerConfig& config, const AugmentedPosterior& posterior,
                     AugmentedState initial) {
  Sampler sampler(posterior, config, std::move(initial));
  const ModelSpec& mod = posterior.model();
  Trace trace;
  trace.param_names = mod.param_names();
  trace.config = config;
  const std::size_t rows = (config.n_iter - config.n_burn) / config.thin;
  trace.draws.reserve(rows);
  trace.loglik.reserve(rows);
  trace.iters.reserve(rows);

  constexpr std::size_t kBatch = 50;
  for (std::size_t it = 1; it <= config.n_iter; ++it) {
    sampler.sweep();
    if (it <= config.n_burn) {
      if (config.adapt && it % kBatch == 0) sampler.adapt_scales(it / kBatch - 1);
      if (it == config.n_burn) sampler.reset_tallies();
      continue;
    }
    if ((it - config.n_burn) % config.thin == 0) {
      trace.iters.push_back(it);
      trace.draws.push_back(sampler.state().theta);
      trace.loglik.push_back(sampler.state().cache.loglik());
    }
  }
  trace.acceptance = sampler.tallies();
  trace.final_scales = sampler.scales();
  return trace;
}

Trace run_chain(const SamplerConfig& config, const Observations& data, const ModelSpec& model,
                const PriorSpec& prior, const std::optional<std::vector<double>>& initial_theta) {
  validate_observations(data, &model);
  validate_config(config, data.intervals(), model.params.size());
  std::vector<double> theta =
      initial_theta ? *initial_theta : default_initial_theta(model, prior, data);
  if (theta.size() != model.params.size()) {
    throw ValidationError("initial parameter vector has the wrong length");
  }
  if (!prior.contains(model, theta)) {
    throw ValidationError("initial parameters lie outside the prior support");
  }
  const AugmentedPosterior post(model, data, prior, config.m);
  AugmentedState init = post.initial_state(std::move(theta));
  if (!std::isfinite(init.cache.total)) {
    throw ValidationError("initial posterior density is not finite; check starting values");
  }
  return run_chain_from(config, post, std::move(init));
}

}  // namespace svtime
