#include "svtime/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "svtime/errors.hpp"
#include "svtime/timechange.hpp"

namespace svtime {

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

SummaryRow summarize_column(const std::string& name, const std::vector<double>& draws) {
  if (draws.size() < 2) throw ValidationError("summarize: need at least 2 draws for " + name);
  SummaryRow row;
  row.name = name;
  const double n = static_cast<double>(draws.size());
  row.mean = std::accumulate(draws.begin(), draws.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : draws) ss += (v - row.mean) * (v - row.mean);
  row.sd = std::sqrt(ss / (n - 1.0));
  std::vector<double> sorted(draws);
  std::sort(sorted.begin(), sorted.end());
  row.q025 = quantile(sorted, 0.025);
  row.median = quantile(sorted, 0.5);
  row.q975 = quantile(sorted, 0.975);
  return row;
}

SummaryTable summarize(const Trace& trace) {
  if (trace.rows() == 0) throw ValidationError("summarize: empty trace");
  SummaryTable table;
  for (std::size_t i = 0; i < trace.param_names.size(); ++i) {
    table.push_back(summarize_column(trace.param_names[i], trace.column(i)));
  }
  return table;
}

namespace {

struct Centered {
  std::vector<double> x;
  double var = 0.0;
};

Centered center(const std::vector<double>& series) {
  Centered c;
  const double n = static_cast<double>(series.size());
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  c.x.resize(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) c.x[i] = series[i] - mean;
  for (double v : c.x) c.var += v * v;
  c.var /= n;
  return c;
}

double autocov(const std::vector<double>& x, std::size_t lag) {
  double acc = 0.0;
  for (std::size_t i = lag; i < x.size(); ++i) acc += x[i] * x[i - lag];
  return acc / static_cast<double>(x.size());
}

bool degenerate(double var, const std::vector<double>& series) {
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  return !(var > 0.0) || *lo == *hi;
}

}  // namespace

std::vector<double> acf(const std::vector<double>& series, std::size_t max_lag) {
  if (series.size() <= max_lag) {
    throw ValidationError("acf: series length " + std::to_string(series.size()) +
                          " must exceed max_lag " + std::to_string(max_lag));
  }
  const Centered c = center(series);
  if (degenerate(c.var, series)) throw ValidationError("acf: zero-variance series");
  std::vector<double> out(max_lag + 1);
  out[0] = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) out[k] = autocov(c.x, k) / c.var;
  return out;
}

double iact(const std::vector<double>& series) {
  if (series.size() < 100) throw ValidationError("iact: need at least 100 draws");
  const Centered c = center(series);
  if (degenerate(c.var, series)) throw ValidationError("iact: zero-variance series");
  const std::size_t n = series.size();
  double sum = 0.0;
  for (std::size_t i = 0; 2 * i + 1 < n; ++i) {
    const double g0 = i == 0 ? c.var : autocov(c.x, 2 * i);
    const double pair = g0 + autocov(c.x, 2 * i + 1);
    if (!(pair > 0.0)) break;
    sum += pair;
  }
  return (2.0 * sum - c.var) / c.var;
}

std::vector<std::pair<double, double>> kde_export(const std::vector<double>& series,
                                                  std::size_t grid_points) {
  if (grid_points < 2) throw ValidationError("kde_export: need at least 2 grid points");
  if (series.size() < 2) throw ValidationError("kde_export: need at least 2 draws");
  const Centered c = center(series);
  if (degenerate(c.var, series)) throw ValidationError("kde_export: all draws identical");
  const double n = static_cast<double>(series.size());
  const double sd = std::sqrt(c.var * n / (n - 1.0));
  const double iqr = quantile(series, 0.75) - quantile(series, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  const double h = 0.9 * spread * std::pow(n, -0.2);

  const auto [mn, mx] = std::minmax_element(series.begin(), series.end());
  const double lo = *mn - 5.0 * h;
  const double hi = *mx + 5.0 * h;
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  std::vector<double> sorted(series);
  std::sort(sorted.begin(), sorted.end());
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * M_PI));

  std::vector<std::pair<double, double>> out(grid_points);
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double x = lo + step * static_cast<double>(g);
    // Kernel tails beyond 9 bandwidths are below double precision relevance.
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), x - 9.0 * h);
    const auto last = std::upper_bound(sorted.begin(), sorted.end(), x + 9.0 * h);
    double acc = 0.0;
    for (auto it = first; it != last; ++it) {
      const double u = (x - *it) / h;
      acc += std::exp(-0.5 * u * u);
    }
    out[g] = {x, acc * norm};
  }
  return out;
}

double ks_pvalue(double d, double effective_n) {
  const double sn = std::sqrt(effective_n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw ValidationError("ks_one_sample: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return ks_pvalue(d, n);
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ValidationError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return ks_pvalue(d, na * nb / (na + nb));
}

RecoveryResult prior_recovery_test(const ModelSpec& model, const PriorSpec& prior,
                                   const SamplerConfig& config, const RecoverySetup& setup,
                                   std::size_t replications, RecoveryKernel kernel) {
  std::vector<std::size_t> free_idx;
  for (const auto& name : setup.free) free_idx.push_back(model.index_of(name));
  if (!prior.proper(free_idx)) {
    throw ValidationError("prior_recovery_test: prior must be proper on the free parameters");
  }
  if (setup.base_theta.size() != model.params.size()) {
    throw ValidationError("prior_recovery_test: base_theta has the wrong length");
  }
  if (setup.n_obs < 2) throw ValidationError("prior_recovery_test: need at least 2 observations");

  SamplerConfig cfg = config;
  cfg.n_iter = setup.sweeps;
  cfg.n_burn = 0;
  cfg.thin = 1;
  cfg.adapt = false;
  cfg.fixed.clear();
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    if (std::find(free_idx.begin(), free_idx.end(), i) == free_idx.end()) {
      cfg.fixed.push_back(model.params[i].name);
    }
  }

  RecoveryResult result;
  result.names = setup.free;
  result.retained.assign(free_idx.size(), {});

  Observations data;
  data.times.resize(setup.n_obs);
  data.values.resize(setup.n_obs);
  for (std::size_t i = 0; i < setup.n_obs; ++i) data.times[i] = setup.spacing * double(i);
  const std::size_t n_int = setup.n_obs - 1;
  const std::size_t n_knots = n_int * (cfg.m + 1) + 1;
  std::vector<double> grid_t(n_knots);
  for (std::size_t i = 0; i < n_knots; ++i) {
    grid_t[i] = setup.spacing * double(i) / double(cfg.m + 1);
  }
  const TimeGrid grid(grid_t);

  RandomStream draw_rng(setup.seed, 1);
  for (std::size_t rep = 0; rep < replications; ++rep) {
    std::vector<double> theta = setup.base_theta;
    for (std::size_t i : free_idx) {
      do {
        theta[i] = prior.lower[i] + (prior.upper[i] - prior.lower[i]) * draw_rng.uniform();
      } while (!in_support(model.params[i].support, theta[i]));
    }

    std::vector<double> retained(theta);
    if (kernel.kind == RecoveryKernel::Kind::prior_only) {
      for (std::size_t i : free_idx) {
        do {
          retained[i] = prior.lower[i] + (prior.upper[i] - prior.lower[i]) * draw_rng.uniform();
        } while (!in_support(model.params[i].support, retained[i]));
      }
    } else {
      std::pair<Path, Path> sim;
      while (true) {
        try {
          sim = euler_simulate(model, theta, setup.x0, model.alpha0(theta), grid, draw_rng);
          break;
        } catch (const NumericalError&) {
        }
      }
      std::vector<double> x(sim.first.values().begin(), sim.first.values().end());
      for (std::size_t i = 0; i < setup.n_obs; ++i) data.values[i] = x[i * (cfg.m + 1)];
      if (model.lamperti) {
        for (double& v : x) v = model.lamperti->forward(v, theta);
      }
      std::vector<double> alpha(sim.second.values().begin(), sim.second.values().end());
      if (!model.stochastic_vol) std::fill(alpha.begin(), alpha.end(), 0.0);

      const AugmentedPosterior post(model, data, prior, cfg.m);
      AugmentedState init = post.state_from_paths(theta, x, alpha);
      cfg.seed = setup.seed * 1000003ULL + rep;
      Sampler sampler(post, cfg, std::move(init));
      for (std::size_t s = 0; s < setup.sweeps; ++s) sampler.sweep();
      retained = sampler.state().theta;
    }
    for (std::size_t j = 0; j < free_idx.size(); ++j) {
      result.retained[j].push_back(retained[free_idx[j]]);
    }
  }

  for (std::size_t j = 0; j < free_idx.size(); ++j) {
    const std::size_t i = free_idx[j];
    const double lo = std::max(prior.lower[i], model.params[i].support == Support::unbounded
                                                   ? prior.lower[i]
                                                   : (model.params[i].support == Support::positive
                                                          ? 0.0
                                                          : -1.0));
    const double hi = model.params[i].support == Support::symmetric_unit
                          ? std::min(prior.upper[i], 1.0)
                          : prior.upper[i];
    result.p_values.push_back(ks_one_sample(result.retained[j], [lo, hi](double v) {
      return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
    }));
  }
  return result;
}

}  // namespace svtime
