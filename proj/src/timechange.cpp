#include "svtime/timechange.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svtime/errors.hpp"

namespace svtime {

namespace {

// Linear interpolation of ys over strictly increasing xs.
double interp(std::span<const double> xs, std::span<const double> ys, double x) {
  const double tol = 1e-12 * std::max(1.0, std::abs(xs.back()));
  if (x < xs.front() - tol || x > xs.back() + tol) {
    throw ValidationError("time " + std::to_string(x) + " outside the profile domain");
  }
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - xs.begin());
  if (xs[j - 1] == x) return ys[j - 1];
  const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return ys[j - 1] + w * (ys[j] - ys[j - 1]);
}

}  // namespace

EtaProfile::EtaProfile(std::vector<double> x_times, std::vector<double> u_times)
    : x_times_(std::move(x_times)), u_times_(std::move(u_times)) {
  if (x_times_.size() < 2 || x_times_.size() != u_times_.size()) {
    throw ValidationError("EtaProfile: need matching knot lists of length >= 2");
  }
  if (u_times_[0] != 0.0) throw ValidationError("EtaProfile: eta(t_start) must be 0");
  for (std::size_t i = 1; i < x_times_.size(); ++i) {
    if (!(x_times_[i] > x_times_[i - 1]) || !(u_times_[i] > u_times_[i - 1]) ||
        !std::isfinite(u_times_[i])) {
      throw ValidationError("EtaProfile: knots must be strictly increasing and finite");
    }
  }
}

double EtaProfile::operator()(double x_time) const { return interp(x_times_, u_times_, x_time); }

double EtaProfile::inverse(double u_time) const { return interp(u_times_, x_times_, u_time); }

EtaProfile build_eta(double t_start, double t_end, const Path* gamma, ParamView theta,
                     const ModelSpec& model) {
  if (!(t_end > t_start)) throw ValidationError("build_eta: empty interval");
  if (!model.stochastic_vol) {
    const double vol = model.vol_x(0.0, theta);
    if (!(vol > 0.0) || !std::isfinite(vol)) {
      throw ValidationError("build_eta: volatility must be positive");
    }
    return EtaProfile({t_start, t_end}, {0.0, vol * vol * (t_end - t_start)});
  }
  if (gamma == nullptr) throw ValidationError("build_eta: stochastic volatility needs a gamma path");

  const auto gt = gamma->times();
  const double tol = 1e-10 * std::max(1.0, std::abs(t_end));
  std::vector<double> xs;
  std::vector<double> gs;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] >= t_start - tol && gt[i] <= t_end + tol) {
      xs.push_back(gt[i]);
      gs.push_back(gamma->value(i));
    }
  }
  if (xs.size() < 2 || std::abs(xs.front() - t_start) > tol || std::abs(xs.back() - t_end) > tol) {
    throw ValidationError("build_eta: gamma grid must have knots at both interval ends");
  }
  const double rho = model.rho(theta);
  const double factor = 1.0 - rho * rho;
  std::vector<double> us(xs.size());
  us[0] = 0.0;
  for (std::size_t j = 1; j < xs.size(); ++j) {
    const double vol = model.vol_x(model.alpha_of_gamma(gs[j - 1], theta), theta);
    if (!(vol > 0.0) || !std::isfinite(vol)) {
      throw ValidationError("build_eta: volatility must be positive");
    }
    us[j] = us[j - 1] + factor * vol * vol * (xs[j] - xs[j - 1]);
  }
  return EtaProfile(std::move(xs), std::move(us));
}

Path x_to_u(const Path& x, const EtaProfile& eta) {
  std::vector<double> t(x.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = eta(x.times()[i]);
  return Path(TimeGrid(std::move(t)), {x.values().begin(), x.values().end()});
}

Path u_to_x(const Path& u, const EtaProfile& eta) {
  std::vector<double> t(u.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = eta.inverse(u.times()[i]);
  return Path(TimeGrid(std::move(t)), {u.values().begin(), u.values().end()});
}

double z_time(double t, double T) {
  if (!(T > 0.0)) throw ValidationError("z_time: T must be positive");
  if (t < 0.0 || !(t < T * (1.0 - 1e-10))) {
    throw ValidationError("z_time: require 0 <= t < T");
  }
  return t / (T * (T - t));
}

double u_time(double s, double T) {
  if (!(T > 0.0)) throw ValidationError("u_time: T must be positive");
  if (s < 0.0 || !std::isfinite(s)) throw ValidationError("u_time: require finite s >= 0");
  return T * T * s / (1.0 + T * s);
}

Path u_to_z(const Path& u, double y0, double y1, double T) {
  std::vector<double> s;
  std::vector<double> z;
  const auto ut = u.times();
  for (std::size_t i = 0; i < ut.size(); ++i) {
    const double t = ut[i];
    if (std::abs(t - T) <= 1e-10 * T) continue;  // endpoint lives at Z-time +inf
    const double chord = (1.0 - t / T) * y0 + (t / T) * y1;
    s.push_back(z_time(t, T));
    z.push_back((u.value(i) - chord) / (T - t));
  }
  return Path(TimeGrid(std::move(s)), std::move(z));
}

Path z_to_u(const Path& z, double T, double y0, double y1) {
  std::vector<double> t;
  std::vector<double> u;
  t.reserve(z.size() + 2);
  u.reserve(z.size() + 2);
  if (z.times().front() > 0.0) {
    t.push_back(0.0);
    u.push_back(y0);
  }
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double tu = u_time(z.times()[i], T);
    t.push_back(tu);
    u.push_back((T - tu) * z.value(i) + (1.0 - tu / T) * y0 + (tu / T) * y1);
  }
  t.push_back(T);
  u.push_back(y1);
  return Path(TimeGrid(std::move(t)), std::move(u));
}

void draw_retrospective(std::span<const double> stored_t, std::span<const double> stored_v,
                        std::span<const double> targets, RandomStream& rng,
                        std::span<double> out) {
  if (targets.empty()) return;
  if (stored_t.empty() || targets.front() < stored_t.front()) {
    throw ValidationError("draw_retrospective: target precedes the first stored knot");
  }
  const std::size_t n = stored_t.size();
  std::size_t p = 0;  // stored_t[p] <= current target
  double left_t = stored_t[0];
  double left_v = stored_v[0];
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double tb = targets[i];
    while (p + 1 < n && stored_t[p + 1] <= tb) ++p;
    if (stored_t[p] >= left_t) {
      left_t = stored_t[p];
      left_v = stored_v[p];
    }
    if (tb == left_t) {
      out[i] = left_v;
    } else if (p + 1 < n) {
      out[i] = sample_bridge_point(left_t, left_v, stored_t[p + 1], stored_v[p + 1], tb, rng);
    } else {
      out[i] = left_v + std::sqrt(tb - left_t) * rng.normal();
    }
    left_t = tb;
    left_v = out[i];
  }
}

Path refine_retrospective(const Path& z, std::span<const double> new_times, RandomStream& rng) {
  std::vector<double> targets;
  targets.reserve(new_times.size());
  for (double t : new_times) {
    if (!std::isfinite(t) || t < 0.0) {
      throw ValidationError("refine_retrospective: new times must be finite and nonnegative");
    }
    targets.push_back(t);
  }
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  const auto zt = z.times();
  std::erase_if(targets, [&](double t) { return std::binary_search(zt.begin(), zt.end(), t); });
  if (targets.empty()) return z;

  std::vector<double> drawn(targets.size());
  draw_retrospective(zt, z.values(), targets, rng, drawn);

  std::vector<double> t;
  std::vector<double> v;
  t.reserve(zt.size() + targets.size());
  v.reserve(zt.size() + targets.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < zt.size() || j < targets.size()) {
    if (j == targets.size() || (i < zt.size() && zt[i] < targets[j])) {
      t.push_back(zt[i]);
      v.push_back(z.value(i));
      ++i;
    } else {
      t.push_back(targets[j]);
      v.push_back(drawn[j]);
      ++j;
    }
  }
  return Path(TimeGrid(std::move(t)), std::move(v));
}

}  // namespace svtime
