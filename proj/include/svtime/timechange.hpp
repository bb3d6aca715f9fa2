#pragma once

// Two-stage time change for one observation interval [t_start, t_end]:
//
//   X-time -> U-time   via eta(t) = int_{t_start}^t v(s) ds (v = conditional variance rate)
//   U-time -> Z-time   via s = t / (T (T - t)),  U_t - chord(t) = (T - t) Z_s
//
// Under the reference measure U is a Brownian bridge from y0 to y1 on [0, T]
// exactly when Z is a standard Brownian motion on [0, inf).

#include <span>
#include <vector>

#include "svtime/models.hpp"
#include "svtime/paths.hpp"

namespace svtime {

// Monotone piecewise-linear map from X-time to U-time over one interval.
class EtaProfile {
 public:
  EtaProfile(std::vector<double> x_times, std::vector<double> u_times);

  double t_start() const { return x_times_.front(); }
  double t_end() const { return x_times_.back(); }
  double total() const { return u_times_.back(); }
  std::span<const double> x_knots() const { return x_times_; }
  std::span<const double> u_knots() const { return u_times_; }

  double operator()(double x_time) const;
  double inverse(double u_time) const;

 private:
  std::vector<double> x_times_;
  std::vector<double> u_times_;
};

// Constant volatility: eta(t) = sigma^2 (t - t_start). Stochastic volatility:
// left-Riemann cumulative sums of (1 - rho^2) sigma_x^2(alpha) at gamma's knots
// inside [t_start, t_end]; gamma must have knots at both ends.
EtaProfile build_eta(double t_start, double t_end, const Path* gamma, ParamView theta,
                     const ModelSpec& model);

Path x_to_u(const Path& x, const EtaProfile& eta);
Path u_to_x(const Path& u, const EtaProfile& eta);

// s = t / (T (T - t)) for 0 <= t < T(1 - 1e-10).
double z_time(double t, double T);
// Inverse: t = T^2 s / (1 + T s).
double u_time(double s, double T);

struct IntervalPaths {
  double y0 = 0.0;
  double y1 = 0.0;
  Path u;  // U-time [0, T], endpoints y0 and y1
  Path z;  // finite Z-times only
};

// Knots with t < T map to Z; a knot at t = T (the endpoint y1) is dropped.
Path u_to_z(const Path& u, double y0, double y1, double T);
// Maps Z knots back to U-time and appends the endpoints (0, y0) and (T, y1).
Path z_to_u(const Path& z, double T, double y0, double y1);

// Merges `new_times` into z. Each new value is drawn from the Brownian bridge
// between its nearest known neighbours (stored or already drawn); times past
// the last knot get a free Brownian increment. Existing times are kept as is.
Path refine_retrospective(const Path& z, std::span<const double> new_times, RandomStream& rng);

// Span-level core of refine_retrospective: values at sorted `targets` given the
// stored knots (stored_t sorted, starting at or before targets.front()).
void draw_retrospective(std::span<const double> stored_t, std::span<const double> stored_v,
                        std::span<const double> targets, RandomStream& rng,
                        std::span<double> out);

}  // namespace svtime
