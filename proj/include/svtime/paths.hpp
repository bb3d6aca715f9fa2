#pragma once

// Path numerics: time grids, Brownian motion and bridge sampling,
// left-point quadrature and quadratic variation.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace svtime {

// Ordered, finite, strictly increasing time points. A single point is allowed
// (a degenerate grid carrying no increments).
class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> times);

  // `steps` equal increments covering [t0, t1].
  static TimeGrid uniform(double t0, double t1, std::size_t steps);

  std::span<const double> times() const { return times_; }
  std::size_t size() const { return times_.size(); }
  double operator[](std::size_t i) const { return times_[i]; }
  double front() const { return times_.front(); }
  double back() const { return times_.back(); }

 private:
  std::vector<double> times_;
};

// A diffusion skeleton: values on a grid, linearly interpolated in between.
class Path {
 public:
  Path() = default;
  Path(TimeGrid grid, std::vector<double> values);

  const TimeGrid& grid() const { return grid_; }
  std::span<const double> times() const { return grid_.times(); }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double value(std::size_t i) const { return values_[i]; }

  // Piecewise-linear interpolation; clamps outside the grid.
  double interpolate(double t) const;

 private:
  TimeGrid grid_;
  std::vector<double> values_;
};

// Reproducible stream of variates keyed by (seed, stream id).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

struct BridgeMoments {
  double mean;
  double variance;
};

// Conditional law of a Brownian motion at t_b given its values at t_a <= t_b <= t_c.
BridgeMoments bridge_moments(double t_a, double z_a, double t_c, double z_c, double t_b);

// Draws from bridge_moments(). Returns the endpoint value without consuming
// randomness when t_b coincides with t_a or t_c.
double sample_bridge_point(double t_a, double z_a, double t_c, double z_c, double t_b,
                           RandomStream& rng);

Path sample_brownian_motion(const TimeGrid& grid, double start, RandomStream& rng);

// Sum of squared increments.
double quadratic_variation(const Path& p);

// Left-point rule: sum f(t_{i-1}) (t_i - t_{i-1}).
double integrate_left_riemann(const TimeGrid& grid, std::span<const double> integrand_values);

}  // namespace svtime
