#include "svtime/paths.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svtime/errors.hpp"

namespace svtime {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty()) throw ValidationError("TimeGrid: empty grid");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i])) {
      throw ValidationError("TimeGrid: non-finite time at index " + std::to_string(i));
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw ValidationError("TimeGrid: times not strictly increasing at index " +
                            std::to_string(i));
    }
  }
}

TimeGrid TimeGrid::uniform(double t0, double t1, std::size_t steps) {
  if (steps == 0 || !(t1 > t0)) throw ValidationError("TimeGrid::uniform: need t1 > t0, steps >= 1");
  std::vector<double> t(steps + 1);
  const double h = (t1 - t0) / static_cast<double>(steps);
  for (std::size_t i = 0; i <= steps; ++i) t[i] = t0 + h * static_cast<double>(i);
  t[steps] = t1;
  return TimeGrid(std::move(t));
}

Path::Path(TimeGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (grid_.size() != values_.size()) {
    throw ValidationError("Path: " + std::to_string(values_.size()) + " values for " +
                          std::to_string(grid_.size()) + " times");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw ValidationError("Path: non-finite value at index " + std::to_string(i));
    }
  }
}

double Path::interpolate(double t) const {
  const auto ts = grid_.times();
  if (t <= ts.front()) return values_.front();
  if (t >= ts.back()) return values_.back();
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - ts.begin());
  const double w = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
  return (1.0 - w) * values_[j - 1] + w * values_[j];
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

BridgeMoments bridge_moments(double t_a, double z_a, double t_c, double z_c, double t_b) {
  if (!(t_a <= t_b && t_b <= t_c)) {
    throw ValidationError("bridge: require t_a <= t_b <= t_c");
  }
  if (t_b == t_a) return {z_a, 0.0};
  if (t_b == t_c) return {z_c, 0.0};
  const double span = t_c - t_a;
  const double mean = ((t_b - t_a) * z_c + (t_c - t_b) * z_a) / span;
  const double var = (t_b - t_a) * (t_c - t_b) / span;
  return {mean, var};
}

double sample_bridge_point(double t_a, double z_a, double t_c, double z_c, double t_b,
                           RandomStream& rng) {
  if (t_a == t_c && z_a != z_c) {
    throw ValidationError("sample_bridge_point: coincident anchors with distinct values");
  }
  const BridgeMoments mom = bridge_moments(t_a, z_a, t_c, z_c, t_b);
  if (mom.variance == 0.0) return mom.mean;
  return mom.mean + std::sqrt(mom.variance) * rng.normal();
}

Path sample_brownian_motion(const TimeGrid& grid, double start, RandomStream& rng) {
  const auto ts = grid.times();
  std::vector<double> v(ts.size());
  v[0] = start;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    v[i] = v[i - 1] + std::sqrt(ts[i] - ts[i - 1]) * rng.normal();
  }
  return Path(grid, std::move(v));
}

double quadratic_variation(const Path& p) {
  if (p.size() < 2) throw ValidationError("quadratic_variation: path needs at least 2 knots");
  const auto v = p.values();
  double qv = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double d = v[i] - v[i - 1];
    qv += d * d;
  }
  return qv;
}

double integrate_left_riemann(const TimeGrid& grid, std::span<const double> integrand_values) {
  if (integrand_values.size() != grid.size()) {
    throw ValidationError("integrate_left_riemann: length mismatch");
  }
  const auto ts = grid.times();
  double sum = 0.0;
  for (std::size_t i = 1; i < ts.size(); ++i) sum += integrand_values[i - 1] * (ts[i] - ts[i - 1]);
  return sum;
}

}  // namespace svtime
