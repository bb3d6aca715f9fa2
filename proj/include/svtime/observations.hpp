#pragma once

#include <vector>

namespace svtime {

struct ModelSpec;

// Discretely observed values of X (on the observed scale), sorted by time in years.
struct Observations {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const { return times.size(); }
  std::size_t intervals() const { return times.empty() ? 0 : times.size() - 1; }
};

// Throws ValidationError unless times are strictly increasing, there are at
// least two rows, values are finite, and values are positive when the model
// observes through a log-type state transform.
void validate_observations(const Observations& obs, const ModelSpec* model = nullptr);

}  // namespace svtime
