#pragma once

// Configuration, CSV ingestion, and the simulate / fit / diagnose commands.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "svtime/diagnostics.hpp"
#include "svtime/mcmc.hpp"
#include "svtime/models.hpp"
#include "svtime/observations.hpp"
#include "svtime/state.hpp"

namespace svtime {

struct CsvSchema {
  // Used when the file has a single `value` column.
  std::optional<double> spacing;
};

// Accepts a header `time,value` or `value`. Errors name the offending line.
Observations ingest_csv(const std::filesystem::path& path, const CsvSchema& schema,
                        const ModelSpec* model = nullptr);
Observations parse_csv(const std::string& text, const CsvSchema& schema,
                       const ModelSpec* model = nullptr);

struct SimulateOptions {
  double x0 = 0.0;
  std::optional<double> alpha0;
  double delta = 1e-3;
  double horizon = 1.0;
  std::size_t thin = 1;
  std::optional<double> obs_spacing;  // overrides thin: stride = obs_spacing / delta
  std::uint64_t seed = 1;
};

struct RunConfig {
  std::string model;
  std::optional<std::vector<double>> params;  // model order; empty means prior-midpoint
  std::vector<std::string> column_order;      // trace column order
  PriorSpec prior;
  SamplerConfig sampler;
  CsvSchema data;
  SimulateOptions simulate;
  std::size_t chains = 1;
  std::string raw;  // the parsed document, re-serialised
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

struct SimulationOutput {
  Observations observations;
  Path x;      // observed scale, fine grid
  Path alpha;  // fine grid
};

SimulationOutput simulate_dataset(const RunConfig& config);

void write_observations(const std::filesystem::path& path, const Observations& obs);
void write_trace(const std::filesystem::path& path, const Trace& trace,
                 const std::vector<std::string>& column_order);
Trace read_trace(const std::filesystem::path& path);
void write_summary(const std::filesystem::path& path, const SummaryTable& table);

void cmd_simulate(const RunConfig& config, const std::filesystem::path& out_dir);
void cmd_fit(const RunConfig& config, const std::filesystem::path& data_path,
             const std::filesystem::path& out_dir);
void cmd_diagnose(const std::filesystem::path& trace_path, std::size_t max_lag,
                  const std::filesystem::path& out_dir, std::size_t kde_points = 256);

}  // namespace svtime
