#include "svtime/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "svtime/errors.hpp"

namespace svtime {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

double bound_value(const ojson& v, double fallback) {
  if (v.is_null()) return fallback;
  if (!v.is_number()) throw ValidationError("config: prior bounds must be numbers or null");
  return v.get<double>();
}

template <class T>
T get_or(const ojson& obj, const char* key, T fallback) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  return obj[key].get<T>();
}

}  // namespace

Observations parse_csv(const std::string& text, const CsvSchema& schema, const ModelSpec* model) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) {
      header = split(trim(line));
      break;
    }
  }
  // A file without a header starts directly with numeric rows.
  double probe = 0.0;
  const bool headerless = !header.empty() && parse_double(header.front(), probe);
  std::string pending = headerless ? line : std::string();
  const std::size_t first_data = headerless ? lineno - 1 : lineno;
  bool has_time = false;
  if (header == std::vector<std::string>{"time", "value"} || (headerless && header.size() == 2)) {
    has_time = true;
  } else if (header == std::vector<std::string>{"value"} || (headerless && header.size() == 1)) {
    if (!schema.spacing || !(*schema.spacing > 0.0)) {
      throw ValidationError("csv: a `value`-only file needs a positive spacing");
    }
  } else {
    throw ValidationError("csv line " + std::to_string(lineno) +
                          ": header must be `time,value` or `value`");
  }
  lineno = first_data;

  Observations obs;
  while (!pending.empty() || std::getline(in, line)) {
    if (!pending.empty()) line = std::exchange(pending, std::string());
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto cells = split(t);
    const std::string where = "csv line " + std::to_string(lineno) + ": ";
    if (cells.size() != (has_time ? 2u : 1u)) throw ValidationError(where + "wrong number of fields");
    double time = 0.0;
    double value = 0.0;
    if (has_time) {
      if (!parse_double(cells[0], time) || !parse_double(cells[1], value)) {
        throw ValidationError(where + "cannot parse `" + t + "`");
      }
    } else {
      if (!parse_double(cells[0], value)) throw ValidationError(where + "cannot parse `" + t + "`");
      time = *schema.spacing * static_cast<double>(obs.size());
    }
    if (!std::isfinite(time) || !std::isfinite(value)) throw ValidationError(where + "non-finite entry");
    if (!obs.times.empty() && !(time > obs.times.back())) {
      throw ValidationError(where + "time " + cells[0] + " is not after the previous row");
    }
    if (model != nullptr && model->lamperti && !(value > 0.0)) {
      throw ValidationError(where + "value must be positive for model " + model->name);
    }
    obs.times.push_back(time);
    obs.values.push_back(value);
  }
  validate_observations(obs, model);
  return obs;
}

Observations ingest_csv(const fs::path& path, const CsvSchema& schema, const ModelSpec* model) {
  return parse_csv(read_file(path), schema, model);
}

RunConfig parse_config(const std::string& json_text) {
  ojson doc;
  try {
    doc = ojson::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config: top level must be an object");
  RunConfig cfg;
  cfg.raw = doc.dump(2);
  try {
    if (!doc.contains("model")) throw ValidationError("config: missing `model`");
    cfg.model = doc["model"].get<std::string>();
    const ModelSpec model = make_model(cfg.model);
    const std::size_t np = model.params.size();

    cfg.column_order = model.param_names();
    if (doc.contains("params") && doc["params"].is_object()) {
      std::vector<double> theta(np, std::numeric_limits<double>::quiet_NaN());
      cfg.column_order.clear();
      for (const auto& [name, value] : doc["params"].items()) {
        theta[model.index_of(name)] = value.get<double>();
        cfg.column_order.push_back(name);
      }
      for (std::size_t i = 0; i < np; ++i) {
        if (std::isnan(theta[i])) {
          throw ValidationError("config: params lacks " + model.params[i].name);
        }
        if (!in_support(model.params[i].support, theta[i])) {
          throw ValidationError("config: " + model.params[i].name + " outside support " +
                                to_string(model.params[i].support));
        }
      }
      cfg.params = theta;
    } else if (doc.contains("params") && !(doc["params"].is_string() &&
                                           doc["params"].get<std::string>() == "prior-midpoint")) {
      throw ValidationError("config: params must be an object or \"prior-midpoint\"");
    }

    cfg.prior = PriorSpec::flat(model);
    if (doc.contains("prior")) {
      for (const auto& [name, b] : doc["prior"].items()) {
        const std::size_t i = model.index_of(name);
        if (!b.is_array() || b.size() != 2) {
          throw ValidationError("config: prior." + name + " must be [lower, upper]");
        }
        cfg.prior.lower[i] = bound_value(b[0], -std::numeric_limits<double>::infinity());
        cfg.prior.upper[i] = bound_value(b[1], std::numeric_limits<double>::infinity());
        if (!(cfg.prior.lower[i] < cfg.prior.upper[i])) {
          throw ValidationError("config: prior." + name + " is empty");
        }
      }
    }

    if (doc.contains("fixed")) cfg.sampler.fixed = doc["fixed"].get<std::vector<std::string>>();
    for (const auto& name : cfg.sampler.fixed) model.index_of(name);

    if (doc.contains("sampler")) {
      const ojson& s = doc["sampler"];
      cfg.sampler.m = get_or<std::size_t>(s, "m", cfg.sampler.m);
      cfg.sampler.block_len = get_or<std::size_t>(s, "block_len", cfg.sampler.block_len);
      cfg.sampler.n_iter = get_or<std::size_t>(s, "n_iter", cfg.sampler.n_iter);
      cfg.sampler.n_burn = get_or<std::size_t>(s, "n_burn", cfg.sampler.n_burn);
      cfg.sampler.thin = get_or<std::size_t>(s, "thin", cfg.sampler.thin);
      cfg.sampler.seed = get_or<std::uint64_t>(s, "seed", cfg.sampler.seed);
      cfg.sampler.adapt = get_or<bool>(s, "adapt", cfg.sampler.adapt);
      if (s.contains("rw_scales")) {
        const ojson& r = s["rw_scales"];
        if (r.is_array()) {
          cfg.sampler.rw_scales = r.get<std::vector<double>>();
        } else if (r.is_object()) {
          cfg.sampler.rw_scales.assign(np, 0.1);
          for (const auto& [name, v] : r.items()) {
            cfg.sampler.rw_scales[model.index_of(name)] = v.get<double>();
          }
        } else {
          throw ValidationError("config: sampler.rw_scales must be an array or object");
        }
      }
    }
    if (cfg.sampler.m < 1) throw ValidationError("config: sampler.m must be >= 1");
    if (cfg.sampler.n_burn >= cfg.sampler.n_iter) {
      throw ValidationError("config: sampler.n_burn must be < n_iter");
    }
    if (cfg.sampler.thin < 1) throw ValidationError("config: sampler.thin must be >= 1");

    if (doc.contains("data")) {
      const ojson& d = doc["data"];
      if (d.contains("spacing") && !d["spacing"].is_null()) {
        cfg.data.spacing = d["spacing"].get<double>();
      }
    }

    if (doc.contains("simulate")) {
      const ojson& s = doc["simulate"];
      SimulateOptions& o = cfg.simulate;
      o.x0 = get_or<double>(s, "x0", o.x0);
      if (s.contains("alpha0") && !s["alpha0"].is_null()) o.alpha0 = s["alpha0"].get<double>();
      o.delta = get_or<double>(s, "delta", o.delta);
      o.horizon = get_or<double>(s, "horizon", o.horizon);
      o.thin = get_or<std::size_t>(s, "thin", o.thin);
      if (s.contains("obs_spacing") && !s["obs_spacing"].is_null()) {
        o.obs_spacing = s["obs_spacing"].get<double>();
      }
      o.seed = get_or<std::uint64_t>(s, "seed", o.seed);
      if (!(o.delta > 0.0) || !(o.horizon > 0.0) || o.thin < 1) {
        throw ValidationError("config: simulate needs delta > 0, horizon > 0, thin >= 1");
      }
    }
    cfg.chains = get_or<std::size_t>(doc, "chains", 1);
    if (cfg.chains < 1) throw ValidationError("config: chains must be >= 1");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) { return parse_config(read_file(path)); }

SimulationOutput simulate_dataset(const RunConfig& config) {
  const ModelSpec model = make_model(config.model);
  if (!config.params) throw ValidationError("simulate: config.params must give the true values");
  const SimulateOptions& o = config.simulate;
  const auto steps = static_cast<std::size_t>(std::llround(o.horizon / o.delta));
  if (steps < 1) throw ValidationError("simulate: horizon shorter than delta");
  std::size_t stride = o.thin;
  if (o.obs_spacing) {
    const double r = *o.obs_spacing / o.delta;
    stride = static_cast<std::size_t>(std::llround(r));
    if (stride < 1 || std::abs(r - double(stride)) > 1e-9 * r) {
      throw ValidationError("simulate: obs_spacing must be a multiple of delta");
    }
  }
  if (steps % stride != 0) throw ValidationError("simulate: horizon/delta must be divisible by thin");

  const TimeGrid grid = TimeGrid::uniform(0.0, o.horizon, steps);
  double alpha0 = 0.0;
  if (model.alpha0_index) {
    alpha0 = (*config.params)[*model.alpha0_index];
  } else if (o.alpha0) {
    alpha0 = *o.alpha0;
  }
  RandomStream rng(o.seed, 0);
  auto [x, alpha] = euler_simulate(model, *config.params, o.x0, alpha0, grid, rng);
  SimulationOutput out;
  for (std::size_t i = 0; i <= steps; i += stride) {
    out.observations.times.push_back(grid[i]);
    out.observations.values.push_back(x.value(i));
  }
  out.x = std::move(x);
  out.alpha = std::move(alpha);
  return out;
}

void write_observations(const fs::path& path, const Observations& obs) {
  auto out = open_out(path);
  out << "time,value\n";
  for (std::size_t i = 0; i < obs.size(); ++i) {
    out << fmt(obs.times[i]) << ',' << fmt(obs.values[i]) << '\n';
  }
}

void write_trace(const fs::path& path, const Trace& trace,
                 const std::vector<std::string>& column_order) {
  std::vector<std::size_t> idx;
  for (const auto& name : column_order) {
    const auto it = std::find(trace.param_names.begin(), trace.param_names.end(), name);
    if (it == trace.param_names.end()) throw ValidationError("trace has no parameter " + name);
    idx.push_back(static_cast<std::size_t>(it - trace.param_names.begin()));
  }
  auto out = open_out(path);
  out << "iter";
  for (const auto& name : column_order) out << ',' << name;
  out << ",loglik\n";
  for (std::size_t r = 0; r < trace.rows(); ++r) {
    out << trace.iters[r];
    for (std::size_t i : idx) out << ',' << fmt(trace.draws[r][i]);
    out << ',' << fmt(trace.loglik[r]) << '\n';
  }
}

Trace read_trace(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("trace: empty file");
  const auto header = split(trim(line));
  if (header.size() < 2 || header.front() != "iter" || header.back() != "loglik") {
    throw ValidationError("trace: header must be `iter,<params>,loglik`");
  }
  Trace trace;
  trace.param_names.assign(header.begin() + 1, header.end() - 1);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line));
    if (cells.size() != header.size()) {
      throw ValidationError("trace line " + std::to_string(lineno) + ": wrong number of fields");
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_double(cells[c], row[c]) && cells[c] != "nan" && cells[c] != "-inf" &&
          cells[c] != "inf") {
        throw ValidationError("trace line " + std::to_string(lineno) + ": cannot parse `" +
                              cells[c] + "`");
      }
    }
    trace.iters.push_back(static_cast<std::size_t>(row.front()));
    trace.loglik.push_back(row.back());
    trace.draws.emplace_back(row.begin() + 1, row.end() - 1);
  }
  return trace;
}

void write_summary(const fs::path& path, const SummaryTable& table) {
  auto out = open_out(path);
  out << "param,mean,sd,q2.5,median,q97.5\n";
  for (const auto& r : table) {
    out << r.name << ',' << fmt(r.mean) << ',' << fmt(r.sd) << ',' << fmt(r.q025) << ','
        << fmt(r.median) << ',' << fmt(r.q975) << '\n';
  }
}

void cmd_simulate(const RunConfig& config, const fs::path& out_dir) {
  const SimulationOutput sim = simulate_dataset(config);
  fs::create_directories(out_dir);
  write_observations(out_dir / "observations.csv", sim.observations);
  {
    auto out = open_out(out_dir / "truth.csv");
    out << "time,x,alpha\n";
    for (std::size_t i = 0; i < sim.x.size(); ++i) {
      out << fmt(sim.x.times()[i]) << ',' << fmt(sim.x.value(i)) << ',' << fmt(sim.alpha.value(i))
          << '\n';
    }
  }
  const ModelSpec model = make_model(config.model);
  auto out = open_out(out_dir / "truth_params.csv");
  out << "param,value\n";
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    out << model.params[i].name << ',' << fmt((*config.params)[i]) << '\n';
  }
}

void cmd_fit(const RunConfig& config, const fs::path& data_path, const fs::path& out_dir) {
  const ModelSpec model = make_model(config.model);
  const Observations data = ingest_csv(data_path, config.data, &model);
  fs::create_directories(out_dir);
  ojson report = ojson::object();
  for (std::size_t c = 0; c < config.chains; ++c) {
    SamplerConfig sc = config.sampler;
    sc.seed = config.sampler.seed + c;
    const Trace trace = run_chain(sc, data, model, config.prior, config.params);
    const std::string suffix = config.chains == 1 ? "" : "_" + std::to_string(c + 1);
    write_trace(out_dir / ("trace" + suffix + ".csv"), trace, config.column_order);
    SummaryTable table;
    for (const auto& name : config.column_order) {
      table.push_back(summarize_column(name, trace.column(name)));
    }
    write_summary(out_dir / ("summary" + suffix + ".csv"), table);
    ojson acc = ojson::object();
    for (const auto& [key, tally] : trace.acceptance) {
      acc[key] = {{"proposed", tally.proposed}, {"accepted", tally.accepted}, {"rate", tally.rate()}};
    }
    ojson chain = {{"seed", sc.seed}, {"rows", trace.rows()}, {"acceptance", acc}};
    report[config.chains == 1 ? "chain" : "chain" + suffix] = chain;
  }
  report["config"] = ojson::parse(config.raw);
  auto out = open_out(out_dir / "acceptance.json");
  out << report.dump(2) << '\n';
}

void cmd_diagnose(const fs::path& trace_path, std::size_t max_lag, const fs::path& out_dir,
                  std::size_t kde_points) {
  const Trace trace = read_trace(trace_path);
  if (trace.rows() < 2) throw ValidationError("diagnose: trace needs at least 2 rows");
  if (max_lag >= trace.rows()) {
    throw ValidationError("diagnose: max_lag " + std::to_string(max_lag) +
                          " must be below the number of draws " + std::to_string(trace.rows()));
  }
  fs::create_directories(out_dir);
  const std::size_t np = trace.param_names.size();
  std::vector<std::vector<double>> acfs(np);
  std::vector<double> iacts(np, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::vector<std::pair<double, double>>> kdes(np);
  for (std::size_t i = 0; i < np; ++i) {
    const auto col = trace.column(i);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    if (*lo == *hi) {
      acfs[i].assign(max_lag + 1, std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    acfs[i] = acf(col, max_lag);
    if (col.size() >= 100) iacts[i] = iact(col);
    kdes[i] = kde_export(col, kde_points);
  }
  {
    auto out = open_out(out_dir / "acf.csv");
    out << "lag";
    for (const auto& n : trace.param_names) out << ',' << n;
    out << '\n';
    for (std::size_t k = 0; k <= max_lag; ++k) {
      out << k;
      for (std::size_t i = 0; i < np; ++i) out << ',' << fmt(acfs[i][k]);
      out << '\n';
    }
  }
  {
    auto out = open_out(out_dir / "iact.csv");
    out << "param,iact\n";
    for (std::size_t i = 0; i < np; ++i) out << trace.param_names[i] << ',' << fmt(iacts[i]) << '\n';
  }
  auto out = open_out(out_dir / "kde.csv");
  out << "param,x,density\n";
  for (std::size_t i = 0; i < np; ++i) {
    for (const auto& [x, d] : kdes[i]) out << trace.param_names[i] << ',' << fmt(x) << ',' << fmt(d) << '\n';
  }
}

}  // namespace svtime
