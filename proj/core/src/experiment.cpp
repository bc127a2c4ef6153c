#include "mecmfg/experiment.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mecmfg/cost.hpp"
#include "mecmfg/version.hpp"

namespace mecmfg::cli {

using nlohmann::json;

// ---------------------------------------------------------------------------
// logging
// ---------------------------------------------------------------------------

namespace {
std::atomic<LogLevel> g_log_level{LogLevel::Warn};
}

void set_log_level(LogLevel level) { g_log_level.store(level); }

void set_log_level_from_env() {
  const char* env = std::getenv("MECMFG_LOG");
  if (env == nullptr) return;
  const std::string value(env);
  if (value == "debug") set_log_level(LogLevel::Debug);
  else if (value == "info") set_log_level(LogLevel::Info);
  else if (value == "warn") set_log_level(LogLevel::Warn);
  else if (value == "error") set_log_level(LogLevel::Error);
  else if (value == "silent") set_log_level(LogLevel::Silent);
}

void log_message(LogLevel level, const std::string& message) {
  if (level < g_log_level.load()) return;
  static const char* names[] = {"debug", "info", "warn", "error"};
  std::cerr << "mecmfg [" << names[static_cast<int>(level)] << "] " << message << "\n";
}

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::Aoi: return "aoi";
    case Mode::Simulate: return "simulate";
    case Mode::Solve: return "solve";
    case Mode::Sweep: return "sweep";
  }
  return "?";
}

std::optional<Mode> mode_from_name(const std::string& name) {
  if (name == "aoi") return Mode::Aoi;
  if (name == "simulate") return Mode::Simulate;
  if (name == "solve") return Mode::Solve;
  if (name == "sweep") return Mode::Sweep;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// config paths: "system.profiles[0].arrival_rates.yellow" (brackets or dots)
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : path) {
    if (ch == '.' || ch == '[') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch == ']') {
      // closing bracket ends the current numeric segment
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

json* resolve_path(json& doc, const std::string& path, bool create) {
  json* node = &doc;
  for (const auto& seg : split_path(path)) {
    if (node->is_array() || (!node->is_object() && !seg.empty() &&
                             std::isdigit(static_cast<unsigned char>(seg[0])))) {
      std::size_t index = 0;
      const auto [p, ec] = std::from_chars(seg.data(), seg.data() + seg.size(), index);
      if (ec != std::errc() || p != seg.data() + seg.size()) return nullptr;
      if (!node->is_array() || index >= node->size()) return nullptr;
      node = &(*node)[index];
    } else {
      if (node->is_null() && create) *node = json::object();
      if (!node->is_object()) return nullptr;
      if (!node->contains(seg)) {
        if (!create) return nullptr;
        (*node)[seg] = json();
      }
      node = &(*node)[seg];
    }
  }
  return node;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// line/column of a byte offset, for parse diagnostics
std::pair<int, int> line_col(const std::string& text, std::size_t offset) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// ---------------------------------------------------------------------------
// json <-> structs
// ---------------------------------------------------------------------------

constexpr const char* kClassKeys[3] = {"red", "yellow", "green"};

PerClass<double> per_class_from_json(const json& j) {
  PerClass<double> out;
  for (int c = 0; c < 3; ++c) {
    out.values[static_cast<std::size_t>(c)] = j.at(kClassKeys[c]).get<double>();
  }
  return out;
}

Policy policy_from_json(const json& j) {
  Policy p;
  p.p[TaskClass::Red] = j.at("p_r").get<double>();
  p.p[TaskClass::Yellow] = j.at("p_y").get<double>();
  p.p[TaskClass::Green] = j.at("p_g").get<double>();
  p.mu0 = j.at("mu0").get<double>();
  return p;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.schema_version = j.value("schema_version", 1);
  if (j.contains("mode")) {
    const auto mode = mode_from_name(j.at("mode").get<std::string>());
    if (!mode) throw ConfigError("unknown mode \"" + j.at("mode").get<std::string>() + "\"");
    cfg.mode = *mode;
  }
  const json& sys = j.at("system");
  cfg.system.num_ues = sys.at("num_ues").get<int>();
  cfg.system.es_rate = sys.at("es_rate").get<double>();
  cfg.system.scalarization = sys.at("scalarization").get<double>();
  cfg.system.aoi_weights = per_class_from_json(sys.at("aoi_weights"));
  for (const json& pj : sys.at("profiles")) {
    UEProfile profile;
    profile.name = pj.value("name", "type" + std::to_string(cfg.system.profiles.size()));
    profile.arrival_rates = per_class_from_json(pj.at("arrival_rates"));
    profile.eta = pj.at("eta").get<double>();
    profile.f_max = pj.at("f_max").get<double>();
    profile.weight = pj.value("weight", 1.0);
    cfg.system.profiles.push_back(std::move(profile));
  }
  for (const json& pj : j.at("policies")) {
    cfg.policies.push_back(policy_from_json(pj));
  }
  if (j.contains("initial_rho")) {
    cfg.initial_rho = MeanField{per_class_from_json(j.at("initial_rho"))};
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    cfg.solver.eps_rho = s.value("eps_rho", cfg.solver.eps_rho);
    cfg.solver.eps_policy = s.value("eps_policy", cfg.solver.eps_policy);
    cfg.solver.gamma_mf = s.value("gamma_mf", cfg.solver.gamma_mf);
    cfg.solver.gamma_step = s.value("gamma_step", cfg.solver.gamma_step);
    cfg.solver.fd_step = s.value("fd_step", cfg.solver.fd_step);
    cfg.solver.max_outer = s.value("max_outer", cfg.solver.max_outer);
    cfg.solver.max_inner = s.value("max_inner", cfg.solver.max_inner);
    cfg.solver.rng_seed = s.value("rng_seed", cfg.solver.rng_seed);
  }
  if (j.contains("sim")) {
    const json& s = j.at("sim");
    if (s.contains("horizon")) cfg.sim.horizon = s.at("horizon").get<double>();
    if (s.contains("events")) cfg.sim.events = s.at("events").get<std::uint64_t>();
    cfg.sim.warmup_fraction = s.value("warmup_fraction", cfg.sim.warmup_fraction);
    cfg.sim.replications = s.value("replications", cfg.sim.replications);
    cfg.sim.seed = s.value("seed", cfg.sim.seed);
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    SweepSpec sweep;
    sweep.path = s.at("path").get<std::string>();
    for (const json& v : s.at("values")) sweep.values.push_back(v.get<double>());
    if (s.contains("mode")) {
      const auto inner = mode_from_name(s.at("mode").get<std::string>());
      if (!inner || *inner == Mode::Sweep) {
        throw ConfigError("sweep.mode must be one of aoi, simulate, solve");
      }
      sweep.inner = *inner;
    }
    sweep.warm_start = s.value("warm_start", true);
    cfg.sweep = std::move(sweep);
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

void require(std::vector<Diagnostic>& out, bool ok, const std::string& path,
             const std::string& message) {
  if (!ok) out.push_back(Diagnostic{path, message});
}

std::vector<Diagnostic> validate_json(const json& j) {
  std::vector<Diagnostic> diags;
  require(diags, j.is_object(), "", "config must be a JSON object");
  if (!j.is_object()) return diags;

  if (j.contains("schema_version")) {
    require(diags, j.at("schema_version").is_number_integer() &&
                       j.at("schema_version").get<int>() == 1,
            "schema_version", "unsupported schema version (expected 1)");
  }
  Mode mode = Mode::Aoi;
  if (j.contains("mode")) {
    if (!j.at("mode").is_string() || !mode_from_name(j.at("mode").get<std::string>())) {
      diags.push_back({"mode", "must be one of aoi, simulate, solve, sweep"});
    } else {
      mode = *mode_from_name(j.at("mode").get<std::string>());
    }
  }
  if (!j.contains("system") || !j.at("system").is_object()) {
    diags.push_back({"system", "missing section"});
    return diags;
  }
  const json& sys = j.at("system");
  auto num = [&](const json& node, const char* key) -> std::optional<double> {
    if (!node.contains(key) || !node.at(key).is_number()) return std::nullopt;
    return node.at(key).get<double>();
  };
  const auto n = num(sys, "num_ues");
  require(diags, n && *n >= 1 && *n == std::floor(*n), "system.num_ues",
          "must be an integer >= 1");
  const auto mu = num(sys, "es_rate");
  require(diags, mu && *mu > 0, "system.es_rate", "must be positive");
  const auto v = num(sys, "scalarization");
  require(diags, v && *v > 0, "system.scalarization", "must be positive");
  if (!sys.contains("aoi_weights") || !sys.at("aoi_weights").is_object()) {
    diags.push_back({"system.aoi_weights", "missing section"});
  } else {
    for (const char* key : kClassKeys) {
      const auto w = num(sys.at("aoi_weights"), key);
      require(diags, w && *w > 0, std::string("system.aoi_weights.") + key,
              "must be positive");
    }
  }
  std::size_t num_profiles = 0;
  if (!sys.contains("profiles") || !sys.at("profiles").is_array() ||
      sys.at("profiles").empty()) {
    diags.push_back({"system.profiles", "at least one profile required"});
  } else {
    num_profiles = sys.at("profiles").size();
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < num_profiles; ++i) {
      const json& p = sys.at("profiles")[i];
      const std::string base = "system.profiles[" + std::to_string(i) + "]";
      if (!p.is_object()) {
        diags.push_back({base, "must be an object"});
        continue;
      }
      if (!p.contains("arrival_rates") || !p.at("arrival_rates").is_object()) {
        diags.push_back({base + ".arrival_rates", "missing section"});
      } else {
        for (const char* key : kClassKeys) {
          const auto rate = num(p.at("arrival_rates"), key);
          require(diags, rate && *rate > 0, base + ".arrival_rates." + key,
                  "must be positive");
        }
      }
      const auto eta = num(p, "eta");
      require(diags, eta && *eta > 0, base + ".eta", "must be positive");
      const auto fmax = num(p, "f_max");
      require(diags, fmax && *fmax > 0, base + ".f_max", "must be positive");
      const auto weight = num(p, "weight");
      if (num_profiles == 1 && !p.contains("weight")) {
        weight_sum += 1.0;
      } else {
        require(diags, weight && *weight >= 0 && *weight <= 1, base + ".weight",
                "must lie in [0, 1]");
        if (weight) weight_sum += *weight;
      }
    }
    require(diags, std::abs(weight_sum - 1.0) <= 1e-12, "system.profiles",
            "profile weights must sum to 1");
  }

  if (!j.contains("policies") || !j.at("policies").is_array() ||
      j.at("policies").size() != num_profiles) {
    diags.push_back({"policies", "one policy per profile required"});
  } else {
    for (std::size_t i = 0; i < num_profiles; ++i) {
      const json& p = j.at("policies")[i];
      const std::string base = "policies[" + std::to_string(i) + "]";
      for (const char* key : {"p_r", "p_y", "p_g"}) {
        const auto prob = num(p, key);
        require(diags, prob && *prob >= 0 && *prob <= 1, base + "." + key,
                "must lie in [0, 1]");
      }
      const auto mu0 = num(p, "mu0");
      require(diags, mu0.has_value() && *mu0 >= 0, base + ".mu0", "must be nonnegative");
      if (mu0 && sys.contains("profiles") && sys.at("profiles").is_array() &&
          i < sys.at("profiles").size()) {
        const auto fmax = num(sys.at("profiles")[i], "f_max");
        if (fmax) {
          require(diags, *mu0 <= *fmax, base + ".mu0", "must not exceed f_max");
        }
      }
    }
  }

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    for (const char* key : {"eps_rho", "eps_policy", "gamma_step", "fd_step"}) {
      if (s.contains(key)) {
        const auto value = num(s, key);
        require(diags, value && *value > 0, std::string("solver.") + key,
                "must be positive");
      }
    }
    if (s.contains("gamma_mf")) {
      const auto g = num(s, "gamma_mf");
      require(diags, g && *g > 0 && *g <= 1, "solver.gamma_mf", "must lie in (0, 1]");
    }
    for (const char* key : {"max_outer", "max_inner"}) {
      if (s.contains(key)) {
        const auto value = num(s, key);
        require(diags, value && *value >= 1, std::string("solver.") + key,
                "must be >= 1");
      }
    }
  }

  const bool needs_sim =
      mode == Mode::Simulate ||
      (mode == Mode::Sweep && j.contains("sweep") && j.at("sweep").is_object() &&
       j.at("sweep").value("mode", "solve") == std::string("simulate"));
  if (j.contains("sim") || needs_sim) {
    const json s = j.value("sim", json::object());
    const bool has_horizon = s.contains("horizon");
    const bool has_events = s.contains("events");
    if (needs_sim) {
      require(diags, has_horizon != has_events, "sim",
              "exactly one stopping rule (horizon or events) required");
    }
    if (has_horizon) {
      const auto h = num(s, "horizon");
      require(diags, h && *h > 0, "sim.horizon", "must be positive");
    }
    if (has_events) {
      const auto e = num(s, "events");
      require(diags, e && *e >= 1, "sim.events", "must be >= 1");
    }
    if (s.contains("warmup_fraction")) {
      const auto w = num(s, "warmup_fraction");
      require(diags, w && *w >= 0 && *w < 1, "sim.warmup_fraction",
              "must lie in [0, 1)");
    }
    if (s.contains("replications")) {
      const auto r = num(s, "replications");
      require(diags, r && *r >= 1, "sim.replications", "must be >= 1");
    }
  }

  if (mode == Mode::Sweep) {
    if (!j.contains("sweep") || !j.at("sweep").is_object()) {
      diags.push_back({"sweep", "sweep mode requires a sweep section"});
    } else {
      const json& s = j.at("sweep");
      if (!s.contains("path") || !s.at("path").is_string()) {
        diags.push_back({"sweep.path", "must name a scalar config field"});
      } else {
        json probe = j;
        const json* node = resolve_path(probe, s.at("path").get<std::string>(), false);
        require(diags, node != nullptr && node->is_number(), "sweep.path",
                "does not resolve to a scalar field");
      }
      if (!s.contains("values") || !s.at("values").is_array() || s.at("values").empty()) {
        diags.push_back({"sweep.values", "nonempty value grid required"});
      } else {
        bool numeric = true;
        std::vector<double> values;
        for (const json& value : s.at("values")) {
          if (!value.is_number()) {
            numeric = false;
            break;
          }
          values.push_back(value.get<double>());
        }
        if (!numeric) {
          diags.push_back({"sweep.values", "values must be numbers"});
        } else if (values.size() >= 2) {
          bool increasing = true, decreasing = true;
          for (std::size_t i = 1; i < values.size(); ++i) {
            increasing &= values[i] > values[i - 1];
            decreasing &= values[i] < values[i - 1];
          }
          require(diags, increasing || decreasing, "sweep.values",
                  "grid must be strictly monotone");
        }
      }
      if (s.contains("mode")) {
        const bool ok = s.at("mode").is_string() &&
                        mode_from_name(s.at("mode").get<std::string>()) &&
                        s.at("mode").get<std::string>() != "sweep";
        require(diags, ok, "sweep.mode", "must be one of aoi, simulate, solve");
      }
    }
  }
  return diags;
}

// ---------------------------------------------------------------------------
// loading (raw config or manifest), overrides
// ---------------------------------------------------------------------------

json parse_file(const std::string& path, std::vector<Diagnostic>& diags) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    diags.push_back({path, "cannot open config file"});
    return json();
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& err) {
    const auto [line, col] = line_col(text, err.byte > 0 ? err.byte - 1 : 0);
    diags.push_back({path + ":" + std::to_string(line) + ":" + std::to_string(col),
                     err.what()});
    return json();
  }
}

bool is_manifest(const json& j) {
  return j.is_object() && j.contains("tool") && j.value("tool", "") == "mecmfg" &&
         j.contains("config");
}

void apply_override(json& doc, const std::string& assignment,
                    std::vector<Diagnostic>& diags) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    diags.push_back({assignment, "override must look like path=value"});
    return;
  }
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  json* node = resolve_path(doc, path, true);
  if (node == nullptr) {
    diags.push_back({path, "override path does not resolve"});
    return;
  }
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // plain string
  }
  *node = parsed;
}

struct LoadedConfig {
  json doc;            // resolved config document (after overrides)
  ExperimentConfig config;
  std::vector<Diagnostic> diagnostics;
  Mode manifest_mode = Mode::Aoi;
  bool manifest_has_mode = false;
  std::optional<std::uint64_t> manifest_seed;
};

LoadedConfig load(const std::string& path, const std::vector<std::string>& overrides) {
  LoadedConfig loaded;
  json doc = parse_file(path, loaded.diagnostics);
  if (!loaded.diagnostics.empty()) return loaded;
  if (is_manifest(doc)) {
    if (doc.contains("mode") && doc.at("mode").is_string()) {
      const auto mode = mode_from_name(doc.at("mode").get<std::string>());
      if (mode) {
        loaded.manifest_mode = *mode;
        loaded.manifest_has_mode = true;
      }
    }
    if (doc.contains("seed") && doc.at("seed").is_number()) {
      loaded.manifest_seed = doc.at("seed").get<std::uint64_t>();
    }
    doc = doc.at("config");
  }
  for (const auto& assignment : overrides) {
    apply_override(doc, assignment, loaded.diagnostics);
  }
  if (!loaded.diagnostics.empty()) return loaded;
  loaded.diagnostics = validate_json(doc);
  if (!loaded.diagnostics.empty()) return loaded;
  loaded.doc = doc;
  try {
    loaded.config = config_from_json(doc);
  } catch (const std::exception& err) {
    loaded.diagnostics.push_back({path, err.what()});
  }
  return loaded;
}

// ---------------------------------------------------------------------------
// execution
// ---------------------------------------------------------------------------

struct PointResult {
  std::vector<ResultRow> rows;
  std::vector<Policy> policies;  // equilibrium (solve) or input policies
  MeanField rho;
  bool converged = true;
  std::vector<mfg::TracePoint> trace;
};

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

PointResult execute_aoi(const ExperimentConfig& cfg) {
  PointResult out;
  const double t0 = now_ms();
  const auto counts = apportion_ues(cfg.system.profiles, cfg.system.num_ues);
  std::vector<std::pair<Policy, UEProfile>> deployment;
  std::vector<int> representative(cfg.system.profiles.size(), -1);
  for (std::size_t t = 0; t < cfg.system.profiles.size(); ++t) {
    for (int k = 0; k < counts[t]; ++k) {
      if (representative[t] < 0) representative[t] = static_cast<int>(deployment.size());
      deployment.emplace_back(cfg.policies[t], cfg.system.profiles[t]);
    }
  }
  const MeanField rho =
      mfg::mf_from_policies(cfg.policies, cfg.system.profiles, cfg.system.es_rate);
  for (std::size_t t = 0; t < cfg.system.profiles.size(); ++t) {
    if (representative[t] < 0) continue;
    const auto rates = aoi::exogenous_rates_finite(deployment, representative[t]);
    const auto breakdown = aoi::weighted_aoi(rates, cfg.policies[t],
                                             cfg.system.profiles[t], cfg.system);
    ResultRow row;
    row.type_id = cfg.system.profiles[t].name;
    row.policy = cfg.policies[t];
    row.rho = rho;
    row.aoi = breakdown.per_class;
    row.power = aoi::local_power(cfg.policies[t], cfg.system.profiles[t]);
    row.cost = row.power + cfg.system.scalarization * breakdown.weighted;
    row.wall_ms = now_ms() - t0;
    out.rows.push_back(std::move(row));
  }
  out.policies = cfg.policies;
  out.rho = rho;
  return out;
}

PointResult execute_simulate(const ExperimentConfig& cfg, int jobs) {
  PointResult out;
  const double t0 = now_ms();
  des::SimConfig sim = des::make_symmetric_config(cfg.system, cfg.policies);
  sim.horizon = cfg.sim.horizon;
  sim.event_budget = cfg.sim.events;
  sim.warmup_fraction = cfg.sim.warmup_fraction;
  sim.rng_seed = cfg.sim.seed;
  const auto summary = des::replicate(sim, cfg.sim.replications, jobs);
  const MeanField rho =
      mfg::mf_from_policies(cfg.policies, cfg.system.profiles, cfg.system.es_rate);

  for (std::size_t t = 0; t < cfg.system.profiles.size(); ++t) {
    PerClass<double> aoi_mean{};
    double power_mean = 0.0;
    int members = 0;
    for (std::size_t u = 0; u < sim.ue_profile.size(); ++u) {
      if (sim.ue_profile[u] != static_cast<int>(t)) continue;
      ++members;
      for (TaskClass c : kTaskClasses) {
        aoi_mean[c] += summary.mean.ues[u].per_class[c].aoi;
      }
      power_mean += summary.mean.ues[u].power;
    }
    if (members == 0) continue;
    for (TaskClass c : kTaskClasses) aoi_mean[c] /= members;
    power_mean /= members;

    ResultRow row;
    row.type_id = cfg.system.profiles[t].name;
    row.policy = cfg.policies[t];
    row.rho = rho;
    row.aoi = aoi_mean;
    row.power = power_mean;
    double weighted = 0.0;
    for (TaskClass c : kTaskClasses) weighted += cfg.system.aoi_weights[c] * aoi_mean[c];
    row.cost = power_mean + cfg.system.scalarization * weighted;
    row.wall_ms = now_ms() - t0;
    out.rows.push_back(std::move(row));
  }
  out.policies = cfg.policies;
  out.rho = rho;
  return out;
}

PointResult execute_solve(const ExperimentConfig& cfg,
                          const std::optional<MeanField>& warm_rho,
                          const std::vector<Policy>* warm_policies) {
  PointResult out;
  const double t0 = now_ms();
  const std::vector<Policy>& start_policies =
      warm_policies != nullptr ? *warm_policies : cfg.policies;
  MeanField rho0;
  if (warm_rho) {
    rho0 = *warm_rho;
  } else if (cfg.initial_rho) {
    rho0 = *cfg.initial_rho;
  } else {
    rho0 = mfg::mf_from_policies(start_policies, cfg.system.profiles, cfg.system.es_rate);
  }
  const auto result = mfg::solve_mfe(cfg.system, cfg.solver, rho0, start_policies);
  const double elapsed = now_ms() - t0;
  for (std::size_t t = 0; t < cfg.system.profiles.size(); ++t) {
    ResultRow row;
    row.type_id = cfg.system.profiles[t].name;
    row.policy = result.policies[t];
    row.rho = result.mean_field;
    const auto rates = aoi::exogenous_rates_meanfield(
        result.mean_field, cfg.system.num_ues, cfg.system.es_rate, result.policies[t],
        cfg.system.profiles[t]);
    const auto breakdown = aoi::weighted_aoi(rates, result.policies[t],
                                             cfg.system.profiles[t], cfg.system);
    row.aoi = breakdown.per_class;
    row.power = aoi::local_power(result.policies[t], cfg.system.profiles[t]);
    row.cost = row.power + cfg.system.scalarization * breakdown.weighted;
    row.converged = result.converged;
    row.outer_iters = result.outer_iterations;
    row.wall_ms = elapsed;
    out.rows.push_back(std::move(row));
  }
  out.policies = result.policies;
  out.rho = result.mean_field;
  out.converged = result.converged;
  out.trace = result.trace;
  return out;
}

// ---------------------------------------------------------------------------
// output files
// ---------------------------------------------------------------------------

std::string csv_double(double v) { return format_double(v); }

}  // namespace

std::string results_csv_header() {
  return "sweep_param,sweep_value,type_id,p_r,p_y,p_g,mu0,rho_r,rho_y,rho_g,"
         "aoi_r,aoi_y,aoi_g,power,cost,converged,outer_iters,wall_ms";
}

std::string results_csv_line(const ResultRow& row) {
  std::ostringstream os;
  os << row.sweep_param << ',';
  if (row.sweep_value) os << csv_double(*row.sweep_value);
  os << ',' << row.type_id << ',' << csv_double(row.policy.p[TaskClass::Red]) << ','
     << csv_double(row.policy.p[TaskClass::Yellow]) << ','
     << csv_double(row.policy.p[TaskClass::Green]) << ',' << csv_double(row.policy.mu0)
     << ',' << csv_double(row.rho.rho[TaskClass::Red]) << ','
     << csv_double(row.rho.rho[TaskClass::Yellow]) << ','
     << csv_double(row.rho.rho[TaskClass::Green]) << ','
     << csv_double(row.aoi[TaskClass::Red]) << ',' << csv_double(row.aoi[TaskClass::Yellow])
     << ',' << csv_double(row.aoi[TaskClass::Green]) << ',' << csv_double(row.power) << ','
     << csv_double(row.cost) << ',' << (row.converged ? 1 : 0) << ',' << row.outer_iters
     << ',' << csv_double(row.wall_ms);
  return os.str();
}

std::vector<Diagnostic> validate_config_file(const std::string& config_path,
                                             const std::vector<std::string>& overrides) {
  return load(config_path, overrides).diagnostics;
}

RunOutcome run_experiment(const std::string& config_path, const RunOptions& options) {
  set_log_level_from_env();
  RunOutcome outcome;

  LoadedConfig loaded = load(config_path, options.overrides);
  if (!loaded.diagnostics.empty()) {
    outcome.exit_code = 2;
    outcome.diagnostics = loaded.diagnostics;
    for (const auto& diag : loaded.diagnostics) {
      log_message(LogLevel::Error, diag.path + ": " + diag.message);
    }
    return outcome;
  }

  ExperimentConfig cfg = loaded.config;
  Mode mode = cfg.mode;
  if (loaded.manifest_has_mode) mode = loaded.manifest_mode;
  if (options.mode) mode = *options.mode;
  std::uint64_t seed = cfg.sim.seed;
  if (loaded.manifest_seed) seed = *loaded.manifest_seed;
  if (options.seed) seed = *options.seed;
  cfg.sim.seed = seed;
  cfg.solver.rng_seed = seed;
  loaded.doc["sim"]["seed"] = seed;
  loaded.doc["solver"]["rng_seed"] = seed;
  loaded.doc["mode"] = mode_name(mode);
  cfg.mode = mode;

  if (mode == Mode::Sweep && !cfg.sweep) {
    outcome.exit_code = 2;
    outcome.diagnostics.push_back({"sweep", "sweep mode requires a sweep section"});
    log_message(LogLevel::Error, "sweep mode requires a sweep section");
    return outcome;
  }
  if ((mode == Mode::Simulate ||
       (mode == Mode::Sweep && cfg.sweep->inner == Mode::Simulate)) &&
      cfg.sim.horizon.has_value() == cfg.sim.events.has_value()) {
    outcome.exit_code = 2;
    outcome.diagnostics.push_back(
        {"sim", "exactly one stopping rule (horizon or events) required"});
    log_message(LogLevel::Error, "simulate mode needs exactly one stopping rule");
    return outcome;
  }

  const int jobs = options.jobs > 0
                       ? options.jobs
                       : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  std::vector<ResultRow> rows;
  std::vector<mfg::TracePoint> trace;
  bool all_converged = true;

  try {
    if (mode == Mode::Sweep) {
      const SweepSpec& sweep = *cfg.sweep;
      const bool sequential = sweep.inner == Mode::Solve && sweep.warm_start;
      std::vector<PointResult> points(sweep.values.size());

      auto run_point = [&](std::size_t i, const std::optional<MeanField>& warm_rho,
                           const std::vector<Policy>* warm_policies) {
        json doc = loaded.doc;
        json* node = resolve_path(doc, sweep.path, false);
        if (node == nullptr || !node->is_number()) {
          throw ConfigError("sweep path does not resolve to a scalar: " + sweep.path);
        }
        *node = sweep.values[i];
        ExperimentConfig point_cfg = config_from_json(doc);
        point_cfg.sim.seed = seed;
        point_cfg.solver.rng_seed = seed;
        switch (sweep.inner) {
          case Mode::Aoi: return execute_aoi(point_cfg);
          case Mode::Simulate: return execute_simulate(point_cfg, sequential ? jobs : 1);
          case Mode::Solve: return execute_solve(point_cfg, warm_rho, warm_policies);
          case Mode::Sweep: break;
        }
        throw ConfigError("nested sweeps are not supported");
      };

      if (sequential) {
        std::optional<MeanField> warm_rho;
        std::vector<Policy> warm_policies;
        for (std::size_t i = 0; i < sweep.values.size(); ++i) {
          points[i] = run_point(i, warm_rho, warm_rho ? &warm_policies : nullptr);
          warm_rho = points[i].rho;
          warm_policies = points[i].policies;
          log_message(LogLevel::Info,
                      "sweep point " + std::to_string(i + 1) + "/" +
                          std::to_string(sweep.values.size()) + " done");
        }
      } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int workers =
            std::max(1, std::min<int>(jobs, static_cast<int>(sweep.values.size())));
        std::mutex error_mutex;
        std::exception_ptr first_error;
        for (int w = 0; w < workers; ++w) {
          pool.emplace_back([&]() {
            while (true) {
              const std::size_t i = next.fetch_add(1);
              if (i >= sweep.values.size()) return;
              try {
                points[i] = run_point(i, std::nullopt, nullptr);
              } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
              }
            }
          });
        }
        for (auto& th : pool) th.join();
        if (first_error) std::rethrow_exception(first_error);
      }

      for (std::size_t i = 0; i < points.size(); ++i) {
        for (ResultRow row : points[i].rows) {
          row.sweep_param = sweep.path;
          row.sweep_value = sweep.values[i];
          rows.push_back(std::move(row));
        }
        all_converged = all_converged && points[i].converged;
      }
    } else {
      PointResult point;
      switch (mode) {
        case Mode::Aoi: point = execute_aoi(cfg); break;
        case Mode::Simulate: point = execute_simulate(cfg, jobs); break;
        case Mode::Solve: point = execute_solve(cfg, std::nullopt, nullptr); break;
        case Mode::Sweep: break;
      }
      rows = point.rows;
      trace = point.trace;
      all_converged = point.converged;
    }
  } catch (const std::exception& err) {
    outcome.exit_code = 2;
    outcome.diagnostics.push_back({"", err.what()});
    log_message(LogLevel::Error, err.what());
    return outcome;
  }

  // ----- write outputs -----
  namespace fs = std::filesystem;
  fs::create_directories(options.out_dir);
  outcome.results_path = (fs::path(options.out_dir) / "results.csv").string();
  {
    std::ofstream out(outcome.results_path, std::ios::binary);
    out << results_csv_header() << '\n';
    for (const auto& row : rows) out << results_csv_line(row) << '\n';
  }
  if (mode == Mode::Solve) {
    outcome.trace_path = (fs::path(options.out_dir) / "trace.csv").string();
    std::ofstream out(outcome.trace_path, std::ios::binary);
    out << "iteration,rho_r,rho_y,rho_g,type_id,p_r,p_y,p_g,mu0,cost\n";
    for (const auto& pt : trace) {
      for (std::size_t t = 0; t < pt.policies.size(); ++t) {
        out << pt.iteration << ',' << csv_double(pt.rho.rho[TaskClass::Red]) << ','
            << csv_double(pt.rho.rho[TaskClass::Yellow]) << ','
            << csv_double(pt.rho.rho[TaskClass::Green]) << ','
            << cfg.system.profiles[t].name << ','
            << csv_double(pt.policies[t].p[TaskClass::Red]) << ','
            << csv_double(pt.policies[t].p[TaskClass::Yellow]) << ','
            << csv_double(pt.policies[t].p[TaskClass::Green]) << ','
            << csv_double(pt.policies[t].mu0) << ',' << csv_double(pt.costs[t]) << '\n';
      }
    }
  }
  {
    json manifest;
    manifest["tool"] = "mecmfg";
    manifest["version"] = kVersion;
    manifest["mode"] = mode_name(mode);
    manifest["seed"] = seed;
    manifest["jobs"] = jobs;
    manifest["overrides"] = options.overrides;
    manifest["config"] = loaded.doc;
    json outputs = json::array();
    outputs.push_back("results.csv");
    if (mode == Mode::Solve) outputs.push_back("trace.csv");
    manifest["outputs"] = outputs;
    outcome.manifest_path = (fs::path(options.out_dir) / "manifest.json").string();
    std::ofstream out(outcome.manifest_path, std::ios::binary);
    out << manifest.dump(2) << '\n';
  }

  // human-readable summary
  for (const auto& row : rows) {
    std::ostringstream os;
    os << row.type_id << ": aoi_r=" << row.aoi[TaskClass::Red]
       << " aoi_y=" << row.aoi[TaskClass::Yellow]
       << " aoi_g=" << row.aoi[TaskClass::Green] << " power=" << row.power
       << " cost=" << row.cost;
    if (row.sweep_value) {
      os << " [" << row.sweep_param << "=" << *row.sweep_value << "]";
    }
    std::cout << os.str() << "\n";
  }

  outcome.rows = std::move(rows);
  outcome.exit_code = all_converged ? 0 : 3;
  if (!all_converged) {
    log_message(LogLevel::Warn, "solver did not converge; results flagged");
  }
  return outcome;
}

}  // namespace mecmfg::cli
