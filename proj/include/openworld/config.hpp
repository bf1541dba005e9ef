#pragma once

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "openworld/agent.hpp"

namespace openworld {

// Raised for unreadable or invalid experiment configs. The message names the
// offending file or field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, std::string_view where, std::initializer_list<std::string_view> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto k : known) ok = ok || it.key() == k;
    if (!ok) {
      throw ConfigError(std::string(where.empty() ? "" : std::string(where) + ".") + it.key() +
                        ": unknown field");
    }
  }
}

inline const json& object_at(const json& parent, const char* key, std::string_view where) {
  const json& j = parent.at(key);
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  return j;
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  const std::string field = where.empty() ? std::string(key) : where + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(field + ": expected a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError(field + ": expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
        throw ConfigError(field + ": expected a non-negative integer");
      }
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ConfigError(field + ": expected a number");
  } else {
    if (!v.is_string()) throw ConfigError(field + ": expected a string");
  }
  out = v.get<T>();
}

inline DomainModel read_model(const json& j, const DomainModel& base, const std::string& where) {
  try {
    return model_from_json(j, base, where);
  } catch (const InvalidModel& e) {
    throw ConfigError(e.what());
  }
}

inline EnvConfig read_env(const json& j) {
  EnvConfig env;
  if (!j.is_object()) throw ConfigError("env: expected an object");
  reject_unknown(j, "env", {"true_fluents", "novelty_schedule", "max_steps", "init_range", "sensor_noise_sigma", "seed"});
  if (j.contains("true_fluents")) env.true_fluents = read_model(j["true_fluents"], env.true_fluents, "env.true_fluents");
  read(j, "max_steps", env.max_steps, "env");
  read(j, "init_range", env.init_range, "env");
  read(j, "sensor_noise_sigma", env.sensor_noise_sigma, "env");
  read(j, "seed", env.seed, "env");
  if (j.contains("novelty_schedule")) {
    const json& sched = j["novelty_schedule"];
    if (!sched.is_array()) throw ConfigError("env.novelty_schedule: expected an array");
    for (std::size_t i = 0; i < sched.size(); ++i) {
      const std::string where = "env.novelty_schedule[" + std::to_string(i) + "]";
      const json& ev = sched[i];
      if (!ev.is_object()) throw ConfigError(where + ": expected an object");
      reject_unknown(ev, where, {"episode", "overrides"});
      if (!ev.contains("episode")) throw ConfigError(where + ".episode: missing");
      NoveltyEvent event;
      read(ev, "episode", event.episode, where);
      if (ev.contains("overrides")) {
        const json& ov = ev["overrides"];
        if (!ov.is_object()) throw ConfigError(where + ".overrides: expected an object");
        for (auto it = ov.begin(); it != ov.end(); ++it) {
          const auto f = parse_fluent(it.key());
          if (!f) throw ConfigError(where + ".overrides." + it.key() + ": unknown fluent");
          if (!it.value().is_number()) throw ConfigError(where + ".overrides." + it.key() + ": expected a number");
          event.overrides[*f] = it.value().get<double>();
        }
      }
      env.novelty_schedule.push_back(std::move(event));
    }
  }
  return env;
}

inline PlannerConfig read_planner(const json& j) {
  PlannerConfig p;
  if (!j.is_object()) throw ConfigError("planner: expected an object");
  reject_unknown(j, "planner", {"lookahead_depth", "beam_width", "replan_interval", "cost_weights", "terminal_penalty"});
  read(j, "lookahead_depth", p.lookahead_depth, "planner");
  read(j, "beam_width", p.beam_width, "planner");
  read(j, "replan_interval", p.replan_interval, "planner");
  read(j, "terminal_penalty", p.terminal_penalty, "planner");
  if (j.contains("cost_weights")) {
    const json& w = object_at(j, "cost_weights", "planner.cost_weights");
    reject_unknown(w, "planner.cost_weights", {"theta", "theta_dot", "x", "x_dot"});
    read(w, "theta", p.cost_weights.theta, "planner.cost_weights");
    read(w, "theta_dot", p.cost_weights.theta_dot, "planner.cost_weights");
    read(w, "x", p.cost_weights.x, "planner.cost_weights");
    read(w, "x_dot", p.cost_weights.x_dot, "planner.cost_weights");
  }
  return p;
}

inline ConsistencyConfig read_consistency(const json& j) {
  ConsistencyConfig c;
  if (!j.is_object()) throw ConfigError("consistency: expected an object");
  reject_unknown(j, "consistency", {"gamma", "threshold", "dimension_weights"});
  read(j, "gamma", c.gamma, "consistency");
  read(j, "threshold", c.threshold, "consistency");
  if (j.contains("dimension_weights")) {
    const json& w = j["dimension_weights"];
    if (!w.is_array() || w.size() != 4) {
      throw ConfigError("consistency.dimension_weights: expected an array of 4 numbers");
    }
    for (std::size_t i = 0; i < 4; ++i) {
      if (!w[i].is_number()) throw ConfigError("consistency.dimension_weights: expected an array of 4 numbers");
      c.dimension_weights[i] = w[i].get<double>();
    }
  }
  return c;
}

inline void read_repair(const json& j, ExperimentConfig& cfg) {
  if (!j.is_object()) throw ConfigError("repair: expected an object");
  reject_unknown(j, "repair", {"length_penalty", "max_expansions", "step_sizes"});
  read(j, "length_penalty", cfg.repair.length_penalty, "repair");
  read(j, "max_expansions", cfg.repair.max_expansions, "repair");
  if (j.contains("step_sizes")) {
    const json& s = object_at(j, "step_sizes", "repair.step_sizes");
    DeltaVector steps;
    steps.fill(MMOSet::kDefaultStep);
    for (auto it = s.begin(); it != s.end(); ++it) {
      const auto f = parse_fluent(it.key());
      if (!f) throw ConfigError("repair.step_sizes." + it.key() + ": unknown fluent");
      if (!it.value().is_number() || !(it.value().get<double>() > 0.0)) {
        throw ConfigError("repair.step_sizes." + it.key() + ": expected a positive number");
      }
      steps[index_of(*f)] = it.value().get<double>();
    }
    cfg.mmos = MMOSet::symmetric(steps);
  }
}

}  // namespace detail

// Builds an ExperimentConfig from a JSON document. Missing fields take their
// defaults; unknown fields and invalid values raise ConfigError naming the
// field.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown(j, "", {"env", "planner", "consistency", "repair", "initial_model", "agent", "episodes", "trials",
                         "base_seed", "output_path", "record_timing"});
  ExperimentConfig cfg;
  if (j.contains("env")) cfg.env = read_env(j["env"]);
  if (j.contains("planner")) cfg.planner = read_planner(j["planner"]);
  if (j.contains("consistency")) cfg.consistency = read_consistency(j["consistency"]);
  if (j.contains("repair")) read_repair(j["repair"], cfg);
  if (j.contains("initial_model")) cfg.initial_model = read_model(j["initial_model"], cfg.initial_model, "initial_model");
  if (j.contains("agent")) {
    std::string kind;
    read(j, "agent", kind, "");
    const auto k = parse_agent_kind(kind);
    if (!k) throw ConfigError("agent: unknown agent kind '" + kind + "'");
    cfg.agent = *k;
  }
  read(j, "episodes", cfg.episodes, "");
  read(j, "trials", cfg.trials, "");
  read(j, "base_seed", cfg.base_seed, "");
  read(j, "output_path", cfg.output_path, "");
  read(j, "record_timing", cfg.record_timing, "");
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

}  // namespace openworld
