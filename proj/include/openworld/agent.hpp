#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "openworld/consistency.hpp"
#include "openworld/domain_model.hpp"
#include "openworld/environment.hpp"
#include "openworld/planner.hpp"
#include "openworld/repair.hpp"

namespace openworld {

enum class AgentKind { planning_static, planning_repairing };

inline std::string_view agent_kind_name(AgentKind k) {
  return k == AgentKind::planning_static ? "planning_static" : "planning_repairing";
}

inline std::optional<AgentKind> parse_agent_kind(std::string_view s) {
  if (s == "planning_static") return AgentKind::planning_static;
  if (s == "planning_repairing") return AgentKind::planning_repairing;
  return std::nullopt;
}

struct ExperimentConfig {
  EnvConfig env;
  PlannerConfig planner;
  ConsistencyConfig consistency;
  RepairConfig repair;  // repair.consistency is overwritten by `consistency`
  MMOSet mmos = MMOSet::defaults();
  DomainModel initial_model = DomainModel::nominal();
  AgentKind agent = AgentKind::planning_repairing;
  int episodes = 50;
  int trials = 5;
  std::uint64_t base_seed = 0;
  std::string output_path;
  bool record_timing = false;  // wall_time_ms is written as 0 unless set

  RepairConfig effective_repair() const {
    RepairConfig r = repair;
    r.consistency = consistency;
    return r;
  }

  void validate() const {
    env.validate();
    planner.validate();
    consistency.validate();
    effective_repair().validate();
    if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  }
};

struct EpisodeRecord {
  int trial = 0;
  int episode = 0;
  int reward = 0;
  double inconsistency = 0.0;
  bool novelty_detected = false;
  std::optional<DomainRepair> repair;  // repair applied after this episode
  bool repair_exhausted = false;
  DomainModel repaired_model = DomainModel::nominal();  // model used from the next episode on
  double wall_time_ms = 0.0;
};

struct EpisodeOutcome {
  EpisodeRecord record;
  DomainModel updated_model;
  Trajectory trajectory;
  Plan executed_plan;
};

// One pass of plan -> execute -> consistency check -> (maybe) repair.
inline EpisodeOutcome run_episode(const DomainModel& internal_model, Environment& env, int episode_idx,
                                  const ExperimentConfig& cfg, int trial = 0) {
  const auto t0 = std::chrono::steady_clock::now();
  const State s0 = env.reset(episode_idx);
  ExecutionResult exec = run_plan_execute(internal_model, env, s0, cfg.planner);

  EpisodeRecord rec;
  rec.trial = trial;
  rec.episode = episode_idx;
  rec.reward = episode_reward(exec.trajectory, env.config().max_steps);

  const std::vector<State> observed = exec.trajectory.states();
  const auto expected = expected_trajectory(internal_model, exec.trajectory.initial_state, exec.executed_plan);
  rec.inconsistency = inconsistency_score(expected, observed, cfg.consistency);
  rec.novelty_detected = detect_novelty(rec.inconsistency, cfg.consistency);

  DomainModel updated = internal_model;
  if (cfg.agent == AgentKind::planning_repairing && rec.novelty_detected && !exec.trajectory.transitions.empty()) {
    RepairResult rr =
        repair_search(cfg.mmos, internal_model, exec.executed_plan, exec.trajectory, cfg.effective_repair());
    rec.repair_exhausted = rr.exhausted;
    // An exhausted search still hands back its best repair.
    updated = apply_repair(internal_model, rr.repair);
    rec.repair = std::move(rr.repair);
  }
  rec.repaired_model = updated;
  if (cfg.record_timing) {
    rec.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  return {std::move(rec), updated, std::move(exec.trajectory), std::move(exec.executed_plan)};
}

// All episodes of one trial with the model carried forward between episodes.
inline std::vector<EpisodeRecord> run_trial(const ExperimentConfig& cfg, int trial) {
  EnvConfig env_cfg = cfg.env;
  env_cfg.seed = cfg.base_seed + static_cast<std::uint64_t>(trial);
  Environment env(env_cfg);
  DomainModel model = cfg.initial_model;
  std::vector<EpisodeRecord> out;
  out.reserve(static_cast<std::size_t>(cfg.episodes));
  for (int e = 0; e < cfg.episodes; ++e) {
    EpisodeOutcome o = run_episode(model, env, e, cfg, trial);
    model = o.updated_model;
    out.push_back(std::move(o.record));
  }
  return out;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string csv_quote(std::string_view field) {
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline constexpr std::string_view kCsvHeader =
    "trial,episode,reward,inconsistency,novelty_detected,repair_json,wall_time_ms";

inline void write_csv(std::ostream& os, const std::vector<EpisodeRecord>& records) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.trial << ',' << r.episode << ',' << r.reward << ',' << format_double(r.inconsistency) << ','
       << (r.novelty_detected ? "true" : "false") << ',';
    if (r.repair) os << csv_quote(to_json(*r.repair).dump());
    os << ',' << format_double(r.wall_time_ms) << '\n';
  }
}

inline void write_csv(const std::string& path, const std::vector<EpisodeRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  write_csv(out, records);
  out.flush();
  if (!out) throw std::runtime_error("failed writing output file '" + path + "'");
}

// Runs every trial in (trial, episode) order and writes the CSV when an
// output path is configured.
inline std::vector<EpisodeRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<EpisodeRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.trials) * static_cast<std::size_t>(cfg.episodes));
  for (int t = 0; t < cfg.trials; ++t) {
    auto trial = run_trial(cfg, t);
    records.insert(records.end(), std::make_move_iterator(trial.begin()), std::make_move_iterator(trial.end()));
  }
  if (!cfg.output_path.empty()) write_csv(cfg.output_path, records);
  return records;
}

}  // namespace openworld
