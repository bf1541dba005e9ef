#pragma once

#include <algorithm>
#include <exception>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "openworld/agent.hpp"
#include "openworld/config.hpp"

namespace openworld {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

namespace detail {

// First episode at which the schedule changes the environment, or 0.
inline int first_novelty_episode(const EnvConfig& env) {
  int first = -1;
  for (const auto& ev : env.novelty_schedule) {
    if (first < 0 || ev.episode < first) first = ev.episode;
  }
  return std::max(first, 0);
}

inline nlohmann::ordered_json repair_demo(const ExperimentConfig& cfg) {
  EnvConfig env_cfg = cfg.env;
  env_cfg.seed = cfg.base_seed;
  Environment env(env_cfg);
  const int episode = first_novelty_episode(cfg.env);

  ExperimentConfig detect_only = cfg;
  detect_only.agent = AgentKind::planning_static;
  EpisodeOutcome o = run_episode(cfg.initial_model, env, episode, detect_only);

  nlohmann::ordered_json out;
  out["episode"] = episode;
  out["reward"] = o.record.reward;
  out["inconsistency"] = o.record.inconsistency;
  out["novelty_detected"] = o.record.novelty_detected;
  if (o.record.novelty_detected && !o.trajectory.transitions.empty()) {
    const RepairResult rr =
        repair_search(cfg.mmos, cfg.initial_model, o.executed_plan, o.trajectory, cfg.effective_repair());
    out["repair"] = to_json(rr.repair);
    out["repaired_inconsistency"] = rr.score;
    out["expansions"] = rr.expansions;
    out["exhausted"] = rr.exhausted;
  } else {
    out["repair"] = to_json(DomainRepair{});
    out["repaired_inconsistency"] = o.record.inconsistency;
    out["expansions"] = 0;
    out["exhausted"] = false;
  }
  return out;
}

// Largest inconsistency over novelty-free episodes with the initial model.
inline nlohmann::ordered_json calibrate(const ExperimentConfig& cfg, int episodes) {
  ExperimentConfig clean = cfg;
  clean.env.novelty_schedule.clear();
  clean.agent = AgentKind::planning_static;
  clean.episodes = episodes;
  clean.output_path.clear();
  const auto records = run_experiment(clean);
  double max_score = 0.0;
  for (const auto& r : records) max_score = std::max(max_score, r.inconsistency);
  nlohmann::ordered_json out;
  out["episodes"] = episodes;
  out["trials"] = clean.trials;
  out["max_inconsistency"] = max_score;
  // A clean noise-free run scores exactly 0; keep the configured threshold then.
  out["suggested_threshold"] = max_score > 0.0 ? 2.0 * max_score : cfg.consistency.threshold;
  return out;
}

}  // namespace detail

// Entry point for the `openworld` tool; returns the process exit code.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Open-world CartPole planning agent with model repair"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> agent_name;
  std::optional<int> episodes;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  int calib_episodes = 20;

  auto* run = app.add_subcommand("run", "Run an experiment and write per-episode records as CSV");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--agent", agent_name, "planning_static | planning_repairing");
  run->add_option("--episodes", episodes, "Episodes per trial");
  run->add_option("--trials", trials, "Number of trials");
  run->add_option("--seed", seed, "Base seed; trial t uses seed + t");
  run->add_option("--out", out_path, "Output CSV path (overrides output_path in the config)");

  auto* demo = app.add_subcommand("repair-demo", "Run one detection + repair cycle and print the repair");
  demo->add_option("--config", config_path, "Experiment config (JSON)")->required();

  auto* calib = app.add_subcommand("calibrate", "Report the largest clean-episode inconsistency");
  calib->add_option("--config", config_path, "Experiment config (JSON)")->required();
  calib->add_option("--episodes", calib_episodes, "Clean episodes per trial")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    if (agent_name) {
      const auto k = parse_agent_kind(*agent_name);
      if (!k) throw ConfigError("--agent: unknown agent kind '" + *agent_name + "'");
      cfg.agent = *k;
    }
    if (episodes) cfg.episodes = *episodes;
    if (trials) cfg.trials = *trials;
    if (seed) cfg.base_seed = *seed;
    if (!out_path.empty()) cfg.output_path = out_path;
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (*run && cfg.output_path.empty()) throw ConfigError("--out: no output path given");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*run) {
      const auto records = run_experiment(cfg);
      err << "wrote " << records.size() << " records to " << cfg.output_path << '\n';
    } else if (*demo) {
      out << detail::repair_demo(cfg).dump(2) << '\n';
    } else if (*calib) {
      out << detail::calibrate(cfg, calib_episodes).dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace openworld
