#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "openworld/domain_model.hpp"

namespace openworld {

// A change to the true fluents, effective from `episode` (0-based) onward.
struct NoveltyEvent {
  int episode = 0;
  std::map<Fluent, double> overrides;
};

struct EnvConfig {
  DomainModel true_fluents = DomainModel::nominal();
  std::vector<NoveltyEvent> novelty_schedule;
  int max_steps = 200;
  double init_range = 0.05;
  double sensor_noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (max_steps < 1) throw std::invalid_argument("env.max_steps must be >= 1");
    if (!(init_range >= 0.0)) throw std::invalid_argument("env.init_range must be >= 0");
    if (!(sensor_noise_sigma >= 0.0)) {
      throw std::invalid_argument("env.sensor_noise_sigma must be >= 0");
    }
    std::set<int> seen;
    for (const auto& ev : novelty_schedule) {
      if (ev.episode < 0) throw std::invalid_argument("env.novelty_schedule: episode must be >= 0");
      if (!seen.insert(ev.episode).second) {
        throw std::invalid_argument("env.novelty_schedule: duplicate event for episode " +
                                    std::to_string(ev.episode));
      }
      for (const auto& [f, v] : ev.overrides) {
        if (!std::isfinite(v) || v <= 0.0) {
          throw std::invalid_argument("env.novelty_schedule: override for '" +
                                      std::string(fluent_name(f)) + "' must be finite and > 0");
        }
      }
    }
  }
};

struct StepResult {
  State observation;
  bool terminated = false;
  bool truncated = false;
};

// Ground-truth CartPole. The agent only sees observations; the current
// fluents are hidden and change only at reset() according to the schedule.
class Environment {
 public:
  explicit Environment(EnvConfig config)
      : config_(std::move(config)), current_(config_.true_fluents), rng_(config_.seed) {
    config_.validate();
  }

  State reset(int episode_idx) {
    if (episode_idx < 0) throw std::invalid_argument("episode index must be >= 0");
    DomainModel::Values v = config_.true_fluents.values();
    // Apply in episode order so later events win on shared fluents.
    std::vector<const NoveltyEvent*> due;
    for (const auto& ev : config_.novelty_schedule) {
      if (ev.episode <= episode_idx) due.push_back(&ev);
    }
    std::sort(due.begin(), due.end(),
              [](const NoveltyEvent* a, const NoveltyEvent* b) { return a->episode < b->episode; });
    for (const auto* ev : due) {
      for (const auto& [f, value] : ev->overrides) v[index_of(f)] = value;
    }
    current_ = DomainModel(v);
    step_count_ = 0;
    finished_ = false;

    std::uniform_real_distribution<double> init(-config_.init_range, config_.init_range);
    if (config_.init_range == 0.0) {
      state_ = State{};
    } else {
      state_.x = init(rng_);
      state_.x_dot = init(rng_);
      state_.theta = init(rng_);
      state_.theta_dot = init(rng_);
    }
    if (is_terminal(current_, state_)) finished_ = true;
    return observe();
  }

  StepResult step(Action a) {
    if (finished_) throw std::logic_error("Environment::step called on a finished episode");
    state_ = step_model(current_, state_, a, kDefaultDt);
    ++step_count_;
    StepResult r;
    r.observation = observe();
    r.terminated = is_terminal(current_, state_);
    r.truncated = !r.terminated && step_count_ >= config_.max_steps;
    finished_ = r.terminated || r.truncated;
    return r;
  }

  bool finished() const { return finished_; }
  int step_count() const { return step_count_; }
  const EnvConfig& config() const { return config_; }

  // Hidden from the agent; exposed for tests and diagnostics.
  const DomainModel& current_fluents() const { return current_; }
  const State& true_state() const { return state_; }

 private:
  State observe() {
    if (config_.sensor_noise_sigma == 0.0) return state_;
    std::normal_distribution<double> noise(0.0, config_.sensor_noise_sigma);
    State o = state_;
    o.x += noise(rng_);
    o.x_dot += noise(rng_);
    o.theta += noise(rng_);
    o.theta_dot += noise(rng_);
    return o;
  }

  EnvConfig config_;
  DomainModel current_;
  State state_{};
  int step_count_ = 0;
  bool finished_ = true;
  std::mt19937_64 rng_;
};

// Reward is the number of steps survived, capped at the horizon.
inline int episode_reward(std::span<const Transition> transitions, int max_steps) {
  return static_cast<int>(std::min<std::size_t>(transitions.size(), static_cast<std::size_t>(max_steps)));
}

inline int episode_reward(const Trajectory& tau, int max_steps) {
  return episode_reward(std::span<const Transition>(tau.transitions), max_steps);
}

}  // namespace openworld
