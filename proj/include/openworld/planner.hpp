#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "openworld/domain_model.hpp"
#include "openworld/environment.hpp"

namespace openworld {

struct CostWeights {
  double theta = 1.0;
  double theta_dot = 0.25;
  double x = 0.1;
  double x_dot = 0.05;
};

struct PlannerConfig {
  int lookahead_depth = 30;
  int beam_width = 100;
  int replan_interval = 1;
  CostWeights cost_weights;
  double terminal_penalty = 1e6;

  static constexpr int kMaxDepth = 63;

  void validate() const {
    if (lookahead_depth < 1 || lookahead_depth > kMaxDepth) {
      throw std::invalid_argument("planner.lookahead_depth must be in [1, 63]");
    }
    if (beam_width < 1) throw std::invalid_argument("planner.beam_width must be >= 1");
    if (replan_interval < 1 || replan_interval > lookahead_depth) {
      throw std::invalid_argument("planner.replan_interval must be in [1, lookahead_depth]");
    }
    const auto& w = cost_weights;
    if (!(w.theta >= 0 && w.theta_dot >= 0 && w.x >= 0 && w.x_dot >= 0)) {
      throw std::invalid_argument("planner.cost_weights must all be >= 0");
    }
    if (!(terminal_penalty >= 0)) throw std::invalid_argument("planner.terminal_penalty must be >= 0");
  }
};

// Every depth-1 expansion leaves the model's limits.
class AllBranchesTerminal : public std::runtime_error {
 public:
  AllBranchesTerminal() : std::runtime_error("all depth-1 expansions are terminal under the model") {}
};

inline double state_cost(const DomainModel& model, const State& s, const PlannerConfig& cfg) {
  const auto& w = cfg.cost_weights;
  double c = w.theta * s.theta * s.theta + w.theta_dot * s.theta_dot * s.theta_dot +
             w.x * s.x * s.x + w.x_dot * s.x_dot * s.x_dot;
  if (is_terminal(model, s)) c += cfg.terminal_penalty;
  return c;
}

// Action sequences up to 63 long packed into an integer, first action in the
// most significant used bit. For equal lengths, integer order is
// lexicographic order with Left < Right.
struct PackedSequence {
  std::uint64_t bits = 0;
  int length = 0;

  PackedSequence then(Action a) const {
    return {(bits << 1) | static_cast<std::uint64_t>(a), length + 1};
  }
  Action at(int i) const {
    return static_cast<Action>((bits >> (length - 1 - i)) & 1u);
  }
  std::vector<Action> unpack() const {
    std::vector<Action> out(static_cast<std::size_t>(length));
    for (int i = 0; i < length; ++i) out[static_cast<std::size_t>(i)] = at(i);
    return out;
  }
};

struct BeamResult {
  std::vector<Action> actions;  // full lookahead_depth sequence
  double cost = 0.0;            // accumulated state_cost along it
};

// Beam search over fixed-length action sequences scored by accumulated
// state_cost of the model rollout. Deterministic: ties go to the
// lexicographically smaller sequence (Left first).
inline BeamResult beam_search(const DomainModel& model, const State& start, const PlannerConfig& cfg) {
  cfg.validate();
  struct Node {
    State state;
    double cost;
    PackedSequence seq;
  };
  const auto better = [](const Node& a, const Node& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.seq.bits < b.seq.bits;
  };

  std::vector<Node> beam{{start, 0.0, {}}};
  std::vector<Node> children;
  const auto width = static_cast<std::size_t>(cfg.beam_width);

  for (int depth = 0; depth < cfg.lookahead_depth; ++depth) {
    children.clear();
    children.reserve(beam.size() * 2);
    for (const Node& n : beam) {
      for (Action a : kAllActions) {
        const State next = step_model(model, n.state, a, kDefaultDt);
        children.push_back({next, n.cost + state_cost(model, next, cfg), n.seq.then(a)});
      }
    }
    if (depth == 0 && std::all_of(children.begin(), children.end(), [&](const Node& c) {
          return is_terminal(model, c.state);
        })) {
      throw AllBranchesTerminal();
    }
    if (children.size() > width) {
      std::nth_element(children.begin(), children.begin() + static_cast<std::ptrdiff_t>(width),
                       children.end(), better);
      children.resize(width);
    }
    std::swap(beam, children);
  }
  const Node& best = *std::min_element(beam.begin(), beam.end(), better);
  return {best.seq.unpack(), best.cost};
}

// First replan_interval actions of the best lookahead sequence.
inline Plan plan_next(const DomainModel& model, const State& s, const PlannerConfig& cfg) {
  BeamResult r = beam_search(model, s, cfg);
  r.actions.resize(static_cast<std::size_t>(cfg.replan_interval));
  return Plan{std::move(r.actions), kDefaultDt};
}

struct ExecutionResult {
  Trajectory trajectory;
  Plan executed_plan;
  bool terminated = false;
  bool truncated = false;
  bool planner_gave_up = false;  // AllBranchesTerminal ended the episode
};

// Receding-horizon loop on an environment that has just been reset and whose
// first observation is `initial_observation`.
inline ExecutionResult run_plan_execute(const DomainModel& model, Environment& env,
                                        const State& initial_observation, const PlannerConfig& cfg) {
  ExecutionResult out;
  out.trajectory.initial_state = initial_observation;
  State current = initial_observation;
  if (env.finished()) {
    out.terminated = true;
    return out;
  }
  while (!env.finished()) {
    Plan chunk;
    try {
      chunk = plan_next(model, current, cfg);
    } catch (const AllBranchesTerminal&) {
      out.planner_gave_up = true;
      break;
    }
    for (Action a : chunk.actions) {
      const StepResult r = env.step(a);
      out.trajectory.transitions.push_back({current, a, r.observation});
      out.executed_plan.actions.push_back(a);
      current = r.observation;
      out.terminated = r.terminated;
      out.truncated = r.truncated;
      if (env.finished()) break;
    }
  }
  return out;
}

}  // namespace openworld
