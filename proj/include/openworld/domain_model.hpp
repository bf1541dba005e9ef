#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace openworld {

// The seven numeric fluents of the CartPole domain. Order is fixed and is the
// serialization order everywhere (JSON objects, repair listings, CSV).
enum class Fluent : std::size_t {
  mass_cart = 0,
  mass_pole,
  length_pole,  // half-pole length, benchmark convention
  force_mag,
  gravity,
  angle_limit,
  x_limit,
};

inline constexpr std::size_t kNumFluents = 7;

inline constexpr std::array<Fluent, kNumFluents> kAllFluents = {
    Fluent::mass_cart, Fluent::mass_pole,   Fluent::length_pole, Fluent::force_mag,
    Fluent::gravity,   Fluent::angle_limit, Fluent::x_limit,
};

inline constexpr std::array<std::string_view, kNumFluents> kFluentNames = {
    "mass_cart", "mass_pole", "length_pole", "force_mag", "gravity", "angle_limit", "x_limit",
};

constexpr std::size_t index_of(Fluent f) { return static_cast<std::size_t>(f); }

constexpr std::string_view fluent_name(Fluent f) { return kFluentNames[index_of(f)]; }

inline std::optional<Fluent> parse_fluent(std::string_view name) {
  for (std::size_t i = 0; i < kNumFluents; ++i) {
    if (kFluentNames[i] == name) return kAllFluents[i];
  }
  return std::nullopt;
}

class InvalidModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Agent beliefs about the CartPole dynamics. Always holds all seven fluents,
// each finite and strictly positive; construction enforces this.
class DomainModel {
 public:
  using Values = std::array<double, kNumFluents>;

  // Standard benchmark parameters.
  static DomainModel nominal() {
    return DomainModel(Values{1.0, 0.1, 0.5, 10.0, 9.8, 0.2095, 2.4});
  }

  explicit DomainModel(const Values& values) : values_(values) {
    for (Fluent f : kAllFluents) {
      const double v = values_[index_of(f)];
      if (!std::isfinite(v) || v <= 0.0) {
        throw InvalidModel("fluent '" + std::string(fluent_name(f)) +
                           "' must be finite and > 0, got " + std::to_string(v));
      }
    }
  }

  double operator[](Fluent f) const { return values_[index_of(f)]; }
  const Values& values() const { return values_; }

  // Returns a copy with one fluent replaced.
  DomainModel with(Fluent f, double value) const {
    Values v = values_;
    v[index_of(f)] = value;
    return DomainModel(v);
  }

  double mass_cart() const { return (*this)[Fluent::mass_cart]; }
  double mass_pole() const { return (*this)[Fluent::mass_pole]; }
  double length_pole() const { return (*this)[Fluent::length_pole]; }
  double force_mag() const { return (*this)[Fluent::force_mag]; }
  double gravity() const { return (*this)[Fluent::gravity]; }
  double angle_limit() const { return (*this)[Fluent::angle_limit]; }
  double x_limit() const { return (*this)[Fluent::x_limit]; }

  friend bool operator==(const DomainModel&, const DomainModel&) = default;

 private:
  Values values_;
};

struct State {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;

  std::array<double, 4> as_array() const { return {x, x_dot, theta, theta_dot}; }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(x_dot) && std::isfinite(theta) &&
           std::isfinite(theta_dot);
  }
  State mirrored() const { return {-x, -x_dot, -theta, -theta_dot}; }

  friend bool operator==(const State&, const State&) = default;
};

enum class Action : unsigned char { Left = 0, Right = 1 };

inline constexpr std::array<Action, 2> kAllActions = {Action::Left, Action::Right};

inline double applied_force(const DomainModel& model, Action a) {
  return a == Action::Right ? model.force_mag() : -model.force_mag();
}

inline constexpr double kDefaultDt = 0.02;

struct Plan {
  std::vector<Action> actions;
  double dt = kDefaultDt;

  std::size_t size() const { return actions.size(); }
  bool empty() const { return actions.empty(); }
};

struct PlanningProblem {
  State initial_state;
  int horizon = 200;
};

struct Transition {
  State from;
  Action action;
  State to;
};

// Observed execution trace of one episode.
struct Trajectory {
  State initial_state;
  std::vector<Transition> transitions;

  // S(tau): the initial state followed by every successor state.
  std::vector<State> states() const {
    std::vector<State> out;
    out.reserve(transitions.size() + 1);
    out.push_back(initial_state);
    for (const auto& t : transitions) out.push_back(t.to);
    return out;
  }

  // Every transition starts where the previous one ended.
  bool is_chained() const {
    if (transitions.empty()) return true;
    if (!(transitions.front().from == initial_state)) return false;
    for (std::size_t i = 1; i < transitions.size(); ++i) {
      if (!(transitions[i - 1].to == transitions[i].from)) return false;
    }
    return true;
  }
};

struct Accelerations {
  double x_acc;
  double theta_acc;
};

// Classic cart-pole equations of motion (frictionless, point-mass pole).
inline Accelerations dynamics_derivatives(const DomainModel& model, const State& s, double force) {
  const double total_mass = model.mass_cart() + model.mass_pole();
  const double pole_ml = model.mass_pole() * model.length_pole();
  const double cos_t = std::cos(s.theta);
  const double sin_t = std::sin(s.theta);
  const double temp = (force + pole_ml * s.theta_dot * s.theta_dot * sin_t) / total_mass;
  const double theta_acc =
      (model.gravity() * sin_t - cos_t * temp) /
      (model.length_pole() * (4.0 / 3.0 - model.mass_pole() * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_ml * theta_acc * cos_t / total_mass;
  return {x_acc, theta_acc};
}

// One explicit Euler step; positions advance with the pre-update velocities.
inline State step_model(const DomainModel& model, const State& s, Action a, double dt = kDefaultDt) {
  const auto acc = dynamics_derivatives(model, s, applied_force(model, a));
  return {
      s.x + dt * s.x_dot,
      s.x_dot + dt * acc.x_acc,
      s.theta + dt * s.theta_dot,
      s.theta_dot + dt * acc.theta_acc,
  };
}

// Strict exceedance: states exactly on a limit are still alive.
inline bool is_terminal(const DomainModel& model, const State& s) {
  return std::abs(s.theta) > model.angle_limit() || std::abs(s.x) > model.x_limit();
}

// S(pi, D): model rollout of a plan, stopping at the first terminal state
// (which is included as the last element).
inline std::vector<State> simulate_plan(const DomainModel& model, const State& s0, const Plan& plan) {
  std::vector<State> out;
  out.reserve(plan.size() + 1);
  out.push_back(s0);
  if (is_terminal(model, s0)) return out;
  State s = s0;
  for (Action a : plan.actions) {
    s = step_model(model, s, a, plan.dt);
    out.push_back(s);
    if (is_terminal(model, s)) break;
  }
  return out;
}

// Model rollout of every action in the plan, ignoring the model's limits.
// Always |plan|+1 states long.
inline std::vector<State> predict_states(const DomainModel& model, const State& s0, const Plan& plan) {
  std::vector<State> out;
  out.reserve(plan.size() + 1);
  out.push_back(s0);
  State s = s0;
  for (Action a : plan.actions) {
    s = step_model(model, s, a, plan.dt);
    out.push_back(s);
  }
  return out;
}

// JSON: {"mass_cart": 1.0, ...} in fluent order.
inline nlohmann::ordered_json to_json(const DomainModel& model) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (Fluent f : kAllFluents) j[std::string(fluent_name(f))] = model[f];
  return j;
}

// Reads a fluent map. Keys absent from `j` keep the value from `base`;
// unknown keys and non-numeric values are rejected.
template <typename Json>
DomainModel model_from_json(const Json& j, const DomainModel& base = DomainModel::nominal(),
                            std::string_view context = "model") {
  if (!j.is_object()) throw InvalidModel(std::string(context) + ": expected a JSON object");
  DomainModel::Values values = base.values();
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto f = parse_fluent(it.key());
    if (!f) throw InvalidModel(std::string(context) + ": unknown fluent '" + it.key() + "'");
    if (!it.value().is_number()) {
      throw InvalidModel(std::string(context) + "." + it.key() + ": expected a number");
    }
    values[index_of(*f)] = it.value().template get<double>();
  }
  try {
    return DomainModel(values);
  } catch (const InvalidModel& e) {
    throw InvalidModel(std::string(context) + ": " + e.what());
  }
}

}  // namespace openworld
