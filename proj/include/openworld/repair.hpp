#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "openworld/consistency.hpp"
#include "openworld/domain_model.hpp"

namespace openworld {

// Model manipulation operator: add `delta` to one fluent.
struct MMO {
  Fluent fluent;
  double delta;

  friend bool operator==(const MMO&, const MMO&) = default;
};

using DeltaVector = std::array<double, kNumFluents>;

class MMOSet {
 public:
  static constexpr double kDefaultStep = 0.1;

  explicit MMOSet(std::vector<MMO> ops) : ops_(std::move(ops)) {
    if (ops_.empty()) throw std::invalid_argument("MMO set must not be empty");
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      if (ops_[i].delta == 0.0 || !std::isfinite(ops_[i].delta)) {
        throw std::invalid_argument("MMO delta must be finite and non-zero");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (ops_[i] == ops_[j]) throw std::invalid_argument("duplicate MMO in set");
      }
    }
  }

  // +step and -step for every fluent, in fluent order.
  static MMOSet symmetric(const DeltaVector& steps) {
    std::vector<MMO> ops;
    for (Fluent f : kAllFluents) {
      const double step = steps[index_of(f)];
      if (!(step > 0.0)) {
        throw std::invalid_argument("step for '" + std::string(fluent_name(f)) + "' must be > 0");
      }
      ops.push_back({f, +step});
      ops.push_back({f, -step});
    }
    return MMOSet(std::move(ops));
  }

  static MMOSet defaults() {
    DeltaVector steps;
    steps.fill(kDefaultStep);
    return symmetric(steps);
  }

  const std::vector<MMO>& operators() const { return ops_; }
  std::size_t size() const { return ops_.size(); }

 private:
  std::vector<MMO> ops_;
};

// A sequence of MMOs. Its canonical form is the net delta per fluent,
// computed so that any permutation of the same MMOs gives bitwise-identical
// results: per fluent, deltas are grouped by magnitude, the net integer count
// is multiplied by that magnitude, and the products are summed in ascending
// magnitude order.
struct DomainRepair {
  std::vector<MMO> mmos;

  std::size_t size() const { return mmos.size(); }
  bool empty() const { return mmos.empty(); }

  DomainRepair then(const MMO& op) const {
    DomainRepair r = *this;
    r.mmos.push_back(op);
    return r;
  }

  DeltaVector canonical() const {
    std::array<std::map<double, std::int64_t>, kNumFluents> net;
    for (const MMO& op : mmos) {
      net[index_of(op.fluent)][std::abs(op.delta)] += op.delta > 0 ? 1 : -1;
    }
    DeltaVector out{};
    for (std::size_t f = 0; f < kNumFluents; ++f) {
      double acc = 0.0;
      for (const auto& [magnitude, count] : net[f]) {
        if (count != 0) acc += static_cast<double>(count) * magnitude;
      }
      out[f] = acc;
    }
    return out;
  }
};

class InvalidRepair : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline DomainModel apply_delta(const DomainModel& model, const DeltaVector& delta) {
  DomainModel::Values v = model.values();
  for (Fluent f : kAllFluents) {
    const std::size_t i = index_of(f);
    v[i] += delta[i];
    if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
      throw InvalidRepair("repair drives '" + std::string(fluent_name(f)) + "' to " +
                          std::to_string(v[i]) + " (must stay > 0)");
    }
  }
  return DomainModel(v);
}

inline DomainModel apply_repair(const DomainModel& model, const DomainRepair& repair) {
  return apply_delta(model, repair.canonical());
}

// The base model is kept untouched, so undoing returns it exactly.
inline DomainModel undo_repair(const DomainModel& base, const DomainRepair& /*repair*/) { return base; }

// DoRepair / UndoRepair as a stateful pair over a retained base copy.
class RepairableModel {
 public:
  explicit RepairableModel(DomainModel base) : base_(base), current_(base) {}

  const DomainModel& apply(const DomainRepair& repair) {
    current_ = apply_repair(base_, repair);
    return current_;
  }
  const DomainModel& undo() {
    current_ = base_;
    return current_;
  }
  const DomainModel& current() const { return current_; }
  const DomainModel& base() const { return base_; }

 private:
  DomainModel base_;
  DomainModel current_;
};

struct RepairConfig {
  ConsistencyConfig consistency;
  double length_penalty = 0.001;  // lambda
  int max_expansions = 10000;

  void validate() const {
    consistency.validate();
    if (!(length_penalty >= 0.0)) throw std::invalid_argument("repair.length_penalty must be >= 0");
    if (max_expansions < 1) throw std::invalid_argument("repair.max_expansions must be >= 1");
  }
};

// OPEN-list key: inconsistency plus a small per-MMO length penalty.
inline double f_priority(const DomainRepair& repair, double score, const RepairConfig& cfg) {
  return score + cfg.length_penalty * static_cast<double>(repair.size());
}

struct RepairResult {
  DomainRepair repair;         // best repair found
  double score = 0.0;          // its inconsistency
  double initial_score = 0.0;  // inconsistency of the unrepaired model
  int expansions = 0;
  int evaluations = 0;
  bool exhausted = false;  // budget or frontier ran out with score >= C_th
  std::vector<DeltaVector> expanded;  // canonical vectors in expansion order
};

// Inconsistency of `model` against the observed trace when replaying the
// executed actions.
inline double trace_inconsistency(const DomainModel& model, const Plan& executed_plan,
                                  const std::vector<State>& observed, const ConsistencyConfig& cfg) {
  const auto expected = expected_trajectory(model, observed.front(), executed_plan);
  return inconsistency_score(expected, observed, cfg);
}

// Best-first search in repair space. Pops the repair with the lowest
// f = C + lambda*|repair| (FIFO among equal keys), extends it with every MMO,
// and stops as soon as some evaluated repair is below the threshold.
// Equivalent repairs (same canonical vector) are generated once; children
// that would make a fluent non-positive are dropped.
inline RepairResult repair_search(const MMOSet& mmos, const DomainModel& model, const Plan& executed_plan,
                                  const Trajectory& tau, const RepairConfig& cfg) {
  cfg.validate();
  if (tau.transitions.empty()) throw std::invalid_argument("repair_search: trajectory has no transitions");
  if (executed_plan.size() != tau.transitions.size()) {
    throw std::invalid_argument("repair_search: executed plan and trajectory lengths differ");
  }
  const std::vector<State> observed = tau.states();
  const double threshold = cfg.consistency.threshold;

  RepairResult result;
  result.initial_score = trace_inconsistency(model, executed_plan, observed, cfg.consistency);
  result.score = result.initial_score;
  result.evaluations = 1;
  if (result.score < threshold) return result;

  struct Entry {
    double key;
    std::uint64_t order;
    DomainRepair repair;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.key != b.key) return a.key > b.key;
      return a.order > b.order;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, Later> open;
  std::set<DeltaVector> seen;
  std::uint64_t order = 0;

  DomainRepair root;
  open.push({f_priority(root, result.initial_score, cfg), order++, root});
  seen.insert(root.canonical());

  while (result.score >= threshold) {
    if (open.empty() || result.expansions >= cfg.max_expansions) {
      result.exhausted = true;
      break;
    }
    Entry current = open.top();
    open.pop();
    ++result.expansions;
    result.expanded.push_back(current.repair.canonical());

    for (const MMO& op : mmos.operators()) {
      DomainRepair child = current.repair.then(op);
      const DeltaVector canon = child.canonical();
      if (!seen.insert(canon).second) continue;
      DomainModel repaired = model;
      try {
        repaired = apply_delta(model, canon);
      } catch (const InvalidRepair&) {
        continue;
      }
      const double score = trace_inconsistency(repaired, executed_plan, observed, cfg.consistency);
      ++result.evaluations;
      if (score < result.score) {
        result.score = score;
        result.repair = child;
      }
      open.push({f_priority(child, score, cfg), order++, std::move(child)});
    }
  }
  return result;
}

// {"mass_cart": 0.0, ..., "x_limit": 0.0}: net delta per fluent, zeros kept.
inline nlohmann::ordered_json to_json(const DomainRepair& repair) {
  const DeltaVector c = repair.canonical();
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (Fluent f : kAllFluents) j[std::string(fluent_name(f))] = c[index_of(f)];
  return j;
}

inline nlohmann::ordered_json delta_to_json(const DeltaVector& delta) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (Fluent f : kAllFluents) j[std::string(fluent_name(f))] = delta[index_of(f)];
  return j;
}

}  // namespace openworld
