// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "openworld/agent.hpp"
#include "openworld/config.hpp"
#include "oracles.hpp"
#include "repair_scenarios.hpp"

using namespace openworld;
using namespace openworld::testing_support;

namespace {

const std::string kConfigDir = OPENWORLD_CONFIG_DIR;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

int failures = 0;

void report(const char* id, const char* title, const Check& c, const std::string& summary) {
  std::printf("%s %s %s: %s%s%s\n", c.ok ? "PASS" : "FAIL", id, title, summary.c_str(),
              c.detail.empty() ? "" : " | ", c.detail.c_str());
  std::fflush(stdout);
  if (!c.ok) ++failures;
}

std::string fmt(double v, int prec = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

ExperimentConfig load(const std::string& name, AgentKind agent) {
  ExperimentConfig cfg = load_config(kConfigDir + "/" + name);
  cfg.agent = agent;
  cfg.output_path.clear();
  return cfg;
}

// records[trial * episodes + episode]
double mean_reward(const std::vector<EpisodeRecord>& recs, int from, int to) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : recs) {
    if (r.episode >= from && r.episode <= to) {
      sum += r.reward;
      ++n;
    }
  }
  return n ? sum / n : 0.0;
}

struct Scenario {
  const char* name;
  const char* file;
  std::vector<EpisodeRecord> repairing;
  std::vector<EpisodeRecord> fixed;
  int novelty_episode = 7;
  double threshold = 0.0;
};

void criterion_baseline() {
  auto cfg = load("matched.json", AgentKind::planning_repairing);
  cfg.episodes = 20;
  cfg.trials = 5;
  const auto t0 = std::chrono::steady_clock::now();
  const auto recs = run_experiment(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto full = std::count_if(recs.begin(), recs.end(), [](const auto& r) { return r.reward == 200; });
  Check c;
  c.require(recs.size() == 100, "expected 100 episodes");
  c.require(full >= 95, "fewer than 95/100 full episodes");
  c.require(secs < 60.0, "runtime over 60 s");
  report("C1", "baseline competence", c,
         std::to_string(full) + "/" + std::to_string(recs.size()) + " episodes at reward 200, " + fmt(secs) + " s");
}

void criterion_recovery(const std::vector<Scenario>& scenarios) {
  Check c;
  std::string summary;
  for (const auto& s : scenarios) {
    const double m = mean_reward(s.repairing, 27, 47);
    c.require(m >= 190.0, std::string(s.name) + " mean below 190");
    summary += std::string(summary.empty() ? "" : ", ") + s.name + " mean reward ep 27-47 = " + fmt(m);
  }
  report("C2", "recovery speed", c, summary);
}

void criterion_resilience(const std::vector<Scenario>& scenarios) {
  Check c;
  std::string summary;
  for (const auto& s : scenarios) {
    const double rep = mean_reward(s.repairing, s.novelty_episode, 49);
    const double sta = mean_reward(s.fixed, s.novelty_episode, 49);
    int min_static_first = 200;
    for (const auto& r : s.fixed) {
      if (r.episode == s.novelty_episode) min_static_first = std::min(min_static_first, r.reward);
    }
    c.require(rep >= sta, std::string(s.name) + " repairing below static");
    c.require(min_static_first > 0, std::string(s.name) + " static collapsed at the novelty episode");
    summary += std::string(summary.empty() ? "" : ", ") + s.name + " repairing " + fmt(rep) + " vs static " +
               fmt(sta) + " (static min reward at ep " + std::to_string(s.novelty_episode) + " = " +
               std::to_string(min_static_first) + ")";
  }
  report("C3", "resilience ordering", c, summary);
}

void criterion_detection(const std::vector<Scenario>& scenarios) {
  Check c;
  std::string summary;
  for (const auto& s : scenarios) {
    int detected = 0, trials = 0, pre_nonzero = 0;
    double min_first = INFINITY;
    for (const auto* recs : {&s.repairing, &s.fixed}) {
      for (const auto& r : *recs) {
        if (r.episode < s.novelty_episode && r.inconsistency != 0.0) ++pre_nonzero;
        if (r.episode == s.novelty_episode) {
          ++trials;
          detected += r.inconsistency > s.threshold;
          min_first = std::min(min_first, r.inconsistency);
        }
      }
    }
    c.require(detected == trials, std::string(s.name) + " missed detection");
    c.require(pre_nonzero == 0, std::string(s.name) + " non-zero pre-novelty inconsistency");
    summary += std::string(summary.empty() ? "" : ", ") + s.name + " detected " + std::to_string(detected) + "/" +
               std::to_string(trials) + " (min C = " + fmt(min_first, 4) + "), pre-novelty non-zero " +
               std::to_string(pre_nonzero);
  }
  report("C4", "detection", c, summary);
}

void criterion_localization() {
  auto cfg = load("gravity_only.json", AgentKind::planning_repairing);
  cfg.episodes = 7 + 20;
  const auto recs = run_experiment(cfg);
  Check c;
  std::string summary;
  for (int t = 0; t < cfg.trials; ++t) {
    const DomainModel& final_model = recs[static_cast<std::size_t>(t * cfg.episodes + cfg.episodes - 1)].repaired_model;
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < kNumFluents; ++k) {
      const double d = std::abs(final_model.values()[k] - cfg.initial_model.values()[k]);
      if (d > best) {
        best = d;
        arg = k;
      }
    }
    const double dg = final_model.gravity() - cfg.initial_model.gravity();
    c.require(kAllFluents[arg] == Fluent::gravity,
              "trial " + std::to_string(t) + " largest entry is " + std::string(fluent_name(kAllFluents[arg])));
    summary += std::string(summary.empty() ? "" : ", ") + "trial " + std::to_string(t) + " gravity +" + fmt(dg, 1);
  }
  report("C5", "repair localization", c, summary);
}

std::vector<State> random_states(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<State> v(n);
  for (auto& s : v) s = {g(rng), g(rng), g(rng), g(rng)};
  return v;
}

std::vector<oracle::Vec4> vecs(const std::vector<State>& v) {
  std::vector<oracle::Vec4> out;
  for (const auto& s : v) out.push_back({s.x, s.x_dot, s.theta, s.theta_dot});
  return out;
}

bool bitwise_equal(const DomainModel& a, const DomainModel& b) {
  return std::memcmp(a.values().data(), b.values().data(), sizeof(double) * kNumFluents) == 0;
}

void criterion_properties() {
  Check c;
  std::mt19937_64 rng(20240607);

  // Score vs the reference double loop, and zero iff equal.
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    std::uniform_int_distribution<std::size_t> len(1, 10);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    const auto a = random_states(rng, len(rng));
    const auto b = random_states(rng, len(rng));
    ConsistencyConfig cc;
    cc.gamma = u(rng);
    worst = std::max(worst, std::abs(inconsistency_score(a, b, cc) - oracle::discounted_distance(vecs(a), vecs(b), cc.gamma)));
    c.require(inconsistency_score(a, a, cc) == 0.0, "score of equal sequences non-zero");
    auto p = a;
    p.back().theta += 1e-9;
    c.require(inconsistency_score(a, p, cc) > 0.0, "perturbed sequence scores zero");
  }
  c.require(worst <= 1e-12, "score differs from reference by " + std::to_string(worst));

  // Apply/undo identity and permutation invariance.
  const auto ops = MMOSet::defaults().operators();
  for (int i = 0; i < 300; ++i) {
    DomainRepair r;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int k = 0; k < n; ++k) {
      const MMO op = ops[rng() % ops.size()];
      if (op.fluent != Fluent::mass_pole && op.fluent != Fluent::angle_limit) r.mmos.push_back(op);
    }
    const auto base = DomainModel::nominal().with(Fluent::mass_cart, 3.0).with(Fluent::length_pole, 2.0);
    RepairableModel m(base);
    m.apply(r);
    c.require(bitwise_equal(m.undo(), base), "undo not bitwise identical");
    DomainRepair shuffled = r;
    std::shuffle(shuffled.mmos.begin(), shuffled.mmos.end(), rng);
    c.require(r.canonical() == shuffled.canonical() && bitwise_equal(apply_repair(base, r), apply_repair(base, shuffled)),
              "permutation changed the canonical repair");
  }

  // Wide beam vs exhaustive enumeration.
  std::uniform_real_distribution<double> small(-0.1, 0.1);
  for (int depth : {4, 8, 12}) {
    for (int i = 0; i < 3; ++i) {
      const State s{small(rng), small(rng), small(rng), small(rng)};
      PlannerConfig pc;
      pc.lookahead_depth = depth;
      pc.beam_width = 4096;
      const auto ex = oracle::exhaustive_search(oracle::Params{}, oracle::Weights{}, {s.x, s.x_dot, s.theta, s.theta_dot}, depth);
      const auto beam = beam_search(DomainModel::nominal(), s, pc);
      std::vector<bool> seq;
      for (Action a : beam.actions) seq.push_back(a == Action::Right);
      c.require(std::abs(beam.cost - ex.best_cost) <= 1e-12 * std::max(1.0, ex.best_cost) && seq == ex.best_sequence,
                "beam differs from exhaustive at depth " + std::to_string(depth));
    }
  }

  // Repair soundness and fluent-support minimality on small perturbations.
  struct Case {
    Fluent f;
    double v;
  };
  for (const Case& k : {Case{Fluent::gravity, 10.0}, Case{Fluent::length_pole, 0.6}, Case{Fluent::mass_cart, 0.9}}) {
    const auto obs = observe_episode(DomainModel::nominal().with(k.f, k.v), 1);
    RepairConfig rc;
    rc.consistency.threshold = 0.001;
    const auto grid = grid_oracle(obs, rc.consistency.gamma, rc.consistency.threshold);
    const auto r = repair_search(MMOSet::defaults(), DomainModel::nominal(), obs.plan, obs.tau, rc);
    const std::string name(fluent_name(k.f));
    c.require(!r.exhausted, name + ": search exhausted");
    const double rescored =
        trace_inconsistency(apply_repair(DomainModel::nominal(), r.repair), obs.plan, obs.tau.states(), rc.consistency);
    c.require(rescored < rc.consistency.threshold, name + ": returned repair not sub-threshold");
    c.require(grid.supports.count(support_of(r.repair)) == 1, name + ": support not among the oracle's minimal ones");
  }

  // Byte-identical CSV across repeated runs.
  const auto dir = std::filesystem::temp_directory_path() / "openworld_acceptance";
  std::filesystem::create_directories(dir);
  auto cfg = load("n1.json", AgentKind::planning_repairing);
  cfg.episodes = 10;
  cfg.trials = 2;
  std::string contents[2];
  for (int i = 0; i < 2; ++i) {
    cfg.output_path = (dir / ("run" + std::to_string(i) + ".csv")).string();
    run_experiment(cfg);
    std::ifstream in(cfg.output_path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    contents[i] = ss.str();
  }
  std::filesystem::remove_all(dir);
  c.require(!contents[0].empty() && contents[0] == contents[1], "CSV output differs between runs");

  report("C6", "property suites", c, "max score error " + fmt(worst * 1e15, 3) + "e-15");
}

}  // namespace

int main() {
  try {
    criterion_baseline();

    std::vector<Scenario> scenarios{{"N1", "n1.json", {}, {}}, {"N2", "n2.json", {}, {}}};
    for (auto& s : scenarios) {
      const auto rep = load(s.file, AgentKind::planning_repairing);
      s.threshold = rep.consistency.threshold;
      s.repairing = run_experiment(rep);
      s.fixed = run_experiment(load(s.file, AgentKind::planning_static));
    }
    criterion_recovery(scenarios);
    criterion_resilience(scenarios);
    criterion_detection(scenarios);
    criterion_localization();
    criterion_properties();
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance run aborted: %s\n", e.what());
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
