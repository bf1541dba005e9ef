#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "openworld/domain_model.hpp"

namespace openworld {

struct ConsistencyConfig {
  double gamma = 0.8;
  double threshold = 0.01;  // C_th
  std::array<double, 4> dimension_weights = {1.0, 1.0, 1.0, 1.0};

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("consistency.gamma must be in (0, 1)");
    if (!(threshold > 0.0)) throw std::invalid_argument("consistency.threshold must be > 0");
    for (double w : dimension_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw std::invalid_argument("consistency.dimension_weights must be finite and >= 0");
      }
    }
  }
};

class EmptySequence : public std::invalid_argument {
 public:
  EmptySequence() : std::invalid_argument("inconsistency_score: state sequence is empty") {}
};

// Weighted Euclidean distance over (x, x_dot, theta, theta_dot).
inline double state_distance(const State& a, const State& b, const std::array<double, 4>& w) {
  const auto da = a.as_array();
  const auto db = b.as_array();
  double sq = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double d = da[k] - db[k];
    sq += w[k] * d * d;
  }
  return std::sqrt(sq);
}

// sum_i gamma^i * ||observed[i] - expected[i]|| over the common prefix.
inline double inconsistency_score(std::span<const State> expected, std::span<const State> observed,
                                  const ConsistencyConfig& cfg) {
  if (expected.empty() || observed.empty()) throw EmptySequence();
  const std::size_t m = std::min(expected.size(), observed.size());
  double score = 0.0;
  double discount = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    score += discount * state_distance(observed[i], expected[i], cfg.dimension_weights);
    discount *= cfg.gamma;
  }
  return score;
}

inline bool detect_novelty(double score, const ConsistencyConfig& cfg) { return score > cfg.threshold; }

// Model prediction for the executed action sequence. Rolls out every
// executed action regardless of the model's own limits so that the
// prediction always covers the whole observed trace.
inline std::vector<State> expected_trajectory(const DomainModel& model, const State& s0,
                                              const Plan& executed_plan) {
  return predict_states(model, s0, executed_plan);
}

}  // namespace openworld
