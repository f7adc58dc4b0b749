#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <ostream>
#include <utility>
#include <vector>

#include "mugen/common.hpp"
#include "mugen/domain.hpp"
#include "mugen/kernel_regression.hpp"

namespace mugen::planning {

/// Per-candidate visit counts and reward sums for UCB.
struct PlannerStats {
  std::vector<std::size_t> visits;
  std::vector<double> reward_sums;
  std::size_t total = 0;
  double exploration = 1.0;

  explicit PlannerStats(std::size_t candidates = 0, double c = 1.0)
      : visits(candidates, 0), reward_sums(candidates, 0.0), exploration(c) {}
  std::size_t size() const { return visits.size(); }
  double mean(std::size_t i) const { return reward_sums[i] / static_cast<double>(visits[i]); }
  void record(std::size_t i, double reward) {
    visits[i] += 1;
    reward_sums[i] += reward;
    total += 1;
  }
};

struct SampleLogRow {
  std::size_t iteration = 0;
  std::size_t candidate = 0;
  ContinuousAction outcome;
  double reward = 0.0;
};

struct CandidateEstimate {
  ContinuousAction action;
  double value = 0.0;   // empirical mean (UCB) or kernel estimate (KR-UCB)
  double weight = 0.0;  // visit count (UCB) or kernel density (KR-UCB)
};

/// Recommendation in effect after `budget` iterations.
struct Snapshot {
  std::size_t budget = 0;
  std::size_t index = 0;
  ContinuousAction action;
};

struct PlannerResult {
  std::size_t recommended_index = 0;
  ContinuousAction recommended;
  std::vector<CandidateEstimate> candidates;
  std::vector<SampleLogRow> log;
  std::vector<Snapshot> snapshots;
};

struct PlanOptions {
  std::size_t budget = 128;
  double exploration = 1.0;
  /// Budgets at which the current recommendation is recorded (ascending).
  std::vector<std::size_t> record_at;
  bool keep_log = false;
};

struct ExpansionConfig {
  /// Promote the observed outcome when the selected candidate's density
  /// exceeds this. Infinity disables expansion.
  double threshold = 2.0;
  std::size_t cap = 64;

  static ExpansionConfig disabled() { return {std::numeric_limits<double>::infinity(), 0}; }
};

/// One execution of candidate `index`: returns (executed outcome, reward).
using PullFn = std::function<std::pair<ContinuousAction, double>(std::size_t index, Rng& rng)>;

/// Argmax of mean + C·sqrt(log N / n). Unvisited candidates first, lowest index on ties.
std::size_t ucb_select(const PlannerStats& stats);

/// Highest mean among visited candidates; ties by count then lowest index.
std::size_t ucb_recommend(const PlannerStats& stats);

/// UCB loop over an arbitrary pull function.
PlannerResult ucb_run(const std::vector<ContinuousAction>& candidates, const PullFn& pull,
                      const PlanOptions& opts, Rng& rng);

/// UCB with Gaussian execution noise on top of a state-bound reward.
PlannerResult ucb_plan(const OutcomeReward& reward, const std::vector<ContinuousAction>& candidates,
                       const PlanOptions& opts, const ExecutionModel& model, Rng& rng);

/// Argmax of q_hat + C·sqrt(log(max(ΣW, 1)) / W); zero-density candidates first.
std::size_t kr_ucb_select(const std::vector<ContinuousAction>& candidates, const SampleSet& samples, double c,
                          const ExecutionModel& model);

/// Kernel-regression UCB with a shared sample set and outcome promotion.
PlannerResult kr_ucb_plan(const OutcomeReward& reward, const std::vector<ContinuousAction>& candidates,
                          const PlanOptions& opts, const ExecutionModel& model, const ExpansionConfig& expansion,
                          Rng& rng);

/// CSV: iteration,candidate,velocity,angle,turn,reward
void write_sample_log(std::ostream& out, const std::vector<SampleLogRow>& log);

}  // namespace mugen::planning
