#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "mugen/common.hpp"

namespace mugen {

/// Continuous shot parameters in normalized coordinates. Each environment
/// maps velocity/angle affinely onto its physical units.
struct ContinuousAction {
  double velocity = 0.5;
  double angle = 0.5;
  int turn = 1;

  bool valid() const {
    return velocity >= 0.0 && velocity <= 1.0 && angle >= 0.0 && angle <= 1.0 &&
           (turn == 1 || turn == -1);
  }
  friend bool operator==(const ContinuousAction&, const ContinuousAction&) = default;
};

/// Ordered tuple of k cell indices (repetition allowed).
struct DiscreteAction {
  std::vector<std::size_t> cells;
  friend bool operator==(const DiscreteAction&, const DiscreteAction&) = default;
};

/// Gaussian execution noise in normalized coordinates. Also serves as the
/// kernel for kernel regression.
struct ExecutionModel {
  double sigma_velocity = 0.02;
  double sigma_angle = 0.02;

  ExecutionModel() = default;
  ExecutionModel(double sv, double sa);
};

struct Sample {
  ContinuousAction outcome;
  double reward = 0.0;
};

/// Outcome/reward pairs observed during one planning episode. Append-only.
class SampleSet {
 public:
  void add(const ContinuousAction& outcome, double reward) { entries_.push_back({outcome, reward}); }
  const std::vector<Sample>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Sample& operator[](std::size_t i) const { return entries_[i]; }

 private:
  std::vector<Sample> entries_;
};

/// R(T(s, a')) for a fixed state: reward of an executed (already noisy) action.
using OutcomeReward = std::function<double(const ContinuousAction&)>;

ContinuousAction apply_execution_noise(const ExecutionModel& model, const ContinuousAction& action,
                                       Rng& rng);

struct MonteCarloEstimate {
  double mean = 0.0;
  double ci_half_width = 0.0;
};

/// Mean of n noisy executions with a 1.96·sd/√n half-width (0 for n = 1).
MonteCarloEstimate q_value_monte_carlo(const OutcomeReward& reward, const ContinuousAction& action,
                                       const ExecutionModel& model, std::size_t n, Rng& rng);

/// Mean and normal-approximation 95% half-width of a list of values.
MonteCarloEstimate mean_with_ci(const std::vector<double>& values);

}  // namespace mugen
