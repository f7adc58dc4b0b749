#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mugen/domain.hpp"
#include "mugen/network.hpp"
#include "mugen/objectives.hpp"

namespace mugen::training {

/// The four set objectives plus the two policy baselines.
enum class Method { Sum, Max, Softmax, Mu, Reinforce, Distillation };

std::string to_string(Method m);
Method parse_method(const std::string& name);
bool is_set_objective(Method m);
objectives::Objective objective_of(Method m);

/// Location game parameters: n×n grid, player picks k cells, opponent takes
/// its top k_opp cells, cell values ~ normalized inverse gamma(alpha, beta).
struct LocationEnv {
  std::size_t n = 5;
  std::size_t k = 2;
  std::size_t k_opp = 1;
  double alpha = 3.0;
  double beta = 1.0;

  nlohmann::json to_json() const;
  /// Throws ConfigError naming the offending key.
  static LocationEnv from_json(const nlohmann::json& j);
};

bool is_location_env(const nlohmann::json& env);

struct TrainConfig {
  nlohmann::json env = {{"id", "curling"}};
  Method method = Method::Mu;
  std::size_t m = 8;
  std::size_t outcomes = 4;
  std::size_t minibatch = 32;
  std::size_t iterations = 5000;
  double learning_rate = 1e-4;
  double l2 = 1e-4;
  double temperature = 0.1;
  ExecutionModel noise;
  std::vector<std::size_t> hidden{64};
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;
  int turn = 1;
  // Distillation baseline.
  std::size_t grid = 16;
  std::size_t planner_budget = 128;
  double exploration = 0.5;
  std::size_t dataset_states = 1024;
  // Not part of the identity of a run.
  unsigned threads = 1;
};

nlohmann::json to_json(const TrainConfig& cfg);

struct MetricRow {
  std::size_t iteration = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double wall_clock = -1.0;  // seconds since start; negative when not recorded
};

/// CSV: iteration,objective,grad_norm,wall_clock
void write_metrics_header(std::ostream& out);
void write_metric_row(std::ostream& out, const MetricRow& row);

struct TrainHooks {
  std::function<void(const MetricRow&)> on_metric;
  /// Called every checkpoint_every iterations.
  std::function<void(const nn::Checkpoint&)> on_checkpoint;
  /// Called with the last good parameters before a NumericalError propagates.
  std::function<void(const nn::Checkpoint&)> on_failure;
  bool record_wall_clock = false;
};

struct TrainResult {
  nn::Checkpoint checkpoint;
  std::vector<MetricRow> metrics;
};

/// Set-objective training through kernel regression on a continuous domain.
TrainResult train_continuous(const TrainConfig& cfg, const TrainHooks& hooks = {});
/// Score-function training of m heads on the location game (or a single
/// REINFORCE head).
TrainResult train_discrete(const TrainConfig& cfg, const TrainHooks& hooks = {});
/// Cross-entropy distillation of KR-UCB visit distributions over a G×G grid.
TrainResult train_policy_baseline(const TrainConfig& cfg, const TrainHooks& hooks = {});
/// Dispatches on environment and method. Throws ConfigError on invalid combinations.
TrainResult train(const TrainConfig& cfg, const TrainHooks& hooks = {});

/// Distillation target for one state: KR-UCB visit frequencies over the
/// grid-cell centres (expansion disabled).
std::vector<double> distillation_target(const OutcomeReward& reward, std::size_t grid, std::size_t budget,
                                        double exploration, const ExecutionModel& noise, int turn, Rng& rng);

}  // namespace mugen::training
