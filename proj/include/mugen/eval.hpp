#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mugen/continuous_domains.hpp"
#include "mugen/domain.hpp"
#include "mugen/generators.hpp"
#include "mugen/location_game.hpp"
#include "mugen/planners.hpp"
#include "mugen/training.hpp"

namespace mugen::eval {

enum class PlannerKind { Ucb, KrUcb };

std::string to_string(PlannerKind p);
PlannerKind parse_planner(const std::string& name);

const std::vector<std::size_t>& default_budgets();

struct ReportRow {
  std::string generator;
  std::string objective;
  std::string planner;
  std::size_t budget = 0;
  std::size_t m = 0;
  double mean = 0.0;
  double ci = 0.0;
  std::size_t n_states = 0;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  /// scores[r][s]: raw score of state s for rows[r].
  std::vector<std::vector<double>> scores;

  void append(const EvalReport& other);
};

struct ContinuousEvalOptions {
  PlannerKind planner = PlannerKind::Ucb;
  std::vector<std::size_t> budgets = default_budgets();
  double exploration = 1.0;
  ExecutionModel noise;
  planning::ExpansionConfig expansion;
  std::size_t eval_samples = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct NamedGenerator {
  std::string name;
  std::string objective;
  const gen::ContinuousGenerator* generator = nullptr;
};

/// One planner run per state up to the largest budget; the recommendation
/// in effect at each budget is scored by eval_samples noisy executions.
/// Streams depend only on (seed, state), so generators are compared on
/// paired randomness.
EvalReport evaluate_continuous(const NamedGenerator& g, const ContinuousDomain& domain,
                               const std::vector<nlohmann::json>& states, const ContinuousEvalOptions& opts);

/// Best exact reward among the m generated actions per state, plus an
/// "oracle" row from exhaustive search when (n·n)^k <= oracle_cap.
EvalReport evaluate_discrete(const std::string& name, const std::string& objective, const gen::DiscreteGenerator& g,
                             const training::LocationEnv& env, const std::vector<location::GridState>& states,
                             std::uint64_t seed, unsigned threads = 1, bool oracle = true,
                             std::size_t oracle_cap = location::kDefaultEnumerationCap);

/// Candidate sets produced for each state.
std::vector<std::vector<ContinuousAction>> generate_sets(const gen::ContinuousGenerator& g,
                                                         const ContinuousDomain& domain,
                                                         const std::vector<nlohmann::json>& states,
                                                         std::uint64_t seed);

/// Per-slot normalized 2D histograms, bins×bins, velocity bins along rows.
struct CoverageMaps {
  std::size_t bins = 0;
  std::vector<std::vector<double>> maps;
};

CoverageMaps coverage_analysis(const std::vector<std::vector<ContinuousAction>>& sets, std::size_t bins);

double bhattacharyya(const std::vector<double>& p, const std::vector<double>& q);
/// Mean Bhattacharyya coefficient over all slot pairs.
double mean_pairwise_overlap(const CoverageMaps& maps);

/// Mean over states of the mean pairwise Euclidean distance between
/// candidates in (velocity, angle). Throws when a set has fewer than 2 actions.
double diversity_metric(const std::vector<std::vector<ContinuousAction>>& sets);

/// CSV: generator,objective,planner,budget,m,mean,ci,n_states
void write_report_csv(std::ostream& out, const EvalReport& report);
/// CSV: generator,planner,budget,state,score
void write_per_state_csv(std::ostream& out, const EvalReport& report);
/// CSV: series,x,y,ci with series = generator/planner and x = budget.
void write_plot_data(std::ostream& out, const EvalReport& report);
/// bins rows of bins comma-separated values.
void write_matrix_csv(std::ostream& out, const std::vector<double>& map, std::size_t bins);

// ---- evaluation corpora ---------------------------------------------------

struct Corpus {
  nlohmann::json env;
  std::uint64_t seed = 0;
  std::vector<nlohmann::json> states;
};

Corpus make_corpus(const nlohmann::json& env, std::size_t count, std::uint64_t seed, unsigned threads = 1);
nlohmann::json corpus_to_json(const Corpus& c);
/// Throws ArtifactError on malformed or empty corpora.
Corpus corpus_from_json(const nlohmann::json& j);
void save_corpus(const Corpus& c, const std::string& path);
Corpus load_corpus(const std::string& path);

std::vector<location::GridState> grid_states(const Corpus& c);

}  // namespace mugen::eval
