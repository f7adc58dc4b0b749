#include "mugen/planners.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mugen::planning {

std::size_t ucb_select(const PlannerStats& stats) {
  if (stats.size() == 0) throw std::invalid_argument("ucb_select needs at least one candidate");
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (stats.visits[i] == 0) return i;
  }
  const double log_n = std::log(static_cast<double>(stats.total));
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const double score =
        stats.mean(i) + stats.exploration * std::sqrt(log_n / static_cast<double>(stats.visits[i]));
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

std::size_t ucb_recommend(const PlannerStats& stats) {
  std::size_t best = 0;
  bool found = false;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (stats.visits[i] == 0) continue;
    if (!found) {
      best = i;
      found = true;
      continue;
    }
    const double m = stats.mean(i);
    const double mb = stats.mean(best);
    if (m > mb || (m == mb && stats.visits[i] > stats.visits[best])) best = i;
  }
  return best;
}

namespace {

void check_options(const PlanOptions& opts, std::size_t candidates) {
  if (opts.budget == 0) throw std::invalid_argument("planner budget must be >= 1");
  if (candidates == 0) throw std::invalid_argument("planner needs at least one candidate");
}

}  // namespace

PlannerResult ucb_run(const std::vector<ContinuousAction>& candidates, const PullFn& pull, const PlanOptions& opts,
                      Rng& rng) {
  check_options(opts, candidates.size());
  PlannerStats stats(candidates.size(), opts.exploration);
  PlannerResult result;
  std::size_t next_record = 0;
  for (std::size_t it = 1; it <= opts.budget; ++it) {
    const std::size_t i = ucb_select(stats);
    const auto [outcome, r] = pull(i, rng);
    stats.record(i, r);
    if (opts.keep_log) result.log.push_back({it, i, outcome, r});
    while (next_record < opts.record_at.size() && opts.record_at[next_record] == it) {
      const std::size_t rec = ucb_recommend(stats);
      result.snapshots.push_back({it, rec, candidates[rec]});
      ++next_record;
    }
  }
  result.recommended_index = ucb_recommend(stats);
  result.recommended = candidates[result.recommended_index];
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double mean = stats.visits[i] ? stats.mean(i) : 0.0;
    result.candidates.push_back({candidates[i], mean, static_cast<double>(stats.visits[i])});
  }
  return result;
}

PlannerResult ucb_plan(const OutcomeReward& reward, const std::vector<ContinuousAction>& candidates,
                       const PlanOptions& opts, const ExecutionModel& model, Rng& rng) {
  PullFn pull = [&](std::size_t i, Rng& g) {
    const ContinuousAction executed = apply_execution_noise(model, candidates[i], g);
    return std::make_pair(executed, reward(executed));
  };
  return ucb_run(candidates, pull, opts, rng);
}

namespace {

/// Running kernel sums per candidate, accumulated in sample order so they
/// equal a from-scratch kr::estimate bit for bit.
struct KrTable {
  const ExecutionModel& model;
  std::vector<ContinuousAction> actions;
  std::vector<double> w;
  std::vector<double> wr;

  void add_candidate(const ContinuousAction& a, const SampleSet& samples) {
    double cw = 0.0, cwr = 0.0;
    for (const Sample& s : samples.entries()) {
      const double k = kr::kernel(model, a, s.outcome);
      cw += k;
      cwr += k * s.reward;
    }
    actions.push_back(a);
    w.push_back(cw);
    wr.push_back(cwr);
  }

  void add_sample(const Sample& s) {
    for (std::size_t i = 0; i < actions.size(); ++i) {
      const double k = kr::kernel(model, actions[i], s.outcome);
      w[i] += k;
      wr[i] += k * s.reward;
    }
  }

  double density(std::size_t i) const { return w[i] > kr::kDensityFloor ? w[i] : 0.0; }
  double q_hat(std::size_t i) const { return w[i] > kr::kDensityFloor ? wr[i] / w[i] : 0.0; }

  std::size_t select(double c) const {
    double total = 0.0;
    for (std::size_t i = 0; i < actions.size(); ++i) total += density(i);
    const double log_total = std::log(std::max(total, 1.0));
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < actions.size(); ++i) {
      const double d = density(i);
      if (d == 0.0) return i;
      const double score = q_hat(i) + c * std::sqrt(log_total / d);
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    return best;
  }

  std::size_t recommend() const {
    std::size_t best = 0;
    bool found = false;
    for (std::size_t i = 0; i < actions.size(); ++i) {
      if (density(i) == 0.0) continue;
      if (!found) {
        best = i;
        found = true;
        continue;
      }
      const double q = q_hat(i), qb = q_hat(best);
      if (q > qb || (q == qb && density(i) > density(best))) best = i;
    }
    return best;
  }
};

}  // namespace

std::size_t kr_ucb_select(const std::vector<ContinuousAction>& candidates, const SampleSet& samples, double c,
                          const ExecutionModel& model) {
  if (candidates.empty()) throw std::invalid_argument("kr_ucb_select needs at least one candidate");
  KrTable table{model, {}, {}, {}};
  for (const auto& a : candidates) table.add_candidate(a, samples);
  return table.select(c);
}

PlannerResult kr_ucb_plan(const OutcomeReward& reward, const std::vector<ContinuousAction>& candidates,
                          const PlanOptions& opts, const ExecutionModel& model, const ExpansionConfig& expansion,
                          Rng& rng) {
  check_options(opts, candidates.size());
  SampleSet samples;
  KrTable table{model, {}, {}, {}};
  for (const auto& a : candidates) table.add_candidate(a, samples);
  std::size_t added = 0;
  PlannerResult result;
  std::size_t next_record = 0;
  for (std::size_t it = 1; it <= opts.budget; ++it) {
    const std::size_t i = table.select(opts.exploration);
    const double density_at_selection = table.density(i);
    const ContinuousAction executed = apply_execution_noise(model, table.actions[i], rng);
    const double r = reward(executed);
    samples.add(executed, r);
    table.add_sample(samples.entries().back());
    if (added < expansion.cap && density_at_selection > expansion.threshold) {
      table.add_candidate(executed, samples);
      ++added;
    }
    if (opts.keep_log) result.log.push_back({it, i, executed, r});
    while (next_record < opts.record_at.size() && opts.record_at[next_record] == it) {
      const std::size_t rec = table.recommend();
      result.snapshots.push_back({it, rec, table.actions[rec]});
      ++next_record;
    }
  }
  result.recommended_index = table.recommend();
  result.recommended = table.actions[result.recommended_index];
  for (std::size_t i = 0; i < table.actions.size(); ++i) {
    result.candidates.push_back({table.actions[i], table.q_hat(i), table.density(i)});
  }
  return result;
}

void write_sample_log(std::ostream& out, const std::vector<SampleLogRow>& log) {
  out << "iteration,candidate,velocity,angle,turn,reward\n";
  char buf[160];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.17g,%d,%.17g\n", row.iteration, row.candidate,
                  row.outcome.velocity, row.outcome.angle, row.outcome.turn, row.reward);
    out << buf;
  }
}

}  // namespace mugen::planning
