#include "mugen/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace mugen::eval {

using nlohmann::json;

std::string to_string(PlannerKind p) { return p == PlannerKind::Ucb ? "ucb" : "kr_ucb"; }

PlannerKind parse_planner(const std::string& name) {
  if (name == "ucb") return PlannerKind::Ucb;
  if (name == "kr_ucb") return PlannerKind::KrUcb;
  throw std::invalid_argument("unknown planner '" + name + "'");
}

const std::vector<std::size_t>& default_budgets() {
  static const std::vector<std::size_t> b{16, 32, 64, 128, 256, 512, 1024};
  return b;
}

void EvalReport::append(const EvalReport& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  scores.insert(scores.end(), other.scores.begin(), other.scores.end());
}

namespace {

// Stream roles under one evaluation seed.
constexpr std::uint64_t kGenerateStream = 1;
constexpr std::uint64_t kPlanStream = 2;
constexpr std::uint64_t kScoreStream = 3;

Rng role_rng(std::uint64_t seed, std::uint64_t role, std::size_t state) {
  return stream_rng(mix_seed(seed, role), state);
}

ReportRow summarize(const std::string& gen, const std::string& obj, const std::string& planner, std::size_t budget,
                    std::size_t m, const std::vector<double>& scores) {
  const MonteCarloEstimate e = mean_with_ci(scores);
  return {gen, obj, planner, budget, m, e.mean, e.ci_half_width, scores.size()};
}

}  // namespace

EvalReport evaluate_continuous(const NamedGenerator& g, const ContinuousDomain& domain,
                               const std::vector<json>& states, const ContinuousEvalOptions& opts) {
  if (states.empty()) throw std::invalid_argument("evaluation needs at least one state");
  if (!g.generator) throw std::invalid_argument("no generator");
  if (opts.budgets.empty()) throw std::invalid_argument("evaluation needs at least one budget");
  if (opts.eval_samples < 1) throw std::invalid_argument("eval_samples must be >= 1");
  std::vector<std::size_t> budgets = opts.budgets;
  std::sort(budgets.begin(), budgets.end());
  budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());
  if (budgets.front() < 1) throw std::invalid_argument("budgets must be >= 1");

  std::vector<std::vector<double>> scores(budgets.size(), std::vector<double>(states.size()));
  parallel_for(states.size(), opts.threads, [&](std::size_t s) {
    const ContinuousInstance inst = domain.instance(states[s]);
    Rng gen_rng = role_rng(opts.seed, kGenerateStream, s);
    const std::vector<ContinuousAction> candidates = g.generator->generate(inst.features, gen_rng);
    planning::PlanOptions popts;
    popts.budget = budgets.back();
    popts.exploration = opts.exploration;
    popts.record_at = budgets;
    Rng plan_rng = role_rng(opts.seed, kPlanStream, s);
    const planning::PlannerResult res =
        opts.planner == PlannerKind::Ucb
            ? planning::ucb_plan(inst.reward, candidates, popts, opts.noise, plan_rng)
            : planning::kr_ucb_plan(inst.reward, candidates, popts, opts.noise, opts.expansion, plan_rng);
    for (std::size_t b = 0; b < budgets.size(); ++b) {
      // Same scoring stream for every budget: unchanged recommendations score identically.
      Rng score_rng = role_rng(opts.seed, kScoreStream, s);
      const double v =
          q_value_monte_carlo(inst.reward, res.snapshots.at(b).action, opts.noise, opts.eval_samples, score_rng).mean;
      if (!std::isfinite(v)) throw NumericalError("non-finite evaluation score");
      scores[b][s] = v;
    }
  });

  EvalReport report;
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    report.rows.push_back(
        summarize(g.name, g.objective, to_string(opts.planner), budgets[b], g.generator->count(), scores[b]));
    report.scores.push_back(std::move(scores[b]));
  }
  return report;
}

EvalReport evaluate_discrete(const std::string& name, const std::string& objective, const gen::DiscreteGenerator& g,
                             const training::LocationEnv& env, const std::vector<location::GridState>& states,
                             std::uint64_t seed, unsigned threads, bool oracle, std::size_t oracle_cap) {
  if (states.empty()) throw std::invalid_argument("evaluation needs at least one state");
  double tuples = 1.0;
  for (std::size_t i = 0; i < env.k; ++i) tuples *= static_cast<double>(env.n * env.n);
  const bool with_oracle = oracle && tuples <= static_cast<double>(oracle_cap);
  std::vector<double> best(states.size());
  std::vector<double> optimum(states.size());
  parallel_for(states.size(), threads, [&](std::size_t s) {
    const location::GridState& grid = states[s];
    if (grid.n != env.n) throw ArtifactError("corpus grid size does not match the environment");
    const std::vector<std::size_t> opp = location::opponent_cells(grid, env.k_opp);
    Rng rng = role_rng(seed, kGenerateStream, s);
    const std::vector<DiscreteAction> actions = g.generate(location_features(grid), rng);
    double b = 0.0;
    for (const auto& a : actions) b = std::max(b, location::reward(grid, a, opp));
    best[s] = b;
    if (with_oracle) optimum[s] = location::brute_force_best(grid, env.k, opp, oracle_cap).reward;
  });
  EvalReport report;
  report.rows.push_back(summarize(name, objective, "exhaustive", g.count(), g.count(), best));
  report.scores.push_back(std::move(best));
  if (with_oracle) {
    report.rows.push_back(summarize("oracle", "optimal", "exhaustive", g.count(), g.count(), optimum));
    report.scores.push_back(std::move(optimum));
  }
  return report;
}

std::vector<std::vector<ContinuousAction>> generate_sets(const gen::ContinuousGenerator& g,
                                                         const ContinuousDomain& domain,
                                                         const std::vector<json>& states, std::uint64_t seed) {
  std::vector<std::vector<ContinuousAction>> sets;
  sets.reserve(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) {
    Rng rng = role_rng(seed, kGenerateStream, s);
    sets.push_back(g.generate(domain.instance(states[s]).features, rng));
  }
  return sets;
}

CoverageMaps coverage_analysis(const std::vector<std::vector<ContinuousAction>>& sets, std::size_t bins) {
  if (sets.empty()) throw std::invalid_argument("coverage needs at least one state");
  if (bins < 2) throw std::invalid_argument("coverage needs at least 2 bins per axis");
  const std::size_t m = sets.front().size();
  CoverageMaps out;
  out.bins = bins;
  out.maps.assign(m, std::vector<double>(bins * bins, 0.0));
  for (const auto& set : sets) {
    if (set.size() != m) throw std::invalid_argument("all candidate sets must have the same size");
    for (std::size_t i = 0; i < m; ++i) out.maps[i][gen::grid_cell_of(set[i], bins)] += 1.0;
  }
  const double inv = 1.0 / static_cast<double>(sets.size());
  for (auto& map : out.maps) {
    for (double& v : map) v *= inv;
  }
  return out;
}

double bhattacharyya(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("distributions differ in size");
  double bc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) bc += std::sqrt(p[i] * q[i]);
  return bc;
}

double mean_pairwise_overlap(const CoverageMaps& maps) {
  const std::size_t m = maps.maps.size();
  if (m < 2) throw std::invalid_argument("overlap needs at least 2 slots");
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      total += bhattacharyya(maps.maps[i], maps.maps[j]);
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

double diversity_metric(const std::vector<std::vector<ContinuousAction>>& sets) {
  if (sets.empty()) throw std::invalid_argument("diversity needs at least one state");
  double total = 0.0;
  for (const auto& set : sets) {
    if (set.size() < 2) throw std::invalid_argument("diversity needs m >= 2");
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      for (std::size_t j = i + 1; j < set.size(); ++j) {
        sum += std::hypot(set[i].velocity - set[j].velocity, set[i].angle - set[j].angle);
        ++pairs;
      }
    }
    total += sum / static_cast<double>(pairs);
  }
  return total / static_cast<double>(sets.size());
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "generator,objective,planner,budget,m,mean,ci,n_states\n";
  for (const auto& r : report.rows) {
    out << r.generator << ',' << r.objective << ',' << r.planner << ',' << r.budget << ',' << r.m << ','
        << fmt(r.mean) << ',' << fmt(r.ci) << ',' << r.n_states << '\n';
  }
}

void write_per_state_csv(std::ostream& out, const EvalReport& report) {
  out << "generator,planner,budget,state,score\n";
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    const auto& row = report.rows[r];
    for (std::size_t s = 0; s < report.scores[r].size(); ++s) {
      out << row.generator << ',' << row.planner << ',' << row.budget << ',' << s << ',' << fmt(report.scores[r][s])
          << '\n';
    }
  }
}

void write_plot_data(std::ostream& out, const EvalReport& report) {
  out << "series,x,y,ci\n";
  for (const auto& r : report.rows) {
    out << r.generator << '/' << r.planner << ',' << r.budget << ',' << fmt(r.mean) << ',' << fmt(r.ci) << '\n';
  }
}

void write_matrix_csv(std::ostream& out, const std::vector<double>& map, std::size_t bins) {
  for (std::size_t r = 0; r < bins; ++r) {
    for (std::size_t c = 0; c < bins; ++c) {
      if (c) out << ',';
      out << fmt(map[r * bins + c]);
    }
    out << '\n';
  }
}

Corpus make_corpus(const json& env, std::size_t count, std::uint64_t seed, unsigned threads) {
  Corpus c;
  c.env = env;
  c.seed = seed;
  c.states.resize(count);
  if (training::is_location_env(env)) {
    const training::LocationEnv le = training::LocationEnv::from_json(env);
    parallel_for(count, threads, [&](std::size_t s) {
      Rng rng = stream_rng(seed, s);
      c.states[s] = to_json(location::sample_grid(le.n, le.alpha, le.beta, rng));
    });
  } else {
    const auto domain = make_continuous_domain(env);
    parallel_for(count, threads, [&](std::size_t s) {
      Rng rng = stream_rng(seed, s);
      c.states[s] = domain->sample_state(rng);
    });
  }
  return c;
}

json corpus_to_json(const Corpus& c) {
  return {{"format", "mugen-corpus"}, {"version", 1}, {"env", c.env}, {"seed", c.seed}, {"states", c.states}};
}

Corpus corpus_from_json(const json& j) {
  Corpus c;
  try {
    if (j.at("format") != "mugen-corpus") throw ArtifactError("not a corpus file");
    if (j.at("version") != 1) throw ArtifactError("unsupported corpus version");
    c.env = j.at("env");
    c.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& s : j.at("states")) c.states.push_back(s);
  } catch (const json::exception& e) {
    throw ArtifactError(std::string("malformed corpus: ") + e.what());
  }
  if (c.states.empty()) throw ArtifactError("corpus has no states");
  return c;
}

void save_corpus(const Corpus& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write corpus " + path);
  out << corpus_to_json(c).dump() << '\n';
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot read corpus " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ArtifactError("corpus " + path + ": " + e.what());
  }
  return corpus_from_json(j);
}

std::vector<location::GridState> grid_states(const Corpus& c) {
  std::vector<location::GridState> out;
  out.reserve(c.states.size());
  for (const auto& s : c.states) out.push_back(grid_state_from_json(s));
  return out;
}

}  // namespace mugen::eval
