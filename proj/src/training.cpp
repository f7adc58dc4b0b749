#include "mugen/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "mugen/continuous_domains.hpp"
#include "mugen/generators.hpp"
#include "mugen/location_game.hpp"
#include "mugen/planners.hpp"

namespace mugen::training {

using nlohmann::json;
using objectives::Objective;

std::string to_string(Method m) {
  switch (m) {
    case Method::Sum: return "sum";
    case Method::Max: return "max";
    case Method::Softmax: return "softmax";
    case Method::Mu: return "mu";
    case Method::Reinforce: return "reinforce";
    case Method::Distillation: return "distillation";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "sum") return Method::Sum;
  if (name == "max") return Method::Max;
  if (name == "softmax") return Method::Softmax;
  if (name == "mu") return Method::Mu;
  if (name == "reinforce") return Method::Reinforce;
  if (name == "distillation") return Method::Distillation;
  throw std::invalid_argument("unknown method '" + name + "'");
}

bool is_set_objective(Method m) { return m != Method::Reinforce && m != Method::Distillation; }

Objective objective_of(Method m) {
  switch (m) {
    case Method::Sum: return Objective::Sum;
    case Method::Max: return Objective::Max;
    case Method::Softmax: return Objective::Softmax;
    case Method::Mu: return Objective::Mu;
    default: throw std::invalid_argument("method '" + to_string(m) + "' is not a set objective");
  }
}

json LocationEnv::to_json() const {
  return {{"id", "location_game"}, {"n", n}, {"k", k}, {"k_opp", k_opp}, {"alpha", alpha}, {"beta", beta}};
}

LocationEnv LocationEnv::from_json(const json& j) {
  LocationEnv e;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key != "id" && key != "n" && key != "k" && key != "k_opp" && key != "alpha" && key != "beta") {
      throw ConfigError("env: unknown key '" + key + "'");
    }
  }
  try {
    e.n = j.value("n", e.n);
    e.k = j.value("k", e.k);
    e.k_opp = j.value("k_opp", e.k_opp);
    e.alpha = j.value("alpha", e.alpha);
    e.beta = j.value("beta", e.beta);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("env: ") + ex.what());
  }
  if (e.n < 1) throw ConfigError("env: key 'n' must be >= 1");
  if (e.k < 1 || e.k > e.n * e.n) throw ConfigError("env: key 'k' must be in [1, n*n]");
  if (e.k_opp > e.n * e.n) throw ConfigError("env: key 'k_opp' must be <= n*n");
  if (!(e.alpha > 0.0)) throw ConfigError("env: key 'alpha' must be positive");
  if (!(e.beta > 0.0)) throw ConfigError("env: key 'beta' must be positive");
  return e;
}

bool is_location_env(const json& env) {
  return env.is_object() && env.contains("id") && env.at("id").is_string() && env.at("id") == "location_game";
}

json to_json(const TrainConfig& c) {
  return {{"env", c.env},
          {"method", to_string(c.method)},
          {"m", c.m},
          {"outcomes", c.outcomes},
          {"minibatch", c.minibatch},
          {"iterations", c.iterations},
          {"learning_rate", c.learning_rate},
          {"l2", c.l2},
          {"temperature", c.temperature},
          {"sigma_velocity", c.noise.sigma_velocity},
          {"sigma_angle", c.noise.sigma_angle},
          {"hidden", c.hidden},
          {"seed", c.seed},
          {"checkpoint_every", c.checkpoint_every},
          {"turn", c.turn},
          {"grid", c.grid},
          {"planner_budget", c.planner_budget},
          {"exploration", c.exploration},
          {"dataset_states", c.dataset_states}};
}

void write_metrics_header(std::ostream& out) { out << "iteration,objective,grad_norm,wall_clock\n"; }

void write_metric_row(std::ostream& out, const MetricRow& row) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,", row.iteration, row.objective, row.grad_norm);
  out << buf;
  if (row.wall_clock >= 0.0) {
    std::snprintf(buf, sizeof buf, "%.6f", row.wall_clock);
    out << buf;
  }
  out << '\n';
}

namespace {

void check_common(const TrainConfig& c) {
  if (c.m < 1) throw ConfigError("key 'm' must be >= 1");
  if (c.minibatch < 1) throw ConfigError("key 'minibatch' must be >= 1");
  if (!(c.learning_rate > 0.0)) throw ConfigError("key 'learning_rate' must be positive");
  if (c.l2 < 0.0) throw ConfigError("key 'l2' must be non-negative");
  if (!(c.temperature > 0.0)) throw ConfigError("key 'temperature' must be positive");
  if (c.turn != 1 && c.turn != -1) throw ConfigError("key 'turn' must be -1 or 1");
  for (std::size_t h : c.hidden) {
    if (h < 1) throw ConfigError("key 'hidden' entries must be >= 1");
  }
}

nn::NetworkSpec build_spec(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output,
                           nn::Activation out_act) {
  nn::NetworkSpec spec;
  spec.input_size = input;
  for (std::size_t h : hidden) spec.layers.push_back({h, nn::Activation::Relu, 0});
  spec.layers.push_back({output, out_act, 0});
  return spec;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Shared optimisation loop. `item` computes one minibatch element and
/// returns its objective value; `backward` then folds its contribution into
/// the gradient. Items are evaluated in parallel, reduced in index order.
template <typename Item>
TrainResult run_loop(const TrainConfig& cfg, const TrainHooks& hooks, nn::Checkpoint ckpt, bool ascend,
                     const std::function<Item(std::size_t iteration, std::size_t index, const nn::Network&)>& item,
                     const std::function<double(const Item&)>& value,
                     const std::function<void(const Item&, const nn::Network&, std::span<double>)>& backward) {
  TrainResult result;
  const auto start = std::chrono::steady_clock::now();
  std::vector<Item> items(cfg.minibatch);
  std::vector<double> grad(ckpt.net.params().size());
  std::vector<double> step(grad.size());
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const nn::Network& net = ckpt.net;
    parallel_for(cfg.minibatch, cfg.threads, [&](std::size_t b) { items[b] = item(it, b, net); });
    std::fill(grad.begin(), grad.end(), 0.0);
    double objective = 0.0;
    for (std::size_t b = 0; b < cfg.minibatch; ++b) {
      backward(items[b], net, grad);
      objective += value(items[b]);
    }
    const double inv = 1.0 / static_cast<double>(cfg.minibatch);
    for (double& g : grad) g *= inv;
    objective *= inv;
    for (std::size_t p = 0; p < grad.size(); ++p) step[p] = ascend ? -grad[p] : grad[p];
    try {
      nn::adam_step(ckpt.net, ckpt.adam, step);
    } catch (const NumericalError&) {
      if (hooks.on_failure) hooks.on_failure(ckpt);
      throw;
    }
    ckpt.iteration = it + 1;
    MetricRow row{it + 1, objective, norm(grad), -1.0};
    if (hooks.record_wall_clock) {
      row.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    result.metrics.push_back(row);
    if (hooks.on_metric) hooks.on_metric(row);
    if (cfg.checkpoint_every > 0 && ckpt.iteration % cfg.checkpoint_every == 0 && hooks.on_checkpoint) {
      hooks.on_checkpoint(ckpt);
    }
  }
  result.checkpoint = std::move(ckpt);
  return result;
}

/// Per-iteration stream, distinct from the initialization stream.
Rng item_rng(const TrainConfig& cfg, std::size_t iteration, std::size_t index) {
  return stream_rng(mix_seed(cfg.seed, iteration + 1), index);
}

nn::Checkpoint init_checkpoint(const TrainConfig& cfg, const nn::NetworkSpec& spec, json meta) {
  Rng init = stream_rng(mix_seed(cfg.seed, 0), 0);
  nn::Checkpoint ckpt;
  ckpt.net = nn::init_glorot(spec, init);
  ckpt.adam = nn::AdamState::for_network(ckpt.net, cfg.learning_rate, cfg.l2);
  ckpt.seed = cfg.seed;
  ckpt.iteration = 0;
  meta["method"] = to_string(cfg.method);
  meta["env"] = cfg.env;
  meta["train"] = to_json(cfg);
  ckpt.meta = std::move(meta);
  return ckpt;
}

struct ContinuousItem {
  nn::ForwardTape tape;
  std::vector<double> output_grad;
  double utility = 0.0;
};

struct DiscreteItem {
  nn::ForwardTape tape;
  std::vector<double> logit_grad;
  double objective = 0.0;
};

}  // namespace

TrainResult train_continuous(const TrainConfig& cfg, const TrainHooks& hooks) {
  check_common(cfg);
  if (!is_set_objective(cfg.method)) {
    throw ConfigError("key 'method': '" + to_string(cfg.method) + "' is not a continuous set objective");
  }
  if (cfg.outcomes < 1) throw ConfigError("key 'outcomes' must be >= 1");
  const std::unique_ptr<ContinuousDomain> domain = make_continuous_domain(cfg.env);
  const Objective kind = objective_of(cfg.method);
  const nn::NetworkSpec spec = build_spec(domain->feature_size(), cfg.hidden, 2 * cfg.m, nn::Activation::Sigmoid);
  nn::Checkpoint ckpt = init_checkpoint(cfg, spec, {{"generator", "continuous"}, {"m", cfg.m}, {"turn", cfg.turn}});

  auto item = [&](std::size_t it, std::size_t b, const nn::Network& net) {
    Rng rng = item_rng(cfg, it, b);
    const ContinuousInstance inst = domain->instance(domain->sample_state(rng));
    ContinuousItem out;
    out.tape = net.forward(inst.features);
    const std::vector<ContinuousAction> actions = objectives::decode_actions(out.tape.output(), cfg.turn);
    SampleSet samples;
    for (const auto& a : actions) {
      for (std::size_t o = 0; o < cfg.outcomes; ++o) {
        const ContinuousAction executed = apply_execution_noise(cfg.noise, a, rng);
        samples.add(executed, inst.reward(executed));
      }
    }
    objectives::UtilityBreakdown u;
    out.output_grad = objectives::continuous_output_gradient(out.tape.output(), samples, cfg.noise, kind,
                                                             cfg.temperature, cfg.turn, nullptr, &u);
    out.utility = u.total;
    return out;
  };
  return run_loop<ContinuousItem>(
      cfg, hooks, std::move(ckpt), true, item, [](const ContinuousItem& i) { return i.utility; },
      [](const ContinuousItem& i, const nn::Network& net, std::span<double> g) {
        net.accumulate_backward(i.tape, i.output_grad, g);
      });
}

TrainResult train_discrete(const TrainConfig& cfg, const TrainHooks& hooks) {
  check_common(cfg);
  if (cfg.method == Method::Distillation) throw ConfigError("key 'method': distillation needs a continuous env");
  const LocationEnv env = LocationEnv::from_json(cfg.env);
  const std::size_t cells = env.n * env.n;
  const bool reinforce = cfg.method == Method::Reinforce;
  const std::size_t heads = reinforce ? 1 : cfg.m;
  const nn::NetworkSpec spec = build_spec(cells, cfg.hidden, heads * cells, nn::Activation::Linear);
  nn::Checkpoint ckpt =
      init_checkpoint(cfg, spec, {{"generator", "discrete"}, {"m", cfg.m}, {"cells", cells}, {"k", env.k}});
  const Objective kind = reinforce ? Objective::Sum : objective_of(cfg.method);

  auto item = [&](std::size_t it, std::size_t b, const nn::Network& net) {
    Rng rng = item_rng(cfg, it, b);
    const location::GridState grid = location::sample_grid(env.n, env.alpha, env.beta, rng);
    const std::vector<std::size_t> opp = location::opponent_cells(grid, env.k_opp);
    DiscreteItem out;
    out.tape = net.forward(location_features(grid));
    const objectives::HeadPolicies pol = objectives::policies_from_logits(out.tape.output(), heads, cells);
    std::vector<DiscreteAction> sampled;
    std::vector<double> q;
    for (std::size_t i = 0; i < cfg.m; ++i) {
      sampled.push_back(objectives::sample_head_action(pol.head(reinforce ? 0 : i), env.k, rng));
      q.push_back(location::reward(grid, sampled.back(), opp));
    }
    if (reinforce) {
      out.logit_grad = objectives::reinforce_gradient(pol.head(0), sampled, q);
      double mean = 0.0;
      for (double r : q) mean += r;
      out.objective = mean / static_cast<double>(q.size());
    } else {
      const std::vector<double> w = objectives::discrete_score_weights(kind, q, cfg.temperature);
      out.logit_grad.assign(heads * cells, 0.0);
      for (std::size_t i = 0; i < heads; ++i) {
        if (w[i] == 0.0) continue;
        const std::vector<double> g = objectives::head_log_prob_grad(pol.head(i), sampled[i]);
        for (std::size_t c = 0; c < cells; ++c) out.logit_grad[i * cells + c] = w[i] * g[c];
      }
      out.objective = objectives::utility(kind, q, cfg.temperature).total;
    }
    return out;
  };
  return run_loop<DiscreteItem>(
      cfg, hooks, std::move(ckpt), true, item, [](const DiscreteItem& i) { return i.objective; },
      [](const DiscreteItem& i, const nn::Network& net, std::span<double> g) {
        net.accumulate_backward(i.tape, i.logit_grad, g);
      });
}

std::vector<double> distillation_target(const OutcomeReward& reward, std::size_t grid, std::size_t budget,
                                        double exploration, const ExecutionModel& noise, int turn, Rng& rng) {
  std::vector<ContinuousAction> candidates;
  candidates.reserve(grid * grid);
  for (std::size_t c = 0; c < grid * grid; ++c) candidates.push_back(gen::grid_cell_center(c, grid, turn));
  planning::PlanOptions opts;
  opts.budget = budget;
  opts.exploration = exploration;
  opts.keep_log = true;
  const planning::PlannerResult res =
      planning::kr_ucb_plan(reward, candidates, opts, noise, planning::ExpansionConfig::disabled(), rng);
  std::vector<double> target(candidates.size(), 0.0);
  for (const auto& row : res.log) target[row.candidate] += 1.0;
  for (double& t : target) t /= static_cast<double>(res.log.size());
  return target;
}

TrainResult train_policy_baseline(const TrainConfig& cfg, const TrainHooks& hooks) {
  check_common(cfg);
  if (cfg.grid < 1) throw ConfigError("key 'grid' must be >= 1");
  if (cfg.m > cfg.grid * cfg.grid) throw ConfigError("key 'm' must be <= grid*grid");
  if (cfg.planner_budget < 1) throw ConfigError("key 'planner_budget' must be >= 1");
  if (cfg.dataset_states < 1) throw ConfigError("key 'dataset_states' must be >= 1");
  const std::unique_ptr<ContinuousDomain> domain = make_continuous_domain(cfg.env);
  const std::size_t cells = cfg.grid * cfg.grid;
  const nn::NetworkSpec spec = build_spec(domain->feature_size(), cfg.hidden, cells, nn::Activation::Linear);
  nn::Checkpoint ckpt = init_checkpoint(
      cfg, spec, {{"generator", "policy_grid"}, {"m", cfg.m}, {"grid", cfg.grid}, {"turn", cfg.turn}});

  struct Example {
    std::vector<double> features;
    std::vector<double> target;
  };
  std::vector<Example> data(cfg.iterations == 0 ? 0 : cfg.dataset_states);
  const std::uint64_t data_seed = mix_seed(cfg.seed, ~std::uint64_t{0});
  parallel_for(data.size(), cfg.threads, [&](std::size_t s) {
    Rng rng = stream_rng(data_seed, s);
    ContinuousInstance inst = domain->instance(domain->sample_state(rng));
    data[s].target = distillation_target(inst.reward, cfg.grid, cfg.planner_budget, cfg.exploration, cfg.noise,
                                         cfg.turn, rng);
    data[s].features = std::move(inst.features);
  });

  auto item = [&](std::size_t it, std::size_t b, const nn::Network& net) {
    Rng rng = item_rng(cfg, it, b);
    const Example& ex = data[std::uniform_int_distribution<std::size_t>(0, data.size() - 1)(rng)];
    DiscreteItem out;
    out.tape = net.forward(ex.features);
    objectives::DistillationResult d = objectives::distillation_loss_gradient(out.tape.output(), ex.target, cfg.l2);
    out.logit_grad = std::move(d.logit_grad);
    out.objective = d.loss;
    return out;
  };
  return run_loop<DiscreteItem>(
      cfg, hooks, std::move(ckpt), false, item, [](const DiscreteItem& i) { return i.objective; },
      [](const DiscreteItem& i, const nn::Network& net, std::span<double> g) {
        net.accumulate_backward(i.tape, i.logit_grad, g);
      });
}

TrainResult train(const TrainConfig& cfg, const TrainHooks& hooks) {
  if (is_location_env(cfg.env)) return train_discrete(cfg, hooks);
  if (cfg.method == Method::Distillation) return train_policy_baseline(cfg, hooks);
  if (cfg.method == Method::Reinforce) throw ConfigError("key 'method': reinforce is only defined for location_game");
  return train_continuous(cfg, hooks);
}

}  // namespace mugen::training
