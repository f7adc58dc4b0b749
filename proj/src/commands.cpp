#include "mugen/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>

#include "mugen/config.hpp"
#include "mugen/continuous_domains.hpp"
#include "mugen/eval.hpp"
#include "mugen/generators.hpp"
#include "mugen/network.hpp"
#include "mugen/planners.hpp"
#include "mugen/training.hpp"

namespace mugen::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const ArtifactError*>(&e)) return 3;
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  return 1;
}

namespace {

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class RunDir {
 public:
  RunDir(const GlobalOptions& opts, const std::string& command, const json& identity, std::uint64_t seed,
         const json& config, std::vector<std::string> outputs, std::vector<std::string> diagnostics = {})
      : outputs_(std::move(outputs)) {
    const std::string hash = config::config_hash({{"command", command}, {"identity", identity}});
    dir_ = (fs::path(opts.out) / (hash + "-s" + std::to_string(seed))).string();
    std::error_code ec;
    if (fs::exists(dir_, ec)) {
      if (!opts.force) throw ArtifactError("run directory " + dir_ + " already exists (use --force to overwrite)");
      fs::remove_all(dir_, ec);
      if (ec) throw ArtifactError("cannot clear " + dir_ + ": " + ec.message());
    }
    fs::create_directories(dir_, ec);
    if (ec) throw ArtifactError("cannot create " + dir_ + ": " + ec.message());
    json manifest = {{"format", "mugen-manifest"},
                     {"artifact_version", MUGEN_VERSION},
                     {"checkpoint_version", nn::kCheckpointVersion},
                     {"command", command},
                     {"config_hash", hash},
                     {"seed", seed},
                     {"config", config},
                     {"outputs", outputs_}};
    if (!diagnostics.empty()) manifest["written_on_failure"] = diagnostics;
    std::ofstream out(path("manifest.json"), std::ios::binary);
    if (!out) throw ArtifactError("cannot write manifest in " + dir_);
    out << manifest.dump(2) << '\n';
  }

  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

  void write(const std::string& name, const std::function<void(std::ostream&)>& fn) const {
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw ArtifactError("cannot write " + path(name));
    fn(out);
    if (!out) throw ArtifactError("write failed for " + path(name));
  }

  RunOutput result() const {
    std::vector<std::string> files{"manifest.json"};
    files.insert(files.end(), outputs_.begin(), outputs_.end());
    return {dir_, files};
  }

 private:
  std::string dir_;
  std::vector<std::string> outputs_;
};

json without_seed(json j) {
  if (j.is_object()) j.erase("seed");
  return j;
}

struct LoadedCorpus {
  eval::Corpus corpus;
  json identity;
};

LoadedCorpus load_corpus_source(const config::CorpusSource& src, unsigned threads) {
  LoadedCorpus out;
  if (!src.path.empty()) {
    out.corpus = eval::corpus_from_json([&] {
      try {
        return json::parse(read_bytes(src.path));
      } catch (const json::exception& e) {
        throw ArtifactError("corpus " + src.path + ": " + e.what());
      }
    }());
    out.identity = {{"file", fnv1a_hex(read_bytes(src.path))}};
  } else {
    out.corpus = eval::make_corpus(src.env, src.states, src.seed, threads);
    out.identity = {{"env", src.env}, {"states", src.states}, {"seed", src.seed}};
  }
  return out;
}

struct LoadedGenerator {
  config::GeneratorEntry entry;
  std::unique_ptr<gen::ContinuousGenerator> continuous;
  std::unique_ptr<gen::DiscreteGenerator> discrete;
  json identity;
};

LoadedGenerator load_generator(config::GeneratorEntry entry, bool location, std::size_t feature_size) {
  LoadedGenerator g;
  if (entry.checkpoint.empty()) {
    if (location) throw ConfigError("generator '" + entry.name + "': fixed generators are continuous only");
    g.continuous = gen::make_fixed_generator(entry.fixed);
    g.identity = entry.fixed;
  } else {
    const nn::Checkpoint ckpt = nn::load_checkpoint(entry.checkpoint);
    if (ckpt.net.input_size() != feature_size) {
      throw ArtifactError("checkpoint " + entry.checkpoint + " expects " + std::to_string(ckpt.net.input_size()) +
                          " features but the corpus environment provides " + std::to_string(feature_size));
    }
    if (location) {
      g.discrete = std::make_unique<gen::DiscreteGenerator>(gen::load_discrete_generator(ckpt));
    } else {
      g.continuous = gen::load_continuous_generator(ckpt);
    }
    if (entry.objective.empty()) entry.objective = ckpt.meta.value("method", std::string("unknown"));
    g.identity = {{"checkpoint", fnv1a_hex(read_bytes(entry.checkpoint))}};
  }
  g.identity["name"] = entry.name;
  g.identity["objective"] = entry.objective;
  g.entry = std::move(entry);
  return g;
}

std::vector<config::GeneratorEntry> with_cli_checkpoints(std::vector<config::GeneratorEntry> entries,
                                                         const std::vector<std::string>& checkpoints) {
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    config::GeneratorEntry e;
    e.name = "checkpoint" + std::to_string(i + 1);
    e.checkpoint = checkpoints[i];
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw ConfigError("no generators: list them under 'generators' or pass --checkpoint");
  return entries;
}

std::size_t feature_size_of(const json& env) {
  if (training::is_location_env(env)) {
    const auto le = training::LocationEnv::from_json(env);
    return le.n * le.n;
  }
  return make_continuous_domain(env)->feature_size();
}

std::uint64_t effective_seed(std::uint64_t config_seed, const GlobalOptions& opts) {
  return opts.seed ? *opts.seed : config_seed;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunOutput cmd_train(const std::string& config_path, const GlobalOptions& opts) {
  const config::Document doc = config::load(config_path);
  training::TrainConfig cfg = config::parse_train(config::Section(doc, doc.data, ""));
  cfg.seed = effective_seed(cfg.seed, opts);
  cfg.threads = opts.threads;
  const json canonical = training::to_json(cfg);

  std::vector<std::string> outputs{"metrics.csv", "checkpoint.json"};
  if (cfg.checkpoint_every > 0) {
    for (std::size_t it = cfg.checkpoint_every; it <= cfg.iterations; it += cfg.checkpoint_every) {
      outputs.push_back("checkpoint-" + std::to_string(it) + ".json");
    }
  }
  const RunDir run(opts, "train", without_seed(canonical), cfg.seed, canonical, outputs, {"checkpoint-failed.json"});

  std::ofstream metrics(run.path("metrics.csv"), std::ios::binary);
  if (!metrics) throw ArtifactError("cannot write " + run.path("metrics.csv"));
  training::write_metrics_header(metrics);
  training::TrainHooks hooks;
  hooks.record_wall_clock = opts.wall_clock;
  hooks.on_metric = [&](const training::MetricRow& row) { training::write_metric_row(metrics, row); };
  hooks.on_checkpoint = [&](const nn::Checkpoint& c) {
    nn::save_checkpoint(c, run.path("checkpoint-" + std::to_string(c.iteration) + ".json"));
  };
  hooks.on_failure = [&](const nn::Checkpoint& c) {
    metrics.flush();
    nn::save_checkpoint(c, run.path("checkpoint-failed.json"));
  };
  const training::TrainResult result = training::train(cfg, hooks);
  metrics.close();
  nn::save_checkpoint(result.checkpoint, run.path("checkpoint.json"));
  return run.result();
}

RunOutput cmd_eval(const std::string& config_path, const std::vector<std::string>& checkpoints,
                   const GlobalOptions& opts) {
  const config::Document doc = config::load(config_path);
  config::EvalConfig cfg = config::parse_eval(config::Section(doc, doc.data, ""));
  cfg.seed = effective_seed(cfg.seed, opts);
  const std::vector<config::GeneratorEntry> entries = with_cli_checkpoints(cfg.generators, checkpoints);
  const LoadedCorpus corpus = load_corpus_source(cfg.corpus, opts.threads);
  const bool location = training::is_location_env(corpus.corpus.env);
  const std::size_t features = feature_size_of(corpus.corpus.env);
  std::vector<LoadedGenerator> gens;
  json identity = {{"config", without_seed(doc.data)}, {"corpus", corpus.identity}, {"generators", json::array()}};
  for (const auto& e : entries) {
    gens.push_back(load_generator(e, location, features));
    identity["generators"].push_back(gens.back().identity);
  }

  eval::EvalReport report;
  if (location) {
    const training::LocationEnv env = training::LocationEnv::from_json(corpus.corpus.env);
    const std::vector<location::GridState> states = eval::grid_states(corpus.corpus);
    for (std::size_t i = 0; i < gens.size(); ++i) {
      eval::EvalReport r = eval::evaluate_discrete(gens[i].entry.name, gens[i].entry.objective, *gens[i].discrete,
                                                   env, states, cfg.seed, opts.threads, i + 1 == gens.size());
      report.append(r);
    }
  } else {
    const auto domain = make_continuous_domain(corpus.corpus.env);
    for (const auto planner : cfg.planners) {
      eval::ContinuousEvalOptions eo;
      eo.planner = planner;
      eo.budgets = cfg.budgets;
      eo.exploration = planner == eval::PlannerKind::Ucb ? cfg.exploration_ucb : cfg.exploration_kr;
      eo.noise = cfg.noise;
      eo.expansion = cfg.expansion;
      eo.eval_samples = cfg.eval_samples;
      eo.seed = cfg.seed;
      eo.threads = opts.threads;
      for (const auto& g : gens) {
        report.append(eval::evaluate_continuous({g.entry.name, g.entry.objective, g.continuous.get()}, *domain,
                                                corpus.corpus.states, eo));
      }
    }
  }

  json config = doc.data;
  config["seed"] = cfg.seed;
  const RunDir run(opts, "eval", identity, cfg.seed, config, {"report.csv", "per_state.csv", "plot_data.csv"});
  run.write("report.csv", [&](std::ostream& o) { eval::write_report_csv(o, report); });
  run.write("per_state.csv", [&](std::ostream& o) { eval::write_per_state_csv(o, report); });
  run.write("plot_data.csv", [&](std::ostream& o) { eval::write_plot_data(o, report); });
  return run.result();
}

RunOutput cmd_analyze(const std::string& config_path, const std::vector<std::string>& checkpoints,
                      const GlobalOptions& opts) {
  const config::Document doc = config::load(config_path);
  config::AnalyzeConfig cfg = config::parse_analyze(config::Section(doc, doc.data, ""));
  cfg.seed = effective_seed(cfg.seed, opts);
  const std::vector<config::GeneratorEntry> entries = with_cli_checkpoints(cfg.generators, checkpoints);
  const LoadedCorpus corpus = load_corpus_source(cfg.corpus, opts.threads);
  if (training::is_location_env(corpus.corpus.env)) {
    throw ConfigError(config_path + ": coverage analysis needs a continuous environment corpus");
  }
  const auto domain = make_continuous_domain(corpus.corpus.env);
  std::vector<LoadedGenerator> gens;
  json identity = {{"config", without_seed(doc.data)}, {"corpus", corpus.identity}, {"generators", json::array()}};
  for (const auto& e : entries) {
    gens.push_back(load_generator(e, false, domain->feature_size()));
    identity["generators"].push_back(gens.back().identity);
  }

  struct Analysis {
    eval::CoverageMaps maps;
    double diversity = 0.0;
    double overlap = 0.0;
  };
  std::vector<Analysis> results;
  std::vector<std::string> outputs{"diversity.csv"};
  for (const auto& g : gens) {
    const auto sets = eval::generate_sets(*g.continuous, *domain, corpus.corpus.states, cfg.seed);
    Analysis a;
    a.maps = eval::coverage_analysis(sets, cfg.bins);
    if (g.continuous->count() >= 2) {
      a.diversity = eval::diversity_metric(sets);
      a.overlap = eval::mean_pairwise_overlap(a.maps);
    }
    for (std::size_t i = 0; i < a.maps.maps.size(); ++i) {
      outputs.push_back("coverage-" + g.entry.name + "-slot" + std::to_string(i) + ".csv");
    }
    results.push_back(std::move(a));
  }

  json config = doc.data;
  config["seed"] = cfg.seed;
  const RunDir run(opts, "analyze", identity, cfg.seed, config, outputs);
  run.write("diversity.csv", [&](std::ostream& o) {
    o << "generator,objective,m,diversity,overlap\n";
    for (std::size_t i = 0; i < gens.size(); ++i) {
      o << gens[i].entry.name << ',' << gens[i].entry.objective << ',' << gens[i].continuous->count() << ',';
      if (gens[i].continuous->count() >= 2) o << fmt(results[i].diversity) << ',' << fmt(results[i].overlap);
      else o << ',';
      o << '\n';
    }
  });
  for (std::size_t i = 0; i < gens.size(); ++i) {
    for (std::size_t s = 0; s < results[i].maps.maps.size(); ++s) {
      run.write("coverage-" + gens[i].entry.name + "-slot" + std::to_string(s) + ".csv",
                [&](std::ostream& o) { eval::write_matrix_csv(o, results[i].maps.maps[s], cfg.bins); });
    }
  }
  return run.result();
}

RunOutput cmd_sweep(const std::string& config_path, const GlobalOptions& opts) {
  const config::Document doc = config::load(config_path);
  config::SweepConfig cfg = config::parse_sweep(config::Section(doc, doc.data, ""));
  cfg.seed = effective_seed(cfg.seed, opts);
  const LoadedCorpus corpus = load_corpus_source(cfg.corpus, opts.threads);
  const bool location = training::is_location_env(corpus.corpus.env);
  if (location != training::is_location_env(cfg.train.env) ||
      feature_size_of(corpus.corpus.env) != feature_size_of(cfg.train.env)) {
    throw ConfigError(config_path + ": the corpus environment does not match the training environment");
  }
  auto or_base = [](const std::vector<double>& list, double base) {
    return list.empty() ? std::vector<double>{base} : list;
  };
  const double base_c = cfg.planner == eval::PlannerKind::Ucb ? 1.0 : 0.5;
  const auto cs = or_base(cfg.exploration, base_c);
  const auto taus = or_base(cfg.temperature, cfg.train.temperature);
  const auto lrs = or_base(cfg.learning_rate, cfg.train.learning_rate);
  const auto sigmas = or_base(cfg.sigma, cfg.train.noise.sigma_velocity);

  struct Row {
    double c, tau, lr, sigma;
    eval::ReportRow report;
  };
  std::vector<Row> rows;
  for (double c : cs) {
    for (double tau : taus) {
      for (double lr : lrs) {
        for (double sigma : sigmas) {
          training::TrainConfig tc = cfg.train;
          tc.seed = cfg.seed;
          tc.threads = opts.threads;
          tc.temperature = tau;
          tc.learning_rate = lr;
          tc.noise = ExecutionModel(sigma, sigma);
          const training::TrainResult trained = training::train(tc);
          eval::EvalReport r;
          if (location) {
            const auto env = training::LocationEnv::from_json(corpus.corpus.env);
            r = eval::evaluate_discrete("sweep", training::to_string(tc.method),
                                        gen::load_discrete_generator(trained.checkpoint), env,
                                        eval::grid_states(corpus.corpus), cfg.seed, opts.threads, false);
          } else {
            const auto domain = make_continuous_domain(corpus.corpus.env);
            const auto g = gen::load_continuous_generator(trained.checkpoint);
            eval::ContinuousEvalOptions eo;
            eo.planner = cfg.planner;
            eo.budgets = {cfg.budget};
            eo.exploration = c;
            eo.noise = tc.noise;
            eo.eval_samples = cfg.eval_samples;
            eo.seed = cfg.seed;
            eo.threads = opts.threads;
            r = eval::evaluate_continuous({"sweep", training::to_string(tc.method), g.get()}, *domain,
                                          corpus.corpus.states, eo);
          }
          rows.push_back({c, tau, lr, sigma, r.rows.front()});
        }
      }
    }
  }

  json config = doc.data;
  config["seed"] = cfg.seed;
  const json identity = {{"config", without_seed(doc.data)}, {"corpus", corpus.identity}};
  const RunDir run(opts, "sweep", identity, cfg.seed, config, {"summary.csv"});
  run.write("summary.csv", [&](std::ostream& o) {
    o << "exploration,temperature,learning_rate,sigma,objective,planner,budget,mean,ci,n_states\n";
    for (const auto& r : rows) {
      o << fmt(r.c) << ',' << fmt(r.tau) << ',' << fmt(r.lr) << ',' << fmt(r.sigma) << ',' << r.report.objective
        << ',' << r.report.planner << ',' << r.report.budget << ',' << fmt(r.report.mean) << ','
        << fmt(r.report.ci) << ',' << r.report.n_states << '\n';
    }
  });
  return run.result();
}

RunOutput cmd_corpus(const std::string& config_path, const GlobalOptions& opts) {
  const config::Document doc = config::load(config_path);
  config::CorpusConfig cfg = config::parse_corpus(config::Section(doc, doc.data, ""));
  cfg.seed = effective_seed(cfg.seed, opts);
  const eval::Corpus corpus = eval::make_corpus(cfg.env, cfg.count, cfg.seed, opts.threads);
  const json canonical = {{"env", cfg.env}, {"count", cfg.count}, {"seed", cfg.seed}};
  const RunDir run(opts, "corpus", without_seed(canonical), cfg.seed, canonical, {"corpus.json"});
  eval::save_corpus(corpus, run.path("corpus.json"));
  return run.result();
}

RunOutput cmd_plan(const std::string& config_path, const GlobalOptions& opts) {
  const config::Document doc = config::load(config_path);
  config::PlanConfig cfg = config::parse_plan(config::Section(doc, doc.data, ""));
  cfg.seed = effective_seed(cfg.seed, opts);
  const LoadedCorpus corpus = load_corpus_source(cfg.corpus, opts.threads);
  if (training::is_location_env(corpus.corpus.env)) {
    throw ConfigError(config_path + ": planning needs a continuous environment corpus");
  }
  if (cfg.state_index >= corpus.corpus.states.size()) {
    throw ConfigError(config_path + ":" + std::to_string(std::max<std::size_t>(1, config::line_of(doc, "state_index"))) +
                      ": key 'state_index' is beyond the corpus size " + std::to_string(corpus.corpus.states.size()));
  }
  const auto domain = make_continuous_domain(corpus.corpus.env);
  const LoadedGenerator g = load_generator(cfg.generator, false, domain->feature_size());
  const ContinuousInstance inst = domain->instance(corpus.corpus.states[cfg.state_index]);
  Rng gen_rng = stream_rng(mix_seed(cfg.seed, 1), cfg.state_index);
  const std::vector<ContinuousAction> candidates = g.continuous->generate(inst.features, gen_rng);
  planning::PlanOptions po;
  po.budget = cfg.budget;
  po.exploration = cfg.exploration;
  po.keep_log = true;
  Rng plan_rng = stream_rng(mix_seed(cfg.seed, 2), cfg.state_index);
  const planning::PlannerResult res =
      cfg.planner == eval::PlannerKind::Ucb
          ? planning::ucb_plan(inst.reward, candidates, po, cfg.noise, plan_rng)
          : planning::kr_ucb_plan(inst.reward, candidates, po, cfg.noise, cfg.expansion, plan_rng);

  json config = doc.data;
  config["seed"] = cfg.seed;
  const json identity = {{"config", without_seed(doc.data)}, {"corpus", corpus.identity}, {"generator", g.identity}};
  const RunDir run(opts, "plan", identity, cfg.seed, config, {"sample_log.csv", "candidates.csv"});
  run.write("sample_log.csv", [&](std::ostream& o) { planning::write_sample_log(o, res.log); });
  run.write("candidates.csv", [&](std::ostream& o) {
    o << "candidate,velocity,angle,turn,value,weight,recommended\n";
    for (std::size_t i = 0; i < res.candidates.size(); ++i) {
      const auto& c = res.candidates[i];
      o << i << ',' << fmt(c.action.velocity) << ',' << fmt(c.action.angle) << ',' << c.action.turn << ','
        << fmt(c.value) << ',' << fmt(c.weight) << ',' << (i == res.recommended_index ? 1 : 0) << '\n';
    }
  });
  return run.result();
}

}  // namespace mugen::cli
