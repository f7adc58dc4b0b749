#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mugen/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Candidate-action generator training and evaluation"};
  app.set_version_flag("--version", MUGEN_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  mugen::cli::GlobalOptions opts;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the config's seed");
  app.add_option("--threads", opts.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--out", opts.out, "Directory that receives run directories");
  app.add_flag("--force", opts.force, "Overwrite an existing run directory");

  std::string config;
  std::vector<std::string> checkpoints;

  auto* train = app.add_subcommand("train", "Train a generator");
  train->add_option("config", config, "Training config (JSON)")->required();
  train->add_flag("--wall-clock", opts.wall_clock, "Record elapsed seconds in metrics.csv");

  auto* eval = app.add_subcommand("eval", "Evaluate generators under a planner budget sweep");
  eval->add_option("config", config, "Evaluation config (JSON)")->required();
  eval->add_option("--checkpoint", checkpoints, "Additional generator checkpoint(s)");

  auto* analyze = app.add_subcommand("analyze", "Coverage maps and diversity of generators");
  analyze->add_option("config", config, "Analysis config (JSON)")->required();
  analyze->add_option("--checkpoint", checkpoints, "Additional generator checkpoint(s)");

  auto* sweep = app.add_subcommand("sweep", "Grid of short train+eval runs");
  sweep->add_option("config", config, "Sweep config (JSON)")->required();

  auto* corpus = app.add_subcommand("corpus", "Write a seeded evaluation corpus");
  corpus->add_option("config", config, "Corpus config (JSON)")->required();

  auto* plan = app.add_subcommand("plan", "Run one planner episode and export its sample log");
  plan->add_option("config", config, "Plan config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*seed_opt) opts.seed = seed;

  try {
    mugen::cli::RunOutput out;
    if (*train) out = mugen::cli::cmd_train(config, opts);
    else if (*eval) out = mugen::cli::cmd_eval(config, checkpoints, opts);
    else if (*analyze) out = mugen::cli::cmd_analyze(config, checkpoints, opts);
    else if (*sweep) out = mugen::cli::cmd_sweep(config, opts);
    else if (*corpus) out = mugen::cli::cmd_corpus(config, opts);
    else if (*plan) out = mugen::cli::cmd_plan(config, opts);
    std::cout << out.dir << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return mugen::cli::exit_code_for(e);
  }
}
