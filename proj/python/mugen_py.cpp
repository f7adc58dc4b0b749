#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mugen/commands.hpp"
#include "mugen/config.hpp"
#include "mugen/curling.hpp"
#include "mugen/eval.hpp"
#include "mugen/kernel_regression.hpp"
#include "mugen/location_game.hpp"
#include "mugen/objectives.hpp"
#include "mugen/planners.hpp"
#include "mugen/training.hpp"

namespace py = pybind11;
using namespace mugen;

namespace {

using Action = std::tuple<double, double, int>;
using StoneTuple = std::tuple<double, double, std::string>;

ContinuousAction to_action(const Action& a) { return {std::get<0>(a), std::get<1>(a), std::get<2>(a)}; }

curling::CurlingState to_state(const std::vector<StoneTuple>& stones) {
  curling::CurlingState s;
  for (const auto& [x, y, team] : stones) {
    if (team != "hammer" && team != "opponent") throw std::invalid_argument("team must be 'hammer' or 'opponent'");
    s.stones.push_back({x, y, team == "hammer" ? curling::Team::Hammer : curling::Team::Opponent});
  }
  return s;
}

std::vector<StoneTuple> from_state(const curling::CurlingState& s) {
  std::vector<StoneTuple> out;
  for (const auto& st : s.stones) out.emplace_back(st.x, st.y, st.team == curling::Team::Hammer ? "hammer" : "opponent");
  return out;
}

location::GridState to_grid(const std::vector<double>& values) {
  std::size_t n = 0;
  while (n * n < values.size()) ++n;
  if (n * n != values.size()) throw std::invalid_argument("grid values must form a square");
  return {n, values};
}

}  // namespace

PYBIND11_MODULE(_mugen, m) {
  m.doc() = "Candidate-action generators for sample-based planning";
  m.attr("__version__") = MUGEN_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ArtifactError>(m, "ArtifactError", PyExc_OSError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "utility",
      [](const std::string& kind, const std::vector<double>& q, double temperature) {
        auto u = objectives::utility(objectives::parse_objective(kind), q, temperature);
        return std::make_pair(u.total, u.coefficients);
      },
      py::arg("kind"), py::arg("q"), py::arg("temperature") = 0.1,
      "Set utility and per-action coefficients of the action values q.");

  m.def(
      "kernel_estimate",
      [](const std::vector<std::pair<Action, double>>& samples, const Action& query, double sigma_velocity,
         double sigma_angle) {
        SampleSet s;
        for (const auto& [a, r] : samples) s.add(to_action(a), r);
        auto e = kr::estimate(s, to_action(query), ExecutionModel(sigma_velocity, sigma_angle));
        return std::make_pair(e.q_hat, e.density);
      },
      py::arg("samples"), py::arg("query"), py::arg("sigma_velocity") = 0.02, py::arg("sigma_angle") = 0.02,
      "Kernel-regression value estimate and density at a query action.");

  m.def(
      "ucb_plan",
      [](const std::vector<Action>& candidates, const std::function<double(std::size_t)>& reward, std::size_t budget,
         double exploration, std::uint64_t seed) {
        std::vector<ContinuousAction> cands;
        for (const auto& c : candidates) cands.push_back(to_action(c));
        planning::PullFn pull = [&](std::size_t i, Rng&) { return std::make_pair(cands[i], reward(i)); };
        planning::PlanOptions opts;
        opts.budget = budget;
        opts.exploration = exploration;
        Rng rng = stream_rng(seed, 0);
        return planning::ucb_run(cands, pull, opts, rng).recommended_index;
      },
      py::arg("candidates"), py::arg("reward"), py::arg("budget"), py::arg("exploration") = 1.0, py::arg("seed") = 0,
      "Run UCB over fixed candidates; reward(i) draws one outcome of candidate i. Returns the recommended index.");

  m.def(
      "sample_grid",
      [](std::size_t n, double alpha, double beta, std::uint64_t seed) {
        Rng rng = stream_rng(seed, 0);
        return location::sample_grid(n, alpha, beta, rng).values;
      },
      py::arg("n") = 5, py::arg("alpha") = 3.0, py::arg("beta") = 1.0, py::arg("seed") = 0,
      "Row-major values of a random location-game grid.");
  m.def(
      "opponent_cells", [](const std::vector<double>& v, std::size_t k) { return location::opponent_cells(to_grid(v), k); },
      py::arg("values"), py::arg("k_opp"));
  m.def(
      "location_reward",
      [](const std::vector<double>& v, const std::vector<std::size_t>& player, const std::vector<std::size_t>& opp) {
        return location::reward(to_grid(v), {player}, opp);
      },
      py::arg("values"), py::arg("player"), py::arg("opponent"));
  m.def(
      "brute_force_best",
      [](const std::vector<double>& v, std::size_t k, const std::vector<std::size_t>& opp) {
        auto b = location::brute_force_best(to_grid(v), k, opp);
        return std::make_pair(b.action.cells, b.reward);
      },
      py::arg("values"), py::arg("k"), py::arg("opponent"));

  m.def(
      "sample_hammer_state",
      [](std::uint64_t seed) {
        Rng rng = stream_rng(seed, 0);
        return from_state(curling::sample_hammer_state(rng, curling::SheetConfig{}));
      },
      py::arg("seed") = 0, "Stones as (x, y, team) tuples.");
  m.def(
      "simulate_shot",
      [](const std::vector<StoneTuple>& stones, const Action& action) {
        return from_state(curling::simulate_shot(to_state(stones), to_action(action), curling::SheetConfig{}));
      },
      py::arg("stones"), py::arg("action"));
  m.def(
      "score", [](const std::vector<StoneTuple>& stones) { return curling::score(to_state(stones), curling::SheetConfig{}); },
      py::arg("stones"));
  m.def(
      "swap_teams", [](const std::vector<StoneTuple>& stones) { return from_state(curling::swap_teams(to_state(stones))); },
      py::arg("stones"));

  m.def(
      "diversity",
      [](const std::vector<std::vector<Action>>& sets) {
        std::vector<std::vector<ContinuousAction>> s;
        for (const auto& set : sets) {
          s.emplace_back();
          for (const auto& a : set) s.back().push_back(to_action(a));
        }
        return eval::diversity_metric(s);
      },
      py::arg("sets"), "Mean pairwise distance between generated actions, averaged over states.");

  m.def(
      "train",
      [](const std::string& config) {
        const config::Document doc = config::parse(config);
        const training::TrainConfig cfg = config::parse_train(config::Section(doc, doc.data, ""));
        training::TrainResult res;
        {
          py::gil_scoped_release release;
          res = training::train(cfg);
        }
        std::vector<std::tuple<std::size_t, double, double>> metrics;
        for (const auto& r : res.metrics) metrics.emplace_back(r.iteration, r.objective, r.grad_norm);
        return std::make_pair(nn::checkpoint_to_json(res.checkpoint).dump(), metrics);
      },
      py::arg("config"));

  m.def(
      "run",
      [](const std::string& command, const std::string& config, const std::string& out,
         std::optional<std::uint64_t> seed, unsigned threads, bool force, const std::vector<std::string>& checkpoints) {
        cli::GlobalOptions opts;
        opts.seed = seed;
        opts.threads = threads;
        opts.out = out;
        opts.force = force;
        py::gil_scoped_release release;
        cli::RunOutput r;
        if (command == "train") r = cli::cmd_train(config, opts);
        else if (command == "eval") r = cli::cmd_eval(config, checkpoints, opts);
        else if (command == "analyze") r = cli::cmd_analyze(config, checkpoints, opts);
        else if (command == "sweep") r = cli::cmd_sweep(config, opts);
        else if (command == "corpus") r = cli::cmd_corpus(config, opts);
        else if (command == "plan") r = cli::cmd_plan(config, opts);
        else throw ConfigError("unknown command '" + command + "'");
        return std::make_pair(r.dir, r.files);
      },
      py::arg("command"), py::arg("config"), py::arg("out"), py::arg("seed"), py::arg("threads"), py::arg("force"),
      py::arg("checkpoints"));
}
