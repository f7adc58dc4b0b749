#include <cmath>
#include <sstream>

#include "doctest.h"
#include "mugen/planners.hpp"

using namespace mugen;
using namespace mugen::planning;

namespace {

PlannerResult bernoulli_bandit(std::size_t arms, std::size_t budget, double c, Rng& rng) {
  std::vector<ContinuousAction> cands(arms);
  for (std::size_t i = 0; i < arms; ++i) cands[i] = {double(i) / double(arms), 0.5, 1};
  PullFn pull = [&](std::size_t i, Rng& g) {
    std::bernoulli_distribution b(0.1 * double(i));
    return std::make_pair(cands[i], b(g) ? 1.0 : 0.0);
  };
  PlanOptions opts;
  opts.budget = budget;
  opts.exploration = c;
  return ucb_run(cands, pull, opts, rng);
}

}  // namespace

TEST_CASE("ucb scores") {
  PlannerStats one(1, 1.0);
  one.record(0, 0.5);
  CHECK(ucb_select(one) == 0);

  PlannerStats two(2, 1.0);
  for (int i = 0; i < 3; ++i) two.record(0, 0.5);
  two.record(1, 0.2);
  const double s0 = 0.5 + std::sqrt(std::log(4.0) / 3.0);
  const double s1 = 0.2 + std::sqrt(std::log(4.0) / 1.0);
  CHECK(s0 == doctest::Approx(1.1798).epsilon(1e-4));
  CHECK(s1 == doctest::Approx(1.3774).epsilon(1e-4));
  CHECK(ucb_select(two) == 1);

  PlannerStats unvisited(3, 1.0);
  unvisited.record(0, 10.0);
  unvisited.record(2, 10.0);
  CHECK(ucb_select(unvisited) == 1);
}

TEST_CASE("ucb recommendation ties") {
  PlannerStats s(3, 1.0);
  s.record(0, 1.0);
  s.record(1, 1.0);
  s.record(1, 1.0);
  s.record(2, 0.5);
  CHECK(ucb_recommend(s) == 1);
}

TEST_CASE("ucb plan basics") {
  ExecutionModel model;
  auto reward = [](const ContinuousAction& a) { return a.velocity; };
  Rng rng(1);
  PlanOptions opts;
  opts.budget = 37;
  auto single = ucb_plan(reward, {{0.3, 0.3, 1}}, opts, model, rng);
  CHECK(single.recommended_index == 0);
  CHECK(single.candidates[0].weight == 37.0);

  std::vector<ContinuousAction> many(10, {0.5, 0.5, 1});
  opts.budget = 6;
  auto partial = ucb_plan(reward, many, opts, model, rng);
  double total = 0.0;
  for (const auto& c : partial.candidates) {
    CHECK(c.weight <= 1.0);
    total += c.weight;
  }
  CHECK(total == 6.0);
}

TEST_CASE("ucb finds the best bernoulli arm") {
  int hits = 0;
  for (int run = 0; run < 200; ++run) {
    Rng rng = stream_rng(2024, run);
    hits += bernoulli_bandit(10, 1024, 1.0, rng).recommended_index == 9;
  }
  CHECK(hits >= 190);
}

TEST_CASE("ucb visit counts sum to iterations") {
  Rng rng(3);
  auto r = bernoulli_bandit(5, 100, 1.0, rng);
  double total = 0.0;
  for (const auto& c : r.candidates) total += c.weight;
  CHECK(total == 100.0);
}

TEST_CASE("kr-ucb selection") {
  ExecutionModel model(0.05, 0.05);
  std::vector<ContinuousAction> cands{{0.2, 0.5, 1}, {0.8, 0.5, 1}};
  CHECK(kr_ucb_select(cands, SampleSet{}, 1.0, model) == 0);

  SampleSet one;
  one.add(cands[0], 1.0);
  CHECK(kr_ucb_select(cands, one, 1.0, model) == 1);

  // hand evaluation on three samples
  std::vector<ContinuousAction> pair{{0.45, 0.5, 1}, {0.55, 0.5, 1}};
  SampleSet three;
  three.add({0.44, 0.5, 1}, 0.2);
  three.add({0.50, 0.5, 1}, 0.6);
  three.add({0.56, 0.52, 1}, 0.9);
  double q[2], w[2];
  for (int i = 0; i < 2; ++i) {
    double sw = 0.0, swr = 0.0;
    for (const auto& s : three.entries()) {
      const double k = kr::kernel(model, pair[i], s.outcome);
      sw += k;
      swr += k * s.reward;
    }
    q[i] = swr / sw;
    w[i] = sw;
  }
  for (double c : {0.0, 0.1, 1.0, 50.0}) {
    const double lt = std::log(w[0] + w[1]);
    const double s0 = q[0] + c * std::sqrt(lt / w[0]);
    const double s1 = q[1] + c * std::sqrt(lt / w[1]);
    CHECK(kr_ucb_select(pair, three, c, model) == (s1 > s0 ? 1u : 0u));
  }
}

TEST_CASE("kr-ucb plan") {
  ExecutionModel model(0.05, 0.05);
  auto reward = [](const ContinuousAction& a) { return -std::abs(a.velocity - 0.6); };
  PlanOptions opts;
  opts.budget = 200;
  Rng rng(4);
  auto single = kr_ucb_plan(reward, {{0.4, 0.4, 1}}, opts, model, ExpansionConfig::disabled(), rng);
  CHECK(single.recommended_index == 0);
  CHECK(single.candidates.size() == 1);

  ExpansionConfig exp;
  exp.threshold = 0.0;
  exp.cap = 5;
  auto grown = kr_ucb_plan(reward, {{0.4, 0.4, 1}, {0.9, 0.4, 1}}, opts, model, exp, rng);
  CHECK(grown.candidates.size() == 7);

  // the recommendation holds the largest estimate among informative candidates
  double best = -1e9;
  for (const auto& c : grown.candidates) {
    if (c.weight > 0.0) best = std::max(best, c.value);
  }
  CHECK(grown.candidates[grown.recommended_index].value == best);
}

TEST_CASE("planners are deterministic") {
  ExecutionModel model;
  auto reward = [](const ContinuousAction& a) { return std::sin(5 * a.velocity) * a.angle; };
  std::vector<ContinuousAction> cands{{0.1, 0.2, 1}, {0.5, 0.5, 1}, {0.9, 0.7, 1}};
  PlanOptions opts;
  opts.budget = 64;
  opts.keep_log = true;
  for (int kind = 0; kind < 2; ++kind) {
    Rng a(5), b(5);
    std::ostringstream la, lb;
    if (kind == 0) {
      write_sample_log(la, ucb_plan(reward, cands, opts, model, a).log);
      write_sample_log(lb, ucb_plan(reward, cands, opts, model, b).log);
    } else {
      write_sample_log(la, kr_ucb_plan(reward, cands, opts, model, {}, a).log);
      write_sample_log(lb, kr_ucb_plan(reward, cands, opts, model, {}, b).log);
    }
    CHECK(la.str() == lb.str());
  }
}

TEST_CASE("kr-ucb with expansion beats ucb on an off-grid optimum") {
  ExecutionModel model(0.02, 0.02);
  const double width = 0.06;
  std::vector<ContinuousAction> cands;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) cands.push_back({0.125 + 0.25 * i, 0.125 + 0.25 * j, 1});
  }
  // expected reward under noise, Gaussian bump convolved with the noise
  const double s2 = width * width + 0.02 * 0.02;
  double ucb_total = 0.0, kr_total = 0.0;
  const int states = 100;
  for (int s = 0; s < states; ++s) {
    Rng place = stream_rng(77, s);
    std::uniform_real_distribution<double> u(0.25, 0.75);
    const double cv = u(place), ca = u(place);
    auto reward = [&](const ContinuousAction& a) {
      const double d2 = (a.velocity - cv) * (a.velocity - cv) + (a.angle - ca) * (a.angle - ca);
      return std::exp(-d2 / (2 * width * width));
    };
    auto q = [&](const ContinuousAction& a) {
      const double d2 = (a.velocity - cv) * (a.velocity - cv) + (a.angle - ca) * (a.angle - ca);
      return width * width / s2 * std::exp(-d2 / (2 * s2));
    };
    PlanOptions opts;
    opts.budget = 512;
    opts.exploration = 0.5;
    Rng r1 = stream_rng(78, s), r2 = stream_rng(78, s);
    ucb_total += q(ucb_plan(reward, cands, opts, model, r1).recommended);
    kr_total += q(kr_ucb_plan(reward, cands, opts, model, {}, r2).recommended);
  }
  MESSAGE("ucb " << ucb_total / states << " kr-ucb " << kr_total / states);
  CHECK(kr_total >= ucb_total);
}

TEST_CASE("snapshots follow record_at") {
  ExecutionModel model;
  auto reward = [](const ContinuousAction& a) { return a.velocity; };
  PlanOptions opts;
  opts.budget = 64;
  opts.record_at = {16, 32, 64};
  Rng rng(6);
  auto r = kr_ucb_plan(reward, {{0.2, 0.5, 1}, {0.7, 0.5, 1}}, opts, model, {}, rng);
  REQUIRE(r.snapshots.size() == 3);
  CHECK(r.snapshots[2].index == r.recommended_index);
  CHECK(r.snapshots[0].budget == 16);
}

TEST_CASE("planner argument checks") {
  ExecutionModel model;
  Rng rng(0);
  PlanOptions opts;
  opts.budget = 0;
  auto reward = [](const ContinuousAction&) { return 0.0; };
  CHECK_THROWS_AS(ucb_plan(reward, {{0.5, 0.5, 1}}, opts, model, rng), std::invalid_argument);
  opts.budget = 4;
  CHECK_THROWS_AS(kr_ucb_plan(reward, {}, opts, model, {}, rng), std::invalid_argument);
  CHECK_THROWS_AS(ucb_select(PlannerStats{}), std::invalid_argument);
}
