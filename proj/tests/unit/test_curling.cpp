#include <cmath>
#include <map>

#include "doctest.h"
#include "mugen/curling.hpp"

using namespace mugen;
using namespace mugen::curling;

namespace {

SheetConfig fixed_speed(double v) {
  SheetConfig cfg;
  cfg.speed_min = v;
  cfg.speed_max = v;
  return cfg;
}

std::size_t count_team(const CurlingState& s, Team t) {
  std::size_t n = 0;
  for (const auto& st : s.stones) n += st.team == t;
  return n;
}

}  // namespace

TEST_CASE("zero launch speed leaves the stone at the release point") {
  SheetConfig cfg = fixed_speed(0.0);
  CurlingState s{{{0.3, 28.0, Team::Opponent}}};
  auto out = simulate_shot(s, {0.5, 0.5, 1}, cfg);
  REQUIRE(out.stones.size() == 2);
  CHECK(out.stones[0] == s.stones[0]);
  CHECK(out.stones[1].x == 0.0);
  CHECK(out.stones[1].y == 0.0);
}

TEST_CASE("straight shot travels v^2 / 2f") {
  for (double v : {1.85, 2.0, 2.05}) {
    SheetConfig cfg = fixed_speed(v);
    cfg.curl = 0.0;
    auto out = simulate_shot({}, {0.5, 0.5, 1}, cfg);
    REQUIRE(out.stones.size() == 1);
    const double expect = v * v / (2.0 * cfg.friction);
    CHECK(std::abs(out.stones[0].y - expect) <= 2.0 * cfg.timestep * v);
    CHECK(std::abs(out.stones[0].x) < 1e-12);
  }
}

TEST_CASE("curl bends the path toward the turn") {
  SheetConfig cfg;
  auto right = simulate_shot({}, {0.6, 0.5, 1}, cfg);
  auto left = simulate_shot({}, {0.6, 0.5, -1}, cfg);
  REQUIRE(right.stones.size() == 1);
  REQUIRE(left.stones.size() == 1);
  CHECK(right.stones[0].x > 0.0);
  CHECK(left.stones[0].x == doctest::Approx(-right.stones[0].x).epsilon(1e-9));
}

TEST_CASE("mirror symmetry") {
  SheetConfig cfg;
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 60; ++t) {
    auto s = sample_hammer_state(rng, cfg);
    ContinuousAction a{u(rng), u(rng), t % 2 ? 1 : -1};
    auto out = simulate_shot(s, a, cfg);
    auto mirrored = simulate_shot(mirror(s), {a.velocity, 1.0 - a.angle, -a.turn}, cfg);
    REQUIRE(out.stones.size() == mirrored.stones.size());
    for (std::size_t i = 0; i < out.stones.size(); ++i) {
      CHECK(std::abs(out.stones[i].x + mirrored.stones[i].x) < 1e-9);
      CHECK(std::abs(out.stones[i].y - mirrored.stones[i].y) < 1e-9);
      CHECK(out.stones[i].team == mirrored.stones[i].team);
    }
  }
}

TEST_CASE("simulation is deterministic") {
  SheetConfig cfg;
  Rng rng(4);
  auto s = sample_hammer_state(rng, cfg);
  auto a = simulate_shot(s, {0.55, 0.48, 1}, cfg);
  auto b = simulate_shot(s, {0.55, 0.48, 1}, cfg);
  REQUIRE(a.stones.size() == b.stones.size());
  for (std::size_t i = 0; i < a.stones.size(); ++i) CHECK(a.stones[i] == b.stones[i]);
}

TEST_CASE("fast-forward run agrees with plain stepping") {
  SheetConfig cfg;
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    auto s = sample_hammer_state(rng, cfg);
    ContinuousAction a{u(rng), u(rng), 1};
    Simulator fast(s, cfg), slow(s, cfg);
    fast.launch(a);
    slow.launch(a);
    fast.run();
    double time = 0.0;
    while (slow.moving() && time < cfg.max_time) {
      slow.step();
      time += cfg.timestep;
    }
    auto x = fast.state(), y = slow.state();
    REQUIRE(x.stones.size() == y.stones.size());
    for (std::size_t i = 0; i < x.stones.size(); ++i) {
      CHECK(std::abs(x.stones[i].x - y.stones[i].x) < 1e-6);
      CHECK(std::abs(x.stones[i].y - y.stones[i].y) < 1e-6);
    }
    CHECK(score(x, cfg) == score(y, cfg));
  }
}

TEST_CASE("kinetic energy never increases") {
  SheetConfig cfg;
  Rng rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t collisions = 0;
  for (int t = 0; t < 10; ++t) {
    auto s = sample_hammer_state(rng, cfg);
    Simulator sim(s, cfg);
    sim.launch({0.5 + 0.5 * u(rng), u(rng), 1});
    double e = sim.kinetic_energy();
    while (sim.moving()) {
      const bool hit = sim.step();
      collisions += hit;
      const double next = sim.kinetic_energy();
      CHECK(next <= e * (1.0 + 1e-12));
      e = next;
    }
  }
  CHECK(collisions > 0);
}

TEST_CASE("score") {
  SheetConfig cfg;
  const double tee = cfg.tee_y;
  CHECK(score({}, cfg) == 0);
  CHECK(score({{{0.0, 10.0, Team::Hammer}}}, cfg) == 0);
  CHECK(score({{{0.0, tee, Team::Hammer}}}, cfg) == 1);
  CHECK(score({{{0.5, tee, Team::Hammer}, {-1.0, tee, Team::Opponent}, {0.0, tee + 1.2, Team::Opponent}}}, cfg) == 1);
  CHECK(score({{{0.2, tee, Team::Hammer}, {0.0, tee - 0.5, Team::Hammer}, {1.0, tee, Team::Opponent}}}, cfg) == 2);
  CHECK(score({{{0.0, tee + 0.3, Team::Opponent}, {0.0, tee - 0.9, Team::Hammer}}}, cfg) == -1);
}

TEST_CASE("score is antisymmetric under team swap") {
  SheetConfig cfg;
  Rng rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    auto s = simulate_shot(sample_hammer_state(rng, cfg), {u(rng), u(rng), 1}, cfg);
    CHECK(score(s, cfg) == -score(swap_teams(s), cfg));
  }
}

TEST_CASE("sampled hammer states") {
  SheetConfig cfg;
  Rng a(8), b(8);
  auto s1 = sample_hammer_state(a, cfg);
  auto s2 = sample_hammer_state(b, cfg);
  REQUIRE(s1.stones.size() == s2.stones.size());
  for (std::size_t i = 0; i < s1.stones.size(); ++i) CHECK(s1.stones[i] == s2.stones[i]);

  Rng rng(9);
  std::map<std::size_t, int> hist;
  const int n = 10000;
  for (int t = 0; t < n; ++t) {
    auto s = sample_hammer_state(rng, cfg);
    CHECK_NOTHROW(validate_state(s, cfg));
    hist[count_team(s, Team::Hammer)] += 1;
  }
  const double bins = double(cfg.max_stones_per_team - cfg.min_stones_per_team + 1);
  const double p = 1.0 / bins;
  const double se = std::sqrt(n * p * (1 - p));
  CHECK(hist.size() == std::size_t(bins));
  for (auto [k, c] : hist) CHECK(std::abs(c - n * p) < 3.0 * se);
}

TEST_CASE("validate_state rejects bad states") {
  SheetConfig cfg;
  CHECK_THROWS_AS(validate_state({{{0.0, 28.0, Team::Hammer}, {0.1, 28.0, Team::Opponent}}}, cfg),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_state({{{5.0, 28.0, Team::Hammer}}}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(simulate_shot({}, {1.5, 0.5, 1}, cfg), std::invalid_argument);
}

TEST_CASE("state encoding") {
  SheetConfig cfg;
  Encoding res;
  const std::size_t plane = res.rows * res.cols;
  auto empty = encode_state({}, cfg, res);
  REQUIRE(empty.size() == 3 * plane);
  double house = 0.0;
  for (std::size_t i = 0; i < 2 * plane; ++i) CHECK(empty[i] == 0.0);
  for (std::size_t i = 2 * plane; i < 3 * plane; ++i) house += empty[i];
  CHECK(house > 0.0);

  auto one = encode_state({{{0.0, cfg.tee_y, Team::Opponent}}}, cfg, res);
  double hammer = 0.0, opp = 0.0;
  for (std::size_t i = 0; i < plane; ++i) hammer += one[i], opp += one[plane + i];
  CHECK(hammer == 0.0);
  CHECK(opp == 1.0);
  for (std::size_t i = 2 * plane; i < 3 * plane; ++i) CHECK(one[i] == empty[i]);

  // cells are smaller than a stone diameter, so stones never share a cell
  Rng rng(10);
  for (int t = 0; t < 500; ++t) {
    auto s = sample_hammer_state(rng, cfg);
    auto f = encode_state(s, cfg, res);
    double h = 0.0, o = 0.0;
    for (std::size_t i = 0; i < plane; ++i) h += f[i], o += f[plane + i];
    CHECK(h == double(count_team(s, Team::Hammer)));
    CHECK(o == double(count_team(s, Team::Opponent)));
  }
  CHECK_THROWS_AS(encode_state({}, cfg, {0, 25}), std::invalid_argument);
}
