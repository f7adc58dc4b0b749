#include <cmath>
#include <cstdlib>
#include <numeric>

#include "doctest.h"
#include "mugen/location_game.hpp"

using namespace mugen;
using namespace mugen::location;

namespace {

GridState uniform(std::size_t n) {
  return {n, std::vector<double>(n * n, 1.0 / double(n * n))};
}

// Cell-by-cell assignment written independently of the library.
double naive_reward(const GridState& g, const std::vector<std::size_t>& player, const std::vector<std::size_t>& opp) {
  const long n = long(g.n);
  double total = 0.0;
  for (long cell = 0; cell < n * n; ++cell) {
    auto d = [&](std::size_t c) { return std::abs(cell / n - long(c) / n) + std::abs(cell % n - long(c) % n); };
    long best = 1 << 30;
    for (auto c : player) best = std::min(best, d(c));
    for (auto c : opp) best = std::min(best, d(c));
    int mine = 0, all = 0;
    for (auto c : player) mine += d(c) == best, all += d(c) == best;
    for (auto c : opp) all += d(c) == best;
    total += g.values[cell] * mine / all;
  }
  return total;
}

}  // namespace

TEST_CASE("sampled grids are normalized and positive") {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    auto g = sample_grid(5, 3.0, 1.0, rng);
    CHECK_NOTHROW(g.validate());
    CHECK(std::abs(std::accumulate(g.values.begin(), g.values.end(), 0.0) - 1.0) < 1e-9);
    for (double v : g.values) CHECK(v > 0.0);
  }
}

TEST_CASE("inverse gamma mean") {
  Rng rng(2);
  auto xs = sample_inverse_gamma(100000, 3.0, 1.0, rng);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
  // variance of InvGamma(3, 1) is 1 / (2^2 * 1) = 0.25
  const double se = std::sqrt(0.25 / double(xs.size()));
  CHECK(std::abs(mean - 0.5) < 3.0 * se);
}

TEST_CASE("sample_grid rejects bad parameters") {
  Rng rng(0);
  CHECK_THROWS_AS(sample_grid(1, 3.0, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_grid(5, 0.0, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_grid(5, 3.0, -1.0, rng), std::invalid_argument);
}

TEST_CASE("opponent cells") {
  CHECK(opponent_cells(uniform(3), 2) == std::vector<std::size_t>{0, 1});
  GridState g{2, {0.1, 0.4, 0.2, 0.3}};
  CHECK(opponent_cells(g, 2) == std::vector<std::size_t>{1, 3});
  CHECK(opponent_cells(g, 0).empty());
}

TEST_CASE("reward examples") {
  Rng rng(4);
  auto g = sample_grid(4, 3.0, 1.0, rng);
  CHECK(reward(g, {{3, 7}}, {}) == doctest::Approx(1.0).epsilon(1e-12));

  GridState one{1, {1.0}};
  CHECK(reward(one, {{0}}, {0}) == 0.5);

  // cells 0, 1, 3 go to the player, the anti-diagonal 2, 4, 6 is split
  auto u = uniform(3);
  CHECK(reward(u, {{0}}, {8}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(reward(u, {{0}}, {8}) == doctest::Approx(naive_reward(u, {0}, {8})).epsilon(1e-12));
}

TEST_CASE("reward matches the naive assignment") {
  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    auto g = sample_grid(4, 3.0, 1.0, rng);
    std::uniform_int_distribution<std::size_t> cell(0, 15);
    std::vector<std::size_t> p{cell(rng), cell(rng)}, o{cell(rng)};
    CHECK(reward(g, {p}, o) == doctest::Approx(naive_reward(g, p, o)).epsilon(1e-12));
  }
}

TEST_CASE("conservation and permutation invariance") {
  Rng rng(6);
  for (int t = 0; t < 2000; ++t) {
    auto g = sample_grid(5, 3.0, 1.0, rng);
    std::uniform_int_distribution<std::size_t> cell(0, 24);
    DiscreteAction a{{cell(rng), cell(rng), cell(rng)}};
    auto opp = opponent_cells(g, 1 + t % 3);
    auto split = split_reward(g, a, opp);
    CHECK(std::abs(split.player + split.opponent - 1.0) < 1e-12);
    DiscreteAction b{{a.cells[2], a.cells[0], a.cells[1]}};
    CHECK(std::abs(reward(g, a, opp) - reward(g, b, opp)) < 1e-12);
  }
}

TEST_CASE("brute force oracle") {
  GridState g{2, {0.7, 0.1, 0.1, 0.1}};
  auto best = brute_force_best(g, 1, {});
  CHECK(best.action.cells == std::vector<std::size_t>{0});
  CHECK(best.reward == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    auto s = sample_grid(3, 3.0, 1.0, rng);
    auto opp = opponent_cells(s, 1);
    auto b = brute_force_best(s, 2, opp);
    CHECK(b.reward == reward(s, b.action, opp));
    std::uniform_int_distribution<std::size_t> cell(0, 8);
    for (int r = 0; r < 1000; ++r) {
      CHECK(b.reward >= reward(s, {{cell(rng), cell(rng)}}, opp));
    }
    CHECK(brute_force_best(s, 3, opp).reward >= b.reward);
    CHECK(b.reward >= brute_force_best(s, 1, opp).reward);
  }
}

TEST_CASE("brute force respects the cap") {
  auto g = uniform(5);
  CHECK_THROWS_AS(brute_force_best(g, 3, {}, 1000), std::invalid_argument);
}
