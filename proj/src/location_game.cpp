#include "mugen/location_game.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mugen::location {

void GridState::validate() const {
  if (n == 0 || values.size() != n * n) {
    throw std::invalid_argument("grid state has " + std::to_string(values.size()) +
                                " values for side " + std::to_string(n));
  }
  double sum = 0.0;
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("grid values must be finite and >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("grid values must sum to 1");
}

std::vector<double> sample_inverse_gamma(std::size_t count, double alpha, double beta, Rng& rng) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("inverse gamma parameters must be positive");
  // X ~ InvGamma(alpha, beta)  <=>  1/X ~ Gamma(alpha, rate = beta) = Gamma(alpha, scale = 1/beta).
  std::gamma_distribution<double> gamma(alpha, 1.0 / beta);
  std::vector<double> out(count);
  for (auto& v : out) v = 1.0 / gamma(rng);
  return out;
}

GridState sample_grid(std::size_t n, double alpha, double beta, Rng& rng) {
  if (n < 2) throw std::invalid_argument("grid side must be >= 2");
  GridState g;
  g.n = n;
  g.values = sample_inverse_gamma(n * n, alpha, beta, rng);
  double sum = 0.0;
  for (double v : g.values) sum += v;
  for (auto& v : g.values) v /= sum;
  return g;
}

std::vector<std::size_t> opponent_cells(const GridState& state, std::size_t k_opp) {
  if (k_opp > state.cells()) throw std::invalid_argument("opponent selects more cells than exist");
  std::vector<std::size_t> idx(state.cells());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return state.values[a] > state.values[b];
  });
  idx.resize(k_opp);
  return idx;
}

namespace {

void check_cells(const GridState& state, const std::vector<std::size_t>& cells) {
  for (std::size_t c : cells) {
    if (c >= state.cells()) throw std::invalid_argument("cell index " + std::to_string(c) + " out of range");
  }
}

}  // namespace

SplitReward split_reward(const GridState& state, const DiscreteAction& player,
                         const std::vector<std::size_t>& opponent) {
  check_cells(state, player.cells);
  check_cells(state, opponent);
  const std::size_t n = state.n;
  const std::size_t kp = player.cells.size();
  const std::size_t total = kp + opponent.size();
  SplitReward out;
  if (total == 0) return out;

  std::vector<long> row(total), col(total);
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t c = i < kp ? player.cells[i] : opponent[i - kp];
    row[i] = static_cast<long>(c / n);
    col[i] = static_cast<long>(c % n);
  }
  std::vector<long> dist(total);
  for (std::size_t cell = 0; cell < state.cells(); ++cell) {
    const long r = static_cast<long>(cell / n);
    const long c = static_cast<long>(cell % n);
    long best = std::numeric_limits<long>::max();
    for (std::size_t i = 0; i < total; ++i) {
      dist[i] = std::labs(r - row[i]) + std::labs(c - col[i]);
      best = std::min(best, dist[i]);
    }
    std::size_t n_player = 0, n_opp = 0;
    for (std::size_t i = 0; i < total; ++i) {
      if (dist[i] != best) continue;
      (i < kp ? n_player : n_opp) += 1;
    }
    const double share = state.values[cell] / static_cast<double>(n_player + n_opp);
    out.player += share * static_cast<double>(n_player);
    out.opponent += share * static_cast<double>(n_opp);
  }
  return out;
}

double reward(const GridState& state, const DiscreteAction& player,
              const std::vector<std::size_t>& opponent) {
  return split_reward(state, player, opponent).player;
}

BestAction brute_force_best(const GridState& state, std::size_t k,
                            const std::vector<std::size_t>& opponent, std::size_t cap) {
  const std::size_t cells = state.cells();
  if (k == 0 || cells == 0) throw std::invalid_argument("brute_force_best needs k >= 1 and a non-empty grid");
  double count = std::pow(static_cast<double>(cells), static_cast<double>(k));
  if (count > static_cast<double>(cap)) {
    throw std::invalid_argument("enumeration of " + std::to_string(cells) + "^" + std::to_string(k) +
                                " tuples exceeds cap " + std::to_string(cap));
  }
  DiscreteAction current{std::vector<std::size_t>(k, 0)};
  BestAction best{current, -1.0};
  while (true) {
    const double r = reward(state, current, opponent);
    if (r > best.reward) best = {current, r};
    // Odometer increment, last position fastest: lexicographic order.
    std::size_t pos = k;
    while (pos > 0) {
      --pos;
      if (++current.cells[pos] < cells) break;
      current.cells[pos] = 0;
      if (pos == 0) return best;
    }
  }
}

}  // namespace mugen::location
