#pragma once

#include <cstddef>
#include <vector>

#include "mugen/common.hpp"
#include "mugen/domain.hpp"

namespace mugen::location {

/// n×n grid of non-negative cell values summing to 1, row-major.
struct GridState {
  std::size_t n = 0;
  std::vector<double> values;

  std::size_t cells() const { return n * n; }
  /// Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

struct SplitReward {
  double player = 0.0;
  double opponent = 0.0;
};

/// Unnormalized inverse-gamma draws (the cell values before normalization).
std::vector<double> sample_inverse_gamma(std::size_t count, double alpha, double beta, Rng& rng);

GridState sample_grid(std::size_t n, double alpha, double beta, Rng& rng);

/// Indices of the k largest cells; ties go to the lowest row-major index.
std::vector<std::size_t> opponent_cells(const GridState& state, std::size_t k_opp);

/// Cell mass awarded to the player's locations. Each cell goes to the
/// nearest claimant(s) by Manhattan distance, split equally on ties;
/// duplicated locations are distinct claimants.
double reward(const GridState& state, const DiscreteAction& player,
              const std::vector<std::size_t>& opponent);

/// Both sides of the same assignment.
SplitReward split_reward(const GridState& state, const DiscreteAction& player,
                         const std::vector<std::size_t>& opponent);

struct BestAction {
  DiscreteAction action;
  double reward = 0.0;
};

constexpr std::size_t kDefaultEnumerationCap = 2'000'000;

/// Exhaustive search over ordered k-tuples. Lowest lexicographic tuple wins
/// ties. Throws std::invalid_argument when (n·n)^k exceeds `cap`.
BestAction brute_force_best(const GridState& state, std::size_t k,
                            const std::vector<std::size_t>& opponent,
                            std::size_t cap = kDefaultEnumerationCap);

}  // namespace mugen::location
