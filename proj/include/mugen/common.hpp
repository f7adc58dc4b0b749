#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace mugen {

/// Every stochastic operation takes one of these explicitly. mt19937_64 output
/// is fixed by the standard, so seeded runs are reproducible.
using Rng = std::mt19937_64;

/// Independent stream for item `index` under `seed` (splitmix64 mixing).
/// Parallel work derives one stream per work item so results do not depend
/// on the thread count.
Rng stream_rng(std::uint64_t seed, std::uint64_t index);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Static
/// partitioning; callers write results into per-index slots and reduce in
/// index order afterwards.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

/// Config file failed validation. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checkpoint, corpus or run-directory problem. Maps to exit code 3.
class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values in training or evaluation. Maps to exit code 4.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// FNV-1a over a byte string, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace mugen
