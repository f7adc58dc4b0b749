#pragma once

#include <array>
#include <optional>

#include "mugen/domain.hpp"

namespace mugen::kr {

/// Densities below this carry no information; estimates report zero.
constexpr double kDensityFloor = 1e-300;

struct KernelEstimate {
  double q_hat = 0.0;
  double density = 0.0;
};

/// Gaussian execution density of b given a, in normalized coordinates.
/// Zero when the turns differ.
double kernel(const ExecutionModel& model, const ContinuousAction& a, const ContinuousAction& b);

/// Nadaraya-Watson estimate and kernel density at `a`. Throws
/// std::invalid_argument on an empty sample set.
KernelEstimate estimate(const SampleSet& samples, const ContinuousAction& a, const ExecutionModel& model);

/// d q_hat / d (velocity, angle). nullopt when the density is at or below the floor.
std::optional<std::array<double, 2>> estimate_gradient(const SampleSet& samples, const ContinuousAction& a,
                                                       const ExecutionModel& model);

}  // namespace mugen::kr
