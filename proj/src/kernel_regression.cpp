#include "mugen/kernel_regression.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mugen::kr {

double kernel(const ExecutionModel& model, const ContinuousAction& a, const ContinuousAction& b) {
  if (a.turn != b.turn) return 0.0;
  const double zv = (b.velocity - a.velocity) / model.sigma_velocity;
  const double za = (b.angle - a.angle) / model.sigma_angle;
  const double norm = 1.0 / (2.0 * std::numbers::pi * model.sigma_velocity * model.sigma_angle);
  return norm * std::exp(-0.5 * (zv * zv + za * za));
}

KernelEstimate estimate(const SampleSet& samples, const ContinuousAction& a, const ExecutionModel& model) {
  if (samples.empty()) throw std::invalid_argument("kernel regression needs at least one sample");
  double w = 0.0;
  double wr = 0.0;
  for (const Sample& s : samples.entries()) {
    const double k = kernel(model, a, s.outcome);
    w += k;
    wr += k * s.reward;
  }
  if (!(w > kDensityFloor)) return {0.0, 0.0};
  return {wr / w, w};
}

std::optional<std::array<double, 2>> estimate_gradient(const SampleSet& samples, const ContinuousAction& a,
                                                       const ExecutionModel& model) {
  if (samples.empty()) throw std::invalid_argument("kernel regression needs at least one sample");
  const double iv = 1.0 / (model.sigma_velocity * model.sigma_velocity);
  const double ia = 1.0 / (model.sigma_angle * model.sigma_angle);
  // dK/da_v = K * (b_v - a_v) / sigma_v^2, likewise for the angle.
  double w = 0.0, wr = 0.0;
  double dw_v = 0.0, dw_a = 0.0, dwr_v = 0.0, dwr_a = 0.0;
  for (const Sample& s : samples.entries()) {
    const double k = kernel(model, a, s.outcome);
    const double kv = k * (s.outcome.velocity - a.velocity) * iv;
    const double ka = k * (s.outcome.angle - a.angle) * ia;
    w += k;
    wr += k * s.reward;
    dw_v += kv;
    dw_a += ka;
    dwr_v += kv * s.reward;
    dwr_a += ka * s.reward;
  }
  if (!(w > kDensityFloor)) return std::nullopt;
  const double q = wr / w;
  return std::array<double, 2>{(dwr_v - q * dw_v) / w, (dwr_a - q * dw_a) / w};
}

}  // namespace mugen::kr
