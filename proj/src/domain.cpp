#include "mugen/domain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mugen {

ExecutionModel::ExecutionModel(double sv, double sa) : sigma_velocity(sv), sigma_angle(sa) {
  if (!(sv > 0.0) || !(sa > 0.0)) {
    throw std::invalid_argument("execution model standard deviations must be positive");
  }
}

ContinuousAction apply_execution_noise(const ExecutionModel& model, const ContinuousAction& action,
                                       Rng& rng) {
  std::normal_distribution<double> ev(0.0, model.sigma_velocity);
  std::normal_distribution<double> ea(0.0, model.sigma_angle);
  ContinuousAction out = action;
  out.velocity = std::clamp(action.velocity + ev(rng), 0.0, 1.0);
  out.angle = std::clamp(action.angle + ea(rng), 0.0, 1.0);
  return out;
}

MonteCarloEstimate mean_with_ci(const std::vector<double>& values) {
  MonteCarloEstimate est;
  if (values.empty()) return est;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  est.mean = sum / n;
  if (values.size() < 2) return est;
  double ss = 0.0;
  for (double v : values) ss += (v - est.mean) * (v - est.mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  est.ci_half_width = 1.96 * sd / std::sqrt(n);
  return est;
}

MonteCarloEstimate q_value_monte_carlo(const OutcomeReward& reward, const ContinuousAction& action,
                                       const ExecutionModel& model, std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("q_value_monte_carlo needs n >= 1");
  std::vector<double> rewards;
  rewards.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    rewards.push_back(reward(apply_execution_noise(model, action, rng)));
  }
  return mean_with_ci(rewards);
}

}  // namespace mugen
