#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mugen/common.hpp"
#include "mugen/domain.hpp"
#include "mugen/network.hpp"

namespace mugen::objectives {

enum class Objective { Sum, Max, Softmax, Mu };

std::string to_string(Objective o);
Objective parse_objective(const std::string& name);

/// Set utility of generated action values q_1..q_m together with its
/// semi-gradient dU/dq_i.
///   sum:     mean(q)                         coefficients 1/m
///   max:     max(q)                          1 at the first argmax
///   softmax: Σ softmax(q/τ)_i q_i            p_i (1 + (q_i - U)/τ)
///   mu:      q_1 + Σ_{i≥2} (q_i - ⊥max_{j<i} q_j)^+
///            coefficients 1 for i = 1 and for strict prefix improvements.
struct UtilityBreakdown {
  double total = 0.0;
  std::vector<double> coefficients;
};

UtilityBreakdown utility(Objective kind, std::span<const double> q, double temperature = 0.1);

/// The same quantity built on a scalar tape (with an explicit stop-gradient
/// for the prefix max) and differentiated in reverse mode.
UtilityBreakdown utility_autodiff(Objective kind, std::span<const double> q, double temperature = 0.1);

// ---- continuous generators -------------------------------------------------

/// Network outputs interleave (velocity, angle) per action.
std::vector<ContinuousAction> decode_actions(std::span<const double> outputs, int turn = 1);

struct ContinuousGradient {
  std::vector<double> param_grad;
  std::vector<double> q_hat;
  UtilityBreakdown utility;
  /// Indices of actions whose kernel density underflowed (no gradient).
  std::vector<std::size_t> degenerate;
};

/// Semi-gradient of the kernel-regression utility with respect to the
/// network parameters. Outcomes in `samples` are constants; the prefix max
/// is stopped.
ContinuousGradient continuous_gradient(const nn::Network& net, const nn::ForwardTape& tape, const SampleSet& samples,
                                       const ExecutionModel& model, Objective kind, double temperature = 0.1,
                                       int turn = 1);

/// continuous_gradient for the marginal-utility objective, running the forward pass itself.
ContinuousGradient continuous_mu_gradient(const nn::Network& net, std::span<const double> features,
                                          const SampleSet& samples, const ExecutionModel& model, int turn = 1);

/// Gradient of the network output w.r.t. the kernel-regression utility,
/// i.e. what is fed into backward(). Exposed for tests.
std::vector<double> continuous_output_gradient(std::span<const double> outputs, const SampleSet& samples,
                                               const ExecutionModel& model, Objective kind, double temperature,
                                               int turn, std::vector<double>* q_hat = nullptr,
                                               UtilityBreakdown* breakdown = nullptr,
                                               std::vector<std::size_t>* degenerate = nullptr);

// ---- discrete generators ---------------------------------------------------

/// m categorical distributions over n·n cells, stored head-major.
struct HeadPolicies {
  std::size_t heads = 0;
  std::size_t cells = 0;
  std::vector<double> probs;

  std::span<const double> head(std::size_t i) const { return std::span<const double>(probs).subspan(i * cells, cells); }
};

/// Per-head softmax of head-major logits.
HeadPolicies policies_from_logits(std::span<const double> logits, std::size_t heads, std::size_t cells);

/// k distinct cells drawn sequentially from one head, renormalizing over the
/// cells not yet taken.
DiscreteAction sample_head_action(std::span<const double> probs, std::size_t k, Rng& rng);

/// log π(action) under sequential sampling without replacement.
double head_log_prob(std::span<const double> probs, const DiscreteAction& action);

/// d log π(action) / d logits for one head. Throws std::invalid_argument for
/// zero-probability actions.
std::vector<double> head_log_prob_grad(std::span<const double> probs, const DiscreteAction& action);

/// Score-function weights of the marginal-utility estimator:
/// w_1 = Q_1, w_i = (Q_i - max_{j<i} Q_j)^+.
std::vector<double> mu_score_weights(std::span<const double> q);

/// Σ_i w_i ∇log π_i(ã_i) with the marginal-utility weights. `log_prob_grads`
/// holds one parameter-space gradient per head.
std::vector<double> discrete_mu_gradient_estimate(const HeadPolicies& policies,
                                                  const std::vector<DiscreteAction>& sampled,
                                                  std::span<const double> q,
                                                  const std::vector<std::vector<double>>& log_prob_grads);

/// Per-head score weights used to train discrete generators on any objective.
/// Marginal utility uses mu_score_weights; the other objectives weight every
/// head by the joint utility U(q).
std::vector<double> discrete_score_weights(Objective kind, std::span<const double> q, double temperature);

/// Mean of R(a)·∇log π(a) over samples from one head, as a logit gradient.
std::vector<double> reinforce_gradient(std::span<const double> probs, const std::vector<DiscreteAction>& sampled,
                                       std::span<const double> rewards);

struct DistillationResult {
  double loss = 0.0;     // -Σ π log ρ
  double l2_term = 0.0;  // λ‖θ‖², reported for logging only
  std::vector<double> logit_grad;  // ρ - π
};

/// Cross-entropy of the softmax of `logits` against target π.
DistillationResult distillation_loss_gradient(std::span<const double> logits, std::span<const double> target,
                                              double l2, std::span<const double> params = {});

}  // namespace mugen::objectives
