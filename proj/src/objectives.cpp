#include "mugen/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mugen/autodiff.hpp"
#include "mugen/kernel_regression.hpp"

namespace mugen::objectives {

std::string to_string(Objective o) {
  switch (o) {
    case Objective::Sum: return "sum";
    case Objective::Max: return "max";
    case Objective::Softmax: return "softmax";
    case Objective::Mu: return "mu";
  }
  return "mu";
}

Objective parse_objective(const std::string& name) {
  if (name == "sum") return Objective::Sum;
  if (name == "max") return Objective::Max;
  if (name == "softmax") return Objective::Softmax;
  if (name == "mu") return Objective::Mu;
  throw std::invalid_argument("unknown objective '" + name + "'");
}

namespace {

void check_q(std::span<const double> q, Objective kind, double temperature) {
  if (q.empty()) throw std::invalid_argument("utility needs at least one action value");
  if (kind == Objective::Softmax && !(temperature > 0.0)) {
    throw std::invalid_argument("softmax temperature must be positive");
  }
}

}  // namespace

UtilityBreakdown utility(Objective kind, std::span<const double> q, double temperature) {
  check_q(q, kind, temperature);
  const std::size_t m = q.size();
  UtilityBreakdown out;
  out.coefficients.assign(m, 0.0);
  switch (kind) {
    case Objective::Sum: {
      double s = 0.0;
      for (double v : q) s += v;
      out.total = s / static_cast<double>(m);
      std::fill(out.coefficients.begin(), out.coefficients.end(), 1.0 / static_cast<double>(m));
      break;
    }
    case Objective::Max: {
      const auto it = std::max_element(q.begin(), q.end());
      out.total = *it;
      out.coefficients[static_cast<std::size_t>(it - q.begin())] = 1.0;
      break;
    }
    case Objective::Softmax: {
      const double mx = *std::max_element(q.begin(), q.end());
      std::vector<double> p(m);
      double z = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        p[i] = std::exp((q[i] - mx) / temperature);
        z += p[i];
      }
      double u = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        p[i] /= z;
        u += p[i] * q[i];
      }
      out.total = u;
      for (std::size_t i = 0; i < m; ++i) out.coefficients[i] = p[i] * (1.0 + (q[i] - u) / temperature);
      break;
    }
    case Objective::Mu: {
      double total = q[0];
      double prefix = q[0];
      out.coefficients[0] = 1.0;
      for (std::size_t i = 1; i < m; ++i) {
        if (q[i] > prefix) {
          total += q[i] - prefix;
          out.coefficients[i] = 1.0;
          prefix = q[i];
        }
      }
      out.total = total;
      break;
    }
  }
  return out;
}

UtilityBreakdown utility_autodiff(Objective kind, std::span<const double> q, double temperature) {
  check_q(q, kind, temperature);
  ad::Tape tape;
  std::vector<ad::Var> x;
  x.reserve(q.size());
  for (double v : q) x.push_back(tape.variable(v));
  ad::Var u = x[0];
  switch (kind) {
    case Objective::Sum: {
      for (std::size_t i = 1; i < x.size(); ++i) u = u + x[i];
      u = u / tape.constant(static_cast<double>(x.size()));
      break;
    }
    case Objective::Max: {
      for (std::size_t i = 1; i < x.size(); ++i) u = tape.max(u, x[i]);
      break;
    }
    case Objective::Softmax: {
      const double shift = *std::max_element(q.begin(), q.end()) / temperature;
      const ad::Var inv_t = tape.constant(1.0 / temperature);
      const ad::Var c = tape.constant(shift);
      ad::Var num = tape.constant(0.0), den = tape.constant(0.0);
      for (const ad::Var& xi : x) {
        const ad::Var e = tape.exp(xi * inv_t - c);
        num = num + e * xi;
        den = den + e;
      }
      u = num / den;
      break;
    }
    case Objective::Mu: {
      ad::Var prefix = x[0];
      for (std::size_t i = 1; i < x.size(); ++i) {
        u = u + tape.relu(x[i] - tape.stop_gradient(prefix));
        prefix = tape.max(prefix, x[i]);
      }
      break;
    }
  }
  const std::vector<double> adj = tape.gradient(u);
  UtilityBreakdown out;
  out.total = u.value();
  for (const ad::Var& xi : x) out.coefficients.push_back(adj[xi.id]);
  return out;
}

std::vector<ContinuousAction> decode_actions(std::span<const double> outputs, int turn) {
  if (outputs.size() % 2 != 0) throw std::invalid_argument("continuous generator output must have even size");
  std::vector<ContinuousAction> actions(outputs.size() / 2);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    actions[i] = {std::clamp(outputs[2 * i], 0.0, 1.0), std::clamp(outputs[2 * i + 1], 0.0, 1.0), turn};
  }
  return actions;
}

std::vector<double> continuous_output_gradient(std::span<const double> outputs, const SampleSet& samples,
                                               const ExecutionModel& model, Objective kind, double temperature,
                                               int turn, std::vector<double>* q_hat, UtilityBreakdown* breakdown,
                                               std::vector<std::size_t>* degenerate) {
  if (samples.empty()) throw std::invalid_argument("continuous gradient needs a non-empty sample set");
  const std::vector<ContinuousAction> actions = decode_actions(outputs, turn);
  std::vector<double> q(actions.size());
  std::vector<std::array<double, 2>> dq(actions.size(), {0.0, 0.0});
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    q[i] = kr::estimate(samples, actions[i], model).q_hat;
    auto g = kr::estimate_gradient(samples, actions[i], model);
    if (g) {
      dq[i] = *g;
    } else {
      bad.push_back(i);
    }
  }
  UtilityBreakdown u = utility(kind, q, temperature);
  std::vector<double> grad(outputs.size(), 0.0);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    grad[2 * i] = u.coefficients[i] * dq[i][0];
    grad[2 * i + 1] = u.coefficients[i] * dq[i][1];
  }
  if (q_hat) *q_hat = std::move(q);
  if (breakdown) *breakdown = std::move(u);
  if (degenerate) *degenerate = std::move(bad);
  return grad;
}

ContinuousGradient continuous_gradient(const nn::Network& net, const nn::ForwardTape& tape, const SampleSet& samples,
                                       const ExecutionModel& model, Objective kind, double temperature, int turn) {
  ContinuousGradient out;
  const std::vector<double> dout = continuous_output_gradient(tape.output(), samples, model, kind, temperature, turn,
                                                              &out.q_hat, &out.utility, &out.degenerate);
  out.param_grad = net.backward(tape, dout);
  return out;
}

ContinuousGradient continuous_mu_gradient(const nn::Network& net, std::span<const double> features,
                                          const SampleSet& samples, const ExecutionModel& model, int turn) {
  const nn::ForwardTape tape = net.forward(features);
  return continuous_gradient(net, tape, samples, model, Objective::Mu, 0.1, turn);
}

HeadPolicies policies_from_logits(std::span<const double> logits, std::size_t heads, std::size_t cells) {
  if (heads == 0 || cells == 0 || logits.size() != heads * cells) {
    throw std::invalid_argument("logit vector does not match heads x cells");
  }
  HeadPolicies p{heads, cells, std::vector<double>(logits.begin(), logits.end())};
  for (std::size_t h = 0; h < heads; ++h) {
    double* row = p.probs.data() + h * cells;
    const double mx = *std::max_element(row, row + cells);
    double z = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      row[c] = std::exp(row[c] - mx);
      z += row[c];
    }
    for (std::size_t c = 0; c < cells; ++c) row[c] /= z;
  }
  return p;
}

DiscreteAction sample_head_action(std::span<const double> probs, std::size_t k, Rng& rng) {
  if (k > probs.size()) throw std::invalid_argument("cannot draw more distinct cells than exist");
  std::vector<double> w(probs.begin(), probs.end());
  DiscreteAction a;
  a.cells.reserve(k);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (std::size_t t = 0; t < k; ++t) {
    double total = 0.0;
    for (double v : w) total += v;
    const double target = u01(rng) * total;
    double acc = 0.0;
    std::size_t pick = w.size();
    std::size_t last_positive = w.size();
    for (std::size_t c = 0; c < w.size(); ++c) {
      if (w[c] <= 0.0) continue;
      last_positive = c;
      acc += w[c];
      if (target < acc) {
        pick = c;
        break;
      }
    }
    if (pick == w.size()) pick = last_positive;
    if (pick == w.size()) throw std::invalid_argument("head has no probability mass left");
    a.cells.push_back(pick);
    w[pick] = 0.0;
  }
  return a;
}

namespace {

void check_distinct(const DiscreteAction& action, std::size_t cells) {
  for (std::size_t t = 0; t < action.cells.size(); ++t) {
    if (action.cells[t] >= cells) throw std::invalid_argument("cell index out of range");
    for (std::size_t s = 0; s < t; ++s) {
      if (action.cells[s] == action.cells[t]) {
        throw std::invalid_argument("repeated cell has zero probability under sampling without replacement");
      }
    }
  }
}

}  // namespace

double head_log_prob(std::span<const double> probs, const DiscreteAction& action) {
  check_distinct(action, probs.size());
  double remaining = 1.0;
  double lp = 0.0;
  for (std::size_t c : action.cells) {
    if (!(probs[c] > 0.0)) return -std::numeric_limits<double>::infinity();
    lp += std::log(probs[c] / remaining);
    remaining -= probs[c];
  }
  return lp;
}

std::vector<double> head_log_prob_grad(std::span<const double> probs, const DiscreteAction& action) {
  check_distinct(action, probs.size());
  const std::size_t n = probs.size();
  std::vector<double> grad(n, 0.0);
  std::vector<bool> taken(n, false);
  for (std::size_t c : action.cells) {
    if (!(probs[c] > 0.0)) throw std::invalid_argument("sampled action has zero probability");
    // d log(p_c / Σ_{j∈S} p_j) / d z_l = [l = c] - p_l [l ∈ S] / Σ_{j∈S} p_j
    // (softmax Jacobian; the full-softmax normalizer cancels).
    double mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!taken[j]) mass += probs[j];
    }
    grad[c] += 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!taken[j]) grad[j] -= probs[j] / mass;
    }
    taken[c] = true;
  }
  return grad;
}

std::vector<double> mu_score_weights(std::span<const double> q) {
  if (q.empty()) throw std::invalid_argument("marginal utility weights need at least one value");
  std::vector<double> w(q.size(), 0.0);
  w[0] = q[0];
  double prefix = q[0];
  for (std::size_t i = 1; i < q.size(); ++i) {
    w[i] = std::max(q[i] - prefix, 0.0);
    prefix = std::max(prefix, q[i]);
  }
  return w;
}

std::vector<double> discrete_mu_gradient_estimate(const HeadPolicies& policies,
                                                  const std::vector<DiscreteAction>& sampled,
                                                  std::span<const double> q,
                                                  const std::vector<std::vector<double>>& log_prob_grads) {
  const std::size_t m = policies.heads;
  if (sampled.size() != m || q.size() != m || log_prob_grads.size() != m) {
    throw std::invalid_argument("need one sampled action, reward and log-prob gradient per head");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(head_log_prob(policies.head(i), sampled[i]))) {
      throw std::invalid_argument("sampled action has zero probability under its head");
    }
  }
  const std::vector<double> w = mu_score_weights(q);
  std::vector<double> grad(log_prob_grads[0].size(), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (log_prob_grads[i].size() != grad.size()) throw std::invalid_argument("log-prob gradients differ in size");
    for (std::size_t p = 0; p < grad.size(); ++p) grad[p] += w[i] * log_prob_grads[i][p];
  }
  return grad;
}

std::vector<double> discrete_score_weights(Objective kind, std::span<const double> q, double temperature) {
  if (kind == Objective::Mu) return mu_score_weights(q);
  const double u = utility(kind, q, temperature).total;
  return std::vector<double>(q.size(), u);
}

std::vector<double> reinforce_gradient(std::span<const double> probs, const std::vector<DiscreteAction>& sampled,
                                       std::span<const double> rewards) {
  if (sampled.empty() || sampled.size() != rewards.size()) {
    throw std::invalid_argument("reinforce needs one reward per sample and at least one sample");
  }
  std::vector<double> grad(probs.size(), 0.0);
  for (std::size_t s = 0; s < sampled.size(); ++s) {
    const std::vector<double> g = head_log_prob_grad(probs, sampled[s]);
    for (std::size_t c = 0; c < grad.size(); ++c) grad[c] += rewards[s] * g[c];
  }
  const double inv = 1.0 / static_cast<double>(sampled.size());
  for (double& g : grad) g *= inv;
  return grad;
}

DistillationResult distillation_loss_gradient(std::span<const double> logits, std::span<const double> target,
                                              double l2, std::span<const double> params) {
  if (logits.size() != target.size() || logits.empty()) {
    throw std::invalid_argument("policy and target distributions differ in size");
  }
  const HeadPolicies rho = policies_from_logits(logits, 1, logits.size());
  DistillationResult out;
  out.logit_grad.resize(logits.size());
  double loss = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    if (target[c] < 0.0) throw std::invalid_argument("target distribution has negative entries");
    if (target[c] > 0.0) {
      if (!(rho.probs[c] > 0.0)) {
        throw NumericalError("target puts mass on cell " + std::to_string(c) + " where the policy has none");
      }
      loss -= target[c] * std::log(rho.probs[c]);
    }
    out.logit_grad[c] = rho.probs[c] - target[c];
  }
  out.loss = loss;
  double sq = 0.0;
  for (double p : params) sq += p * p;
  out.l2_term = l2 * sq;
  return out;
}

}  // namespace mugen::objectives
