#include "mugen/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mugen::gen {

using nlohmann::json;

NetworkGenerator::NetworkGenerator(nn::Network net, int turn) : net_(std::move(net)), turn_(turn) {
  if (net_.output_size() < 2 || net_.output_size() % 2 != 0) {
    throw std::invalid_argument("continuous generator needs 2m outputs");
  }
}

std::vector<ContinuousAction> NetworkGenerator::generate(std::span<const double> features, Rng&) const {
  return objectives::decode_actions(net_.predict(features), turn_);
}

ContinuousAction grid_cell_center(std::size_t cell, std::size_t grid, int turn) {
  const double g = static_cast<double>(grid);
  return {(static_cast<double>(cell / grid) + 0.5) / g, (static_cast<double>(cell % grid) + 0.5) / g, turn};
}

std::size_t grid_cell_of(const ContinuousAction& a, std::size_t grid) {
  auto bin = [grid](double x) {
    return std::min(grid - 1, static_cast<std::size_t>(std::max(0.0, x) * static_cast<double>(grid)));
  };
  return bin(a.velocity) * grid + bin(a.angle);
}

PolicyGridGenerator::PolicyGridGenerator(nn::Network net, std::size_t grid, std::size_t m, bool sample, int turn)
    : net_(std::move(net)), grid_(grid), m_(m), sample_(sample), turn_(turn) {
  if (grid_ < 1 || net_.output_size() != grid_ * grid_) throw std::invalid_argument("policy output must be grid x grid");
  if (m_ < 1 || m_ > grid_ * grid_) throw std::invalid_argument("policy generator m out of range");
}

std::vector<double> PolicyGridGenerator::policy(std::span<const double> features) const {
  const std::vector<double> logits = net_.predict(features);
  return objectives::policies_from_logits(logits, 1, logits.size()).probs;
}

std::vector<ContinuousAction> PolicyGridGenerator::generate(std::span<const double> features, Rng& rng) const {
  const std::vector<double> rho = policy(features);
  std::vector<std::size_t> cells;
  if (sample_) {
    cells = objectives::sample_head_action(rho, m_, rng).cells;
  } else {
    cells.resize(rho.size());
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    std::stable_sort(cells.begin(), cells.end(), [&](std::size_t a, std::size_t b) { return rho[a] > rho[b]; });
    cells.resize(m_);
  }
  std::vector<ContinuousAction> out;
  out.reserve(m_);
  for (std::size_t c : cells) out.push_back(grid_cell_center(c, grid_, turn_));
  return out;
}

UniformGridGenerator::UniformGridGenerator(std::size_t m, int turn) {
  if (m < 1) throw std::invalid_argument("uniform generator needs m >= 1");
  const std::size_t cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(m))));
  const std::size_t rows = (m + cols - 1) / cols;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t r = i / cols;
    const std::size_t c = i % cols;
    actions_.push_back({(static_cast<double>(r) + 0.5) / static_cast<double>(rows),
                        (static_cast<double>(c) + 0.5) / static_cast<double>(cols), turn});
  }
}

std::vector<ContinuousAction> UniformGridGenerator::generate(std::span<const double>, Rng&) const { return actions_; }

ConstantGenerator::ConstantGenerator(std::vector<ContinuousAction> actions) : actions_(std::move(actions)) {
  if (actions_.empty()) throw std::invalid_argument("constant generator needs at least one action");
  for (const auto& a : actions_) {
    if (!a.valid()) throw std::invalid_argument("constant generator action out of range");
  }
}

std::vector<ContinuousAction> ConstantGenerator::generate(std::span<const double>, Rng&) const { return actions_; }

DiscreteGenerator::DiscreteGenerator(nn::Network net, std::size_t cells, std::size_t k, std::size_t m)
    : net_(std::move(net)), cells_(cells), k_(k), m_(m) {
  if (cells_ == 0 || net_.output_size() % cells_ != 0) throw std::invalid_argument("discrete output must be heads x cells");
  if (k_ < 1 || k_ > cells_) throw std::invalid_argument("discrete action size out of range");
  if (heads() != 1 && heads() != m_) throw std::invalid_argument("discrete generator needs 1 or m heads");
}

objectives::HeadPolicies DiscreteGenerator::policies(std::span<const double> features) const {
  return objectives::policies_from_logits(net_.predict(features), heads(), cells_);
}

std::vector<DiscreteAction> DiscreteGenerator::generate(std::span<const double> features, Rng& rng) const {
  const objectives::HeadPolicies pol = policies(features);
  std::vector<DiscreteAction> out;
  out.reserve(m_);
  for (std::size_t i = 0; i < m_; ++i) {
    out.push_back(objectives::sample_head_action(pol.heads == 1 ? pol.head(0) : pol.head(i), k_, rng));
  }
  return out;
}

namespace {

std::string generator_tag(const nn::Checkpoint& ckpt) {
  if (!ckpt.meta.is_object() || !ckpt.meta.contains("generator")) {
    throw ArtifactError("checkpoint has no generator metadata");
  }
  return ckpt.meta.at("generator").get<std::string>();
}

}  // namespace

std::unique_ptr<ContinuousGenerator> load_continuous_generator(const nn::Checkpoint& ckpt) {
  const std::string tag = generator_tag(ckpt);
  try {
    const int turn = ckpt.meta.value("turn", 1);
    if (tag == "continuous") return std::make_unique<NetworkGenerator>(ckpt.net, turn);
    if (tag == "policy_grid") {
      return std::make_unique<PolicyGridGenerator>(ckpt.net, ckpt.meta.at("grid").get<std::size_t>(),
                                                   ckpt.meta.at("m").get<std::size_t>(),
                                                   ckpt.meta.value("sample", false), turn);
    }
  } catch (const json::exception& e) {
    throw ArtifactError(std::string("bad generator metadata: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ArtifactError(std::string("checkpoint does not match its metadata: ") + e.what());
  }
  throw ArtifactError("checkpoint holds a '" + tag + "' generator, expected a continuous one");
}

DiscreteGenerator load_discrete_generator(const nn::Checkpoint& ckpt) {
  const std::string tag = generator_tag(ckpt);
  if (tag != "discrete") throw ArtifactError("checkpoint holds a '" + tag + "' generator, expected a discrete one");
  try {
    return DiscreteGenerator(ckpt.net, ckpt.meta.at("cells").get<std::size_t>(), ckpt.meta.at("k").get<std::size_t>(),
                             ckpt.meta.at("m").get<std::size_t>());
  } catch (const json::exception& e) {
    throw ArtifactError(std::string("bad generator metadata: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ArtifactError(std::string("checkpoint does not match its metadata: ") + e.what());
  }
}

std::unique_ptr<ContinuousGenerator> make_fixed_generator(const json& spec) {
  try {
    const std::string kind = spec.at("kind").get<std::string>();
    const int turn = spec.value("turn", 1);
    if (kind == "uniform_grid") return std::make_unique<UniformGridGenerator>(spec.at("m").get<std::size_t>(), turn);
    if (kind == "constant") {
      std::vector<ContinuousAction> actions;
      for (const auto& a : spec.at("actions")) actions.push_back({a.at(0).get<double>(), a.at(1).get<double>(), turn});
      return std::make_unique<ConstantGenerator>(std::move(actions));
    }
    throw ConfigError("generator: unknown kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("generator: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("generator: ") + e.what());
  }
}

}  // namespace mugen::gen
