#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mugen/common.hpp"
#include "mugen/domain.hpp"
#include "mugen/network.hpp"
#include "mugen/objectives.hpp"

namespace mugen::gen {

/// Maps encoded state features to m candidate actions.
class ContinuousGenerator {
 public:
  virtual ~ContinuousGenerator() = default;
  virtual std::vector<ContinuousAction> generate(std::span<const double> features, Rng& rng) const = 0;
  virtual std::size_t count() const = 0;
  virtual std::string kind() const = 0;
};

/// Sigmoid output layer of 2m units read as interleaved (velocity, angle).
class NetworkGenerator : public ContinuousGenerator {
 public:
  NetworkGenerator(nn::Network net, int turn = 1);
  std::vector<ContinuousAction> generate(std::span<const double> features, Rng& rng) const override;
  std::size_t count() const override { return net_.output_size() / 2; }
  std::string kind() const override { return "network"; }
  const nn::Network& network() const { return net_; }

 private:
  nn::Network net_;
  int turn_;
};

/// Cell c of a G×G grid covers velocity bin c / G and angle bin c % G.
ContinuousAction grid_cell_center(std::size_t cell, std::size_t grid, int turn = 1);
/// Cell containing an action (upper boundary folded into the last bin).
std::size_t grid_cell_of(const ContinuousAction& a, std::size_t grid);

/// Policy over a G×G action grid (linear logits). Candidates are the
/// centres of the m most probable cells, or m cells drawn without
/// replacement from the policy when `sample` is set.
class PolicyGridGenerator : public ContinuousGenerator {
 public:
  PolicyGridGenerator(nn::Network net, std::size_t grid, std::size_t m, bool sample = false, int turn = 1);
  std::vector<ContinuousAction> generate(std::span<const double> features, Rng& rng) const override;
  std::size_t count() const override { return m_; }
  std::string kind() const override { return "policy_grid"; }
  std::vector<double> policy(std::span<const double> features) const;
  const nn::Network& network() const { return net_; }
  std::size_t grid() const { return grid_; }

 private:
  nn::Network net_;
  std::size_t grid_;
  std::size_t m_;
  bool sample_;
  int turn_;
};

/// State-independent baseline: m points spread over a regular grid of the
/// action square, row by row.
class UniformGridGenerator : public ContinuousGenerator {
 public:
  explicit UniformGridGenerator(std::size_t m, int turn = 1);
  std::vector<ContinuousAction> generate(std::span<const double> features, Rng& rng) const override;
  std::size_t count() const override { return actions_.size(); }
  std::string kind() const override { return "uniform_grid"; }

 private:
  std::vector<ContinuousAction> actions_;
};

class ConstantGenerator : public ContinuousGenerator {
 public:
  explicit ConstantGenerator(std::vector<ContinuousAction> actions);
  std::vector<ContinuousAction> generate(std::span<const double> features, Rng& rng) const override;
  std::size_t count() const override { return actions_.size(); }
  std::string kind() const override { return "constant"; }

 private:
  std::vector<ContinuousAction> actions_;
};

/// Discrete generator over n·n cells. With m heads every head contributes
/// one k-cell action; with a single head (the REINFORCE baseline) m actions
/// are drawn independently from that head.
class DiscreteGenerator {
 public:
  DiscreteGenerator(nn::Network net, std::size_t cells, std::size_t k, std::size_t m);
  std::size_t heads() const { return net_.output_size() / cells_; }
  std::size_t count() const { return m_; }
  std::size_t cells() const { return cells_; }
  std::size_t k() const { return k_; }
  objectives::HeadPolicies policies(std::span<const double> features) const;
  std::vector<DiscreteAction> generate(std::span<const double> features, Rng& rng) const;
  const nn::Network& network() const { return net_; }

 private:
  nn::Network net_;
  std::size_t cells_;
  std::size_t k_;
  std::size_t m_;
};

/// Builds a continuous generator from a checkpoint's metadata. Throws
/// ArtifactError when the checkpoint holds something else.
std::unique_ptr<ContinuousGenerator> load_continuous_generator(const nn::Checkpoint& ckpt);
DiscreteGenerator load_discrete_generator(const nn::Checkpoint& ckpt);

/// {"kind": "uniform_grid", "m": 8} / {"kind": "constant", "actions": [[v, a], ...]}.
std::unique_ptr<ContinuousGenerator> make_fixed_generator(const nlohmann::json& spec);

}  // namespace mugen::gen
