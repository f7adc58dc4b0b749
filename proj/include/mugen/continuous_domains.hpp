#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "mugen/common.hpp"
#include "mugen/curling.hpp"
#include "mugen/domain.hpp"
#include "mugen/location_game.hpp"

namespace mugen {

/// A state turned into what the generator sees and what the planner samples.
struct ContinuousInstance {
  std::vector<double> features;
  OutcomeReward reward;
};

/// Source of continuous single-decision problems. States travel as JSON so
/// that corpora, checkpoints and training share one representation.
class ContinuousDomain {
 public:
  virtual ~ContinuousDomain() = default;
  virtual std::string id() const = 0;
  virtual std::size_t feature_size() const = 0;
  virtual nlohmann::json sample_state(Rng& rng) const = 0;
  virtual ContinuousInstance instance(const nlohmann::json& state) const = 0;
  /// Configuration that reconstructs this domain via make_continuous_domain.
  virtual nlohmann::json config() const = 0;
};

/// Hammer shots on the simplified sheet. Reward is the signed score.
class CurlingDomain : public ContinuousDomain {
 public:
  CurlingDomain(curling::SheetConfig sheet, curling::Encoding encoding);
  std::string id() const override { return "curling"; }
  std::size_t feature_size() const override { return 3 * encoding_.rows * encoding_.cols; }
  nlohmann::json sample_state(Rng& rng) const override;
  ContinuousInstance instance(const nlohmann::json& state) const override;
  nlohmann::json config() const override;

  const curling::SheetConfig& sheet() const { return sheet_; }
  const curling::Encoding& encoding() const { return encoding_; }

 private:
  curling::SheetConfig sheet_;
  curling::Encoding encoding_;
};

/// Gaussian bumps over the normalized action square. Reward of an outcome is
/// max_k h_k·exp(-|a - c_k|² / (2 w²)). With `random_heights` each state
/// draws h_k ~ U[height_min, 1] and the features are the heights; otherwise
/// all heights are 1 and the feature is the constant 1.
class BumpDomain : public ContinuousDomain {
 public:
  struct Params {
    std::vector<std::array<double, 2>> centers{{0.7, 0.3}};
    double width = 0.15;
    bool random_heights = false;
    double height_min = 0.2;
  };
  explicit BumpDomain(Params p);
  std::string id() const override { return "synthetic_bump"; }
  std::size_t feature_size() const override { return params_.random_heights ? params_.centers.size() : 1; }
  nlohmann::json sample_state(Rng& rng) const override;
  ContinuousInstance instance(const nlohmann::json& state) const override;
  nlohmann::json config() const override;
  const Params& params() const { return params_; }

  static double surface(const Params& p, const std::vector<double>& heights, const ContinuousAction& a);

 private:
  Params params_;
};

/// Throws ConfigError on unknown ids or bad parameters.
std::unique_ptr<ContinuousDomain> make_continuous_domain(const nlohmann::json& env);

// ---- state serialization ---------------------------------------------------

nlohmann::json to_json(const curling::CurlingState& s);
curling::CurlingState curling_state_from_json(const nlohmann::json& j);
nlohmann::json to_json(const location::GridState& g);
location::GridState grid_state_from_json(const nlohmann::json& j);

nlohmann::json sheet_to_json(const curling::SheetConfig& cfg);
curling::SheetConfig sheet_from_json(const nlohmann::json& j);

/// Grid values scaled by n·n so that a uniform grid reads as all ones.
std::vector<double> location_features(const location::GridState& g);

}  // namespace mugen
