#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "mugen/eval.hpp"
#include "mugen/training.hpp"

namespace mugen::config {

/// A parsed config file with its raw text kept for error locations.
struct Document {
  std::string path;
  std::string text;
  nlohmann::json data;
  /// Directory that relative paths in the document are resolved against.
  std::string base_dir() const;
  std::string resolve(const std::string& p) const;
};

/// Throws ConfigError "path:line:col: ..." on unreadable or malformed JSON.
Document load(const std::string& path);
Document parse(const std::string& text, const std::string& path = "<config>");

/// 1-based line of the first `"key":` in the text, or 0 when absent.
std::size_t line_of(const Document& doc, const std::string& key);

/// Validating accessor over one JSON object of a Document. Every error
/// names the key and, when it appears in the text, its line.
class Section {
 public:
  Section(const Document& doc, const nlohmann::json& obj, std::string where);

  const Document& document() const { return *doc_; }
  bool has(const std::string& key) const;
  const nlohmann::json& raw(const std::string& key);
  Section child(const std::string& key);

  template <typename T>
  T get(const std::string& key, const T& fallback);
  template <typename T>
  T require(const std::string& key);

  std::size_t count(const std::string& key, std::size_t fallback, std::size_t min = 1);
  double positive(const std::string& key, double fallback);
  double non_negative(const std::string& key, double fallback);

  /// Fails on keys never read through this section.
  void finish() const;
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  const Document* doc_;
  const nlohmann::json* obj_;
  std::string where_;
  std::set<std::string> used_;
};

template <typename T>
T Section::get(const std::string& key, const T& fallback) {
  used_.insert(key);
  if (!obj_->contains(key)) return fallback;
  try {
    return obj_->at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(key, "has the wrong type");
  }
}

template <typename T>
T Section::require(const std::string& key) {
  if (!obj_->contains(key)) fail(key, "is required but missing");
  return get<T>(key, T{});
}

training::TrainConfig parse_train(Section s);

struct GeneratorEntry {
  std::string name;
  std::string objective;
  std::string checkpoint;  // resolved path, empty for fixed generators
  nlohmann::json fixed;    // fixed-generator spec when checkpoint is empty
};

struct CorpusSource {
  std::string path;  // resolved; empty to generate
  nlohmann::json env;
  std::size_t states = 256;
  std::uint64_t seed = 0;
};

struct EvalConfig {
  std::vector<GeneratorEntry> generators;
  CorpusSource corpus;
  std::vector<eval::PlannerKind> planners{eval::PlannerKind::Ucb};
  std::vector<std::size_t> budgets = eval::default_budgets();
  double exploration_ucb = 1.0;
  double exploration_kr = 0.5;
  ExecutionModel noise;
  planning::ExpansionConfig expansion;
  std::size_t eval_samples = 1000;
  std::uint64_t seed = 0;
};

EvalConfig parse_eval(Section s);

struct AnalyzeConfig {
  std::vector<GeneratorEntry> generators;
  CorpusSource corpus;
  std::size_t bins = 32;
  std::uint64_t seed = 0;
};

AnalyzeConfig parse_analyze(Section s);

struct SweepConfig {
  training::TrainConfig train;
  CorpusSource corpus;
  eval::PlannerKind planner = eval::PlannerKind::Ucb;
  std::size_t budget = 64;
  std::size_t eval_samples = 1000;
  std::vector<double> exploration;
  std::vector<double> temperature;
  std::vector<double> learning_rate;
  std::vector<double> sigma;
  std::uint64_t seed = 0;
};

SweepConfig parse_sweep(Section s);

struct CorpusConfig {
  nlohmann::json env;
  std::size_t count = 256;
  std::uint64_t seed = 0;
};

CorpusConfig parse_corpus(Section s);

struct PlanConfig {
  nlohmann::json env;
  GeneratorEntry generator;
  CorpusSource corpus;
  std::size_t state_index = 0;
  eval::PlannerKind planner = eval::PlannerKind::KrUcb;
  std::size_t budget = 128;
  double exploration = 0.5;
  ExecutionModel noise;
  planning::ExpansionConfig expansion;
  std::uint64_t seed = 0;
};

PlanConfig parse_plan(Section s);

/// Validates an environment block (id plus parameters).
nlohmann::json parse_env(Section s);

/// Hash of the canonical (sorted-key, compact) serialization.
std::string config_hash(const nlohmann::json& canonical);

}  // namespace mugen::config
