#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace mugen::cli {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  unsigned threads = 1;
  std::string out = "runs";
  bool force = false;
  bool wall_clock = false;  // fill the wall_clock metrics column
};

struct RunOutput {
  std::string dir;
  std::vector<std::string> files;  // paths relative to dir, as listed in the manifest
};

/// Each command validates its config, creates `<out>/<hash>-s<seed>/`,
/// writes manifest.json and then its outputs. An existing run directory is
/// an ArtifactError unless `force` is set.
RunOutput cmd_train(const std::string& config_path, const GlobalOptions& opts);
RunOutput cmd_eval(const std::string& config_path, const std::vector<std::string>& checkpoints,
                   const GlobalOptions& opts);
RunOutput cmd_analyze(const std::string& config_path, const std::vector<std::string>& checkpoints,
                      const GlobalOptions& opts);
RunOutput cmd_sweep(const std::string& config_path, const GlobalOptions& opts);
RunOutput cmd_corpus(const std::string& config_path, const GlobalOptions& opts);
RunOutput cmd_plan(const std::string& config_path, const GlobalOptions& opts);

/// Exit code for an exception escaping a command: 2 config, 3 artifact,
/// 4 numerical, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace mugen::cli
