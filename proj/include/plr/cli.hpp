#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "plr/pipeline.hpp"
#include "plr/synthetic.hpp"

namespace plr {

inline constexpr const char* kVersion = "0.1.0";

/// Runs the `plr` command line. Returns 0 on success, 1 on domain errors and
/// 2 on usage errors. Diagnostics go to stderr.
int dispatch(int argc, const char* const* argv);

struct LoopFile {
  LoopConfig config;
  std::filesystem::path train;
  std::filesystem::path query;
  std::filesystem::path gallery;
};

/// Builds a loop configuration from `key = value` pairs. Relative data paths
/// resolve against `base_dir`. Unknown keys are rejected.
LoopFile parse_loop_file(const std::map<std::string, std::string>& kv, const std::filesystem::path& base_dir);
SyntheticSpec parse_synthetic_spec(const std::map<std::string, std::string>& kv);

}  // namespace plr
