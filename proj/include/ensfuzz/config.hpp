#pragma once

// Process-mode campaign file (TOML):
//
//   [campaign]   rounds, units, round_time, monitor_time, rho, seed, policy,
//                workdir, initial_seeds (directory), grace_seconds
//   [target]     path, runner
//   [callgraph]  file, entries, edge_map
//   [adapters.<name>]  kind, cmd, seeds_glob, crashes_glob
//
// Relative paths are taken relative to the file's directory.

#include <filesystem>
#include <string_view>

#include "ensfuzz/campaign.hpp"
#include "ensfuzz/process_backend.hpp"

namespace ensfuzz {

struct RunConfig {
  CampaignConfig campaign;
  ProcessOptions process;
  std::filesystem::path callgraph;
  std::filesystem::path entries;   // optional
  std::filesystem::path edge_map;  // optional
};

RunConfig parse_run_config(std::string_view toml_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& file);

/// Reads the call graph, entries and edge map named by the config.
DeepEdgeSet load_deep_edges(const RunConfig& config);

std::string read_text_file(const std::filesystem::path& p);

}  // namespace ensfuzz
