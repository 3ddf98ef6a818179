#pragma once

// JSON experiment configuration shared by the CLI subcommands.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "csdcr/harness.hpp"

namespace csdcr {

struct PsdConfig {
  std::size_t segment_len = 1024;
  double desired_freq = 10e3;
};

struct ExperimentConfig {
  SweepConfig sweep;
  PsdConfig psd;

  /// Scenario used by the psd subcommand: the sweep scenario at psd.desired_freq.
  SignalSpec psd_scenario() const;
};

/// Throws InvalidConfig on unknown sections or keys, wrong types, or values
/// that fail validation. Relative pattern_file paths resolve against `base_dir`.
ExperimentConfig parse_config(std::string_view json_text,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Key reference printed by `--help`.
std::string config_reference();

}  // namespace csdcr
