#pragma once

// Frequency-sweep experiment, PSD figure data, and CSV emission.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "csdcr/pates.hpp"

namespace csdcr {

enum class InterfererMode { fixed, co_swept };

struct SweepConfig {
  TimeGrid grid{400e3, 10e-3};
  double f_b = 20e3;
  std::vector<double> sweep_freqs;  // empty = 5..95 kHz in 5 kHz steps
  InterfererMode interferer_mode = InterfererMode::fixed;
  double interferer_freq = 45e3;    // fixed mode
  double interferer_offset = 25e3;  // co_swept mode: interferer at desired + offset
  double desired_amplitude = 1.0;
  double interferer_amplitude_ratio = 3.16;
  std::vector<Band> interferer_bands{{40e3, 50e3}};
  double noise_std = 0.0;
  std::size_t trials_per_point = 200;

  /// Unset: design the pattern with select_pattern on design_brief().
  std::optional<std::filesystem::path> pattern_file;
  DropPolicy file_policy;  // policy used with a pattern loaded from file

  FrontendConfig frontend;  // filter_cutoff follows f_b unless set explicitly
  SolverSettings solver;
  DesignBrief pates;        // search knobs; bands, grid and amplitudes come from above
  Seed seed = 1;

  std::vector<double> frequencies() const;
  /// Brief for the design band [0, f_b] with this config's ensemble.
  DesignBrief design_brief() const;
  /// Throws InvalidConfig.
  void validate() const;
};

std::vector<double> default_sweep_freqs();

struct SweepRow {
  double desired_freq_hz;
  std::size_t trials;
  std::size_t successes;
  double success_probability;
  double mean_snr_db;
  double mean_drop_fraction;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  SamplingPattern pattern;
  DropPolicy policy;
  std::optional<Selection> selection;  // set when the pattern was designed
};

/// Scenario for one sweep point: desired tone at `desired_freq`, one
/// interferer per interferer_mode, priors from the config.
SignalSpec sweep_scenario(const SweepConfig& config, double desired_freq);

/// The pattern is designed (or loaded) once and held fixed over every sweep
/// frequency, including those above f_b.
SweepResult run_sweep(const SweepConfig& config, Execution exec = Execution::parallel);

/// Sweep over an already chosen pattern and policy.
SweepResult run_sweep_with_pattern(const SweepConfig& config, const SamplingPattern& pattern,
                                   const DropPolicy& policy,
                                   Execution exec = Execution::parallel);

struct PsdRow {
  double freq_hz;
  double psd_db;
  std::string band_label;  // "desired", "interferer" or "none"
};

std::vector<PsdRow> run_psd_figure(const SignalSpec& spec, const TimeGrid& grid, Seed seed,
                                   std::size_t segment_len = 1024);

void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_psd_csv(std::ostream& out, const std::vector<PsdRow>& rows);

}  // namespace csdcr
