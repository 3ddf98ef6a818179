#include "csdcr/harness.hpp"

#include <algorithm>
#include <cstdint>
#include <exception>
#include <limits>
#include <ostream>

#include <fmt/core.h>

#include "csdcr/errors.hpp"

namespace csdcr {

namespace {

constexpr std::uint64_t kDesignStream = 0x64657369;
constexpr std::uint64_t kSweepStream = 0x73776570;

}  // namespace

std::vector<double> default_sweep_freqs() {
  std::vector<double> out;
  for (int k = 1; k <= 19; ++k) out.push_back(5e3 * k);
  return out;
}

std::vector<double> SweepConfig::frequencies() const {
  std::vector<double> out = sweep_freqs.empty() ? default_sweep_freqs() : sweep_freqs;
  std::sort(out.begin(), out.end());
  return out;
}

DesignBrief SweepConfig::design_brief() const {
  DesignBrief brief = pates;
  brief.grid = grid;
  brief.design_band = {0.0, f_b};
  brief.interferer_bands = interferer_bands;
  brief.desired_amplitude = desired_amplitude;
  brief.interferer_amplitude = desired_amplitude * interferer_amplitude_ratio;
  brief.noise_std = noise_std;
  return brief;
}

void SweepConfig::validate() const {
  if (!(f_b > 0.0) || !(f_b < grid.nyquist()))
    throw InvalidConfig(fmt::format("f_B = {} Hz outside (0, {}) Hz", f_b, grid.nyquist()));
  const auto freqs = frequencies();
  for (double f : freqs) {
    if (!(f > 0.0) || !(f < grid.nyquist()))
      throw InvalidConfig(fmt::format("sweep frequency {} Hz outside (0, {}) Hz", f, grid.nyquist()));
    const double fi = interferer_mode == InterfererMode::fixed ? interferer_freq : f + interferer_offset;
    if (!(fi > 0.0) || !(fi < grid.nyquist()))
      throw InvalidConfig(fmt::format("interferer frequency {} Hz (desired {} Hz) outside (0, {}) Hz",
                                      fi, f, grid.nyquist()));
  }
  if (trials_per_point < 1) throw InvalidConfig("trials_per_point must be >= 1");
  if (!(desired_amplitude > 0.0) || !(interferer_amplitude_ratio > 0.0))
    throw InvalidConfig("amplitudes must be positive");
  frontend.validate(grid);
  if (!(solver.delta_f > 0.0)) throw InvalidConfig("delta_f must be positive");
  design_brief().validate(solver.delta_f);
}

SignalSpec sweep_scenario(const SweepConfig& config, double desired_freq) {
  SignalSpec spec;
  spec.design_band = {0.0, config.f_b};
  spec.interferer_bands = config.interferer_bands;
  spec.noise_std = config.noise_std;
  spec.tones.push_back({desired_freq, config.desired_amplitude, std::nullopt, ToneRole::desired});
  const double fi = config.interferer_mode == InterfererMode::fixed
                        ? config.interferer_freq
                        : desired_freq + config.interferer_offset;
  spec.tones.push_back({fi, config.desired_amplitude * config.interferer_amplitude_ratio,
                        std::nullopt, ToneRole::interferer});
  return spec;
}

SweepResult run_sweep(const SweepConfig& config, Execution exec) {
  config.validate();
  if (config.pattern_file) {
    const SamplingPattern pattern = load_pattern(*config.pattern_file);
    if (!(pattern.grid() == config.grid))
      throw InvalidConfig(fmt::format("pattern file '{}' was made for a different time grid",
                                      config.pattern_file->string()));
    return run_sweep_with_pattern(config, pattern, config.file_policy, exec);
  }
  Selection sel = select_pattern(config.design_brief(), config.frontend, config.solver,
                                 derive_seed(config.seed, {kDesignStream}), exec);
  SweepResult result = run_sweep_with_pattern(config, sel.pattern, sel.policy, exec);
  result.selection = std::move(sel);
  return result;
}

SweepResult run_sweep_with_pattern(const SweepConfig& config, const SamplingPattern& pattern,
                                   const DropPolicy& policy, Execution exec) {
  config.validate();
  const auto freqs = config.frequencies();
  const std::size_t trials = config.trials_per_point;

  std::vector<SignalSpec> scenarios;
  for (double f : freqs) scenarios.push_back(sweep_scenario(config, f));

  std::vector<TrialOutcome> outcomes(freqs.size() * trials);
  auto body = [&](std::size_t i) {
    const std::size_t p = i / trials;
    const std::size_t t = i % trials;
    outcomes[i] = run_trial(scenarios[p], pattern, policy, config.frontend, config.solver,
                            derive_seed(config.seed, {kSweepStream, p, t}));
  };

  std::exception_ptr failure;
  if (exec == Execution::parallel) {
    const auto n = static_cast<std::int64_t>(outcomes.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(csdcr_sweep_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  } else {
    for (std::size_t i = 0; i < outcomes.size(); ++i) body(i);
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult result{{}, pattern, policy, std::nullopt};
  for (std::size_t p = 0; p < freqs.size(); ++p) {
    SweepRow row{freqs[p], trials, 0, 0.0, 0.0, 0.0};
    for (std::size_t t = 0; t < trials; ++t) {
      const TrialOutcome& o = outcomes[p * trials + t];
      row.successes += o.success ? 1 : 0;
      row.mean_snr_db += o.snr_db;
      row.mean_drop_fraction += o.drop_fraction;
    }
    const auto n = static_cast<double>(trials);
    row.success_probability = static_cast<double>(row.successes) / n;
    row.mean_snr_db /= n;
    row.mean_drop_fraction /= n;
    result.rows.push_back(row);
  }
  return result;
}

std::vector<PsdRow> run_psd_figure(const SignalSpec& spec, const TimeGrid& grid, Seed seed,
                                   std::size_t segment_len) {
  const SignalFrame frame = realize(spec, grid, seed, ToneRequirement::none);
  std::vector<PsdRow> rows;
  for (const PsdPoint& p : periodogram(frame, segment_len)) {
    std::string label = "none";
    if (spec.design_band.contains(p.freq_hz)) {
      label = "desired";
    } else if (std::any_of(spec.interferer_bands.begin(), spec.interferer_bands.end(),
                           [&](const Band& b) { return b.contains(p.freq_hz); })) {
      label = "interferer";
    }
    rows.push_back({p.freq_hz, p.psd_db, std::move(label)});
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "desired_freq_hz,trials,successes,success_probability,mean_snr_db,mean_drop_fraction\n";
  for (const SweepRow& r : result.rows)
    out << fmt::format("{},{},{},{},{},{}\n", r.desired_freq_hz, r.trials, r.successes,
                       r.success_probability, r.mean_snr_db, r.mean_drop_fraction);
}

void write_psd_csv(std::ostream& out, const std::vector<PsdRow>& rows) {
  out << "freq_hz,psd_db,band_label\n";
  for (const PsdRow& r : rows) out << fmt::format("{},{},{}\n", r.freq_hz, r.psd_db, r.band_label);
}

}  // namespace csdcr
