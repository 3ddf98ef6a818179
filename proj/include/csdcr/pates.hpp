#pragma once

// Pattern testing: Monte Carlo scoring of sampling patterns against an
// ensemble of desired/interferer constellations, pattern search, and the
// keep-versus-drop comparison.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "csdcr/frontend.hpp"
#include "csdcr/recon.hpp"
#include "csdcr/sampling.hpp"
#include "csdcr/sigmodel.hpp"

namespace csdcr {

enum class SolverKind { omp, irls };

std::string_view to_string(SolverKind kind);
SolverKind solver_from_string(std::string_view name);

struct SolverSettings {
  SolverKind kind = SolverKind::omp;
  double delta_f = 1e3;
  OmpSettings omp;
  IrlsSettings irls;
  double success_threshold_db = kDefaultSuccessThresholdDb;
};

enum class Execution { serial, parallel };

enum class Objective { max_success_rate, max_worst_snr };

std::string_view to_string(Objective objective);
Objective objective_from_string(std::string_view name);

struct DesignBrief {
  TimeGrid grid{400e3, 10e-3};
  Band design_band{0.0, 20e3};
  std::vector<Band> interferer_bands{{40e3, 50e3}};

  // Ensemble: one desired tone uniform on the design-band grid (0 Hz
  // excluded) and one interferer per trial uniform on the union of the
  // interferer-band grids, all phases uniform.
  double desired_amplitude = 1.0;
  double interferer_amplitude = 3.16;
  double noise_std = 0.0;

  std::size_t candidate_count = 50;
  std::size_t trials_per_candidate = 50;
  Objective objective = Objective::max_success_rate;

  // Candidate knobs, drawn uniformly per candidate.
  std::size_t adc_decimation = 5;
  std::size_t keep_count_min = 6;
  std::size_t keep_count_max = 34;
  std::size_t min_gap_min = 1;
  std::size_t min_gap_max = 4;
  double max_drop_fraction = 0.1;

  /// Throws InvalidConfig.
  void validate(double delta_f) const;
};

/// Draws one scenario of the ensemble.
SignalSpec draw_scenario(const DesignBrief& brief, double delta_f, Rng& rng);

struct TrialOutcome {
  double snr_db = 0.0;
  bool success = false;
  bool usable = true;  // false when every sample was dropped
  std::size_t kept = 0;     // effective kept samples
  std::size_t flagged = 0;  // saturated samples in the input pattern
  std::size_t dropped = 0;
  double drop_fraction = 0.0;
  std::uint64_t scenario_hash = 0;
  std::vector<std::size_t> dropped_indices;
  std::vector<std::size_t> flagged_indices;  // flagged clock indices of the input pattern
};

/// realize -> frontend -> acquire -> solve -> assess for one scenario. The
/// scenario's random phases and noise come from `seed`.
TrialOutcome run_trial(const SignalSpec& spec, const SamplingPattern& pattern,
                       const DropPolicy& policy, const FrontendConfig& frontend,
                       const SolverSettings& solver, Seed seed);

/// One Monte Carlo trial to run: a scenario draw from `stream` followed by
/// run_trial.
struct TrialJob {
  const SamplingPattern* pattern;
  DropPolicy policy;
  Seed stream;
};

/// Runs every job; outcome i belongs to job i regardless of execution mode.
std::vector<TrialOutcome> run_trials(std::span<const TrialJob> jobs, const DesignBrief& brief,
                                     const FrontendConfig& frontend, const SolverSettings& solver,
                                     Execution exec = Execution::parallel);

struct PatternScore {
  SamplingPattern pattern;
  DropPolicy policy;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  double mean_snr_db = 0.0;
  double worst_snr_db = 0.0;
  double mean_drop_fraction = 0.0;
  std::vector<TrialOutcome> outcomes;
};

PatternScore aggregate(const SamplingPattern& pattern, const DropPolicy& policy,
                       std::vector<TrialOutcome> outcomes);

/// Trial t draws its scenario from derive_seed(seed, {0, t}).
PatternScore evaluate_pattern(const SamplingPattern& pattern, const DropPolicy& policy,
                              const DesignBrief& brief, const FrontendConfig& frontend,
                              const SolverSettings& solver, Seed seed,
                              Execution exec = Execution::parallel);

/// True when `a` ranks strictly above `b` under the objective and the
/// tie-break chain (higher worst SNR, fewer kept samples, lexicographically
/// smaller kept set, policy order).
bool ranks_above(const PatternScore& a, const PatternScore& b, Objective objective);

struct LeaderboardEntry {
  std::size_t candidate_id;
  std::size_t keep_count;
  std::size_t min_gap;
  PatternScore score;
};

struct Selection {
  SamplingPattern pattern;
  DropPolicy policy;
  PatternScore score;
  std::vector<LeaderboardEntry> leaderboard;  // candidate-major, policy-minor
  std::size_t best = 0;                       // index into leaderboard
};

/// Random search over (keep_count, min_gap) crossed with all three drop
/// policies. Throws InfeasibleBrief when every entry has success rate 0.
Selection select_pattern(const DesignBrief& brief, const FrontendConfig& frontend,
                         const SolverSettings& solver, Seed seed,
                         Execution exec = Execution::parallel);

struct PolicyComparison {
  std::vector<PatternScore> rows;  // keep_all, drop_saturated, drop_saturated_capped
};

/// Scores one pattern under all three policies on a common trial stream.
PolicyComparison keep_vs_drop_study(const SamplingPattern& pattern, const DesignBrief& brief,
                                    const FrontendConfig& frontend, const SolverSettings& solver,
                                    Seed seed, Execution exec = Execution::parallel);

/// Columns: candidate_id, keep_count, min_gap, policy, trials, success_rate,
/// mean_snr_db, worst_snr_db, mean_drop_fraction.
void write_leaderboard_csv(std::ostream& out, const std::vector<LeaderboardEntry>& leaderboard);

}  // namespace csdcr
