#include "csdcr/pates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numbers>
#include <ostream>

#include <fmt/core.h>

#include "csdcr/errors.hpp"

namespace csdcr {

namespace {

// Stream tags keeping the derived seeds of different purposes apart.
constexpr std::uint64_t kKnobStream = 0x6b6e6f62;     // candidate knobs
constexpr std::uint64_t kPatternStream = 0x70617474;  // candidate pattern draw
constexpr std::uint64_t kTrialStream = 0x7472696c;    // candidate trials
constexpr std::uint64_t kNoiseStream = 1;

constexpr DropMode kAllModes[] = {DropMode::keep_all, DropMode::drop_saturated,
                                  DropMode::drop_saturated_capped};

std::vector<double> band_frequencies(const Band& band, double delta_f, bool skip_dc) {
  std::vector<double> out;
  const auto lo = static_cast<long long>(std::ceil(band.lo / delta_f - 1e-9));
  const auto hi = static_cast<long long>(std::floor(band.hi / delta_f + 1e-9));
  for (long long q = lo; q <= hi; ++q)
    if (!(skip_dc && q == 0)) out.push_back(static_cast<double>(q) * delta_f);
  return out;
}

}  // namespace

std::string_view to_string(SolverKind kind) { return kind == SolverKind::omp ? "omp" : "irls"; }

SolverKind solver_from_string(std::string_view name) {
  if (name == "omp") return SolverKind::omp;
  if (name == "irls") return SolverKind::irls;
  throw InvalidConfig(fmt::format("unknown solver '{}' (expected omp or irls)", name));
}

std::string_view to_string(Objective objective) {
  return objective == Objective::max_success_rate ? "max_success_rate" : "max_worst_snr";
}

Objective objective_from_string(std::string_view name) {
  if (name == "max_success_rate") return Objective::max_success_rate;
  if (name == "max_worst_snr") return Objective::max_worst_snr;
  throw InvalidConfig(fmt::format("unknown objective '{}'", name));
}

void DesignBrief::validate(double delta_f) const {
  SignalSpec probe;
  probe.tones.push_back({design_band.hi > 0 ? design_band.hi : 1.0, 1.0, 0.0, ToneRole::desired});
  probe.design_band = design_band;
  probe.interferer_bands = interferer_bands;
  try {
    csdcr::validate(probe, grid);
  } catch (const InvalidSpec& e) {
    throw InvalidConfig(e.what());
  }
  if (!(delta_f > 0.0)) throw InvalidConfig("delta_f must be positive");
  auto on_grid = [delta_f](double f) {
    const double q = f / delta_f;
    return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, std::abs(q));
  };
  std::vector<Band> all_bands{design_band};
  all_bands.insert(all_bands.end(), interferer_bands.begin(), interferer_bands.end());
  for (const Band& b : all_bands)
    if (!on_grid(b.lo) || !on_grid(b.hi))
      throw InvalidConfig(fmt::format("band [{}, {}] Hz edges are not multiples of delta_f = {} Hz",
                                      b.lo, b.hi, delta_f));
  if (band_frequencies(design_band, delta_f, true).empty())
    throw InvalidConfig("design band contains no nonzero grid frequency");
  for (const Band& b : interferer_bands)
    if (band_frequencies(b, delta_f, false).empty())
      throw InvalidConfig(fmt::format("interferer band [{}, {}] Hz has no grid frequency", b.lo, b.hi));
  if (!(desired_amplitude > 0.0) || !(interferer_amplitude > 0.0))
    throw InvalidConfig("ensemble amplitudes must be positive");
  if (!(noise_std >= 0.0)) throw InvalidConfig("noise_std must be >= 0");
  if (candidate_count < 1) throw InvalidConfig("candidate_count must be >= 1");
  if (trials_per_candidate < 1) throw InvalidConfig("trials_per_candidate must be >= 1");
  if (adc_decimation < 1 || adc_decimation > grid.length())
    throw InvalidConfig(fmt::format("adc_decimation {} outside [1, {}]", adc_decimation, grid.length()));
  if (keep_count_min < 1 || keep_count_min > keep_count_max)
    throw InvalidConfig("keep_count range must satisfy 1 <= min <= max");
  if (keep_count_max > grid.length() / adc_decimation)
    throw InvalidConfig(fmt::format("keep_count_max {} exceeds the {} ADC clock ticks",
                                    keep_count_max, grid.length() / adc_decimation));
  if (min_gap_min < 1 || min_gap_min > min_gap_max)
    throw InvalidConfig("min_gap range must satisfy 1 <= min <= max");
  if (!(max_drop_fraction >= 0.0 && max_drop_fraction < 1.0))
    throw InvalidConfig("max_drop_fraction must lie in [0, 1)");
}

SignalSpec draw_scenario(const DesignBrief& brief, double delta_f, Rng& rng) {
  const auto desired_grid = band_frequencies(brief.design_band, delta_f, true);
  std::vector<double> interferer_grid;
  for (const Band& b : brief.interferer_bands) {
    auto g = band_frequencies(b, delta_f, false);
    interferer_grid.insert(interferer_grid.end(), g.begin(), g.end());
  }

  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  SignalSpec spec;
  spec.design_band = brief.design_band;
  spec.interferer_bands = brief.interferer_bands;
  spec.noise_std = brief.noise_std;

  std::uniform_int_distribution<std::size_t> pick_desired(0, desired_grid.size() - 1);
  const double fd = desired_grid[pick_desired(rng)];
  spec.tones.push_back({fd, brief.desired_amplitude, phase(rng), ToneRole::desired});
  if (!interferer_grid.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, interferer_grid.size() - 1);
    const double fi = interferer_grid[pick(rng)];
    spec.tones.push_back({fi, brief.interferer_amplitude, phase(rng), ToneRole::interferer});
  }
  return spec;
}

TrialOutcome run_trial(const SignalSpec& spec, const SamplingPattern& pattern,
                       const DropPolicy& policy, const FrontendConfig& frontend,
                       const SolverSettings& solver, Seed seed) {
  const TimeGrid& grid = pattern.grid();
  TrialOutcome outcome;
  outcome.scenario_hash = spec_hash(spec);

  const SignalFrame frame = realize(spec, grid, seed);
  const FrontendOutput front = run_frontend(frame, frontend);
  for (std::size_t k : pattern.kept())
    if (front.saturation_flags[k * pattern.decimation()]) outcome.flagged_indices.push_back(k);
  outcome.flagged = outcome.flagged_indices.size();

  std::optional<Observation> obs;
  try {
    obs = acquire(front, pattern, policy);
  } catch (const UnusableAcquisition&) {
    outcome.usable = false;
    outcome.snr_db = 0.0;
    outcome.success = false;
    outcome.kept = 0;
    outcome.dropped = pattern.size();
    outcome.dropped_indices = pattern.kept();
    outcome.drop_fraction = 1.0;
    return outcome;
  }
  outcome.kept = obs->values.size();
  outcome.dropped = obs->dropped.size();
  for (const DroppedSample& d : obs->dropped) outcome.dropped_indices.push_back(d.clock_index);
  outcome.drop_fraction = static_cast<double>(outcome.dropped) / static_cast<double>(pattern.size());

  const auto taps = design_lowpass(frontend.filter_cutoff, grid.grid_rate(), frontend.filter_order);
  const auto response = [&taps, rate = grid.grid_rate()](double f) {
    return lowpass_response(taps, f, rate);
  };
  const auto instants = obs->effective.dense_indices();
  const Dictionary dict = build_dictionary(spec, grid, instants, solver.delta_f, response);

  ReconResult result;
  if (solver.kind == SolverKind::omp) {
    OmpSettings omp = solver.omp;
    omp.max_atoms = std::min(omp.max_atoms, dict.size());
    result = omp_solve(*obs, dict, omp);
  } else {
    result = irls_bp_solve(*obs, dict, solver.irls);
  }
  assess(result, frame, front.applied_gain, solver.success_threshold_db);
  outcome.snr_db = std::isnan(result.desired_snr_db) ? 0.0 : result.desired_snr_db;
  outcome.success = result.success;
  return outcome;
}

std::vector<TrialOutcome> run_trials(std::span<const TrialJob> jobs, const DesignBrief& brief,
                                     const FrontendConfig& frontend, const SolverSettings& solver,
                                     Execution exec) {
  std::vector<TrialOutcome> out(jobs.size());
  std::exception_ptr failure;

  auto body = [&](std::size_t i) {
    const TrialJob& job = jobs[i];
    Rng rng(job.stream);
    const SignalSpec spec = draw_scenario(brief, solver.delta_f, rng);
    out[i] = run_trial(spec, *job.pattern, job.policy, frontend, solver,
                       derive_seed(job.stream, {kNoiseStream}));
  };

  if (exec == Execution::parallel) {
    const auto n = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(csdcr_trial_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  } else {
    for (std::size_t i = 0; i < jobs.size(); ++i) body(i);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

PatternScore aggregate(const SamplingPattern& pattern, const DropPolicy& policy,
                       std::vector<TrialOutcome> outcomes) {
  if (outcomes.empty()) throw InvalidConfig("a pattern score needs at least one trial");
  PatternScore score{pattern, policy, 0, 0, 0.0, 0.0, 0.0, 0.0, {}};
  score.trials = outcomes.size();
  double snr_sum = 0.0;
  double drop_sum = 0.0;
  score.worst_snr_db = std::numeric_limits<double>::infinity();
  for (const TrialOutcome& t : outcomes) {
    score.successes += t.success ? 1 : 0;
    snr_sum += t.snr_db;
    drop_sum += t.drop_fraction;
    score.worst_snr_db = std::min(score.worst_snr_db, t.snr_db);
  }
  const auto n = static_cast<double>(score.trials);
  score.success_rate = static_cast<double>(score.successes) / n;
  score.mean_snr_db = snr_sum / n;
  score.mean_drop_fraction = drop_sum / n;
  score.outcomes = std::move(outcomes);
  return score;
}

PatternScore evaluate_pattern(const SamplingPattern& pattern, const DropPolicy& policy,
                              const DesignBrief& brief, const FrontendConfig& frontend,
                              const SolverSettings& solver, Seed seed, Execution exec) {
  brief.validate(solver.delta_f);
  frontend.validate(pattern.grid());
  std::vector<TrialJob> jobs;
  jobs.reserve(brief.trials_per_candidate);
  for (std::size_t t = 0; t < brief.trials_per_candidate; ++t)
    jobs.push_back({&pattern, policy, derive_seed(seed, {0, t})});
  return aggregate(pattern, policy, run_trials(jobs, brief, frontend, solver, exec));
}

bool ranks_above(const PatternScore& a, const PatternScore& b, Objective objective) {
  if (objective == Objective::max_success_rate) {
    if (a.success_rate != b.success_rate) return a.success_rate > b.success_rate;
  }
  if (a.worst_snr_db != b.worst_snr_db) return a.worst_snr_db > b.worst_snr_db;
  if (a.pattern.size() != b.pattern.size()) return a.pattern.size() < b.pattern.size();
  if (a.pattern.kept() != b.pattern.kept()) return a.pattern.kept() < b.pattern.kept();
  return static_cast<int>(a.policy.mode) < static_cast<int>(b.policy.mode);
}

Selection select_pattern(const DesignBrief& brief, const FrontendConfig& frontend,
                         const SolverSettings& solver, Seed seed, Execution exec) {
  brief.validate(solver.delta_f);
  frontend.validate(brief.grid);
  const std::size_t ticks = brief.grid.length() / brief.adc_decimation;

  struct Candidate {
    std::size_t keep_count;
    std::size_t min_gap;
    SamplingPattern pattern;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(brief.candidate_count);
  for (std::size_t cid = 0; cid < brief.candidate_count; ++cid) {
    Rng knobs(derive_seed(seed, {kKnobStream, cid}));
    std::uniform_int_distribution<std::size_t> gap_dist(brief.min_gap_min, brief.min_gap_max);
    std::uniform_int_distribution<std::size_t> count_dist(brief.keep_count_min, brief.keep_count_max);
    std::size_t gap = gap_dist(knobs);
    std::size_t count = count_dist(knobs);
    // Largest count that still fits with this gap.
    count = std::min(count, (ticks - 1) / gap + 1);
    candidates.push_back({count, gap,
                          make_random_pattern(brief.grid, brief.adc_decimation, count, gap,
                                              derive_seed(seed, {kPatternStream, cid}))});
  }

  const std::size_t trials = brief.trials_per_candidate;
  std::vector<TrialJob> jobs;
  jobs.reserve(candidates.size() * std::size(kAllModes) * trials);
  for (std::size_t cid = 0; cid < candidates.size(); ++cid)
    for (DropMode mode : kAllModes)
      for (std::size_t t = 0; t < trials; ++t)
        jobs.push_back({&candidates[cid].pattern, DropPolicy{mode, brief.max_drop_fraction},
                        derive_seed(seed, {kTrialStream, cid, t})});

  const auto outcomes = run_trials(jobs, brief, frontend, solver, exec);

  Selection sel{candidates.front().pattern, {}, {candidates.front().pattern, {}, 0, 0, 0.0, 0.0, 0.0, 0.0, {}}, {}, 0};
  std::size_t offset = 0;
  for (std::size_t cid = 0; cid < candidates.size(); ++cid) {
    for (DropMode mode : kAllModes) {
      std::vector<TrialOutcome> slice(outcomes.begin() + static_cast<std::ptrdiff_t>(offset),
                                      outcomes.begin() + static_cast<std::ptrdiff_t>(offset + trials));
      offset += trials;
      sel.leaderboard.push_back(
          {cid, candidates[cid].keep_count, candidates[cid].min_gap,
           aggregate(candidates[cid].pattern, DropPolicy{mode, brief.max_drop_fraction},
                     std::move(slice))});
    }
  }

  bool any_success = false;
  for (std::size_t i = 0; i < sel.leaderboard.size(); ++i) {
    any_success = any_success || sel.leaderboard[i].score.success_rate > 0.0;
    if (i > 0 && ranks_above(sel.leaderboard[i].score, sel.leaderboard[sel.best].score,
                             brief.objective))
      sel.best = i;
  }
  if (!any_success)
    throw InfeasibleBrief(fmt::format(
        "none of the {} candidate patterns reconstructed a single trial successfully",
        candidates.size()));

  sel.score = sel.leaderboard[sel.best].score;
  sel.pattern = sel.score.pattern;
  sel.policy = sel.score.policy;
  return sel;
}

PolicyComparison keep_vs_drop_study(const SamplingPattern& pattern, const DesignBrief& brief,
                                    const FrontendConfig& frontend, const SolverSettings& solver,
                                    Seed seed, Execution exec) {
  brief.validate(solver.delta_f);
  frontend.validate(pattern.grid());
  const std::size_t trials = brief.trials_per_candidate;
  std::vector<TrialJob> jobs;
  jobs.reserve(std::size(kAllModes) * trials);
  for (DropMode mode : kAllModes)
    for (std::size_t t = 0; t < trials; ++t)
      jobs.push_back({&pattern, DropPolicy{mode, brief.max_drop_fraction}, derive_seed(seed, {0, t})});
  const auto outcomes = run_trials(jobs, brief, frontend, solver, exec);

  PolicyComparison table;
  for (std::size_t p = 0; p < std::size(kAllModes); ++p) {
    std::vector<TrialOutcome> slice(outcomes.begin() + static_cast<std::ptrdiff_t>(p * trials),
                                    outcomes.begin() + static_cast<std::ptrdiff_t>((p + 1) * trials));
    table.rows.push_back(
        aggregate(pattern, DropPolicy{kAllModes[p], brief.max_drop_fraction}, std::move(slice)));
  }
  return table;
}

void write_leaderboard_csv(std::ostream& out, const std::vector<LeaderboardEntry>& leaderboard) {
  out << "candidate_id,keep_count,min_gap,policy,trials,success_rate,mean_snr_db,worst_snr_db,"
         "mean_drop_fraction\n";
  for (const LeaderboardEntry& e : leaderboard) {
    const PatternScore& s = e.score;
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", e.candidate_id, e.keep_count, e.min_gap,
                       to_string(s.policy.mode), s.trials, s.success_rate, s.mean_snr_db,
                       s.worst_snr_db, s.mean_drop_fraction);
  }
}

}  // namespace csdcr
