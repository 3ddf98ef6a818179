#pragma once

// Band-restricted frequency dictionaries and the two sparse solvers (OMP and
// IRLS basis pursuit), plus desired-signal quality assessment.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csdcr/sampling.hpp"
#include "csdcr/sigmodel.hpp"

namespace csdcr {

enum class BandLabel { desired_band, interferer_band };
enum class AtomKind { cosine, sine };

struct AtomInfo {
  double freq_hz;
  AtomKind kind;
  BandLabel label;
  double norm;  // Euclidean norm of the raw atom over the observation instants
  double channel_gain = 1.0;  // known analog response at freq_hz
  /// Index of the cos/sin partner at the same frequency, if present.
  std::optional<std::size_t> partner;
};

/// Cosine and sine atoms at a Δf grid over the design band and the declared
/// interferer bands only, evaluated at the observation instants and
/// normalized to unit column norm. Atoms that vanish on every instant (the
/// 0 Hz sine, a sine at half the ADC clock, ...) are omitted.
struct Dictionary {
  TimeGrid grid;
  std::vector<std::size_t> instants;  // dense-grid indices, one per row
  std::vector<double> atom_freqs;     // distinct frequencies, ascending
  std::vector<AtomInfo> atoms;
  Eigen::MatrixXd matrix;  // instants.size() x atoms.size()

  std::size_t size() const { return atoms.size(); }

  /// Synthesizes sum_j c_j * raw_atom_j(t) / (norm_j * channel_gain_j) over the
  /// full dense grid, using only desired-band atoms.
  std::vector<double> synthesize_desired(const std::map<std::size_t, double>& coefficients) const;
};

/// Frequency -> known gain of the analog chain, applied so the desired-band
/// synthesis undoes the lowpass.
using ChannelResponse = std::function<double(double)>;

/// Throws InvalidSpec when delta_f <= 0, a band edge is not a multiple of
/// delta_f, a band grid is empty, or there are no instants.
Dictionary build_dictionary(const SignalSpec& spec, const TimeGrid& grid,
                            std::span<const std::size_t> instants, double delta_f,
                            const ChannelResponse& response = {});

struct ReconResult {
  std::map<std::size_t, double> coefficients;  // atom index -> weight on the unit-norm atom
  std::vector<double> reconstructed_desired;   // dense grid, post-AGC units
  double residual_norm = 0.0;
  std::vector<double> residual_history;  // OMP: one entry per iteration, starting at ||y||
  double desired_snr_db = 0.0;
  bool success = false;
  bool converged = true;
  std::vector<std::string> warnings;
};

struct OmpSettings {
  std::size_t max_atoms = 8;
  double residual_tol = 1e-9;  // relative to ||observation||
};

struct IrlsSettings {
  double epsilon_floor = 1e-12;  // relative to the initial coefficient scale
  std::size_t max_iters = 200;
  double penalty = 1e-10;        // l1 weight relative to max |A^T y|
};

ReconResult omp_solve(const Observation& obs, const Dictionary& dict, const OmpSettings& settings);
ReconResult irls_bp_solve(const Observation& obs, const Dictionary& dict,
                          const IrlsSettings& settings);

inline constexpr double kDefaultSuccessThresholdDb = 40.0;

/// SNR of the desired component against the reconstruction rescaled by
/// 1 / applied_gain: 10 log10(|d|^2 / |d - d_hat / g|^2), +inf for an exact
/// match. Throws InvalidSpec when the desired component has zero energy.
double desired_snr_db(std::span<const double> desired, std::span<const double> reconstructed,
                      double applied_gain);

/// Fills desired_snr_db and success (snr >= threshold) on `result`.
void assess(ReconResult& result, const SignalFrame& frame, double applied_gain,
            double success_threshold_db = kDefaultSuccessThresholdDb);

}  // namespace csdcr
