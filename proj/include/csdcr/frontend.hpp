#pragma once

// Behavioral model of the relaxed analog chain between down-conversion and
// the ADC: loose lowpass, block AGC, clipping and an optional quantizer.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "csdcr/sigmodel.hpp"

namespace csdcr {

struct FrontendConfig {
  double filter_cutoff = 20e3;  // Hz
  int filter_order = 8;         // FIR length is 2 * order + 1
  double agc_target_rms = 0.25;
  double clip_level = 1.0;
  std::optional<int> quantizer_bits;  // unset = ideal converter

  /// Throws InvalidConfig.
  void validate(const TimeGrid& grid) const;
};

enum class EdgeMode {
  periodic,  // the frame is treated as one period of a periodic signal
  zero,      // zero padding; the first and last `order` outputs see the edge
};

/// Windowed-sinc lowpass taps (Hamming window), normalized to unit DC gain.
std::vector<double> design_lowpass(double cutoff_hz, double grid_rate_hz, int order);

/// Real-valued frequency response of the zero-phase filter at f.
double lowpass_response(std::span<const double> taps, double freq_hz, double grid_rate_hz);

/// Zero-phase (group delay removed) lowpass of a dense-grid signal.
std::vector<double> lowpass(std::span<const double> samples, const TimeGrid& grid,
                            const FrontendConfig& config, EdgeMode edges = EdgeMode::periodic);

struct FrontendOutput {
  std::vector<double> samples;
  /// g * x before clipping; overshoot of sample i is |preclip[i]| - clip_level.
  std::vector<double> preclip;
  std::vector<std::uint8_t> saturation_flags;
  double applied_gain = 1.0;
  double clip_level = 1.0;

  double overshoot(std::size_t i) const;
};

/// Block AGC to agc_target_rms (gain 1 for an all-zero input), then clipping
/// to +-clip_level. Flags mark |g x| >= clip_level.
FrontendOutput agc_clip(std::span<const double> samples, const FrontendConfig& config);

/// Clipping stage with a caller-supplied gain.
FrontendOutput apply_gain_clip(std::span<const double> samples, double gain,
                               const FrontendConfig& config);

/// Midrise uniform quantizer on [-clip, clip] with 2^bits levels; identity
/// when quantizer_bits is unset.
std::vector<double> quantize(std::span<const double> samples, const FrontendConfig& config);

/// lowpass -> agc_clip -> quantize.
FrontendOutput run_frontend(const SignalFrame& frame, const FrontendConfig& config);

}  // namespace csdcr
