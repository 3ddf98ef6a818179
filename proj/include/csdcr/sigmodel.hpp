#pragma once

// Time grids, multitone scenarios, their realization on the dense simulation
// grid, and Welch spectral estimation.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csdcr/rng.hpp"

namespace csdcr {

/// Dense simulation grid standing in for continuous time. Index i maps to
/// t = i / grid_rate.
class TimeGrid {
 public:
  /// Throws InvalidSpec unless rate > 0, duration > 0 and the grid has at
  /// least 8 points.
  TimeGrid(double grid_rate_hz, double duration_s);

  double grid_rate() const { return grid_rate_; }
  double duration() const { return duration_; }
  std::size_t length() const { return length_; }
  double nyquist() const { return grid_rate_ / 2.0; }
  double time(std::size_t i) const { return static_cast<double>(i) / grid_rate_; }

  bool operator==(const TimeGrid&) const = default;

 private:
  double grid_rate_;
  double duration_;
  std::size_t length_;
};

/// Closed frequency interval [lo, hi] in Hz.
struct Band {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double f) const { return f >= lo && f <= hi; }
  bool overlaps(const Band& o) const { return lo <= o.hi && o.lo <= hi; }
  bool operator==(const Band&) const = default;
};

enum class ToneRole { desired, interferer };

struct ToneSpec {
  double frequency = 0.0;  // Hz
  double amplitude = 1.0;  // V
  /// Radians. Unset means "draw uniform on [0, 2pi) from the realization seed".
  std::optional<double> phase;
  ToneRole role = ToneRole::desired;
};

struct SignalSpec {
  std::vector<ToneSpec> tones;
  double noise_std = 0.0;
  Band design_band{0.0, 20e3};
  std::vector<Band> interferer_bands;
};

/// Whether a scenario must carry a desired tone. Spectral displays accept
/// noise-only and silent scenarios; reconstruction does not.
enum class ToneRequirement { desired, none };

/// Throws InvalidSpec naming the offending tone or band.
void validate(const SignalSpec& spec, const TimeGrid& grid,
              ToneRequirement requirement = ToneRequirement::desired);

/// Stable 64-bit fingerprint of a scenario (frequencies, amplitudes, phases,
/// noise level). Unset phases hash as a sentinel.
std::uint64_t spec_hash(const SignalSpec& spec);

/// A scenario realized on the dense grid, with per-role components kept
/// separately so desired-only error metrics are available downstream.
struct SignalFrame {
  TimeGrid grid;
  std::vector<double> samples;
  std::vector<double> desired;
  std::vector<double> interferer;
  std::vector<double> noise;
  /// Phases actually used, one per tone in spec order.
  std::vector<double> phases;
};

/// Each tone contributes amplitude * cos(2 pi f t + phase); noise is i.i.d.
/// Gaussian. Random phases are drawn first (tone order), then noise.
SignalFrame realize(const SignalSpec& spec, const TimeGrid& grid, Seed seed,
                    ToneRequirement requirement = ToneRequirement::desired);

struct PsdPoint {
  double freq_hz;
  double psd_db;  // dB re 1 V^2/Hz
};

/// Floor used for bins with zero power, in dB.
inline constexpr double kPsdFloorDb = -300.0;

/// One-sided Welch estimate: Hann window, 50% overlap, segment_len a power of
/// two no larger than the input. Output spans [0, rate/2] in rate/segment_len
/// steps.
std::vector<PsdPoint> periodogram(std::span<const double> samples, double grid_rate,
                                  std::size_t segment_len);

inline std::vector<PsdPoint> periodogram(const SignalFrame& frame, std::size_t segment_len) {
  return periodogram(frame.samples, frame.grid.grid_rate(), segment_len);
}

}  // namespace csdcr
