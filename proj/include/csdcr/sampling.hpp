#pragma once

// Uniformly clocked sub-Nyquist ADC with a keep/drop mask on its clock grid,
// plus the saturation-driven drop policies.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "csdcr/frontend.hpp"
#include "csdcr/sigmodel.hpp"

namespace csdcr {

/// Kept indices on the ADC clock grid. ADC clock index k samples dense index
/// k * decimation.
class SamplingPattern {
 public:
  /// Throws InvalidPattern unless 1 <= decimation <= N and `kept` is a
  /// non-empty strictly increasing subset of [0, N / decimation).
  SamplingPattern(TimeGrid grid, std::size_t decimation, std::vector<std::size_t> kept);

  const TimeGrid& grid() const { return grid_; }
  std::size_t decimation() const { return decimation_; }
  const std::vector<std::size_t>& kept() const { return kept_; }
  std::size_t size() const { return kept_.size(); }

  /// Number of ADC clock ticks in the frame, floor(N / D).
  std::size_t clock_length() const { return grid_.length() / decimation_; }
  double adc_rate() const { return grid_.grid_rate() / static_cast<double>(decimation_); }
  /// |kept| / duration.
  double average_rate() const { return static_cast<double>(kept_.size()) / grid_.duration(); }

  std::vector<std::size_t> dense_indices() const;

  bool operator==(const SamplingPattern&) const = default;

 private:
  TimeGrid grid_;
  std::size_t decimation_;
  std::vector<std::size_t> kept_;
};

SamplingPattern make_uniform_pattern(const TimeGrid& grid, std::size_t decimation);

/// Uniformly random subset of `keep_count` clock indices with pairwise gap
/// >= min_gap. Every admissible subset is equally likely.
SamplingPattern make_random_pattern(const TimeGrid& grid, std::size_t decimation,
                                    std::size_t keep_count, std::size_t min_gap, Seed seed);

enum class DropMode { keep_all, drop_saturated, drop_saturated_capped };

std::string_view to_string(DropMode mode);
DropMode drop_mode_from_string(std::string_view name);

struct DropPolicy {
  DropMode mode = DropMode::keep_all;
  double max_drop_fraction = 0.1;  // used by drop_saturated_capped only

  bool operator==(const DropPolicy&) const = default;
};

struct DroppedSample {
  std::size_t clock_index;
  double overshoot;  // |g x| - clip_level at that instant, >= 0
};

struct Observation {
  SamplingPattern effective;
  std::vector<double> values;          // one per effective kept index
  std::vector<DroppedSample> dropped;  // ascending clock index
  std::size_t flagged = 0;             // saturated samples among the input pattern
};

/// Reads the frontend output at the pattern instants and applies the drop
/// policy. Throws UnusableAcquisition when every sample is dropped and
/// InvalidPattern when the pattern grid does not match the frontend output.
Observation acquire(const FrontendOutput& front, const SamplingPattern& pattern,
                    const DropPolicy& policy);

// Pattern file: header `pattern v1 <grid_rate_hz> <duration_s> <D>` followed by
// one kept clock index per line, ascending.
void write_pattern(std::ostream& out, const SamplingPattern& pattern);
SamplingPattern read_pattern(std::istream& in);
void save_pattern(const std::filesystem::path& path, const SamplingPattern& pattern);
SamplingPattern load_pattern(const std::filesystem::path& path);

}  // namespace csdcr
