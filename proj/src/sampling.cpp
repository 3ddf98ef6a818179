#include "csdcr/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/core.h>

#include "csdcr/errors.hpp"

namespace csdcr {

SamplingPattern::SamplingPattern(TimeGrid grid, std::size_t decimation,
                                 std::vector<std::size_t> kept)
    : grid_(grid), decimation_(decimation), kept_(std::move(kept)) {
  if (decimation_ < 1 || decimation_ > grid_.length())
    throw InvalidPattern(
        fmt::format("ADC decimation {} outside [1, {}]", decimation_, grid_.length()));
  if (kept_.empty()) throw InvalidPattern("pattern keeps no samples");
  const std::size_t m = clock_length();
  for (std::size_t i = 0; i < kept_.size(); ++i) {
    if (kept_[i] >= m)
      throw InvalidPattern(fmt::format("kept index {} outside [0, {})", kept_[i], m));
    if (i > 0 && kept_[i] <= kept_[i - 1])
      throw InvalidPattern(fmt::format("kept indices not strictly increasing at position {}", i));
  }
}

std::vector<std::size_t> SamplingPattern::dense_indices() const {
  std::vector<std::size_t> out(kept_.size());
  std::transform(kept_.begin(), kept_.end(), out.begin(),
                 [d = decimation_](std::size_t k) { return k * d; });
  return out;
}

SamplingPattern make_uniform_pattern(const TimeGrid& grid, std::size_t decimation) {
  if (decimation < 1 || decimation > grid.length())
    throw InvalidPattern(
        fmt::format("ADC decimation {} outside [1, {}]", decimation, grid.length()));
  std::vector<std::size_t> kept(grid.length() / decimation);
  std::iota(kept.begin(), kept.end(), std::size_t{0});
  return SamplingPattern(grid, decimation, std::move(kept));
}

SamplingPattern make_random_pattern(const TimeGrid& grid, std::size_t decimation,
                                    std::size_t keep_count, std::size_t min_gap, Seed seed) {
  if (decimation < 1 || decimation > grid.length())
    throw InvalidPattern(
        fmt::format("ADC decimation {} outside [1, {}]", decimation, grid.length()));
  if (min_gap < 1) throw InvalidPattern("min_gap must be >= 1");
  if (keep_count < 1) throw InvalidPattern("keep_count must be >= 1");
  const std::size_t m = grid.length() / decimation;
  // keep_count points with gaps >= min_gap need (keep_count - 1) * min_gap + 1 ticks.
  if ((keep_count - 1) * min_gap + 1 > m)
    throw InvalidPattern(fmt::format(
        "infeasible pattern: {} samples with min_gap {} do not fit in {} clock ticks", keep_count,
        min_gap, m));

  // Remove the mandatory (min_gap - 1) spacing, draw a uniform sorted subset of
  // the remaining slots, and add the spacing back.
  const std::size_t slots = m - (keep_count - 1) * (min_gap - 1);
  std::vector<std::size_t> all(slots);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> kept;
  kept.reserve(keep_count);
  Rng rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(kept), keep_count, rng);
  for (std::size_t i = 0; i < kept.size(); ++i) kept[i] += i * (min_gap - 1);
  return SamplingPattern(grid, decimation, std::move(kept));
}

std::string_view to_string(DropMode mode) {
  switch (mode) {
    case DropMode::keep_all: return "keep_all";
    case DropMode::drop_saturated: return "drop_saturated";
    case DropMode::drop_saturated_capped: return "drop_saturated_capped";
  }
  return "?";
}

DropMode drop_mode_from_string(std::string_view name) {
  for (DropMode m : {DropMode::keep_all, DropMode::drop_saturated, DropMode::drop_saturated_capped})
    if (to_string(m) == name) return m;
  throw InvalidConfig(fmt::format("unknown drop policy '{}'", name));
}

Observation acquire(const FrontendOutput& front, const SamplingPattern& pattern,
                    const DropPolicy& policy) {
  if (pattern.grid().length() != front.samples.size())
    throw InvalidPattern(fmt::format("pattern grid has {} points but frontend output has {}",
                                     pattern.grid().length(), front.samples.size()));
  if (!(policy.max_drop_fraction >= 0.0 && policy.max_drop_fraction < 1.0))
    throw InvalidConfig("max_drop_fraction must lie in [0, 1)");

  const auto& kept = pattern.kept();
  const std::size_t d = pattern.decimation();

  std::vector<std::size_t> flagged;  // positions into `kept`
  for (std::size_t j = 0; j < kept.size(); ++j)
    if (front.saturation_flags[kept[j] * d]) flagged.push_back(j);

  std::vector<std::size_t> to_drop;
  switch (policy.mode) {
    case DropMode::keep_all:
      break;
    case DropMode::drop_saturated:
      to_drop = flagged;
      break;
    case DropMode::drop_saturated_capped: {
      const auto cap = static_cast<std::size_t>(
          std::floor(policy.max_drop_fraction * static_cast<double>(kept.size()) + 1e-9));
      to_drop = flagged;
      std::stable_sort(to_drop.begin(), to_drop.end(), [&](std::size_t a, std::size_t b) {
        return front.overshoot(kept[a] * d) > front.overshoot(kept[b] * d);
      });
      if (to_drop.size() > cap) to_drop.resize(cap);
      std::sort(to_drop.begin(), to_drop.end());
      break;
    }
  }

  if (to_drop.size() == kept.size())
    throw UnusableAcquisition(
        fmt::format("all {} kept samples were dropped as saturated", kept.size()));

  std::vector<std::size_t> effective;
  std::vector<double> values;
  std::vector<DroppedSample> dropped;
  effective.reserve(kept.size() - to_drop.size());
  values.reserve(kept.size() - to_drop.size());
  std::size_t next = 0;
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const std::size_t dense = kept[j] * d;
    if (next < to_drop.size() && to_drop[next] == j) {
      dropped.push_back({kept[j], front.overshoot(dense)});
      ++next;
      continue;
    }
    effective.push_back(kept[j]);
    values.push_back(front.samples[dense]);
  }
  return Observation{SamplingPattern(pattern.grid(), d, std::move(effective)), std::move(values),
                     std::move(dropped), flagged.size()};
}

void write_pattern(std::ostream& out, const SamplingPattern& pattern) {
  out << fmt::format("pattern v1 {} {} {}\n", pattern.grid().grid_rate(),
                     pattern.grid().duration(), pattern.decimation());
  for (std::size_t k : pattern.kept()) out << k << '\n';
}

namespace {

template <typename T>
T parse_number(std::string_view token, std::string_view what) {
  T value{};
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw InvalidPattern(fmt::format("pattern file: bad {} '{}'", what, token));
  return value;
}

}  // namespace

SamplingPattern read_pattern(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidPattern("pattern file: missing header");
  std::istringstream header(line);
  std::string magic, version, rate, duration, decimation, extra;
  header >> magic >> version >> rate >> duration >> decimation;
  if (magic != "pattern" || version != "v1" || decimation.empty() || (header >> extra))
    throw InvalidPattern(
        "pattern file: header must be 'pattern v1 <grid_rate_hz> <duration_s> <D>'");

  TimeGrid grid(parse_number<double>(rate, "grid rate"),
                parse_number<double>(duration, "duration"));
  const auto d = parse_number<std::size_t>(decimation, "decimation");

  std::vector<std::size_t> kept;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    kept.push_back(parse_number<std::size_t>(line, fmt::format("index on line {}", line_no)));
  }
  return SamplingPattern(grid, d, std::move(kept));
}

void save_pattern(const std::filesystem::path& path, const SamplingPattern& pattern) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidPattern(fmt::format("cannot write pattern file '{}'", path.string()));
  write_pattern(out, pattern);
  if (!out) throw InvalidPattern(fmt::format("error writing pattern file '{}'", path.string()));
}

SamplingPattern load_pattern(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidPattern(fmt::format("cannot read pattern file '{}'", path.string()));
  return read_pattern(in);
}

}  // namespace csdcr
