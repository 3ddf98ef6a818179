#include "csdcr/sigmodel.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>

#include <fmt/core.h>

#include "csdcr/errors.hpp"
#include "csdcr/kernels.hpp"

namespace csdcr {

TimeGrid::TimeGrid(double grid_rate_hz, double duration_s)
    : grid_rate_(grid_rate_hz), duration_(duration_s), length_(0) {
  if (!(grid_rate_hz > 0.0) || !std::isfinite(grid_rate_hz))
    throw InvalidSpec(fmt::format("grid rate must be positive, got {}", grid_rate_hz));
  if (!(duration_s > 0.0) || !std::isfinite(duration_s))
    throw InvalidSpec(fmt::format("duration must be positive, got {}", duration_s));
  const double n = std::round(grid_rate_hz * duration_s);
  if (n < 8.0) throw InvalidSpec(fmt::format("time grid has {} points, need at least 8", n));
  length_ = static_cast<std::size_t>(n);
}

namespace {

void check_band(const Band& band, const TimeGrid& grid, std::string_view what) {
  if (!(band.lo >= 0.0) || !(band.hi > band.lo) || !(band.hi < grid.nyquist()))
    throw InvalidSpec(fmt::format("{} [{}, {}] Hz must satisfy 0 <= lo < hi < {}", what, band.lo,
                                  band.hi, grid.nyquist()));
}

std::string_view role_name(ToneRole role) {
  return role == ToneRole::desired ? "desired" : "interferer";
}

}  // namespace

void validate(const SignalSpec& spec, const TimeGrid& grid, ToneRequirement requirement) {
  bool any_desired = false;
  for (std::size_t i = 0; i < spec.tones.size(); ++i) {
    const ToneSpec& t = spec.tones[i];
    if (!(t.frequency > 0.0) || !(t.frequency < grid.nyquist()))
      throw InvalidSpec(fmt::format("tone {} ({}) frequency {} Hz outside (0, {}) Hz", i,
                                    role_name(t.role), t.frequency, grid.nyquist()));
    if (!(t.amplitude > 0.0) || !std::isfinite(t.amplitude))
      throw InvalidSpec(fmt::format("tone {} ({}) amplitude must be positive, got {}", i,
                                    role_name(t.role), t.amplitude));
    if (t.phase && !std::isfinite(*t.phase))
      throw InvalidSpec(fmt::format("tone {} phase is not finite", i));
    any_desired = any_desired || t.role == ToneRole::desired;
  }
  if (!any_desired && requirement == ToneRequirement::desired)
    throw InvalidSpec("scenario has no desired tone");
  if (!(spec.noise_std >= 0.0) || !std::isfinite(spec.noise_std))
    throw InvalidSpec(fmt::format("noise_std must be >= 0, got {}", spec.noise_std));
  check_band(spec.design_band, grid, "design band");
  for (const Band& b : spec.interferer_bands) {
    check_band(b, grid, "interferer band");
    if (!(b.lo > 0.0)) throw InvalidSpec("interferer band must start above 0 Hz");
    if (b.overlaps(spec.design_band))
      throw InvalidSpec(fmt::format("interferer band [{}, {}] Hz overlaps the design band", b.lo,
                                    b.hi));
  }
}

std::uint64_t spec_hash(const SignalSpec& spec) {
  std::uint64_t h = splitmix64(spec.tones.size());
  auto mix = [&h](double v) { h = splitmix64(h ^ std::bit_cast<std::uint64_t>(v)); };
  for (const ToneSpec& t : spec.tones) {
    mix(t.frequency);
    mix(t.amplitude);
    h = splitmix64(h ^ (t.phase ? std::bit_cast<std::uint64_t>(*t.phase) : 0x7ff8dead00000000ULL));
    h = splitmix64(h ^ static_cast<std::uint64_t>(t.role));
  }
  mix(spec.noise_std);
  return h;
}

SignalFrame realize(const SignalSpec& spec, const TimeGrid& grid, Seed seed,
                    ToneRequirement requirement) {
  validate(spec, grid, requirement);
  const std::size_t n = grid.length();
  SignalFrame frame{grid, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                    std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), {}};

  Rng rng(seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  frame.phases.reserve(spec.tones.size());
  for (const ToneSpec& t : spec.tones) frame.phases.push_back(t.phase ? *t.phase : phase_dist(rng));

  for (std::size_t k = 0; k < spec.tones.size(); ++k) {
    const ToneSpec& t = spec.tones[k];
    auto& target = t.role == ToneRole::desired ? frame.desired : frame.interferer;
    const double omega = 2.0 * std::numbers::pi * t.frequency / grid.grid_rate();
    kernels::add_tone(target, t.amplitude, omega, frame.phases[k]);
  }

  if (spec.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.noise_std);
    for (double& v : frame.noise) v = noise(rng);
  }

  for (std::size_t i = 0; i < n; ++i)
    frame.samples[i] = frame.desired[i] + frame.interferer[i] + frame.noise[i];
  return frame;
}

namespace {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t len)
      : len_(len),
        in_(static_cast<double*>(fftw_malloc(sizeof(double) * len))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (len / 2 + 1)))) {
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(len), in_.get(), out_.get(), FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::span<double> input() { return {in_.get(), len_}; }
  void execute() { fftw_execute(plan_); }
  double power(std::size_t k) const { return out_.get()[k][0] * out_.get()[k][0] + out_.get()[k][1] * out_.get()[k][1]; }

 private:
  std::size_t len_;
  std::unique_ptr<double, FftwFree> in_;
  std::unique_ptr<fftw_complex, FftwFree> out_;
  fftw_plan plan_;
};

}  // namespace

std::vector<PsdPoint> periodogram(std::span<const double> samples, double grid_rate,
                                  std::size_t segment_len) {
  if (segment_len < 2 || !std::has_single_bit(segment_len))
    throw InvalidSpec(fmt::format("segment length {} is not a power of two >= 2", segment_len));
  if (segment_len > samples.size())
    throw InvalidSpec(fmt::format("segment length {} exceeds signal length {}", segment_len,
                                  samples.size()));
  if (!(grid_rate > 0.0)) throw InvalidSpec("grid rate must be positive");

  const std::size_t len = segment_len;
  const std::size_t hop = len / 2;
  const std::size_t bins = len / 2 + 1;

  std::vector<double> window(len);
  double window_energy = 0.0;
  for (std::size_t n = 0; n < len; ++n) {
    window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                     static_cast<double>(len));
    window_energy += window[n] * window[n];
  }

  RealFft fft(len);
  std::vector<double> accum(bins, 0.0);
  std::size_t segments = 0;
  for (std::size_t start = 0; start + len <= samples.size(); start += hop, ++segments) {
    auto in = fft.input();
    for (std::size_t n = 0; n < len; ++n) in[n] = samples[start + n] * window[n];
    fft.execute();
    for (std::size_t k = 0; k < bins; ++k) accum[k] += fft.power(k);
  }

  const double scale = 1.0 / (grid_rate * window_energy * static_cast<double>(segments));
  std::vector<PsdPoint> out;
  out.reserve(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    double p = accum[k] * scale;
    if (k != 0 && k != len / 2) p *= 2.0;
    const double db = p > 0.0 ? std::max(10.0 * std::log10(p), kPsdFloorDb) : kPsdFloorDb;
    out.push_back({static_cast<double>(k) * grid_rate / static_cast<double>(len), db});
  }
  return out;
}

}  // namespace csdcr
