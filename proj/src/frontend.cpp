#include "csdcr/frontend.hpp"

#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "csdcr/errors.hpp"
#include "csdcr/kernels.hpp"

namespace csdcr {

void FrontendConfig::validate(const TimeGrid& grid) const {
  if (!(filter_cutoff > 0.0) || !(filter_cutoff < grid.nyquist()))
    throw InvalidConfig(
        fmt::format("filter_cutoff {} Hz outside (0, {}) Hz", filter_cutoff, grid.nyquist()));
  if (filter_order < 1) throw InvalidConfig(fmt::format("filter_order {} < 1", filter_order));
  if (static_cast<std::size_t>(2 * filter_order + 1) > grid.length())
    throw InvalidConfig("filter is longer than the time grid");
  if (!(agc_target_rms > 0.0)) throw InvalidConfig("agc_target_rms must be positive");
  if (!(clip_level > 0.0)) throw InvalidConfig("clip_level must be positive");
  if (quantizer_bits && (*quantizer_bits < 4 || *quantizer_bits > 16))
    throw InvalidConfig(fmt::format("quantizer_bits {} outside [4, 16]", *quantizer_bits));
}

std::vector<double> design_lowpass(double cutoff_hz, double grid_rate_hz, int order) {
  const std::size_t len = static_cast<std::size_t>(2 * order + 1);
  const double fc = cutoff_hz / grid_rate_hz;  // cycles per sample
  std::vector<double> taps(len);
  double sum = 0.0;
  for (std::size_t n = 0; n < len; ++n) {
    const double m = static_cast<double>(n) - order;
    const double window =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / (len - 1));
    const double x = 2.0 * std::numbers::pi * fc * m;
    const double sinc = m == 0.0 ? 2.0 * fc : std::sin(x) / (std::numbers::pi * m);
    taps[n] = window * sinc;
    sum += taps[n];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

double lowpass_response(std::span<const double> taps, double freq_hz, double grid_rate_hz) {
  const double omega = 2.0 * std::numbers::pi * freq_hz / grid_rate_hz;
  const double half = static_cast<double>(taps.size() / 2);
  double h = 0.0;
  for (std::size_t n = 0; n < taps.size(); ++n)
    h += taps[n] * std::cos(omega * (static_cast<double>(n) - half));
  return h;
}

std::vector<double> lowpass(std::span<const double> samples, const TimeGrid& grid,
                            const FrontendConfig& config, EdgeMode edges) {
  config.validate(grid);
  const auto taps = design_lowpass(config.filter_cutoff, grid.grid_rate(), config.filter_order);
  return edges == EdgeMode::periodic ? kernels::fir_circular(samples, taps)
                                     : kernels::fir_zero_padded(samples, taps);
}

double FrontendOutput::overshoot(std::size_t i) const {
  return std::max(0.0, std::abs(preclip[i]) - clip_level);
}

FrontendOutput apply_gain_clip(std::span<const double> samples, double gain,
                               const FrontendConfig& config) {
  FrontendOutput out;
  out.applied_gain = gain;
  out.clip_level = config.clip_level;
  out.samples.resize(samples.size());
  out.preclip.resize(samples.size());
  out.saturation_flags.assign(samples.size(), 0);
  const double clip = config.clip_level;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double v = gain * samples[i];
    out.preclip[i] = v;
    out.saturation_flags[i] = std::abs(v) >= clip ? 1 : 0;
    out.samples[i] = std::clamp(v, -clip, clip);
  }
  return out;
}

FrontendOutput agc_clip(std::span<const double> samples, const FrontendConfig& config) {
  if (samples.empty()) throw InvalidConfig("agc_clip needs at least one sample");
  double sum_sq = 0.0;
  for (double v : samples) sum_sq += v * v;
  const double rms = std::sqrt(sum_sq / static_cast<double>(samples.size()));
  const double gain = rms > 0.0 ? config.agc_target_rms / rms : 1.0;
  return apply_gain_clip(samples, gain, config);
}

std::vector<double> quantize(std::span<const double> samples, const FrontendConfig& config) {
  std::vector<double> out(samples.begin(), samples.end());
  if (!config.quantizer_bits) return out;
  const double clip = config.clip_level;
  const double levels = std::ldexp(1.0, *config.quantizer_bits);
  const double step = 2.0 * clip / levels;
  for (double& v : out) {
    double idx = std::floor((v + clip) / step);
    idx = std::clamp(idx, 0.0, levels - 1.0);
    v = -clip + (idx + 0.5) * step;
  }
  return out;
}

FrontendOutput run_frontend(const SignalFrame& frame, const FrontendConfig& config) {
  const auto filtered = lowpass(frame.samples, frame.grid, config);
  FrontendOutput out = agc_clip(filtered, config);
  if (config.quantizer_bits) out.samples = quantize(out.samples, config);
  return out;
}

}  // namespace csdcr
