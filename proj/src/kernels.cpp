#include "csdcr/kernels.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace csdcr::kernels {

namespace {

using Index = std::int64_t;

inline double fir_circular_at(std::span<const double> in, std::span<const double> taps, Index i) {
  const Index n = static_cast<Index>(in.size());
  const Index half = static_cast<Index>(taps.size()) / 2;
  double acc = 0.0;
  for (Index k = 0; k < static_cast<Index>(taps.size()); ++k) {
    Index j = (i + k - half) % n;
    if (j < 0) j += n;
    acc += taps[k] * in[j];
  }
  return acc;
}

inline double fir_zero_at(std::span<const double> in, std::span<const double> taps, Index i) {
  const Index n = static_cast<Index>(in.size());
  const Index half = static_cast<Index>(taps.size()) / 2;
  double acc = 0.0;
  for (Index k = 0; k < static_cast<Index>(taps.size()); ++k) {
    const Index j = i + k - half;
    if (j >= 0 && j < n) acc += taps[k] * in[j];
  }
  return acc;
}

}  // namespace

std::vector<double> fir_circular(std::span<const double> input, std::span<const double> taps) {
  std::vector<double> out(input.size());
  const Index n = static_cast<Index>(input.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) out[i] = fir_circular_at(input, taps, i);
  return out;
}

std::vector<double> fir_circular_serial(std::span<const double> input,
                                        std::span<const double> taps) {
  std::vector<double> out(input.size());
  for (Index i = 0; i < static_cast<Index>(input.size()); ++i)
    out[i] = fir_circular_at(input, taps, i);
  return out;
}

std::vector<double> fir_zero_padded(std::span<const double> input, std::span<const double> taps) {
  std::vector<double> out(input.size());
  const Index n = static_cast<Index>(input.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) out[i] = fir_zero_at(input, taps, i);
  return out;
}

std::vector<double> fir_zero_padded_serial(std::span<const double> input,
                                           std::span<const double> taps) {
  std::vector<double> out(input.size());
  for (Index i = 0; i < static_cast<Index>(input.size()); ++i) out[i] = fir_zero_at(input, taps, i);
  return out;
}

void add_tone(std::span<double> out, double amplitude, double omega, double phase) {
  const Index n = static_cast<Index>(out.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i)
    out[i] += amplitude * std::cos(omega * static_cast<double>(i) + phase);
}

void add_tone_serial(std::span<double> out, double amplitude, double omega, double phase) {
  for (Index i = 0; i < static_cast<Index>(out.size()); ++i)
    out[i] += amplitude * std::cos(omega * static_cast<double>(i) + phase);
}

}  // namespace csdcr::kernels
