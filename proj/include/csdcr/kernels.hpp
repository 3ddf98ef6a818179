#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version and a serial
// reference; both use the same per-element summation order, so their outputs
// are bit-identical.

#include <span>
#include <vector>

namespace csdcr::kernels {

/// Zero-phase FIR over a periodic extension of the input:
/// out[i] = sum_k taps[k] * in[(i + k - half) mod n], half = taps.size() / 2.
/// taps.size() must be odd.
std::vector<double> fir_circular(std::span<const double> input, std::span<const double> taps);
std::vector<double> fir_circular_serial(std::span<const double> input,
                                        std::span<const double> taps);

/// Same filter with zero padding outside the input.
std::vector<double> fir_zero_padded(std::span<const double> input, std::span<const double> taps);
std::vector<double> fir_zero_padded_serial(std::span<const double> input,
                                           std::span<const double> taps);

/// out[i] += amplitude * cos(omega * i + phase), omega in radians per sample.
void add_tone(std::span<double> out, double amplitude, double omega, double phase);
void add_tone_serial(std::span<double> out, double amplitude, double omega, double phase);

}  // namespace csdcr::kernels
