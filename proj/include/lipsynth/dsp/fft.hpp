#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace lipsynth::dsp {

// In-place iterative radix-2 transform. Size must be a power of two.
void fft(std::vector<std::complex<double>>& a, bool inverse);

// Real-input forward transform, zero-padded to n (power of two).
// Returns n/2 + 1 bins.
std::vector<std::complex<double>> rfft(const std::vector<double>& x, std::size_t n);

// Inverse of rfft; returns n real samples.
std::vector<double> irfft(const std::vector<std::complex<double>>& bins, std::size_t n);

bool is_power_of_two(std::size_t n);

}  // namespace lipsynth::dsp
