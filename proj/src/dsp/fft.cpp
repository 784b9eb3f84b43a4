#include "lipsynth/dsp/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lipsynth::dsp {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (!is_power_of_two(n)) throw std::runtime_error("fft: size must be a power of two");
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) *
                           (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse)
        for (auto& v : a) v /= static_cast<double>(n);
}

std::vector<std::complex<double>> rfft(const std::vector<double>& x, std::size_t n) {
    if (!is_power_of_two(n)) throw std::runtime_error("rfft: size must be a power of two");
    if (x.size() > n) throw std::runtime_error("rfft: input longer than transform size");
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < x.size(); ++i) buf[i] = x[i];
    fft(buf, false);
    buf.resize(n / 2 + 1);
    return buf;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& bins, std::size_t n) {
    if (!is_power_of_two(n)) throw std::runtime_error("irfft: size must be a power of two");
    if (bins.size() != n / 2 + 1) throw std::runtime_error("irfft: bin count mismatch");
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i <= n / 2; ++i) buf[i] = bins[i];
    for (std::size_t i = 1; i < n / 2; ++i) buf[n - i] = std::conj(bins[i]);
    fft(buf, true);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real();
    return out;
}

}  // namespace lipsynth::dsp
