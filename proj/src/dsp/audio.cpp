#include "lipsynth/dsp/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace lipsynth::dsp {

namespace {

template <typename T>
T read_le(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

AudioWaveform read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open audio file: " + path);

    char tag[4];
    in.read(tag, 4);
    if (std::memcmp(tag, "RIFF", 4) != 0) throw std::runtime_error("not a RIFF file: " + path);
    read_le<std::uint32_t>(in);  // riff size
    in.read(tag, 4);
    if (std::memcmp(tag, "WAVE", 4) != 0) throw std::runtime_error("not a WAVE file: " + path);

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool got_fmt = false;
    AudioWaveform wav;

    while (in.read(tag, 4)) {
        const std::uint32_t chunk_size = read_le<std::uint32_t>(in);
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            format = read_le<std::uint16_t>(in);
            channels = read_le<std::uint16_t>(in);
            rate = read_le<std::uint32_t>(in);
            read_le<std::uint32_t>(in);  // byte rate
            read_le<std::uint16_t>(in);  // block align
            bits = read_le<std::uint16_t>(in);
            if (chunk_size > 16) in.seekg(chunk_size - 16, std::ios::cur);
            got_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            if (!got_fmt) throw std::runtime_error("wav data before fmt chunk: " + path);
            if (channels != 1)
                throw std::runtime_error("expected single-channel audio: " + path);
            if (format == 1 && bits == 16) {
                const std::size_t n = chunk_size / 2;
                std::vector<std::int16_t> raw(n);
                in.read(reinterpret_cast<char*>(raw.data()),
                        static_cast<std::streamsize>(chunk_size));
                wav.samples.resize(n);
                for (std::size_t i = 0; i < n; ++i) wav.samples[i] = raw[i] / 32768.0;
            } else if (format == 3 && bits == 32) {
                const std::size_t n = chunk_size / 4;
                std::vector<float> raw(n);
                in.read(reinterpret_cast<char*>(raw.data()),
                        static_cast<std::streamsize>(chunk_size));
                wav.samples.resize(n);
                for (std::size_t i = 0; i < n; ++i) wav.samples[i] = raw[i];
            } else {
                throw std::runtime_error("unsupported wav encoding (want 16-bit PCM or "
                                         "32-bit float): " + path);
            }
            wav.rate = static_cast<int>(rate);
            if (!in) throw std::runtime_error("truncated wav data: " + path);
            return wav;
        } else {
            in.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
        }
    }
    throw std::runtime_error("no data chunk in wav file: " + path);
}

void write_wav(const std::string& path, const AudioWaveform& wav) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write audio file: " + path);
    const std::uint32_t data_size = static_cast<std::uint32_t>(wav.samples.size() * 2);
    out.write("RIFF", 4);
    write_le<std::uint32_t>(out, 36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    write_le<std::uint32_t>(out, 16);
    write_le<std::uint16_t>(out, 1);  // PCM
    write_le<std::uint16_t>(out, 1);  // mono
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(wav.rate));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(wav.rate * 2));
    write_le<std::uint16_t>(out, 2);
    write_le<std::uint16_t>(out, 16);
    out.write("data", 4);
    write_le<std::uint32_t>(out, data_size);
    for (double s : wav.samples) {
        const double clamped = std::clamp(s, -1.0, 1.0);
        write_le<std::int16_t>(out, static_cast<std::int16_t>(std::lrint(clamped * 32767.0)));
    }
    if (!out) throw std::runtime_error("failed writing audio file: " + path);
}

void peak_normalize(AudioWaveform& wav, double peak) {
    double maxabs = 0.0;
    for (double s : wav.samples) maxabs = std::max(maxabs, std::fabs(s));
    if (maxabs > 0.0) {
        const double g = peak / maxabs;
        for (double& s : wav.samples) s *= g;
    }
}

AudioWaveform resample(const AudioWaveform& wav, int target_rate) {
    if (wav.samples.empty()) throw std::runtime_error("empty waveform");
    if (target_rate <= 0) throw std::runtime_error("resample: target rate must be positive");
    if (wav.rate <= 0) throw std::runtime_error("resample: source rate must be positive");
    if (target_rate == wav.rate) return wav;

    const double ratio = static_cast<double>(target_rate) / wav.rate;
    // Low-pass at 95% of the narrower Nyquist.
    const double cutoff = std::min(1.0, ratio) * 0.95;
    const int base_taps = 32;
    const double stretch = std::max(1.0, 1.0 / ratio);
    const int half_width = static_cast<int>(std::ceil(base_taps * stretch));

    const std::size_t in_len = wav.samples.size();
    const std::size_t out_len = static_cast<std::size_t>(
        std::llround(static_cast<double>(in_len) * ratio));

    AudioWaveform out;
    out.rate = target_rate;
    out.samples.resize(out_len);

    for (std::size_t n = 0; n < out_len; ++n) {
        const double center = static_cast<double>(n) / ratio;
        const long lo = std::max<long>(0, static_cast<long>(std::ceil(center - half_width)));
        const long hi = std::min<long>(static_cast<long>(in_len) - 1,
                                       static_cast<long>(std::floor(center + half_width)));
        double acc = 0.0;
        for (long m = lo; m <= hi; ++m) {
            const double u = static_cast<double>(m) - center;
            const double v = cutoff * u;
            const double sinc = (std::fabs(v) < 1e-12)
                                    ? 1.0
                                    : std::sin(std::numbers::pi * v) / (std::numbers::pi * v);
            // Hann window over the tap span
            const double w = 0.5 + 0.5 * std::cos(std::numbers::pi * u / half_width);
            acc += wav.samples[static_cast<std::size_t>(m)] * cutoff * sinc * w;
        }
        out.samples[n] = acc;
    }
    return out;
}

}  // namespace lipsynth::dsp
