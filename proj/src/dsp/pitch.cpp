#include "lipsynth/dsp/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lipsynth::dsp {

void PitchConfig::validate() const {
    if (f0_min <= 0.0) throw std::invalid_argument("pitch: f0_min must be positive");
    if (f0_min >= f0_max) throw std::invalid_argument("pitch: f0_min must be < f0_max");
    if (hop_seconds <= 0.0) throw std::invalid_argument("pitch: hop_seconds must be positive");
    if (voicing_threshold <= 0.0 || voicing_threshold >= 1.0)
        throw std::invalid_argument("pitch: voicing_threshold must be in (0, 1)");
}

ProsodyTrack extract_f0(const AudioWaveform& wav, const PitchConfig& cfg) {
    cfg.validate();
    if (wav.rate <= 0) throw std::invalid_argument("pitch: waveform rate must be positive");
    if (wav.samples.empty()) throw std::invalid_argument("pitch: empty waveform");
    if (cfg.f0_max > wav.rate / 2.0)
        throw std::invalid_argument("pitch: f0_max exceeds Nyquist");

    const double rate = wav.rate;
    const long len = static_cast<long>(wav.samples.size());
    const long hop = std::max<long>(1, std::llround(cfg.hop_seconds * rate));
    // Analysis window spans three periods of the lowest trackable pitch so the
    // longest candidate lag still leaves two periods of overlap.
    const long win = std::min<long>(len, std::llround(3.0 * rate / cfg.f0_min));
    const long lag_min = std::max<long>(1, static_cast<long>(std::floor(rate / cfg.f0_max)));
    const long lag_max = std::min<long>(win - 1, static_cast<long>(std::ceil(rate / cfg.f0_min)));

    const long t_frames = 1 + len / hop;
    ProsodyTrack track;
    track.f0_hz.assign(static_cast<size_t>(t_frames), 0.0);
    track.voiced.assign(static_cast<size_t>(t_frames), false);
    if (lag_max <= lag_min) return track;

    std::vector<double> x(static_cast<size_t>(win));
    std::vector<double> ncc(static_cast<size_t>(lag_max) + 1, 0.0);

    for (long t = 0; t < t_frames; ++t) {
        const long center = t * hop;
        const long start = center - win / 2;
        double mean = 0.0;
        for (long i = 0; i < win; ++i) {
            const long idx = start + i;
            x[static_cast<size_t>(i)] =
                (idx >= 0 && idx < len) ? wav.samples[static_cast<size_t>(idx)] : 0.0;
            mean += x[static_cast<size_t>(i)];
        }
        mean /= win;
        for (long i = 0; i < win; ++i) x[static_cast<size_t>(i)] -= mean;

        double e0 = 0.0;
        for (long i = 0; i < win; ++i) e0 += x[static_cast<size_t>(i)] * x[static_cast<size_t>(i)];
        if (e0 < 1e-12) continue;  // silence

        double best = -1.0;
        for (long lag = lag_min; lag <= lag_max; ++lag) {
            const long n = win - lag;
            double num = 0.0, ea = 0.0, eb = 0.0;
            for (long i = 0; i < n; ++i) {
                const double a = x[static_cast<size_t>(i)];
                const double b = x[static_cast<size_t>(i + lag)];
                num += a * b;
                ea += a * a;
                eb += b * b;
            }
            const double denom = std::sqrt(ea * eb);
            const double r = denom > 1e-12 ? num / denom : 0.0;
            ncc[static_cast<size_t>(lag)] = r;
            if (r > best) best = r;
        }
        if (best < cfg.voicing_threshold) continue;

        // Among near-maximal peaks prefer the shortest lag: picks the true
        // period over its octave-down multiples.
        long lag_pick = 0;
        const double accept = best >= 0.0 ? 0.99 * best : best;
        for (long lag = lag_min; lag <= lag_max; ++lag) {
            if (ncc[static_cast<size_t>(lag)] >= accept) { lag_pick = lag; break; }
        }
        if (lag_pick == 0) continue;

        double refined = static_cast<double>(lag_pick);
        if (lag_pick > lag_min && lag_pick < lag_max) {
            const double rm = ncc[static_cast<size_t>(lag_pick) - 1];
            const double r0 = ncc[static_cast<size_t>(lag_pick)];
            const double rp = ncc[static_cast<size_t>(lag_pick) + 1];
            const double denom = rm - 2.0 * r0 + rp;
            if (std::abs(denom) > 1e-12) {
                double delta = 0.5 * (rm - rp) / denom;
                delta = std::clamp(delta, -0.5, 0.5);
                refined += delta;
            }
        }

        double f0 = rate / refined;
        f0 = std::clamp(f0, cfg.f0_min, cfg.f0_max);
        track.f0_hz[static_cast<size_t>(t)] = f0;
        track.voiced[static_cast<size_t>(t)] = true;
    }
    return track;
}

}  // namespace lipsynth::dsp
