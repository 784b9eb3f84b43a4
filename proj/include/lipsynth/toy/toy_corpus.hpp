#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lipsynth::toy {

struct ToyCorpus {
    std::string dir;
    std::string manifest_path;
    std::string config_path;
    std::string g2p_path;
    std::vector<std::string> ids;
};

// Two bundled synthetic speech-like utterances (harmonic voice with pitch
// glides and syllable envelopes), plus a small G2P table, manifest, and a
// smoke-sized run config. Deterministic given seed.
ToyCorpus make_toy_corpus(const std::string& dir, uint64_t seed = 7);

}  // namespace lipsynth::toy
