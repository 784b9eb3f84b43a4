#pragma once

#include <string>
#include <vector>

namespace lipsynth::io {

struct UtteranceRecord {
    std::string id;
    std::string audio_path;
    std::string visual_feature_path;  // empty = none ("-" on disk)
    std::string split;                // train | val | test
    std::string transcript;

    bool operator==(const UtteranceRecord&) const = default;
};

std::vector<UtteranceRecord> parse_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<UtteranceRecord>& records);

}  // namespace lipsynth::io
