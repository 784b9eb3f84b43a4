#include "lipsynth/io/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lipsynth::io {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == '\t') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

std::vector<UtteranceRecord> parse_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("manifest: cannot open: " + path);

    std::vector<UtteranceRecord> records;
    std::set<std::string> seen;
    std::string line;
    long line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() < 4) {
            std::ostringstream msg;
            msg << "manifest: line " << line_no << ": expected at least 4 tab-separated fields, got "
                << fields.size();
            throw std::runtime_error(msg.str());
        }
        UtteranceRecord rec;
        rec.id = fields[0];
        rec.audio_path = fields[1];
        rec.visual_feature_path = fields[2] == "-" ? std::string{} : fields[2];
        rec.split = fields[3];
        std::string transcript;
        for (size_t i = 4; i < fields.size(); ++i) {
            if (i > 4) transcript += ' ';
            transcript += fields[i];
        }
        rec.transcript = transcript;
        if (rec.id.empty()) {
            std::ostringstream msg;
            msg << "manifest: line " << line_no << ": empty id";
            throw std::runtime_error(msg.str());
        }
        if (rec.split != "train" && rec.split != "val" && rec.split != "test") {
            std::ostringstream msg;
            msg << "manifest: line " << line_no << ": invalid split '" << rec.split << "'";
            throw std::runtime_error(msg.str());
        }
        if (!seen.insert(rec.id).second) {
            std::ostringstream msg;
            msg << "manifest: line " << line_no << ": duplicate id '" << rec.id << "'";
            throw std::runtime_error(msg.str());
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void write_manifest(const std::string& path, const std::vector<UtteranceRecord>& records) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp);
        if (!os) throw std::runtime_error("manifest: cannot open for write: " + path);
        for (const auto& rec : records) {
            os << rec.id << '\t' << rec.audio_path << '\t'
               << (rec.visual_feature_path.empty() ? "-" : rec.visual_feature_path) << '\t'
               << rec.split;
            if (!rec.transcript.empty()) os << '\t' << rec.transcript;
            os << '\n';
        }
        if (!os) throw std::runtime_error("manifest: write failed: " + path);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("manifest: rename failed: " + path);
}

}  // namespace lipsynth::io
