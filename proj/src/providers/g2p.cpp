#include "lipsynth/providers/g2p.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lipsynth::providers {

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

}  // namespace

G2p::G2p(std::vector<std::string> inventory, std::map<std::string, std::vector<int>> word_ids)
    : inventory_(std::move(inventory)), word_ids_(std::move(word_ids)) {
    if (inventory_.empty()) throw std::invalid_argument("g2p: empty inventory");
    for (const auto& [word, ids] : word_ids_) {
        if (ids.empty()) throw std::invalid_argument("g2p: empty phoneme list for word " + word);
        for (int id : ids)
            if (id < 0 || id >= inventory_size())
                throw std::invalid_argument("g2p: id out of inventory for word " + word);
    }
}

G2p G2p::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("g2p: cannot open table: " + path);

    std::map<std::string, std::vector<std::string>> word_phones;
    std::set<std::string> phones;
    std::string line;
    long line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            std::ostringstream msg;
            msg << "g2p: line " << line_no << ": expected 'word<TAB>phonemes'";
            throw std::runtime_error(msg.str());
        }
        const std::string word = lower(line.substr(0, tab));
        const auto phs = split_ws(line.substr(tab + 1));
        if (phs.empty()) {
            std::ostringstream msg;
            msg << "g2p: line " << line_no << ": no phonemes for word '" << word << "'";
            throw std::runtime_error(msg.str());
        }
        if (word_phones.count(word)) {
            std::ostringstream msg;
            msg << "g2p: line " << line_no << ": duplicate word '" << word << "'";
            throw std::runtime_error(msg.str());
        }
        for (const auto& p : phs) phones.insert(p);
        word_phones[word] = phs;
    }

    std::vector<std::string> inventory;
    inventory.push_back("sil");
    for (const auto& p : phones)
        if (p != "sil") inventory.push_back(p);

    std::map<std::string, int> ph_id;
    for (size_t i = 0; i < inventory.size(); ++i) ph_id[inventory[i]] = static_cast<int>(i);

    std::map<std::string, std::vector<int>> word_ids;
    for (const auto& [word, phs] : word_phones) {
        std::vector<int> ids;
        ids.reserve(phs.size());
        for (const auto& p : phs) ids.push_back(ph_id.at(p));
        word_ids[word] = std::move(ids);
    }
    return G2p(std::move(inventory), std::move(word_ids));
}

bool G2p::knows(const std::string& word) const { return word_ids_.count(lower(word)) > 0; }

PhonemeSequence G2p::to_phonemes(const std::string& transcript) const {
    PhonemeSequence seq;
    const auto words = split_ws(transcript);
    if (words.empty()) {
        seq.ids = {0};
        return seq;
    }
    for (size_t w = 0; w < words.size(); ++w) {
        const auto it = word_ids_.find(lower(words[w]));
        if (it == word_ids_.end()) throw std::runtime_error("OOV: " + words[w]);
        if (w > 0) seq.ids.push_back(0);
        seq.ids.insert(seq.ids.end(), it->second.begin(), it->second.end());
    }
    return seq;
}

std::vector<std::string> G2p::decode(const std::vector<int>& ids) const {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (int id : ids) {
        if (id < 0 || id >= inventory_size())
            throw std::invalid_argument("g2p: id out of inventory: " + std::to_string(id));
        out.push_back(inventory_[static_cast<size_t>(id)]);
    }
    return out;
}

}  // namespace lipsynth::providers
