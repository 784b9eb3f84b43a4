#pragma once

#include <map>
#include <string>
#include <vector>

namespace lipsynth::providers {

// Phoneme ids over a closed inventory; id 0 is the blank/silence symbol that
// also separates words.
struct PhonemeSequence {
    std::vector<int> ids;
    long embedding_dim = 256;
};

// Lookup G2P over a bundled word -> phoneme table.
class G2p {
public:
    G2p(std::vector<std::string> inventory, std::map<std::string, std::vector<int>> word_ids);

    // Table file: one `word<TAB>phoneme phoneme ...` per line. Inventory is
    // id 0 = "sil" plus the table's phonemes in sorted order.
    static G2p from_file(const std::string& path);

    PhonemeSequence to_phonemes(const std::string& transcript) const;
    std::vector<std::string> decode(const std::vector<int>& ids) const;

    long inventory_size() const { return static_cast<long>(inventory_.size()); }
    const std::vector<std::string>& inventory() const { return inventory_; }
    bool knows(const std::string& word) const;

private:
    std::vector<std::string> inventory_;
    std::map<std::string, std::vector<int>> word_ids_;
};

}  // namespace lipsynth::providers
