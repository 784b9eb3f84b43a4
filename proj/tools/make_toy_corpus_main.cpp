#include "lipsynth/toy/toy_corpus.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"generate the bundled two-utterance synthetic corpus"};
    std::string out_dir;
    long seed = 7;
    app.add_option("out_dir", out_dir, "corpus directory")->required();
    app.add_option("--seed", seed, "generator seed");
    CLI11_PARSE(app, argc, argv);

    try {
        auto corpus = lipsynth::toy::make_toy_corpus(out_dir, static_cast<uint64_t>(seed));
        std::cout << "manifest: " << corpus.manifest_path << "\n"
                  << "config:   " << corpus.config_path << "\n"
                  << "g2p:      " << corpus.g2p_path << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
