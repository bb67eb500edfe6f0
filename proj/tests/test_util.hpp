#ifndef FACTEVAL_TESTS_TEST_UTIL_HPP
#define FACTEVAL_TESTS_TEST_UTIL_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testutil {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline std::string temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "facteval_tests";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

// Safe word list for generated sentences: no abbreviations, no single
// letters, so the sentence splitter recovers generator boundaries exactly.
inline const std::vector<std::string>& safe_vocab() {
    static const std::vector<std::string> vocab = {
        "alpha",  "bravo",  "delta",  "echo",    "foxtrot", "golf",   "hotel",
        "india",  "juliet", "kilo",   "lima",    "mike",    "oscar",  "papa",
        "quebec", "romeo",  "sierra", "tango",   "uniform", "victor", "whiskey",
        "xray",   "yankee", "zulu",   "amber",   "birch",   "cedar",  "dune",
        "ember",  "fjord",  "grove",  "harbor",  "isle",    "jade",   "krill",
        "lantern","meadow", "nectar", "orchid",  "pebble",  "quartz", "ridge",
        "summit", "thicket","umbra",  "valley",  "willow",  "yarrow", "zephyr",
        "basalt",
    };
    return vocab;
}

// Sentence of `words` tokens: capitalized first word, period-terminated.
inline std::string make_sentence(std::mt19937& rng, int words, int vocab_size = 50) {
    const auto& vocab = safe_vocab();
    std::uniform_int_distribution<std::size_t> pick(0, std::min<std::size_t>(vocab.size(), vocab_size) - 1);
    std::string out;
    for (int i = 0; i < words; ++i) {
        std::string w = vocab[pick(rng)];
        if (i == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
        if (i > 0) out += " ";
        out += w;
    }
    out += ".";
    return out;
}

}  // namespace testutil

#endif
