#ifndef FACTEVAL_ATOMIZER_HPP
#define FACTEVAL_ATOMIZER_HPP

#include <string>
#include <vector>

#include "facteval/lm.hpp"

namespace facteval {

struct Generation {
    std::string topic;  // knowledge-source title
    std::string prompt;
    std::string subject_model;
    std::string text;
    bool abstained = false;  // abstained generations are never atomized or scored
    std::string category;    // optional per-topic metadata, passed through to reports
};

struct AtomicFact {
    std::string text;       // one short declarative sentence
    int sentence_index = 0; // 0-based source sentence
    int fact_index = 0;     // 0-based within the sentence
    double position_fraction = 0.0;  // (global ordinal + 1) / total facts
};

/// The fixed 8-demonstration decomposition prompt followed by the
/// instruction line and the target sentence. Byte-exact against
/// tests/golden/atomize_prompt_henry.txt.
std::string build_atomize_prompt(const std::string& sentence);

/// Text of every completion line beginning with "- " (after trimming), in
/// order; other lines are ignored. An empty result is the
/// empty-decomposition signal; callers fall back to the raw sentence.
std::vector<std::string> parse_fact_lines(const std::string& completion);

/// Per-sentence decomposition through the demonstration prompt, flattened
/// in reading order. Sentences whose decomposition comes back empty become
/// a single fact. Throws DataError when called on an abstained generation.
/// Sentence-level LM calls run on up to `threads` workers; assembly always
/// preserves sentence order.
std::vector<AtomicFact> atomize(const Generation& generation, LmGateway& gateway,
                                const std::string& model_id, int threads = 1);

/// Abstention rules: case-insensitive pattern list matched against the
/// first 30 whitespace tokens of a generation. The list is data, not code
/// (data/abstention_patterns.txt); the built-in defaults mirror that file.
class AbstentionDetector {
public:
    static AbstentionDetector with_default_patterns();
    /// One pattern per line; blank lines and '#' comments ignored.
    static AbstentionDetector from_file(const std::string& path);
    explicit AbstentionDetector(std::vector<std::string> patterns);

    bool detect(const std::string& text) const;
    const std::vector<std::string>& patterns() const { return patterns_; }

private:
    std::vector<std::string> patterns_;  // stored lowercased
};

}  // namespace facteval

#endif
