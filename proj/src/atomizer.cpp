#include "facteval/atomizer.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <sstream>

#include "facteval/errors.hpp"
#include "facteval/text.hpp"

namespace facteval {

namespace {

constexpr int kAtomizeMaxOutputTokens = 512;

const char* const kInstruction =
    "Please breakdown the following sentence into independent facts";

// Fixed in-context demonstrations for sentence decomposition.
const char* const kDemonstrations =
R"(Please breakdown the following sentence into independent facts: He made his acting debut in the film The Moon is the Sun's Dream (1992), and continued to appear in small and supporting roles throughout the 1990s.
- He made his acting debut in the film.
- He made his acting debut in The Moon is the Sun's Dream.
- The Moon is the Sun's Dream is a film.
- The Moon is the Sun's Dream was released in 1992.
- After his acting debut, he appeared in small and supporting roles.
- After his acting debut, he appeared in small and supporting roles throughout the 1990s.

Please breakdown the following sentence into independent facts: He is also a successful producer and engineer, having worked with a wide variety of artists, including Willie Nelson, Tim McGraw, and Taylor Swift.
- He is successful.
- He is a producer.
- He is a engineer.
- He has worked with a wide variety of artists.
- Willie Nelson is an artist.
- He has worked with Willie Nelson.
- Tim McGraw is an artist.
- He has worked with Tim McGraw.
- Taylor Swift is an artist.
- He has worked with Taylor Swift.

Please breakdown the following sentence into independent facts: In 1963, Collins became one of the third group of astronauts selected by NASA and he served as the back-up Command Module Pilot for the Gemini 7 mission.
- Collins became an astronaut.
- Collins became one of the third group of astronauts.
- Collins became one of the third group of astronauts selected.
- Collins became one of the third group of astronauts selected by NASA.
- Collins became one of the third group of astronauts selected by NASA in 1963.
- He served as the Command Module Pilot.
- He served as the back-up Command Module Pilot.
- He served as the Command Module Pilot for the Gemini 7 mission.

Please breakdown the following sentence into independent facts: In addition to his acting roles, Bateman has written and directed two short films and is currently in development on his feature debut.
- Bateman has acting roles.
- Bateman has written two short films.
- Bateman has directed two short films.
- Bateman has written and directed two short films.
- Bateman is currently in development on his feature debut.

Please breakdown the following sentence into independent facts: Michael Collins (born October 31, 1930) is a retired American astronaut and test pilot who was the Command Module Pilot for the Apollo 11 mission in 1969.
- Michael Collins was born on October 31, 1930.
- Michael Collins is retired.
- Michael Collins is an American.
- Michael Collins was an astronaut.
- Michael Collins was a test pilot.
- Michael Collins was the Command Module Pilot.
- Michael Collins was the Command Module Pilot for the Apollo 11 mission.
- Michael Collins was the Command Module Pilot for the Apollo 11 mission in 1969.

Please breakdown the following sentence into independent facts: He was an American composer, conductor, and musical director.
- He was an American.
- He was a composer.
- He was a conductor.
- He was a musical director.

Please breakdown the following sentence into independent facts: She currently stars in the romantic comedy series, Love and Destiny, which premiered in 2019.
- She currently stars in Love and Destiny.
- Love and Destiny is a romantic comedy series.
- Love and Destiny premiered in 2019.

Please breakdown the following sentence into independent facts: During his professional career, McCoy played for the Broncos, the San Diego Chargers, the Minnesota Vikings, and the Jacksonville Jaguars.
- McCoy played for the Broncos.
- McCoy played for the Broncos during his professional career.
- McCoy played for the San Diego Chargers.
- McCoy played for the San Diego Chargers during his professional career.
- McCoy played for the Minnesota Vikings.
- McCoy played for the Minnesota Vikings during his professional career.
- McCoy played for the Jacksonville Jaguars.
- McCoy played for the Jacksonville Jaguars during his professional career.

)";

std::string trim(const std::string& s) {
    std::size_t start = s.find_first_not_of(" \t\r\n");
    if (start == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(start, end - start + 1);
}

}  // namespace

std::string build_atomize_prompt(const std::string& sentence) {
    if (sentence.empty()) throw DataError("build_atomize_prompt: sentence is empty");
    std::string prompt = kDemonstrations;
    prompt += kInstruction;
    prompt += ": ";
    prompt += sentence;
    return prompt;
}

std::vector<std::string> parse_fact_lines(const std::string& completion) {
    std::vector<std::string> facts;
    std::istringstream in(completion);
    std::string line;
    while (std::getline(in, line)) {
        std::string trimmed = trim(line);
        if (trimmed.rfind("- ", 0) == 0) {
            std::string fact = trim(trimmed.substr(2));
            if (!fact.empty()) facts.push_back(std::move(fact));
        }
    }
    return facts;
}

std::vector<AtomicFact> atomize(const Generation& generation, LmGateway& gateway,
                                const std::string& model_id, int threads) {
    if (generation.abstained) {
        throw DataError("atomize called on an abstained generation: " + generation.topic);
    }
    std::vector<std::string> sentences = text::split_sentences(generation.text);
    if (sentences.empty()) return {};

    auto decompose = [&](const std::string& sentence) -> std::vector<std::string> {
        LmRequest req;
        req.model_id = model_id;
        req.prompt = build_atomize_prompt(sentence);
        req.max_output_tokens = kAtomizeMaxOutputTokens;
        req.temperature = 0.0;
        std::vector<std::string> facts = parse_fact_lines(gateway.complete(req).text);
        if (facts.empty()) facts.push_back(sentence);  // empty decomposition fallback
        return facts;
    };

    std::vector<std::vector<std::string>> per_sentence(sentences.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            per_sentence[i] = decompose(sentences[i]);
        }
    } else {
        // Completion order is arbitrary; each slot pins its sentence.
        std::vector<std::future<std::vector<std::string>>> futures(sentences.size());
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            futures[i] = std::async(std::launch::async, decompose, sentences[i]);
        }
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            per_sentence[i] = futures[i].get();
        }
    }

    std::size_t total = 0;
    for (const auto& v : per_sentence) total += v.size();
    std::vector<AtomicFact> out;
    out.reserve(total);
    std::size_t ordinal = 0;
    for (std::size_t si = 0; si < per_sentence.size(); ++si) {
        for (std::size_t fi = 0; fi < per_sentence[si].size(); ++fi) {
            AtomicFact fact;
            fact.text = per_sentence[si][fi];
            fact.sentence_index = static_cast<int>(si);
            fact.fact_index = static_cast<int>(fi);
            fact.position_fraction =
                static_cast<double>(ordinal + 1) / static_cast<double>(total);
            out.push_back(std::move(fact));
            ++ordinal;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Abstention detection

namespace {

// Mirrors data/abstention_patterns.txt; the file is the deployable copy.
const std::vector<std::string>& default_patterns() {
    static const std::vector<std::string> patterns = {
        "i'm sorry",
        "i am sorry",
        "i apologize",
        "i apologise",
        "sorry, but i",
        "i couldn't find",
        "i could not find",
        "i cannot find",
        "i can't find",
        "unable to find",
        "unable to locate",
        "no information",
        "couldn't find any information",
        "could not find any information",
        "i don't have any information",
        "i do not have any information",
        "i don't have information",
        "i have no information",
        "i don't have enough information",
        "not enough information",
        "insufficient information",
        "i am not aware of",
        "i'm not aware of",
        "i am not familiar with",
        "i'm not familiar with",
        "there is no record of",
        "no records of",
        "i cannot provide",
        "i can't provide",
        "i do not have access to",
        "i don't have access to",
        "as an ai language model, i don't have",
        "as an ai language model, i do not have",
        "could you provide more",
        "please provide more",
        "who are you referring to",
    };
    return patterns;
}

std::string lower_ascii(std::string s) {
    for (char& c : s) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return s;
}

}  // namespace

AbstentionDetector::AbstentionDetector(std::vector<std::string> patterns) {
    patterns_.reserve(patterns.size());
    for (auto& p : patterns) {
        if (!p.empty()) patterns_.push_back(lower_ascii(std::move(p)));
    }
}

AbstentionDetector AbstentionDetector::with_default_patterns() {
    return AbstentionDetector(default_patterns());
}

AbstentionDetector AbstentionDetector::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open abstention pattern file: " + path);
    std::vector<std::string> patterns;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        patterns.push_back(std::move(t));
    }
    if (patterns.empty()) throw DataError("abstention pattern file has no patterns: " + path);
    return AbstentionDetector(std::move(patterns));
}

bool AbstentionDetector::detect(const std::string& text) const {
    // Anchor: only the first 30 whitespace tokens are considered.
    std::vector<std::string> tokens = text::whitespace_tokens(text);
    std::string prefix;
    std::size_t limit = std::min<std::size_t>(tokens.size(), 30);
    for (std::size_t i = 0; i < limit; ++i) {
        if (i > 0) prefix.push_back(' ');
        prefix += tokens[i];
    }
    prefix = lower_ascii(std::move(prefix));
    for (const std::string& pattern : patterns_) {
        if (prefix.find(pattern) != std::string::npos) return true;
    }
    return false;
}

}  // namespace facteval
