// Regenerates fixtures/e2e/: 20 scripted generations, the matching
// exact-prompt mock LM table (decompositions and judgments for both the
// no_context and retrieve_lm paths), a small corpus, gold labels and edit
// records. Deterministic; run from the repo root after changing the
// fixture recipe, then commit the outputs.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "facteval/atomizer.hpp"
#include "facteval/corpus.hpp"
#include "facteval/estimator.hpp"
#include "facteval/retrieval.hpp"

using namespace facteval;
using nlohmann::ordered_json;

namespace {

const std::vector<std::string> kNames = {
    "Avery Stone",  "Brooke Hale",  "Casey Reed",   "Devon Lake",   "Emery Voss",
    "Finley Marsh", "Greer Holt",   "Harper Quinn", "Indra Vale",   "Jordan Pike",
    "Kai Mercer",   "Lane Sutter",  "Morgan Frost", "Noor Haddad",  "Oakley Brand",
    "Peyton Swift", "Quinn Abbot",  "Riley Crane",  "Sage Winter",  "Tatum Wells"};

const std::vector<std::string> kCities = {"Lyon",  "Oslo",  "Kyoto", "Quito",
                                          "Turin", "Porto", "Leeds", "Bergen"};
const std::vector<std::string> kProfessions = {"cartographer", "violinist", "geologist",
                                               "archivist",    "sculptor",  "botanist"};
const std::vector<std::string> kSubjects = {"history", "physics", "drawing", "geography"};

bool abstains(int g) { return g == 4 || g == 11 || g == 17; }

std::string abstention_text(int g) {
    const std::string& name = kNames[g];
    if (g == 4) return "I'm sorry, I couldn't find information about " + name + ".";
    if (g == 11) return "I do not have any information on " + name + ".";
    return "There is no record of a person named " + name + ".";
}

struct SentencePlan {
    std::string text;
    std::vector<std::string> facts;
};

std::vector<SentencePlan> plan_generation(int g) {
    const std::string& name = kNames[g];
    const std::string year = std::to_string(1950 + g);
    const std::string& city = kCities[g % kCities.size()];
    const std::string& city2 = kCities[(g + 3) % kCities.size()];
    const std::string& profession = kProfessions[g % kProfessions.size()];
    const std::string& subject = kSubjects[g % kSubjects.size()];

    std::vector<SentencePlan> plans;
    std::vector<std::vector<std::string>> fact_pool = {
        {name + " was born in " + year + ".", name + " was born in " + city + ".",
         name + " is a person."},
        {name + " was a " + profession + ".", name + " worked for many years.",
         name + " had a long career."},
        {name + " moved to " + city2 + ".", name + " taught " + subject + ".",
         name + " lived in " + city2 + "."},
    };
    std::vector<std::string> sentence_texts = {
        name + " was born in " + year + " in " + city + ".",
        name + " worked as a " + profession + " for many years.",
        name + " later moved to " + city2 + " and taught " + subject + ".",
    };
    int n_sentences = (g % 3) + 1;
    for (int s = 0; s < n_sentences; ++s) {
        SentencePlan plan;
        plan.text = sentence_texts[s];
        int n_facts = ((g + s) % 3) + 1;
        for (int f = 0; f < n_facts; ++f) plan.facts.push_back(fact_pool[s][f]);
        plans.push_back(std::move(plan));
    }
    return plans;
}

bool fact_supported(int g, int s, int f) { return ((g * 7 + s * 3 + f) % 3) != 0; }
bool gold_flipped(int g, int s, int f) { return ((g * 5 + s * 2 + f) % 7) == 0; }
bool gold_irrelevant(int g, int s, int f) { return ((g + s + f) % 11) == 0; }

std::string page_text(int g) {
    const std::string& name = kNames[g];
    const std::string year = std::to_string(1950 + g);
    const std::string& city = kCities[g % kCities.size()];
    const std::string& city2 = kCities[(g + 3) % kCities.size()];
    const std::string& profession = kProfessions[g % kProfessions.size()];
    const std::string& subject = kSubjects[g % kSubjects.size()];
    return name + " was born in " + year + " and grew up in " + city + ". " + name +
           " worked as a " + profession + " and later taught " + subject + " in " + city2 + ".";
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    for (const auto& line : lines) out << line << "\n";
    std::cout << "wrote " << path << " (" << lines.size() << " records)\n";
}

}  // namespace

int main() {
    std::vector<std::string> generations, mock, corpus, gold, edits;

    DocumentStore store(256);
    for (int g = 0; g < 20; ++g) {
        if (!abstains(g)) store.add_document({kNames[g], page_text(g)});
    }
    Index index = Index::build(store);

    auto script = [&](const std::string& prompt, const std::string& text) {
        ordered_json j;
        j["prompt"] = prompt;
        j["text"] = text;
        mock.push_back(j.dump());
    };

    for (int g = 0; g < 20; ++g) {
        ordered_json gen;
        gen["topic"] = kNames[g];
        gen["prompt"] = "Tell me a bio of " + kNames[g] + ".";
        gen["subject_model"] = "subj-lm";
        if (abstains(g)) {
            gen["text"] = abstention_text(g);
            // No "abstained" field: the pattern detector classifies it.
            generations.push_back(gen.dump());
            continue;
        }
        auto plans = plan_generation(g);
        std::string body;
        for (std::size_t s = 0; s < plans.size(); ++s) {
            if (s > 0) body += " ";
            body += plans[s].text;
        }
        gen["text"] = body;
        generations.push_back(gen.dump());

        for (std::size_t s = 0; s < plans.size(); ++s) {
            std::string completion;
            for (const auto& fact : plans[s].facts) completion += "- " + fact + "\n";
            script(build_atomize_prompt(plans[s].text), completion);
            for (std::size_t f = 0; f < plans[s].facts.size(); ++f) {
                const std::string& fact_text = plans[s].facts[f];
                const bool supported = fact_supported(g, static_cast<int>(s), static_cast<int>(f));
                // no_context judgment
                script(fact_text + " True or False?", supported ? "True" : "False");
                // retrieve_lm judgment over the topic page
                AtomicFact fact;
                fact.text = fact_text;
                auto evidence = index.retrieve(kNames[g], fact_text, 5);
                script(build_retrieve_prompt(fact, evidence), supported ? "True" : "False");

                ordered_json gold_rec;
                gold_rec["subject_model"] = "subj-lm";
                gold_rec["topic"] = kNames[g];
                gold_rec["sentence_index"] = static_cast<int>(s);
                gold_rec["fact_index"] = static_cast<int>(f);
                gold_rec["fact_text"] = fact_text;
                bool gold_supported = supported;
                if (gold_flipped(g, static_cast<int>(s), static_cast<int>(f))) {
                    gold_supported = !gold_supported;
                }
                gold_rec["label"] = gold_irrelevant(g, static_cast<int>(s), static_cast<int>(f))
                                        ? "Irrelevant"
                                        : (gold_supported ? "Supported" : "NotSupported");
                gold.push_back(gold_rec.dump());
            }
        }
    }

    for (int g = 0; g < 20; ++g) {
        if (abstains(g)) continue;
        ordered_json doc;
        doc["title"] = kNames[g];
        doc["text"] = page_text(g);
        corpus.push_back(doc.dump());
    }

    auto edit = [&](const std::string& input, const std::string& gold_edit,
                    const std::string& model_edit) {
        ordered_json j;
        j["input"] = input;
        j["gold_edit"] = gold_edit;
        j["model_edit"] = model_edit;
        edits.push_back(j.dump());
    };
    edit("Avery Stone was born in 1950 in Kyoto.", "Avery Stone was born in 1950 in Lyon.",
         "Avery Stone was born in 1950 in Lyon.");
    edit("Brooke Hale taught physics in Porto.", "Brooke Hale taught physics in Quito.",
         "Brooke Hale taught physics in Porto.");
    edit("Casey Reed was a violinist and sculptor.", "Casey Reed was a geologist.",
         "Casey Reed was a geologist and archivist.");
    edit("Devon Lake lived in Turin.", "Devon Lake lived in Turin.",
         "Devon Lake lived in Turin for years.");

    write_lines("fixtures/e2e/generations.jsonl", generations);
    write_lines("fixtures/e2e/mock_lm.jsonl", mock);
    write_lines("fixtures/e2e/corpus.jsonl", corpus);
    write_lines("fixtures/e2e/gold.jsonl", gold);
    write_lines("fixtures/e2e/edits.jsonl", edits);
    return 0;
}
