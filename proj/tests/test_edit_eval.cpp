#include <doctest.h>

#include <algorithm>
#include <random>

#include "facteval/edit_eval.hpp"
#include "facteval/errors.hpp"
#include "test_util.hpp"

using namespace facteval;

namespace {

// 8 records, 16 distinct content words each; the gold edit keeps the first
// half and removes the rest.
std::vector<EditRecord> half_removed_fixture(std::mt19937& rng) {
    std::vector<EditRecord> records;
    for (int r = 0; r < 8; ++r) {
        std::vector<std::string> words = testutil::safe_vocab();
        std::shuffle(words.begin(), words.end(), rng);
        words.resize(16);
        auto join = [](const std::vector<std::string>& w, std::size_t n) {
            std::string out;
            for (std::size_t i = 0; i < n; ++i) {
                if (i > 0) out += " ";
                out += w[i];
            }
            return out + ".";
        };
        EditRecord rec;
        rec.input = join(words, 16);
        rec.gold_edit = join(words, 8);
        rec.model_edit = rec.input;  // input copying
        records.push_back(std::move(rec));
    }
    return records;
}

class ScriptedSimilarity : public SimilarityScorer {
public:
    double s_ge = 0.0;
    double s_gx = 0.0;
    double similarity(const std::string&, const std::string&) override {
        // First call compares gold/model, second gold/input (see sim_al).
        ++calls;
        return calls % 2 == 1 ? s_ge : s_gx;
    }
    int calls = 0;
};

EditRecord abc_bcd_record() {
    EditRecord rec;
    rec.input = "Lantern meadow.";
    rec.gold_edit = "Lantern meadow amber birch cedar.";
    rec.model_edit = "Lantern meadow birch cedar dune.";
    return rec;
}

std::vector<EditRecord> prompt_exemplars() {
    return {
        {"Paris is the capital of Germany.", "Paris is the capital of France.", "",
         {{"Paris is a capital.", true}, {"Paris is in Germany.", false}}},
        {"The sun orbits the earth.", "The earth orbits the sun.", "",
         {{"The sun orbits the earth.", false}}},
        {"Water boils at 50 degrees Celsius at sea level.",
         "Water boils at 100 degrees Celsius at sea level.", "",
         {{"Water boils at 50 degrees Celsius.", false},
          {"The boiling point is measured at sea level.", true}}},
        {"Mount Everest is the tallest mountain in Africa.",
         "Mount Everest is the tallest mountain in Asia.", "",
         {{"Mount Everest is the tallest mountain.", true},
          {"Mount Everest is in Africa.", false}}},
    };
}

EditRecord prompt_target() {
    return {"Alan Turing was born in 1950 in Manchester.", "", "",
            {{"Alan Turing was born in 1950.", false},
             {"Alan Turing was born in Manchester.", false}}};
}

}  // namespace

TEST_CASE("normalize_tokens") {
    auto t = normalize_tokens("The Cat, sat!");
    REQUIRE(t.size() == 2);
    CHECK(t[0] == "cat");
    CHECK(t[1] == "sat");
    CHECK(normalize_tokens("the of and is").empty());
    // Idempotence on the joined output.
    std::string joined = "cat sat";
    CHECK(normalize_tokens(joined) == t);
}

TEST_CASE("err_loc") {
    std::mt19937 rng(55);

    SUBCASE("identical edits preserve identically: 1.0") {
        auto records = half_removed_fixture(rng);
        for (auto& r : records) r.model_edit = r.gold_edit;
        CHECK(err_loc(records) == 1.0);
    }
    SUBCASE("input copying on the half-removed fixture scores 0") {
        // Gold marks 8 tokens Not-Preserved per record, the copy marks
        // none, so per-record F1 is 0 and so is the macro average.
        auto records = half_removed_fixture(rng);
        CHECK(err_loc(records) == 0.0);
    }
    SUBCASE("25% random token noise scores above input copying") {
        auto copy_records = half_removed_fixture(rng);
        auto noise_records = copy_records;
        std::bernoulli_distribution drop(0.25);
        for (auto& rec : noise_records) {
            std::string noisy;
            for (const auto& w : normalize_tokens(rec.input)) {
                if (drop(rng)) continue;  // drop ~25% of tokens
                if (!noisy.empty()) noisy += " ";
                noisy += w;
            }
            rec.model_edit = noisy + ".";
        }
        CHECK(err_loc(noise_records) > err_loc(copy_records));
    }
    SUBCASE("empty normalized inputs are skipped") {
        std::vector<EditRecord> records{{"the of", "cat", "cat", {}},
                                        {"lantern meadow", "lantern", "lantern", {}}};
        CHECK(err_loc(records) == 1.0);  // only the second record counts
    }
}

TEST_CASE("edit_corr") {
    SUBCASE("input copying scores 0 whenever gold adds tokens") {
        EditRecord rec = abc_bcd_record();
        rec.model_edit = rec.input;
        auto c = edit_corr(rec);
        REQUIRE(c.has_value());
        CHECK(*c == 0.0);
    }
    SUBCASE("matching gold's added tokens exactly scores 1") {
        EditRecord rec = abc_bcd_record();
        rec.model_edit = rec.gold_edit;
        CHECK(*edit_corr(rec) == 1.0);
    }
    SUBCASE("gold adds {amber,birch,cedar}, model adds {birch,cedar,dune}: 2/3") {
        CHECK(*edit_corr(abc_bcd_record()) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("absent when the gold edit adds no new tokens") {
        EditRecord rec{"Lantern meadow.", "Meadow lantern.", "Lantern meadow orchid.", {}};
        CHECK_FALSE(edit_corr(rec).has_value());
    }
}

TEST_CASE("sim_al") {
    TokenCosineSimilarity cosine;

    SUBCASE("input copying scores 0") {
        EditRecord rec = abc_bcd_record();
        rec.model_edit = rec.input;
        CHECK(sim_al(rec, cosine) == 0.0);
    }
    SUBCASE("exact gold match scores 1") {
        EditRecord rec = abc_bcd_record();
        rec.model_edit = rec.gold_edit;
        CHECK(sim_al(rec, cosine) == 1.0);
    }
    SUBCASE("scripted similarities: s(G,X)=0.5, s(G,E)=0.75 gives 0.5") {
        ScriptedSimilarity sim;
        sim.s_ge = 0.75;
        sim.s_gx = 0.5;
        CHECK(sim_al(abc_bcd_record(), sim) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("clamped at 0 when the edit moves away from gold") {
        ScriptedSimilarity sim;
        sim.s_ge = 0.2;
        sim.s_gx = 0.5;
        CHECK(sim_al(abc_bcd_record(), sim) == 0.0);
    }
    SUBCASE("gold equal to input returns the raw similarity") {
        ScriptedSimilarity sim;
        sim.s_ge = 0.8;
        sim.s_gx = 1.0;
        CHECK(sim_al(abc_bcd_record(), sim) == 0.8);
    }
    SUBCASE("output stays in [0,1] for any scorer in [0,1]") {
        std::mt19937 rng(66);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 300; ++i) {
            ScriptedSimilarity sim;
            sim.s_ge = u(rng);
            sim.s_gx = u(rng);
            double v = sim_al(abc_bcd_record(), sim);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("edit metrics are invariant under record permutation") {
    std::mt19937 rng(77);
    auto records = half_removed_fixture(rng);
    // Give each record a gold edit that adds tokens and a distinct model
    // edit mixing kept/new tokens, so all three metrics are non-trivial.
    std::bernoulli_distribution keep(0.6);
    for (auto& rec : records) {
        rec.gold_edit = rec.gold_edit.substr(0, rec.gold_edit.size() - 1) + " 1901 1902.";
        std::string edited;
        for (const auto& w : normalize_tokens(rec.input)) {
            if (!keep(rng)) continue;
            if (!edited.empty()) edited += " ";
            edited += w;
        }
        rec.model_edit = edited + " 1901 2005.";
    }
    TokenCosineSimilarity cosine;
    EditMetrics base = evaluate_edits(records, cosine);
    auto shuffled = records;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EditMetrics permuted = evaluate_edits(shuffled, cosine);
    CHECK(base.err_loc == doctest::Approx(permuted.err_loc).epsilon(1e-12));
    CHECK(base.sim_al == doctest::Approx(permuted.sim_al).epsilon(1e-12));
    REQUIRE(base.edit_corr.has_value() == permuted.edit_corr.has_value());
    if (base.edit_corr) {
        CHECK(*base.edit_corr == doctest::Approx(*permuted.edit_corr).epsilon(1e-12));
    }
}

TEST_CASE("build_editor_prompt matches the golden files") {
    auto exemplars = prompt_exemplars();
    EditRecord target = prompt_target();

    SUBCASE("no context, no facts") {
        std::string prompt = build_editor_prompt(target, nullptr, false, exemplars);
        CHECK(prompt == testutil::read_file("tests/golden/editor_prompt_nocontext.txt"));
        std::string tail = "Input: " + target.input + " Edit:";
        CHECK(prompt.substr(prompt.size() - tail.size()) == tail);
    }
    SUBCASE("with fact labels") {
        std::string prompt = build_editor_prompt(target, nullptr, true, exemplars);
        CHECK(prompt == testutil::read_file("tests/golden/editor_prompt_facts.txt"));
        CHECK(prompt.find("Fact 1 (False): Alan Turing was born in 1950.") != std::string::npos);
    }
    SUBCASE("with retrieved passages") {
        std::vector<Passage> passages{
            {"Alan Turing", 0, "Alan Turing was born on 23 June 1912 in Maida Vale, London.", 12},
            {"Alan Turing", 1, "Turing worked at the University of Manchester after the war.", 10}};
        std::string prompt = build_editor_prompt(target, &passages, false, exemplars);
        CHECK(prompt == testutil::read_file("tests/golden/editor_prompt_passages.txt"));
    }
    SUBCASE("exemplar and passage count preconditions") {
        auto three = exemplars;
        three.pop_back();
        CHECK_THROWS_AS(build_editor_prompt(target, nullptr, false, three), DataError);
        std::vector<Passage> four(4, Passage{"T", 0, "x", 1});
        CHECK_THROWS_AS(build_editor_prompt(target, &four, false, exemplars), DataError);
    }
}
