#include "facteval/edit_eval.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <unordered_set>

#include "facteval/errors.hpp"
#include "facteval/metrics.hpp"
#include "facteval/text.hpp"

namespace facteval {

std::vector<std::string> normalize_tokens(const std::string& sentence) {
    return text::content_tokens(sentence);
}

namespace {

std::unordered_set<std::string> token_set(const std::string& sentence) {
    std::unordered_set<std::string> out;
    for (auto& t : normalize_tokens(sentence)) out.insert(std::move(t));
    return out;
}

// F1 between gold and model preservation strings, Not-Preserved positive.
std::optional<double> err_loc_single(const EditRecord& record) {
    std::vector<std::string> input_tokens = normalize_tokens(record.input);
    if (input_tokens.empty()) return std::nullopt;
    const auto gold_set = token_set(record.gold_edit);
    const auto model_set = token_set(record.model_edit);
    std::size_t gold_np = 0, model_np = 0, both_np = 0;
    for (const std::string& token : input_tokens) {
        const bool g = gold_set.count(token) == 0;
        const bool m = model_set.count(token) == 0;
        if (g) ++gold_np;
        if (m) ++model_np;
        if (g && m) ++both_np;
    }
    return f1_from_counts(model_np, gold_np, both_np);
}

}  // namespace

double err_loc(const std::vector<EditRecord>& records) {
    if (records.empty()) throw DataError("err_loc: no records");
    double sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        std::optional<double> f1 = err_loc_single(records[i]);
        if (!f1) {
            std::cerr << "warning: edit record " << i
                      << " has an empty normalized input; skipped in ErrLoc\n";
            continue;
        }
        sum += *f1;
        ++counted;
    }
    if (counted == 0) throw DataError("err_loc: every record had an empty normalized input");
    return sum / static_cast<double>(counted);
}

std::optional<double> edit_corr(const EditRecord& record) {
    const auto input_set = token_set(record.input);
    std::unordered_set<std::string> gold_new, model_new;
    for (const auto& t : token_set(record.gold_edit)) {
        if (input_set.count(t) == 0) gold_new.insert(t);
    }
    if (gold_new.empty()) return std::nullopt;  // gold adds nothing: undefined
    for (const auto& t : token_set(record.model_edit)) {
        if (input_set.count(t) == 0) model_new.insert(t);
    }
    if (model_new.empty()) return 0.0;
    std::size_t common = 0;
    for (const auto& t : model_new) {
        if (gold_new.count(t) > 0) ++common;
    }
    const double p = static_cast<double>(common) / static_cast<double>(model_new.size());
    const double r = static_cast<double>(common) / static_cast<double>(gold_new.size());
    if (p + r == 0.0) return 0.0;
    return 2.0 * p * r / (p + r);
}

double TokenCosineSimilarity::similarity(const std::string& a, const std::string& b) {
    std::map<std::string, int> ca, cb;
    for (const auto& t : normalize_tokens(a)) ++ca[t];
    for (const auto& t : normalize_tokens(b)) ++cb[t];
    if (ca.empty() && cb.empty()) return 1.0;
    if (ca.empty() || cb.empty()) return 0.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [t, n] : ca) {
        na += static_cast<double>(n) * n;
        auto it = cb.find(t);
        if (it != cb.end()) dot += static_cast<double>(n) * it->second;
    }
    for (const auto& [t, n] : cb) nb += static_cast<double>(n) * n;
    return dot / std::sqrt(na * nb);
}

double sim_al(const EditRecord& record, SimilarityScorer& sim) {
    const double s_ge = sim.similarity(record.gold_edit, record.model_edit);
    const double s_gx = sim.similarity(record.gold_edit, record.input);
    if (s_ge < 0.0 || s_ge > 1.0 || s_gx < 0.0 || s_gx > 1.0) {
        throw DataError("sim_al: similarity scorer returned a value outside [0,1]");
    }
    if (s_gx >= 1.0 - 1e-9) return s_ge;  // gold equals input: no gain to normalize
    return std::max(0.0, (s_ge - s_gx) / (1.0 - s_gx));
}

EditMetrics evaluate_edits(const std::vector<EditRecord>& records, SimilarityScorer& sim) {
    if (records.empty()) throw DataError("evaluate_edits: no records");
    EditMetrics m;
    m.records = records.size();
    m.err_loc = err_loc(records);
    double corr_sum = 0.0;
    double sim_sum = 0.0;
    for (const EditRecord& r : records) {
        if (std::optional<double> c = edit_corr(r)) {
            corr_sum += *c;
            ++m.edit_corr_records;
        }
        sim_sum += sim_al(r, sim);
    }
    if (m.edit_corr_records > 0) {
        m.edit_corr = corr_sum / static_cast<double>(m.edit_corr_records);
    }
    m.sim_al = sim_sum / static_cast<double>(m.records);
    return m;
}

namespace {

std::string example_block(const EditRecord& record, bool use_facts, bool include_gold) {
    std::string block = "Input: " + record.input;
    if (use_facts) {
        int i = 1;
        for (const auto& [fact, is_true] : record.fact_labels) {
            block += " Fact " + std::to_string(i) + " (" + (is_true ? "True" : "False") +
                     "): " + fact;
            ++i;
        }
    }
    block += " Edit:";
    if (include_gold) block += " " + record.gold_edit;
    return block;
}

}  // namespace

std::string build_editor_prompt(const EditRecord& record,
                                const std::vector<Passage>* passages, bool use_facts,
                                const std::vector<EditRecord>& exemplars) {
    if (exemplars.size() != 4) {
        throw DataError("build_editor_prompt: exactly 4 exemplars required, got " +
                        std::to_string(exemplars.size()));
    }
    if (passages != nullptr && passages->size() > 3) {
        throw DataError("build_editor_prompt: at most 3 passages allowed, got " +
                        std::to_string(passages->size()));
    }
    std::string prompt;
    for (const EditRecord& ex : exemplars) {
        prompt += example_block(ex, use_facts, /*include_gold=*/true);
        prompt += "\n\n";
    }
    if (passages != nullptr) {
        for (const Passage& p : *passages) {
            prompt += "Title: " + p.doc_title + "\nText: " + p.text + "\n\n";
        }
    }
    prompt += example_block(record, use_facts, /*include_gold=*/false);
    return prompt;
}

}  // namespace facteval
