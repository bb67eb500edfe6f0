#include "facteval/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "facteval/errors.hpp"
#include "facteval/text.hpp"

namespace facteval {

namespace {

constexpr int kJudgeMaxOutputTokens = 16;
const char* const kTrueOrFalse = " True or False?";

LmRequest judge_request(const std::string& model_id, std::string prompt) {
    LmRequest req;
    req.model_id = model_id;
    req.prompt = std::move(prompt);
    req.max_output_tokens = kJudgeMaxOutputTokens;
    req.temperature = 0.0;
    req.logprob_targets = std::vector<std::string>{"True", "False"};
    return req;
}

}  // namespace

EstimatorVariant parse_variant(const std::string& name) {
    if (name == "no_context") return EstimatorVariant::no_context;
    if (name == "self_check") return EstimatorVariant::self_check;
    if (name == "retrieve_lm") return EstimatorVariant::retrieve_lm;
    if (name == "np") return EstimatorVariant::np;
    if (name == "retrieve_lm_plus_np") return EstimatorVariant::retrieve_lm_plus_np;
    throw UsageError("unknown estimator variant: " + name +
                     " (expected no_context|self_check|retrieve_lm|np|retrieve_lm_plus_np)");
}

std::string variant_name(EstimatorVariant variant) {
    switch (variant) {
        case EstimatorVariant::no_context: return "no_context";
        case EstimatorVariant::self_check: return "self_check";
        case EstimatorVariant::retrieve_lm: return "retrieve_lm";
        case EstimatorVariant::np: return "np";
        case EstimatorVariant::retrieve_lm_plus_np: return "retrieve_lm_plus_np";
    }
    return "unknown";
}

void EstimatorConfig::validate() const {
    std::string problems;
    if (k < 1) problems += "k must be >= 1; ";
    if (!(np_threshold > 0.0 && np_threshold < 1.0)) {
        problems += "np_threshold must be in (0,1); ";
    }
    if (self_check_min_samples < 1) problems += "self_check_min_samples must be >= 1; ";
    if (!problems.empty()) throw UsageError("invalid estimator config: " + problems);
}

// ---------------------------------------------------------------------------
// NP surrogate

RetrievalFrequencyNpScorer::RetrievalFrequencyNpScorer(const Index& index, int k)
    : index_(index), k_(k) {}

std::vector<double> RetrievalFrequencyNpScorer::token_probabilities(
    const std::vector<std::string>& tokens, const AtomicFact& fact,
    const std::string& topic) {
    std::vector<ScoredPassage> evidence = index_.retrieve(topic, fact.text, k_);
    std::unordered_set<std::string> evidence_tokens;
    for (const ScoredPassage& sp : evidence) {
        for (auto& t : text::match_tokens(sp.passage.text)) {
            evidence_tokens.insert(std::move(t));
        }
    }
    const double total = static_cast<double>(index_.total_corpus_tokens());
    const double vocab = static_cast<double>(index_.vocabulary_size());
    std::vector<double> probs;
    probs.reserve(tokens.size());
    for (const std::string& token : tokens) {
        if (evidence_tokens.count(token) > 0) {
            probs.push_back(1.0);
        } else {
            const double count = static_cast<double>(index_.corpus_term_count(token));
            probs.push_back((count + 0.5) / (total + 0.5 * vocab));
        }
    }
    return probs;
}

// ---------------------------------------------------------------------------
// Judges

Verdict judge_no_context(const AtomicFact& fact, LmGateway& gateway,
                         const std::string& model_id) {
    Verdict v;
    v.fact = fact;
    v.method = EstimatorVariant::no_context;
    LmResponse resp = gateway.complete(judge_request(model_id, fact.text + kTrueOrFalse));
    v.supported = decide_true_false(resp);
    return v;
}

Verdict judge_self_check(const AtomicFact& fact, const std::vector<std::string>& samples,
                         LmGateway& gateway, const std::string& model_id) {
    if (samples.empty()) throw DataError("judge_self_check: sample list is empty");
    Verdict v;
    v.fact = fact;
    v.method = EstimatorVariant::self_check;
    int true_votes = 0;
    for (const std::string& sample : samples) {
        std::string prompt = sample + "\n\n" + fact.text + kTrueOrFalse;
        if (decide_true_false(gateway.complete(judge_request(model_id, std::move(prompt))))) {
            ++true_votes;
        }
    }
    // Strict majority; an exact tie resolves to not supported.
    v.supported = 2 * true_votes > static_cast<int>(samples.size());
    return v;
}

std::string build_retrieve_prompt(const AtomicFact& fact,
                                  const std::vector<ScoredPassage>& evidence) {
    std::string prompt;
    for (const ScoredPassage& sp : evidence) {
        prompt += "Title: " + sp.passage.doc_title + "\nText: " + sp.passage.text + "\n\n";
    }
    prompt += fact.text + kTrueOrFalse;
    return prompt;
}

Verdict judge_retrieve_lm(const AtomicFact& fact, const std::string& topic,
                          const Index& index, LmGateway& gateway,
                          const std::string& model_id, int k) {
    Verdict v;
    v.fact = fact;
    v.method = EstimatorVariant::retrieve_lm;
    if (!index.has_title(topic)) {
        v.supported = false;
        v.missing_page = true;
        return v;
    }
    v.evidence = index.retrieve(topic, fact.text, k);
    LmResponse resp =
        gateway.complete(judge_request(model_id, build_retrieve_prompt(fact, v.evidence)));
    v.supported = decide_true_false(resp);
    return v;
}

double np_probability(const AtomicFact& fact, const std::string& topic, NpScorer& scorer) {
    std::vector<std::string> tokens = text::content_tokens(fact.text);
    if (tokens.empty()) {
        throw DataError("np_probability: fact has no content tokens: " + fact.text);
    }
    std::vector<double> probs = scorer.token_probabilities(tokens, fact, topic);
    if (probs.size() != tokens.size()) {
        throw DataError("NpScorer returned " + std::to_string(probs.size()) +
                        " probabilities for " + std::to_string(tokens.size()) + " tokens");
    }
    double sum = 0.0;
    for (double p : probs) sum += p;
    return sum / static_cast<double>(probs.size());
}

Verdict judge_np(const AtomicFact& fact, const std::string& topic, NpScorer& scorer,
                 double threshold, const Index& index) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw UsageError("np threshold must be in (0,1)");
    }
    Verdict v;
    v.fact = fact;
    v.method = EstimatorVariant::np;
    if (!index.has_title(topic)) {
        v.supported = false;
        v.missing_page = true;
        return v;
    }
    double p = np_probability(fact, topic, scorer);
    v.np_probability = p;
    v.supported = p >= threshold;
    return v;
}

Verdict judge_ensemble(const AtomicFact& fact, const std::string& topic, const Index& index,
                       LmGateway& gateway, const std::string& model_id, NpScorer& scorer,
                       const EstimatorConfig& config) {
    Verdict retrieval = judge_retrieve_lm(fact, topic, index, gateway, model_id, config.k);
    Verdict np = judge_np(fact, topic, scorer, config.np_threshold, index);
    Verdict v;
    v.fact = fact;
    v.method = EstimatorVariant::retrieve_lm_plus_np;
    v.evidence = std::move(retrieval.evidence);
    v.np_probability = np.np_probability;
    v.missing_page = retrieval.missing_page || np.missing_page;
    v.supported = retrieval.supported && np.supported;
    return v;
}

std::vector<Verdict> judge_batch(const std::vector<AtomicFact>& facts,
                                 const std::vector<std::string>& topics,
                                 const EstimatorConfig& config, const JudgeInputs& inputs,
                                 int threads) {
    if (facts.size() != topics.size()) {
        throw DataError("judge_batch: facts and topics differ in length");
    }
    config.validate();
    const bool needs_index = config.variant == EstimatorVariant::retrieve_lm ||
                             config.variant == EstimatorVariant::np ||
                             config.variant == EstimatorVariant::retrieve_lm_plus_np;
    const bool needs_lm = config.variant != EstimatorVariant::np;
    const bool needs_np = config.variant == EstimatorVariant::np ||
                          config.variant == EstimatorVariant::retrieve_lm_plus_np;
    if (needs_index && inputs.index == nullptr) throw UsageError("variant requires an index");
    if (needs_lm && inputs.gateway == nullptr) throw UsageError("variant requires an LM gateway");
    if (needs_np && inputs.np_scorer == nullptr) throw UsageError("variant requires an NP scorer");
    if (config.variant == EstimatorVariant::self_check) {
        if (inputs.self_check_samples == nullptr || inputs.self_check_samples->empty()) {
            throw DataError("self_check requires subject-LM samples");
        }
        if (static_cast<int>(inputs.self_check_samples->size()) < config.self_check_min_samples) {
            throw DataError("self_check requires at least " +
                            std::to_string(config.self_check_min_samples) + " samples, got " +
                            std::to_string(inputs.self_check_samples->size()));
        }
    }

    auto judge_one = [&](std::size_t i) -> Verdict {
        const AtomicFact& fact = facts[i];
        const std::string& topic = topics[i];
        switch (config.variant) {
            case EstimatorVariant::no_context:
                return judge_no_context(fact, *inputs.gateway, inputs.model_id);
            case EstimatorVariant::self_check:
                return judge_self_check(fact, *inputs.self_check_samples, *inputs.gateway,
                                        inputs.model_id);
            case EstimatorVariant::retrieve_lm:
                return judge_retrieve_lm(fact, topic, *inputs.index, *inputs.gateway,
                                         inputs.model_id, config.k);
            case EstimatorVariant::np:
                return judge_np(fact, topic, *inputs.np_scorer, config.np_threshold,
                                *inputs.index);
            case EstimatorVariant::retrieve_lm_plus_np:
                return judge_ensemble(fact, topic, *inputs.index, *inputs.gateway,
                                      inputs.model_id, *inputs.np_scorer, config);
        }
        throw UsageError("unhandled estimator variant");
    };

    std::vector<Verdict> verdicts(facts.size());
    if (threads <= 1 || facts.size() < 2) {
        for (std::size_t i = 0; i < facts.size(); ++i) verdicts[i] = judge_one(i);
        return verdicts;
    }
    // Slot-per-fact assembly keeps output order equal to input order.
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= facts.size()) return;
            try {
                verdicts[i] = judge_one(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    int n = std::min<int>(threads, static_cast<int>(facts.size()));
    pool.reserve(n);
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return verdicts;
}

}  // namespace facteval
