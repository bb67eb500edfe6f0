#include "facteval/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "facteval/errors.hpp"

namespace facteval {

namespace {

using SubjectTopic = std::pair<std::string, std::string>;

struct GoldKey {
    std::string subject;
    FactKey key;
    bool operator<(const GoldKey& o) const {
        if (subject != o.subject) return subject < o.subject;
        return key < o.key;
    }
};

}  // namespace

std::vector<Generation> load_generations_with_detection(const std::string& path,
                                                        const AbstentionDetector* detector) {
    std::vector<Generation> out;
    for (const nlohmann::json& rec : read_jsonl(path)) {
        Generation g;
        if (!rec.contains("topic") || !rec.contains("subject_model") || !rec.contains("text")) {
            throw DataError(path + ": generation records need topic, subject_model and text");
        }
        g.topic = rec["topic"].get<std::string>();
        g.subject_model = rec["subject_model"].get<std::string>();
        g.text = rec["text"].get<std::string>();
        if (rec.contains("prompt")) g.prompt = rec["prompt"].get<std::string>();
        if (rec.contains("category")) g.category = rec["category"].get<std::string>();
        if (rec.contains("abstained")) {
            g.abstained = rec["abstained"].get<bool>();
        } else if (detector != nullptr) {
            g.abstained = detector->detect(g.text);
        }
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<FactRecord> atomize_generations(const std::vector<Generation>& generations,
                                            LmGateway& gateway, const std::string& model_id,
                                            int threads) {
    std::vector<FactRecord> out;
    for (const Generation& g : generations) {
        if (g.abstained) continue;
        for (AtomicFact& fact : atomize(g, gateway, model_id, threads)) {
            out.push_back({g.topic, g.subject_model, std::move(fact)});
        }
    }
    return out;
}

std::vector<VerdictRecord> judge_records(const std::vector<FactRecord>& facts,
                                         const EstimatorConfig& config, const Index* index,
                                         LmGateway* gateway, const std::string& model_id,
                                         NpScorer* np_scorer,
                                         const std::vector<SampleRecord>& samples,
                                         int threads) {
    std::vector<VerdictRecord> out;
    out.reserve(facts.size());
    if (config.variant == EstimatorVariant::self_check) {
        config.validate();
        if (gateway == nullptr) throw UsageError("self_check requires an LM gateway");
        std::map<SubjectTopic, std::vector<std::string>> by_topic;
        for (const SampleRecord& s : samples) {
            by_topic[{s.subject_model, s.topic}].push_back(s.text);
        }
        for (const FactRecord& f : facts) {
            auto it = by_topic.find({f.subject_model, f.topic});
            if (it == by_topic.end()) {
                throw DataError("self_check: no samples for subject '" + f.subject_model +
                                "', topic '" + f.topic + "'");
            }
            if (static_cast<int>(it->second.size()) < config.self_check_min_samples) {
                throw DataError("self_check: topic '" + f.topic + "' has " +
                                std::to_string(it->second.size()) + " samples, need " +
                                std::to_string(config.self_check_min_samples));
            }
            out.push_back(
                {f.topic, f.subject_model, judge_self_check(f.fact, it->second, *gateway, model_id)});
        }
        return out;
    }
    std::vector<AtomicFact> flat;
    std::vector<std::string> topics;
    flat.reserve(facts.size());
    topics.reserve(facts.size());
    for (const FactRecord& f : facts) {
        flat.push_back(f.fact);
        topics.push_back(f.topic);
    }
    JudgeInputs inputs;
    inputs.index = index;
    inputs.gateway = gateway;
    inputs.model_id = model_id;
    inputs.np_scorer = np_scorer;
    std::vector<Verdict> verdicts = judge_batch(flat, topics, config, inputs, threads);
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        out.push_back({facts[i].topic, facts[i].subject_model, std::move(verdicts[i])});
    }
    return out;
}

std::vector<ScoreReport> score_subjects(const std::vector<Generation>& generations,
                                        const std::vector<VerdictRecord>& verdicts,
                                        const std::vector<GoldRecord>* gold,
                                        int position_buckets) {
    if (generations.empty()) throw DataError("score: no generations");

    std::map<SubjectTopic, std::size_t> generation_at;
    std::vector<std::string> subjects;  // first-seen order
    for (std::size_t i = 0; i < generations.size(); ++i) {
        const Generation& g = generations[i];
        SubjectTopic key{g.subject_model, g.topic};
        if (!generation_at.emplace(key, i).second) {
            throw DataError("duplicate generation for subject '" + g.subject_model +
                            "', topic '" + g.topic + "'");
        }
        if (std::find(subjects.begin(), subjects.end(), g.subject_model) == subjects.end()) {
            subjects.push_back(g.subject_model);
        }
    }

    std::map<GoldKey, Label> gold_labels;
    if (gold != nullptr) {
        for (const GoldRecord& g : *gold) {
            if (!gold_labels.emplace(GoldKey{g.subject_model, g.key}, g.label).second) {
                throw DataError("duplicate gold label for topic '" + g.key.topic + "'");
            }
        }
    }

    // Per-generation verdict lists, with gold-Irrelevant facts excluded
    // before any scoring.
    std::map<SubjectTopic, std::vector<Verdict>> grouped;
    for (const VerdictRecord& v : verdicts) {
        SubjectTopic key{v.subject_model, v.topic};
        auto it = generation_at.find(key);
        if (it == generation_at.end()) {
            throw DataError("verdict for unknown generation: subject '" + v.subject_model +
                            "', topic '" + v.topic + "'");
        }
        if (generations[it->second].abstained) {
            throw DataError("verdict for abstained generation: topic '" + v.topic + "'");
        }
        if (gold != nullptr) {
            auto lit = gold_labels.find(
                GoldKey{v.subject_model,
                        FactKey{v.topic, v.verdict.fact.sentence_index, v.verdict.fact.fact_index}});
            if (lit != gold_labels.end() && lit->second == Label::Irrelevant) continue;
        }
        grouped[key].push_back(v.verdict);
    }

    std::vector<ScoreReport> reports;
    for (const std::string& subject : subjects) {
        std::vector<std::pair<Generation, std::vector<Verdict>>> pairs;
        std::vector<std::vector<Verdict>> verdicts_by_generation;
        for (const Generation& g : generations) {
            if (g.subject_model != subject) continue;
            auto it = grouped.find({subject, g.topic});
            std::vector<Verdict> list = it == grouped.end() ? std::vector<Verdict>{} : it->second;
            if (!g.abstained) verdicts_by_generation.push_back(list);
            pairs.emplace_back(g, std::move(list));
        }
        ScoreReport report = aggregate(pairs);
        if (gold != nullptr) {
            std::vector<std::pair<Generation, std::vector<GoldLabel>>> gold_pairs;
            for (const Generation& g : generations) {
                if (g.subject_model != subject || g.abstained) continue;
                std::vector<GoldLabel> labels;
                for (const GoldRecord& rec : *gold) {
                    if (rec.subject_model == subject && rec.key.topic == g.topic) {
                        labels.push_back({rec.fact_text, rec.label});
                    }
                }
                if (!labels.empty()) gold_pairs.emplace_back(g, std::move(labels));
            }
            if (!gold_pairs.empty()) report.label_stats = label_statistics(gold_pairs);
        }
        if (position_buckets > 0) {
            report.position_breakdown = position_breakdown(verdicts_by_generation, position_buckets);
        }
        reports.push_back(std::move(report));
    }
    std::sort(reports.begin(), reports.end(), [](const ScoreReport& a, const ScoreReport& b) {
        if (a.factscore != b.factscore) return a.factscore > b.factscore;
        return a.subject_model < b.subject_model;
    });
    return reports;
}

namespace {

struct SubjectAlignment {
    std::string subject;
    std::vector<AlignedFact> facts;           // gold-Irrelevant removed
    std::map<std::string, std::vector<AlignedFact>> by_topic;
};

double macro_fs(const SubjectAlignment& alignment, const std::function<bool(const AlignedFact&)>& is_supported) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& [topic, facts] : alignment.by_topic) {
        if (facts.empty()) continue;
        std::size_t supported = 0;
        for (const AlignedFact& f : facts) {
            if (is_supported(f)) ++supported;
        }
        sum += static_cast<double>(supported) / static_cast<double>(facts.size());
        ++count;
    }
    if (count == 0) throw DataError("no scorable generations for subject " + alignment.subject);
    return sum / static_cast<double>(count);
}

MetricReport metric_report_for(const SubjectAlignment& alignment,
                               const std::function<bool(const AlignedFact&)>& predicted) {
    MetricReport r;
    r.subject_model = alignment.subject;
    std::vector<AlignedFact> facts = alignment.facts;
    for (AlignedFact& f : facts) f.predicted_supported = predicted(f);
    r.f1_micro = f1_micro(facts);
    r.fs_gold = macro_fs(alignment, [](const AlignedFact& f) { return f.gold == Label::Supported; });
    r.fs_estimated = macro_fs(alignment, predicted);
    r.error_rate = error_rate(r.fs_gold, r.fs_estimated);
    r.direction = estimation_direction(r.fs_gold, r.fs_estimated);
    return r;
}

}  // namespace

EstimatorEvaluation evaluate_estimator(const std::vector<GoldRecord>& gold,
                                       const std::vector<VerdictRecord>& predicted,
                                       bool with_baselines, std::uint64_t seed) {
    if (gold.empty()) throw DataError("eval-estimator: gold file is empty");

    std::map<GoldKey, bool> predictions;
    for (const VerdictRecord& v : predicted) {
        GoldKey key{v.subject_model,
                    FactKey{v.topic, v.verdict.fact.sentence_index, v.verdict.fact.fact_index}};
        if (!predictions.emplace(key, v.verdict.supported).second) {
            throw DataError("duplicate prediction for topic '" + v.topic + "'");
        }
    }
    if (predictions.size() != gold.size()) {
        throw DataError("misaligned fact lists: " + std::to_string(gold.size()) +
                        " gold facts vs " + std::to_string(predictions.size()) + " predictions");
    }

    // Subject order follows the gold file.
    std::vector<std::string> subject_order;
    std::map<std::string, SubjectAlignment> alignments;
    for (const GoldRecord& g : gold) {
        if (alignments.find(g.subject_model) == alignments.end()) {
            subject_order.push_back(g.subject_model);
            alignments[g.subject_model].subject = g.subject_model;
        }
        auto pit = predictions.find(GoldKey{g.subject_model, g.key});
        if (pit == predictions.end()) {
            throw DataError("misaligned fact lists: no prediction for gold fact (topic '" +
                            g.key.topic + "', sentence " + std::to_string(g.key.sentence_index) +
                            ", fact " + std::to_string(g.key.fact_index) + ")");
        }
        if (g.label == Label::Irrelevant) continue;  // removed before computation
        AlignedFact f;
        f.key = g.key;
        f.gold = g.label;
        f.predicted_supported = pit->second;
        alignments[g.subject_model].facts.push_back(f);
        alignments[g.subject_model].by_topic[g.key.topic].push_back(f);
    }

    EstimatorEvaluation out;
    std::vector<std::pair<std::string, double>> gold_scores;
    std::vector<std::pair<std::string, double>> est_scores;
    for (const std::string& subject : subject_order) {
        const SubjectAlignment& alignment = alignments.at(subject);
        MetricReport r = metric_report_for(
            alignment, [](const AlignedFact& f) { return f.predicted_supported; });
        gold_scores.emplace_back(subject, r.fs_gold);
        est_scores.emplace_back(subject, r.fs_estimated);
        out.rows.push_back({"predicted", std::move(r)});
    }
    if (with_baselines) {
        std::mt19937_64 rng(seed);
        std::bernoulli_distribution coin(0.5);
        for (const std::string& subject : subject_order) {
            const SubjectAlignment& alignment = alignments.at(subject);
            out.rows.push_back({"always_supported",
                                metric_report_for(alignment, [](const AlignedFact&) { return true; })});
            out.rows.push_back({"always_not_supported",
                                metric_report_for(alignment, [](const AlignedFact&) { return false; })});
            std::map<FactKey, bool> flips;
            for (const AlignedFact& f : alignment.facts) flips[f.key] = coin(rng);
            out.rows.push_back({"random", metric_report_for(alignment, [&](const AlignedFact& f) {
                                    return flips.at(f.key);
                                })});
        }
    }
    if (subject_order.size() >= 2) {
        try {
            out.ranking_consistent = ranking_consistency(gold_scores, est_scores);
        } catch (const DataError&) {
            out.ranking_consistent = std::nullopt;  // gold ties: consistency undefined
        }
    }
    return out;
}

std::string render_estimator_table(const EstimatorEvaluation& evaluation) {
    std::ostringstream out;
    out << "evaluator             subject                F1_micro      ER  FS_gold   FS_est  direction\n";
    for (const EstimatorRow& row : evaluation.rows) {
        const MetricReport& r = row.report;
        char line[200];
        std::snprintf(line, sizeof(line), "%-21s %-22s %8s %7s %8s %8s  %s\n",
                      row.evaluator.c_str(), r.subject_model.c_str(),
                      format_percent(r.f1_micro).c_str(), format_percent(r.error_rate).c_str(),
                      format_percent(r.fs_gold).c_str(), format_percent(r.fs_estimated).c_str(),
                      direction_name(r.direction).c_str());
        out << line;
    }
    if (evaluation.ranking_consistent.has_value()) {
        out << "ranking consistent with gold: "
            << (*evaluation.ranking_consistent ? "yes" : "no") << "\n";
    }
    return out.str();
}

}  // namespace facteval
