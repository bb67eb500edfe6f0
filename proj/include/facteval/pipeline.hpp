#ifndef FACTEVAL_PIPELINE_HPP
#define FACTEVAL_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "facteval/records.hpp"

namespace facteval {

/// Loads generations and resolves abstention flags: records that carry an
/// explicit `abstained` field keep it; the rest are classified by the
/// detector (no detector means not abstained).
std::vector<Generation> load_generations_with_detection(const std::string& path,
                                                        const AbstentionDetector* detector);

/// Atomizes every responding generation; abstained generations produce no
/// facts.
std::vector<FactRecord> atomize_generations(const std::vector<Generation>& generations,
                                            LmGateway& gateway, const std::string& model_id,
                                            int threads = 1);

/// Judges fact records, preserving input order. Self-check samples are
/// matched to facts by (subject_model, topic) and judged per fact.
std::vector<VerdictRecord> judge_records(const std::vector<FactRecord>& facts,
                                         const EstimatorConfig& config, const Index* index,
                                         LmGateway* gateway, const std::string& model_id,
                                         NpScorer* np_scorer,
                                         const std::vector<SampleRecord>& samples,
                                         int threads = 1);

/// Groups verdicts by subject and topic against the generation list,
/// filters facts whose gold label is Irrelevant, and aggregates one
/// ScoreReport per subject, sorted by descending factscore. Gold, when
/// given, also populates label statistics.
std::vector<ScoreReport> score_subjects(const std::vector<Generation>& generations,
                                        const std::vector<VerdictRecord>& verdicts,
                                        const std::vector<GoldRecord>* gold,
                                        int position_buckets = 0);

struct EstimatorRow {
    std::string evaluator;  // "predicted" or a trivial-baseline name
    MetricReport report;
};

struct EstimatorEvaluation {
    std::vector<EstimatorRow> rows;
    std::optional<bool> ranking_consistent;  // set when >= 2 subjects without gold ties
};

/// Estimator-quality evaluation of predicted verdicts against gold labels.
/// Gold and predicted facts must align one-to-one by (topic, sentence,
/// fact) within each subject. Baseline rows replace every prediction with
/// a trivial predictor over the same gold facts; the random baseline is
/// seeded for reproducibility.
EstimatorEvaluation evaluate_estimator(const std::vector<GoldRecord>& gold,
                                       const std::vector<VerdictRecord>& predicted,
                                       bool with_baselines, std::uint64_t seed);

std::string render_estimator_table(const EstimatorEvaluation& evaluation);

}  // namespace facteval

#endif
