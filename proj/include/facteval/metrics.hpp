#ifndef FACTEVAL_METRICS_HPP
#define FACTEVAL_METRICS_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "facteval/scoring.hpp"

namespace facteval {

/// Binary-set F1 with the degenerate conventions used throughout:
/// both sets empty -> 1 (vacuous agreement); exactly one empty -> 0;
/// otherwise 2PR/(P+R), which is 0 for disjoint non-empty sets.
double f1_from_counts(std::size_t predicted, std::size_t gold, std::size_t intersection);

/// Identity of a fact across gold and predicted files. Alignment is by
/// this triple, never by text, so whitespace drift cannot break it.
struct FactKey {
    std::string topic;
    int sentence_index = 0;
    int fact_index = 0;

    bool operator==(const FactKey&) const = default;
    bool operator<(const FactKey& o) const {
        if (topic != o.topic) return topic < o.topic;
        if (sentence_index != o.sentence_index) return sentence_index < o.sentence_index;
        return fact_index < o.fact_index;
    }
};

struct AlignedFact {
    FactKey key;
    Label gold = Label::NotSupported;
    bool predicted_supported = false;
};

/// F1 over the Not-supported class at the individual-fact level. Gold
/// Irrelevant facts are removed before computation. Throws DataError when
/// the two lists do not align one-to-one by fact identity.
double f1_micro(const std::vector<AlignedFact>& facts);
double f1_micro(const std::vector<std::pair<FactKey, Label>>& gold,
                const std::vector<std::pair<FactKey, bool>>& predicted);

/// ER = |FS - FS_EST|, inputs as fractions in [0,1].
double error_rate(double fs_gold, double fs_estimated);

enum class EstimationDirection { over, under, neutral };

/// Over/under when the estimate misses gold by more than 0.05 absolute.
EstimationDirection estimation_direction(double fs_gold, double fs_estimated);
std::string direction_name(EstimationDirection d);

struct MetricReport {
    std::string subject_model;
    double f1_micro = 0.0;
    double error_rate = 0.0;
    double fs_gold = 0.0;
    double fs_estimated = 0.0;
    EstimationDirection direction = EstimationDirection::neutral;
};

/// True iff sorting subjects by estimated score reproduces the gold order.
/// Implemented pairwise: every gold score difference must have the same
/// sign as the estimated difference (an estimated tie breaks consistency).
/// Gold ties are an error; subject sets must match.
bool ranking_consistency(const std::vector<std::pair<std::string, double>>& gold_scores,
                         const std::vector<std::pair<std::string, double>>& estimated_scores);

/// Pearson correlation coefficient. Throws DataError for lengths < 2,
/// mismatched lengths, or zero variance in either list.
double correlation(const std::vector<double>& scores_a, const std::vector<double>& scores_b);

}  // namespace facteval

#endif
