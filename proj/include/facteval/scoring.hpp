#ifndef FACTEVAL_SCORING_HPP
#define FACTEVAL_SCORING_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "facteval/atomizer.hpp"
#include "facteval/estimator.hpp"

namespace facteval {

enum class Label { Supported, NotSupported, Irrelevant };

Label parse_label(const std::string& name);
std::string label_name(Label label);

struct GoldLabel {
    std::string fact_text;
    Label label = Label::NotSupported;
};

struct LabelStats {
    double supported = 0.0;  // fractions in [0,1], macro-averaged over generations
    double not_supported = 0.0;
    double irrelevant = 0.0;
};

struct PositionBucket {
    int bucket = 0;
    double supported_fraction = 0.0;
    std::size_t fact_count = 0;
};

struct PerGenerationScore {
    std::string topic;
    double f = 0.0;          // f(y) for this generation
    std::string category;    // metadata column passed through, may be empty
};

struct ScoreReport {
    std::string subject_model;
    double factscore = 0.0;      // mean of per-generation f(y) over responders
    double respond_rate = 0.0;   // non-abstained / total prompts
    double avg_facts_per_response = 0.0;  // total facts / total prompts
    std::size_t total_prompts = 0;
    std::size_t responding = 0;
    std::size_t dropped_empty = 0;  // responders with zero facts after filtering
    std::vector<PerGenerationScore> per_generation;
    std::optional<LabelStats> label_stats;
    std::vector<PositionBucket> position_breakdown;
};

/// f(y): supported facts / judged facts for one generation. Gold
/// Irrelevant facts must be filtered out by the caller beforehand. An
/// empty verdict list returns nullopt; the generation is then dropped from
/// aggregation (with a warning) rather than scored 0 or 1.
std::optional<double> per_generation_score(const std::vector<Verdict>& verdicts);

/// Macro average of f(y) over responding generations; respond_rate and
/// avg_facts are computed over the full prompt set (abstentions contribute
/// zero facts). Summation is left-to-right in input order so reports are
/// reproducible. Throws DataError when no generation responds.
ScoreReport aggregate(const std::vector<std::pair<Generation, std::vector<Verdict>>>& reports);

/// Per-generation label fractions averaged across generations (macro, not
/// pooled). Throws DataError on empty input.
LabelStats label_statistics(const std::vector<std::pair<Generation, std::vector<GoldLabel>>>& gold);

/// Facts pooled into `buckets` relative-position bands. A fact whose
/// position_fraction is f lands in the band whose right edge is the first
/// multiple of 1/buckets at or above f, so with n facts and n buckets each
/// fact gets its own band.
std::vector<PositionBucket> position_breakdown(
    const std::vector<std::vector<Verdict>>& verdicts_by_generation, int buckets);

/// One-decimal percentage rendering used by every report table ("42.5").
std::string format_percent(double fraction);

std::string render_score_table(const std::vector<ScoreReport>& reports);

}  // namespace facteval

#endif
