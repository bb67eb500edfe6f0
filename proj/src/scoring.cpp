#include "facteval/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "facteval/errors.hpp"

namespace facteval {

Label parse_label(const std::string& name) {
    if (name == "Supported" || name == "S") return Label::Supported;
    if (name == "NotSupported" || name == "Not-supported" || name == "NS") {
        return Label::NotSupported;
    }
    if (name == "Irrelevant" || name == "IR") return Label::Irrelevant;
    throw DataError("unknown label: " + name);
}

std::string label_name(Label label) {
    switch (label) {
        case Label::Supported: return "Supported";
        case Label::NotSupported: return "NotSupported";
        case Label::Irrelevant: return "Irrelevant";
    }
    return "unknown";
}

std::optional<double> per_generation_score(const std::vector<Verdict>& verdicts) {
    if (verdicts.empty()) return std::nullopt;
    std::size_t supported = 0;
    for (const Verdict& v : verdicts) {
        if (v.supported) ++supported;
    }
    return static_cast<double>(supported) / static_cast<double>(verdicts.size());
}

ScoreReport aggregate(const std::vector<std::pair<Generation, std::vector<Verdict>>>& reports) {
    ScoreReport out;
    out.total_prompts = reports.size();
    double f_sum = 0.0;
    std::size_t f_count = 0;
    std::size_t total_facts = 0;
    for (const auto& [generation, verdicts] : reports) {
        if (!out.subject_model.empty() && generation.subject_model != out.subject_model) {
            throw DataError("aggregate: mixed subject models (" + out.subject_model + " vs " +
                            generation.subject_model + "); score each subject separately");
        }
        out.subject_model = generation.subject_model;
        if (generation.abstained) continue;
        ++out.responding;
        total_facts += verdicts.size();
        std::optional<double> f = per_generation_score(verdicts);
        if (!f) {
            ++out.dropped_empty;
            std::cerr << "warning: generation for topic '" << generation.topic
                      << "' has no facts after filtering; dropped from the average\n";
            continue;
        }
        out.per_generation.push_back({generation.topic, *f, generation.category});
        f_sum += *f;
        ++f_count;
    }
    if (out.responding == 0 || f_count == 0) {
        throw DataError("aggregate: no responding generations to score");
    }
    out.factscore = f_sum / static_cast<double>(f_count);
    out.respond_rate =
        static_cast<double>(out.responding) / static_cast<double>(out.total_prompts);
    out.avg_facts_per_response =
        static_cast<double>(total_facts) / static_cast<double>(out.total_prompts);
    return out;
}

LabelStats label_statistics(
    const std::vector<std::pair<Generation, std::vector<GoldLabel>>>& gold) {
    if (gold.empty()) throw DataError("label_statistics: no generations");
    LabelStats sums;
    std::size_t generations = 0;
    for (const auto& [generation, labels] : gold) {
        if (labels.empty()) continue;
        double s = 0.0, ns = 0.0, ir = 0.0;
        for (const GoldLabel& g : labels) {
            switch (g.label) {
                case Label::Supported: s += 1.0; break;
                case Label::NotSupported: ns += 1.0; break;
                case Label::Irrelevant: ir += 1.0; break;
            }
        }
        const double n = static_cast<double>(labels.size());
        sums.supported += s / n;
        sums.not_supported += ns / n;
        sums.irrelevant += ir / n;
        ++generations;
    }
    if (generations == 0) throw DataError("label_statistics: every generation is empty");
    const double g = static_cast<double>(generations);
    return {sums.supported / g, sums.not_supported / g, sums.irrelevant / g};
}

std::vector<PositionBucket> position_breakdown(
    const std::vector<std::vector<Verdict>>& verdicts_by_generation, int buckets) {
    if (buckets < 1) throw DataError("position_breakdown: buckets must be >= 1");
    std::vector<std::size_t> supported(buckets, 0);
    std::vector<std::size_t> total(buckets, 0);
    for (const auto& verdicts : verdicts_by_generation) {
        for (const Verdict& v : verdicts) {
            // Right-edge band: fractions in ((b)/B, (b+1)/B] map to bucket b.
            int b = static_cast<int>(std::ceil(v.fact.position_fraction * buckets)) - 1;
            b = std::clamp(b, 0, buckets - 1);
            ++total[b];
            if (v.supported) ++supported[b];
        }
    }
    std::vector<PositionBucket> out;
    out.reserve(buckets);
    for (int b = 0; b < buckets; ++b) {
        PositionBucket pb;
        pb.bucket = b;
        pb.fact_count = total[b];
        pb.supported_fraction =
            total[b] == 0 ? 0.0
                          : static_cast<double>(supported[b]) / static_cast<double>(total[b]);
        out.push_back(pb);
    }
    return out;
}

std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", fraction * 100.0);
    return buf;
}

std::string render_score_table(const std::vector<ScoreReport>& reports) {
    std::ostringstream out;
    out << "subject                     FActScore  %respond  #facts/resp\n";
    for (const ScoreReport& r : reports) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-27s %9s %9s %12.1f\n", r.subject_model.c_str(),
                      format_percent(r.factscore).c_str(),
                      format_percent(r.respond_rate).c_str(), r.avg_facts_per_response);
        out << line;
    }
    return out.str();
}

}  // namespace facteval
