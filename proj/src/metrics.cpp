#include "facteval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "facteval/errors.hpp"

namespace facteval {

double f1_from_counts(std::size_t predicted, std::size_t gold, std::size_t intersection) {
    if (predicted == 0 && gold == 0) return 1.0;
    if (predicted == 0 || gold == 0) return 0.0;
    const double p = static_cast<double>(intersection) / static_cast<double>(predicted);
    const double r = static_cast<double>(intersection) / static_cast<double>(gold);
    if (p + r == 0.0) return 0.0;
    return 2.0 * p * r / (p + r);
}

double f1_micro(const std::vector<AlignedFact>& facts) {
    std::size_t predicted_ns = 0, gold_ns = 0, both_ns = 0;
    for (const AlignedFact& f : facts) {
        if (f.gold == Label::Irrelevant) continue;
        const bool g_ns = f.gold == Label::NotSupported;
        const bool p_ns = !f.predicted_supported;
        if (g_ns) ++gold_ns;
        if (p_ns) ++predicted_ns;
        if (g_ns && p_ns) ++both_ns;
    }
    return f1_from_counts(predicted_ns, gold_ns, both_ns);
}

double f1_micro(const std::vector<std::pair<FactKey, Label>>& gold,
                const std::vector<std::pair<FactKey, bool>>& predicted) {
    if (gold.size() != predicted.size()) {
        throw DataError("f1_micro: gold has " + std::to_string(gold.size()) +
                        " facts but predictions have " + std::to_string(predicted.size()));
    }
    std::map<FactKey, bool> by_key;
    for (const auto& [key, supported] : predicted) {
        if (!by_key.emplace(key, supported).second) {
            throw DataError("f1_micro: duplicate predicted fact for topic '" + key.topic + "'");
        }
    }
    std::vector<AlignedFact> aligned;
    aligned.reserve(gold.size());
    for (const auto& [key, label] : gold) {
        auto it = by_key.find(key);
        if (it == by_key.end()) {
            throw DataError("f1_micro: no prediction for gold fact (topic '" + key.topic +
                            "', sentence " + std::to_string(key.sentence_index) + ", fact " +
                            std::to_string(key.fact_index) + ")");
        }
        aligned.push_back({key, label, it->second});
    }
    return f1_micro(aligned);
}

double error_rate(double fs_gold, double fs_estimated) {
    if (fs_gold < 0.0 || fs_gold > 1.0 || fs_estimated < 0.0 || fs_estimated > 1.0) {
        throw DataError("error_rate: scores must be fractions in [0,1]");
    }
    return std::fabs(fs_gold - fs_estimated);
}

EstimationDirection estimation_direction(double fs_gold, double fs_estimated) {
    const double diff = fs_estimated - fs_gold;
    if (diff > 0.05) return EstimationDirection::over;
    if (diff < -0.05) return EstimationDirection::under;
    return EstimationDirection::neutral;
}

std::string direction_name(EstimationDirection d) {
    switch (d) {
        case EstimationDirection::over: return "over";
        case EstimationDirection::under: return "under";
        case EstimationDirection::neutral: return "neutral";
    }
    return "unknown";
}

bool ranking_consistency(const std::vector<std::pair<std::string, double>>& gold_scores,
                         const std::vector<std::pair<std::string, double>>& estimated_scores) {
    if (gold_scores.size() != estimated_scores.size() || gold_scores.size() < 2) {
        throw DataError("ranking_consistency: need matching subject sets of size >= 2");
    }
    std::map<std::string, double> est;
    for (const auto& [subject, score] : estimated_scores) {
        if (!est.emplace(subject, score).second) {
            throw DataError("ranking_consistency: duplicate subject: " + subject);
        }
    }
    std::vector<std::pair<std::string, double>> gold = gold_scores;
    for (const auto& [subject, score] : gold) {
        if (est.find(subject) == est.end()) {
            throw DataError("ranking_consistency: subject missing in estimates: " + subject);
        }
    }
    for (std::size_t i = 0; i < gold.size(); ++i) {
        for (std::size_t j = i + 1; j < gold.size(); ++j) {
            const double dg = gold[i].second - gold[j].second;
            if (dg == 0.0) {
                throw DataError("ranking_consistency: tie in gold scores between " +
                                gold[i].first + " and " + gold[j].first);
            }
            const double de = est.at(gold[i].first) - est.at(gold[j].first);
            if (de == 0.0 || (dg > 0.0) != (de > 0.0)) return false;
        }
    }
    return true;
}

double correlation(const std::vector<double>& scores_a, const std::vector<double>& scores_b) {
    if (scores_a.size() != scores_b.size()) {
        throw DataError("correlation: lists differ in length");
    }
    const std::size_t n = scores_a.size();
    if (n < 2) throw DataError("correlation: need at least 2 points");
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += scores_a[i];
        mean_b += scores_b[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = scores_a[i] - mean_a;
        const double db = scores_b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) {
        throw DataError("correlation: zero variance");
    }
    return cov / std::sqrt(var_a * var_b);
}

}  // namespace facteval
