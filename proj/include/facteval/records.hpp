#ifndef FACTEVAL_RECORDS_HPP
#define FACTEVAL_RECORDS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "facteval/atomizer.hpp"
#include "facteval/edit_eval.hpp"
#include "facteval/estimator.hpp"
#include "facteval/metrics.hpp"
#include "facteval/scoring.hpp"

namespace facteval {

// Every inter-stage file is newline-delimited JSON records (UTF-8), so
// stages compose through the filesystem. Field names are documented in
// the README.

struct FactRecord {
    std::string topic;
    std::string subject_model;
    AtomicFact fact;
};

struct VerdictRecord {
    std::string topic;
    std::string subject_model;
    Verdict verdict;
};

struct GoldRecord {
    std::string subject_model;
    FactKey key;
    std::string fact_text;
    Label label = Label::NotSupported;
};

struct SampleRecord {
    std::string topic;
    std::string subject_model;
    std::string text;
};

/// Writes via a temp file in the destination directory, then renames.
void atomic_write_text(const std::string& path, const std::string& content);

/// Parses one JSON object per non-empty line; parse failures report
/// path:line.
std::vector<nlohmann::json> read_jsonl(const std::string& path);

std::vector<FactRecord> load_facts(const std::string& path);
void save_facts(const std::string& path, const std::vector<FactRecord>& facts);

std::vector<VerdictRecord> load_verdicts(const std::string& path);
void save_verdicts(const std::string& path, const std::vector<VerdictRecord>& verdicts);

std::vector<GoldRecord> load_gold(const std::string& path);
std::vector<SampleRecord> load_samples(const std::string& path);
std::vector<EditRecord> load_edit_records(const std::string& path);

nlohmann::ordered_json score_report_to_json(const ScoreReport& report);
nlohmann::ordered_json metric_report_to_json(const MetricReport& report);
nlohmann::ordered_json edit_metrics_to_json(const EditMetrics& metrics);

}  // namespace facteval

#endif
