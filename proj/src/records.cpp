#include "facteval/records.hpp"

#include <filesystem>
#include <fstream>

#include "facteval/errors.hpp"

namespace facteval {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json parse_line(const std::string& path, std::size_t line_no, const std::string& line) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw DataError(path + ":" + std::to_string(line_no) + ": malformed record: " + e.what());
    }
}

const json& require(const json& rec, const char* field, const std::string& path,
                    std::size_t line_no) {
    auto it = rec.find(field);
    if (it == rec.end()) {
        throw DataError(path + ":" + std::to_string(line_no) + ": missing field '" + field + "'");
    }
    return *it;
}

template <typename T>
T get_field(const json& rec, const char* field, const std::string& path, std::size_t line_no) {
    try {
        return require(rec, field, path, line_no).get<T>();
    } catch (const json::exception& e) {
        throw DataError(path + ":" + std::to_string(line_no) + ": bad field '" + field +
                        "': " + e.what());
    }
}

// Iterate records with line numbers.
void for_each_record(const std::string& path,
                     const std::function<void(const json&, std::size_t)>& fn) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open record file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        fn(parse_line(path, line_no, line), line_no);
    }
}

}  // namespace

void atomic_write_text(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw DataError("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
}

std::vector<json> read_jsonl(const std::string& path) {
    std::vector<json> records;
    for_each_record(path, [&](const json& rec, std::size_t) { records.push_back(rec); });
    return records;
}

std::vector<FactRecord> load_facts(const std::string& path) {
    std::vector<FactRecord> out;
    for_each_record(path, [&](const json& rec, std::size_t line_no) {
        FactRecord f;
        f.topic = get_field<std::string>(rec, "topic", path, line_no);
        f.subject_model = get_field<std::string>(rec, "subject_model", path, line_no);
        f.fact.sentence_index = get_field<int>(rec, "sentence_index", path, line_no);
        f.fact.fact_index = get_field<int>(rec, "fact_index", path, line_no);
        f.fact.position_fraction = get_field<double>(rec, "position_fraction", path, line_no);
        f.fact.text = get_field<std::string>(rec, "text", path, line_no);
        out.push_back(std::move(f));
    });
    return out;
}

void save_facts(const std::string& path, const std::vector<FactRecord>& facts) {
    std::string content;
    for (const FactRecord& f : facts) {
        ordered_json rec;
        rec["topic"] = f.topic;
        rec["subject_model"] = f.subject_model;
        rec["sentence_index"] = f.fact.sentence_index;
        rec["fact_index"] = f.fact.fact_index;
        rec["position_fraction"] = f.fact.position_fraction;
        rec["text"] = f.fact.text;
        content += rec.dump();
        content += "\n";
    }
    atomic_write_text(path, content);
}

std::vector<VerdictRecord> load_verdicts(const std::string& path) {
    std::vector<VerdictRecord> out;
    for_each_record(path, [&](const json& rec, std::size_t line_no) {
        VerdictRecord v;
        v.topic = get_field<std::string>(rec, "topic", path, line_no);
        v.subject_model = get_field<std::string>(rec, "subject_model", path, line_no);
        v.verdict.fact.sentence_index = get_field<int>(rec, "sentence_index", path, line_no);
        v.verdict.fact.fact_index = get_field<int>(rec, "fact_index", path, line_no);
        v.verdict.fact.position_fraction =
            get_field<double>(rec, "position_fraction", path, line_no);
        v.verdict.fact.text = get_field<std::string>(rec, "fact_text", path, line_no);
        v.verdict.method = parse_variant(get_field<std::string>(rec, "method", path, line_no));
        v.verdict.supported = get_field<bool>(rec, "supported", path, line_no);
        if (rec.contains("np_probability") && !rec["np_probability"].is_null()) {
            v.verdict.np_probability = rec["np_probability"].get<double>();
        }
        if (rec.contains("missing_page")) {
            v.verdict.missing_page = rec["missing_page"].get<bool>();
        }
        if (rec.contains("evidence")) {
            for (const json& e : rec["evidence"]) {
                ScoredPassage sp;
                sp.passage.doc_title = e.at("doc_title").get<std::string>();
                sp.passage.index = e.at("passage_index").get<int>();
                sp.score = e.at("score").get<double>();
                v.verdict.evidence.push_back(std::move(sp));
            }
        }
        out.push_back(std::move(v));
    });
    return out;
}

void save_verdicts(const std::string& path, const std::vector<VerdictRecord>& verdicts) {
    std::string content;
    for (const VerdictRecord& v : verdicts) {
        ordered_json rec;
        rec["topic"] = v.topic;
        rec["subject_model"] = v.subject_model;
        rec["sentence_index"] = v.verdict.fact.sentence_index;
        rec["fact_index"] = v.verdict.fact.fact_index;
        rec["position_fraction"] = v.verdict.fact.position_fraction;
        rec["fact_text"] = v.verdict.fact.text;
        rec["method"] = variant_name(v.verdict.method);
        rec["supported"] = v.verdict.supported;
        if (v.verdict.np_probability) rec["np_probability"] = *v.verdict.np_probability;
        if (v.verdict.missing_page) rec["missing_page"] = true;
        if (!v.verdict.evidence.empty()) {
            ordered_json evidence = ordered_json::array();
            for (const ScoredPassage& sp : v.verdict.evidence) {
                ordered_json e;
                e["doc_title"] = sp.passage.doc_title;
                e["passage_index"] = sp.passage.index;
                e["score"] = sp.score;
                evidence.push_back(std::move(e));
            }
            rec["evidence"] = std::move(evidence);
        }
        content += rec.dump();
        content += "\n";
    }
    atomic_write_text(path, content);
}

std::vector<GoldRecord> load_gold(const std::string& path) {
    std::vector<GoldRecord> out;
    for_each_record(path, [&](const json& rec, std::size_t line_no) {
        GoldRecord g;
        g.subject_model = get_field<std::string>(rec, "subject_model", path, line_no);
        g.key.topic = get_field<std::string>(rec, "topic", path, line_no);
        g.key.sentence_index = get_field<int>(rec, "sentence_index", path, line_no);
        g.key.fact_index = get_field<int>(rec, "fact_index", path, line_no);
        if (rec.contains("fact_text")) g.fact_text = rec["fact_text"].get<std::string>();
        g.label = parse_label(get_field<std::string>(rec, "label", path, line_no));
        out.push_back(std::move(g));
    });
    return out;
}

std::vector<SampleRecord> load_samples(const std::string& path) {
    std::vector<SampleRecord> out;
    for_each_record(path, [&](const json& rec, std::size_t line_no) {
        SampleRecord s;
        s.topic = get_field<std::string>(rec, "topic", path, line_no);
        s.subject_model = get_field<std::string>(rec, "subject_model", path, line_no);
        s.text = get_field<std::string>(rec, "text", path, line_no);
        out.push_back(std::move(s));
    });
    return out;
}

std::vector<EditRecord> load_edit_records(const std::string& path) {
    std::vector<EditRecord> out;
    for_each_record(path, [&](const json& rec, std::size_t line_no) {
        EditRecord e;
        e.input = get_field<std::string>(rec, "input", path, line_no);
        e.gold_edit = get_field<std::string>(rec, "gold_edit", path, line_no);
        e.model_edit = get_field<std::string>(rec, "model_edit", path, line_no);
        if (rec.contains("fact_labels")) {
            for (const json& pair : rec["fact_labels"]) {
                if (!pair.is_array() || pair.size() != 2) {
                    throw DataError(path + ":" + std::to_string(line_no) +
                                    ": fact_labels entries must be [text, bool] pairs");
                }
                e.fact_labels.emplace_back(pair[0].get<std::string>(), pair[1].get<bool>());
            }
        }
        out.push_back(std::move(e));
    });
    return out;
}

nlohmann::ordered_json score_report_to_json(const ScoreReport& report) {
    ordered_json j;
    j["subject_model"] = report.subject_model;
    j["factscore"] = report.factscore;
    j["respond_rate"] = report.respond_rate;
    j["avg_facts_per_response"] = report.avg_facts_per_response;
    j["total_prompts"] = report.total_prompts;
    j["responding"] = report.responding;
    j["dropped_empty"] = report.dropped_empty;
    ordered_json per_gen = ordered_json::array();
    for (const PerGenerationScore& pg : report.per_generation) {
        ordered_json g;
        g["topic"] = pg.topic;
        g["f"] = pg.f;
        if (!pg.category.empty()) g["category"] = pg.category;
        per_gen.push_back(std::move(g));
    }
    j["per_generation"] = std::move(per_gen);
    if (report.label_stats) {
        ordered_json ls;
        ls["supported"] = report.label_stats->supported;
        ls["not_supported"] = report.label_stats->not_supported;
        ls["irrelevant"] = report.label_stats->irrelevant;
        j["label_stats"] = std::move(ls);
    }
    if (!report.position_breakdown.empty()) {
        ordered_json buckets = ordered_json::array();
        for (const PositionBucket& b : report.position_breakdown) {
            ordered_json jb;
            jb["bucket"] = b.bucket;
            jb["supported_fraction"] = b.supported_fraction;
            jb["fact_count"] = b.fact_count;
            buckets.push_back(std::move(jb));
        }
        j["position_breakdown"] = std::move(buckets);
    }
    return j;
}

nlohmann::ordered_json metric_report_to_json(const MetricReport& report) {
    ordered_json j;
    j["subject_model"] = report.subject_model;
    j["f1_micro"] = report.f1_micro;
    j["error_rate"] = report.error_rate;
    j["fs_gold"] = report.fs_gold;
    j["fs_estimated"] = report.fs_estimated;
    j["direction"] = direction_name(report.direction);
    return j;
}

nlohmann::ordered_json edit_metrics_to_json(const EditMetrics& metrics) {
    ordered_json j;
    j["err_loc"] = metrics.err_loc;
    if (metrics.edit_corr) {
        j["edit_corr"] = *metrics.edit_corr;
    } else {
        j["edit_corr"] = nullptr;
    }
    j["sim_al"] = metrics.sim_al;
    j["records"] = metrics.records;
    j["edit_corr_records"] = metrics.edit_corr_records;
    return j;
}

}  // namespace facteval
