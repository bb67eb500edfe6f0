// facteval: factual-precision evaluation pipeline as composable
// subcommands over newline-delimited record files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "facteval/corpus.hpp"
#include "facteval/errors.hpp"
#include "facteval/pipeline.hpp"

namespace {

using namespace facteval;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitGateway = 3;

struct GatewayFlags {
    std::string backend = "mock";  // mock | http
    std::string mock_table;
    std::string model_id = "eval-model";
    std::string endpoint;
    std::string cache_path;
    int max_inflight = 8;
    int threads = 1;
};

struct EstimatorFlags {
    std::string variant = "retrieve_lm";
    int k = 5;
    double np_threshold = 0.3;
    int min_samples = 3;
};

// Values carried from --config into flag defaults. Flags given on the
// command line win.
struct FileConfig {
    std::optional<std::string> corpus;
    std::optional<std::string> index;
    std::optional<std::string> abstention_patterns;
    GatewayFlags gateway;
    EstimatorFlags estimator;
};

std::string sanitize_message(std::string msg) {
    for (char& c : msg) {
        if (c == '\n' || c == '\r') c = ' ';
        if (c == '"') c = '\'';
    }
    return msg;
}

int fail(int code, const std::string& kind, const std::string& msg) {
    std::cerr << "facteval: error code=" << code << " kind=" << kind << " message=\""
              << sanitize_message(msg) << "\"\n";
    return code;
}

FileConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file is not valid JSON: " + std::string(e.what()));
    }
    FileConfig config;
    std::vector<std::string> problems;
    auto path_field = [&](const char* name, std::optional<std::string>& slot, bool must_exist) {
        if (!j.contains(name)) return;
        if (!j[name].is_string()) {
            problems.push_back(std::string(name) + " must be a string path");
            return;
        }
        slot = j[name].get<std::string>();
        if (must_exist && !std::filesystem::exists(*slot)) {
            problems.push_back(std::string(name) + " does not exist: " + *slot);
        }
    };
    path_field("corpus", config.corpus, true);
    path_field("index", config.index, true);
    path_field("abstention_patterns", config.abstention_patterns, true);
    if (j.contains("gateway")) {
        const auto& g = j["gateway"];
        if (g.contains("endpoint")) config.gateway.endpoint = g["endpoint"].get<std::string>();
        if (g.contains("model_id")) config.gateway.model_id = g["model_id"].get<std::string>();
        if (g.contains("cache")) config.gateway.cache_path = g["cache"].get<std::string>();
        if (g.contains("max_inflight")) {
            config.gateway.max_inflight = g["max_inflight"].get<int>();
            if (config.gateway.max_inflight < 1) problems.push_back("gateway.max_inflight must be >= 1");
        }
        if (g.contains("mock_table")) config.gateway.mock_table = g["mock_table"].get<std::string>();
        if (g.contains("backend")) config.gateway.backend = g["backend"].get<std::string>();
    }
    if (j.contains("estimator")) {
        const auto& e = j["estimator"];
        if (e.contains("variant")) {
            config.estimator.variant = e["variant"].get<std::string>();
            try {
                parse_variant(config.estimator.variant);
            } catch (const UsageError& err) {
                problems.push_back(err.what());
            }
        }
        if (e.contains("k")) config.estimator.k = e["k"].get<int>();
        if (e.contains("np_threshold")) config.estimator.np_threshold = e["np_threshold"].get<double>();
        if (e.contains("self_check_min_samples")) {
            config.estimator.min_samples = e["self_check_min_samples"].get<int>();
        }
        EstimatorConfig check;
        check.k = config.estimator.k;
        check.np_threshold = config.estimator.np_threshold;
        check.self_check_min_samples = config.estimator.min_samples;
        try {
            check.validate();
        } catch (const UsageError& err) {
            problems.push_back(err.what());
        }
    }
    if (!problems.empty()) {
        std::string all = "config validation failed: ";
        for (std::size_t i = 0; i < problems.size(); ++i) {
            if (i > 0) all += "; ";
            all += problems[i];
        }
        throw UsageError(all);
    }
    return config;
}

std::unique_ptr<LmGateway> make_gateway(const GatewayFlags& flags) {
    std::shared_ptr<LmBackend> backend;
    if (flags.backend == "mock") {
        if (flags.mock_table.empty()) {
            throw UsageError("--backend mock requires --mock-table (a prompt->response record file)");
        }
        backend = std::make_shared<MockBackend>(MockBackend::from_file(flags.mock_table));
    } else if (flags.backend == "http") {
        HttpBackendConfig config;
        config.endpoint_url = flags.endpoint;
        if (config.endpoint_url.empty()) {
            if (const char* env = std::getenv("FACTEVAL_ENDPOINT")) config.endpoint_url = env;
        }
        if (config.endpoint_url.empty()) {
            throw UsageError("--backend http requires --endpoint or FACTEVAL_ENDPOINT");
        }
        if (const char* key = std::getenv("FACTEVAL_API_KEY")) config.api_key = key;
        backend = std::make_shared<HttpBackend>(std::move(config));
    } else {
        throw UsageError("unknown backend: " + flags.backend + " (expected mock|http)");
    }
    GatewayOptions options;
    options.cache_path = flags.cache_path;
    options.max_inflight = flags.max_inflight;
    return std::make_unique<LmGateway>(std::move(backend), options);
}

EstimatorConfig make_estimator_config(const EstimatorFlags& flags) {
    EstimatorConfig config;
    config.variant = parse_variant(flags.variant);
    config.k = flags.k;
    config.np_threshold = flags.np_threshold;
    config.self_check_min_samples = flags.min_samples;
    config.validate();
    return config;
}

void add_gateway_flags(CLI::App* cmd, GatewayFlags& flags) {
    cmd->add_option("--backend", flags.backend, "LM backend: mock|http")->capture_default_str();
    cmd->add_option("--mock-table", flags.mock_table, "prompt->response record file for the mock backend");
    cmd->add_option("--model", flags.model_id, "evaluator model id")->capture_default_str();
    cmd->add_option("--endpoint", flags.endpoint, "HTTP completion endpoint URL");
    cmd->add_option("--cache", flags.cache_path, "persistent prompt cache file");
    cmd->add_option("--max-inflight", flags.max_inflight, "concurrent request limit")
        ->capture_default_str();
    cmd->add_option("--threads", flags.threads, "worker threads for batch calls")
        ->capture_default_str();
}

void add_estimator_flags(CLI::App* cmd, EstimatorFlags& flags) {
    cmd->add_option("--variant", flags.variant,
                    "no_context|self_check|retrieve_lm|np|retrieve_lm_plus_np")
        ->capture_default_str();
    cmd->add_option("--k", flags.k, "retrieved passages per fact")->capture_default_str();
    cmd->add_option("--np-threshold", flags.np_threshold, "NP support threshold")
        ->capture_default_str();
    cmd->add_option("--min-samples", flags.min_samples, "minimum self-check samples per topic")
        ->capture_default_str();
}

// Flag-level requirements, checked before any file is opened so bad
// invocations surface as usage errors.
void validate_judge_flags(const EstimatorConfig& config, const std::string& index_path,
                          const GatewayFlags& gw_flags, const std::string& samples_path,
                          bool samples_allowed) {
    const bool needs_index = config.variant == EstimatorVariant::retrieve_lm ||
                             config.variant == EstimatorVariant::np ||
                             config.variant == EstimatorVariant::retrieve_lm_plus_np;
    if (needs_index && index_path.empty()) throw UsageError("this variant requires --index");
    if (config.variant == EstimatorVariant::self_check) {
        if (!samples_allowed) throw UsageError("self_check is not available here; judge facts first");
        if (samples_path.empty()) throw UsageError("self_check requires --samples");
    }
    if (config.variant != EstimatorVariant::np && gw_flags.backend == "mock" &&
        gw_flags.mock_table.empty()) {
        throw UsageError("--backend mock requires --mock-table (a prompt->response record file)");
    }
}

std::vector<VerdictRecord> run_judge(const std::vector<FactRecord>& facts,
                                     const EstimatorConfig& config, const std::string& index_path,
                                     const GatewayFlags& gw_flags,
                                     const std::string& samples_path) {
    const bool needs_index = config.variant == EstimatorVariant::retrieve_lm ||
                             config.variant == EstimatorVariant::np ||
                             config.variant == EstimatorVariant::retrieve_lm_plus_np;
    const bool needs_lm = config.variant != EstimatorVariant::np;
    std::optional<Index> index;
    if (needs_index) {
        if (index_path.empty()) throw UsageError("this variant requires --index");
        index = Index::load(index_path);
    }
    std::unique_ptr<LmGateway> gateway;
    if (needs_lm) gateway = make_gateway(gw_flags);
    std::unique_ptr<RetrievalFrequencyNpScorer> np_scorer;
    if (config.variant == EstimatorVariant::np ||
        config.variant == EstimatorVariant::retrieve_lm_plus_np) {
        np_scorer = std::make_unique<RetrievalFrequencyNpScorer>(*index, config.k);
    }
    std::vector<SampleRecord> samples;
    if (config.variant == EstimatorVariant::self_check) {
        if (samples_path.empty()) throw UsageError("self_check requires --samples");
        samples = load_samples(samples_path);
    }
    return judge_records(facts, config, index ? &*index : nullptr, gateway.get(),
                         gw_flags.model_id, np_scorer.get(), samples, gw_flags.threads);
}

void write_score_reports(const std::vector<ScoreReport>& reports, const std::string& out_path) {
    ordered_json j;
    ordered_json subjects = ordered_json::array();
    for (const ScoreReport& r : reports) subjects.push_back(score_report_to_json(r));
    j["subjects"] = std::move(subjects);
    atomic_write_text(out_path, j.dump(2) + "\n");
    std::cout << render_score_table(reports);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FActScore-style factual precision evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "shared pipeline config file (JSON)");

    // Pre-scan for --config so its values become flag defaults.
    FileConfig file_config;
    try {
        for (int i = 1; i < argc - 1; ++i) {
            if (std::string(argv[i]) == "--config") {
                file_config = load_config(argv[i + 1]);
                break;
            }
        }
    } catch (const UsageError& e) {
        return fail(kExitUsage, "usage", e.what());
    }

    GatewayFlags gw = file_config.gateway;
    EstimatorFlags est = file_config.estimator;

    // build-index
    auto* build_cmd = app.add_subcommand("build-index", "chunk a corpus and persist the BM25 index");
    std::string corpus_path = file_config.corpus.value_or("");
    std::string index_out;
    int max_tokens = DocumentStore::kDefaultMaxTokens;
    build_cmd->add_option("--corpus", corpus_path, "corpus record file (title/text per line)");
    build_cmd->add_option("--out", index_out, "index output path")->required();
    build_cmd->add_option("--max-tokens", max_tokens, "passage size limit in whitespace tokens")
        ->capture_default_str();

    // atomize
    auto* atomize_cmd = app.add_subcommand("atomize", "decompose generations into atomic facts");
    std::string generations_path, facts_out;
    std::string patterns_path = file_config.abstention_patterns.value_or("");
    atomize_cmd->add_option("--generations", generations_path, "generation record file")->required();
    atomize_cmd->add_option("--out", facts_out, "fact record output path")->required();
    atomize_cmd->add_option("--abstention-patterns", patterns_path,
                            "abstention pattern file (defaults to the built-in list)");
    add_gateway_flags(atomize_cmd, gw);

    // judge
    auto* judge_cmd = app.add_subcommand("judge", "judge facts against the knowledge source");
    std::string facts_path, verdicts_out, samples_path;
    std::string index_path = file_config.index.value_or("");
    judge_cmd->add_option("--facts", facts_path, "fact record file")->required();
    judge_cmd->add_option("--index", index_path, "index file from build-index");
    judge_cmd->add_option("--samples", samples_path, "subject-LM sample records for self_check");
    judge_cmd->add_option("--out", verdicts_out, "verdict record output path")->required();
    add_estimator_flags(judge_cmd, est);
    add_gateway_flags(judge_cmd, gw);

    // score
    auto* score_cmd = app.add_subcommand("score", "aggregate verdicts into FActScore reports");
    std::string score_generations, score_verdicts, score_gold, score_out;
    int position_buckets = 0;
    score_cmd->add_option("--generations", score_generations, "generation record file")->required();
    score_cmd->add_option("--verdicts", score_verdicts, "verdict record file")->required();
    score_cmd->add_option("--gold", score_gold, "gold label records (filters Irrelevant facts)");
    score_cmd->add_option("--out", score_out, "report output path (JSON)")->required();
    score_cmd->add_option("--position-buckets", position_buckets,
                          "relative-position bands (5 gives 20% bands)")
        ->capture_default_str();
    score_cmd->add_option("--abstention-patterns", patterns_path,
                          "abstention pattern file for records without an abstained flag");

    // eval-estimator
    auto* eval_cmd = app.add_subcommand("eval-estimator", "score an estimator against gold labels");
    std::string eval_gold, eval_predicted, eval_out, eval_compare;
    bool with_baselines = false;
    std::uint64_t seed = 0;
    eval_cmd->add_option("--gold", eval_gold, "gold label records")->required();
    eval_cmd->add_option("--predicted", eval_predicted, "predicted verdict records")->required();
    eval_cmd->add_option("--out", eval_out, "metric report output path (JSON)")->required();
    eval_cmd->add_flag("--baselines", with_baselines, "add Always-S/Always-NS/Random rows");
    eval_cmd->add_option("--seed", seed, "seed for the random baseline")->capture_default_str();
    eval_cmd->add_option("--compare", eval_compare,
                         "second verdict file; prints Pearson r between per-subject scores");

    // eval-edits
    auto* edits_cmd = app.add_subcommand("eval-edits", "editing-quality metrics over edit records");
    std::string edits_path, edits_out;
    edits_cmd->add_option("--records", edits_path, "edit record file")->required();
    edits_cmd->add_option("--out", edits_out, "metrics output path (JSON)")->required();

    // report
    auto* report_cmd = app.add_subcommand(
        "report", "one-shot judge+score over one or more subjects, or combine verdict files");
    std::string report_generations, report_facts, report_gold, report_out;
    std::vector<std::string> report_verdicts;
    int report_buckets = 0;
    report_cmd->add_option("--generations", report_generations, "generation record file")->required();
    report_cmd->add_option("--verdicts", report_verdicts,
                           "pre-judged verdict files (repeatable); skips judging");
    report_cmd->add_option("--facts", report_facts, "fact record file (judged in-process)");
    report_cmd->add_option("--index", index_path, "index file from build-index");
    report_cmd->add_option("--gold", report_gold, "gold label records");
    report_cmd->add_option("--out", report_out, "combined report output path (JSON)")->required();
    report_cmd->add_option("--position-buckets", report_buckets, "relative-position bands")
        ->capture_default_str();
    report_cmd->add_option("--abstention-patterns", patterns_path, "abstention pattern file");
    add_estimator_flags(report_cmd, est);
    add_gateway_flags(report_cmd, gw);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        auto detector = [&]() -> AbstentionDetector {
            return patterns_path.empty() ? AbstentionDetector::with_default_patterns()
                                         : AbstentionDetector::from_file(patterns_path);
        };

        if (*build_cmd) {
            if (corpus_path.empty()) throw UsageError("build-index requires --corpus");
            DocumentStore store = load_corpus(corpus_path, max_tokens);
            Index::build(store).save(index_out);
            std::cout << "indexed " << store.size() << " documents\n";
        } else if (*atomize_cmd) {
            AbstentionDetector det = detector();
            auto generations = load_generations_with_detection(generations_path, &det);
            auto gateway = make_gateway(gw);
            auto facts = atomize_generations(generations, *gateway, gw.model_id, gw.threads);
            save_facts(facts_out, facts);
            std::cout << "atomized " << generations.size() << " generations into " << facts.size()
                      << " facts\n";
        } else if (*judge_cmd) {
            EstimatorConfig config = make_estimator_config(est);
            validate_judge_flags(config, index_path, gw, samples_path, true);
            auto facts = load_facts(facts_path);
            auto verdicts = run_judge(facts, config, index_path, gw, samples_path);
            save_verdicts(verdicts_out, verdicts);
            std::cout << "judged " << verdicts.size() << " facts\n";
        } else if (*score_cmd) {
            AbstentionDetector det = detector();
            auto generations = load_generations_with_detection(score_generations, &det);
            auto verdicts = load_verdicts(score_verdicts);
            std::optional<std::vector<GoldRecord>> gold;
            if (!score_gold.empty()) gold = load_gold(score_gold);
            auto reports = score_subjects(generations, verdicts, gold ? &*gold : nullptr,
                                          position_buckets);
            write_score_reports(reports, score_out);
        } else if (*eval_cmd) {
            auto gold = load_gold(eval_gold);
            auto predicted = load_verdicts(eval_predicted);
            EstimatorEvaluation evaluation = evaluate_estimator(gold, predicted, with_baselines, seed);
            ordered_json j;
            ordered_json rows = ordered_json::array();
            for (const EstimatorRow& row : evaluation.rows) {
                ordered_json r = metric_report_to_json(row.report);
                r["evaluator"] = row.evaluator;
                rows.push_back(std::move(r));
            }
            j["rows"] = std::move(rows);
            if (evaluation.ranking_consistent.has_value()) {
                j["ranking_consistent"] = *evaluation.ranking_consistent;
            }
            if (!eval_compare.empty()) {
                EstimatorEvaluation other =
                    evaluate_estimator(gold, load_verdicts(eval_compare), false, seed);
                std::vector<double> fs_a, fs_b;
                for (const EstimatorRow& row : evaluation.rows) {
                    if (row.evaluator == "predicted") fs_a.push_back(row.report.fs_estimated);
                }
                for (const EstimatorRow& row : other.rows) {
                    if (row.evaluator == "predicted") fs_b.push_back(row.report.fs_estimated);
                }
                double r = correlation(fs_a, fs_b);
                j["pearson_r_vs_compare"] = r;
                std::cout << "pearson r between estimators: " << r << "\n";
            }
            atomic_write_text(eval_out, j.dump(2) + "\n");
            std::cout << render_estimator_table(evaluation);
        } else if (*edits_cmd) {
            auto records = load_edit_records(edits_path);
            TokenCosineSimilarity cosine;
            EditMetrics metrics = evaluate_edits(records, cosine);
            atomic_write_text(edits_out, edit_metrics_to_json(metrics).dump(2) + "\n");
            std::cout << "ErrLoc " << format_percent(metrics.err_loc) << "  EditCorr "
                      << (metrics.edit_corr ? format_percent(*metrics.edit_corr) : "n/a")
                      << "  SimAl " << format_percent(metrics.sim_al) << "  (" << metrics.records
                      << " records)\n";
        } else if (*report_cmd) {
            AbstentionDetector det = detector();
            auto generations = load_generations_with_detection(report_generations, &det);
            std::vector<VerdictRecord> verdicts;
            if (!report_verdicts.empty()) {
                if (!report_facts.empty()) {
                    throw UsageError("report takes either --verdicts or --facts, not both");
                }
                for (const std::string& path : report_verdicts) {
                    for (auto& v : load_verdicts(path)) verdicts.push_back(std::move(v));
                }
            } else {
                if (report_facts.empty()) {
                    throw UsageError("report requires --verdicts or --facts");
                }
                EstimatorConfig config = make_estimator_config(est);
                validate_judge_flags(config, index_path, gw, "", false);
                auto facts = load_facts(report_facts);
                verdicts = run_judge(facts, config, index_path, gw, "");
            }
            std::optional<std::vector<GoldRecord>> gold;
            if (!report_gold.empty()) gold = load_gold(report_gold);
            auto reports =
                score_subjects(generations, verdicts, gold ? &*gold : nullptr, report_buckets);
            write_score_reports(reports, report_out);
        }
    } catch (const UsageError& e) {
        return fail(kExitUsage, "usage", e.what());
    } catch (const GatewayError& e) {
        return fail(kExitGateway, "gateway", e.what());
    } catch (const DataError& e) {
        return fail(kExitData, "data", e.what());
    } catch (const std::exception& e) {
        return fail(kExitData, "data", e.what());
    }
    return kExitOk;
}
