#ifndef FACTEVAL_LM_HPP
#define FACTEVAL_LM_HPP

#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace facteval {

struct LmRequest {
    std::string model_id;
    std::string prompt;
    int max_output_tokens = 64;
    double temperature = 0.0;  // judging calls stay at 0
    std::optional<std::vector<std::string>> logprob_targets;
};

struct LmResponse {
    std::string text;
    std::optional<std::map<std::string, double>> target_logprobs;
    bool from_cache = false;
};

/// Stable content hash over (model_id, prompt, max_output_tokens,
/// temperature, logprob_targets). Identical requests map to identical keys
/// across runs and platforms; no prompt normalization of any kind.
std::string cache_key(const LmRequest& request);

/// Canonical netstring-style encoding hashed by cache_key; also stored in
/// digest form alongside each cache record.
std::string canonical_request(const LmRequest& request);

/// True/false judgment from a completion. Log-probabilities win whenever
/// present: logprob(True) > logprob(False). Otherwise the text is scanned
/// case-insensitively for standalone "true"/"false" tokens and the first
/// occurrence decides. Neither present resolves to false (Not-supported).
bool decide_true_false(const LmResponse& response);

class LmBackend {
public:
    virtual ~LmBackend() = default;
    /// One attempt against the backend; no caching or retries here.
    /// Throws GatewayError.
    virtual LmResponse complete_once(const LmRequest& request) = 0;
};

/// Scripted backend keyed by exact prompt; used by the whole test suite.
/// If a request carries logprob_targets and the scripted entry has
/// logprobs, every requested candidate must be present.
class MockBackend : public LmBackend {
public:
    struct Entry {
        std::string text;
        std::optional<std::map<std::string, double>> logprobs;
    };

    void script(std::string prompt, Entry entry);
    /// Loads a prompt->response table from a newline-delimited record file
    /// with fields `prompt`, `text` and optional `logprobs`.
    static MockBackend from_file(const std::string& path);

    LmResponse complete_once(const LmRequest& request) override;

private:
    std::map<std::string, Entry> table_;
};

struct HttpBackendConfig {
    std::string endpoint_url;  // e.g. http://host:port/v1/completions
    std::string api_key;       // sent as "Authorization: Bearer <key>" when set
    // Request body field names, so the same client speaks to differently
    // shaped completion endpoints.
    std::string model_field = "model";
    std::string prompt_field = "prompt";
    std::string max_tokens_field = "max_tokens";
    std::string temperature_field = "temperature";
    std::string logprob_targets_field = "logprob_targets";
    // Dotted paths into the response JSON ("choices.0.text").
    std::string response_text_path = "choices.0.text";
    std::string response_logprobs_path = "choices.0.target_logprobs";
    int timeout_seconds = 60;
};

/// Generic HTTP completion client. The transport is injectable so retry
/// and field-mapping logic is testable without sockets; the default
/// transport POSTs JSON via cpp-httplib.
class HttpBackend : public LmBackend {
public:
    struct HttpResult {
        int status = 0;
        std::string body;
        bool transport_ok = false;
        std::string error;
    };
    using Transport = std::function<HttpResult(const std::string& url,
                                               const std::string& body,
                                               const HttpBackendConfig& config)>;

    explicit HttpBackend(HttpBackendConfig config, Transport transport = {});

    LmResponse complete_once(const LmRequest& request) override;

    std::string build_request_body(const LmRequest& request) const;
    LmResponse parse_response_body(const std::string& body) const;

private:
    HttpBackendConfig config_;
    Transport transport_;
};

struct GatewayOptions {
    int max_attempts = 3;          // transport retries; malformed replies never retry
    int backoff_base_ms = 100;     // doubled per attempt
    int backoff_cap_ms = 2000;
    int max_inflight = 8;
    std::string cache_path;        // empty disables the persistent cache
};

/// Uniform access to a backend with a persistent prompt cache and capped
/// exponential backoff on transport failures. Concurrent requests are
/// admitted up to max_inflight; cache writes are serialized through a
/// single writer and lookups never block on the backend.
class LmGateway {
public:
    LmGateway(std::shared_ptr<LmBackend> backend, GatewayOptions options = {});

    /// Cache hit returns the stored response byte-identically with
    /// from_cache=true; otherwise calls the backend (with retries) and
    /// appends the result to the cache.
    LmResponse complete(const LmRequest& request);

    const GatewayOptions& options() const { return options_; }

private:
    LmResponse call_with_retries(const LmRequest& request);
    void acquire_slot();
    void release_slot();

    std::shared_ptr<LmBackend> backend_;
    GatewayOptions options_;

    std::shared_mutex cache_mutex_;
    std::map<std::string, LmResponse> cache_;  // key -> response (digest-checked)
    std::map<std::string, std::string> digests_;

    std::mutex writer_mutex_;
    std::mutex slots_mutex_;
    std::condition_variable slots_cv_;
    int inflight_ = 0;

public:
    /// Injectable sleeper so tests can run retries without real delays.
    std::function<void(int /*ms*/)> sleeper;
};

}  // namespace facteval

#endif
