#ifndef FACTEVAL_ERRORS_HPP
#define FACTEVAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace facteval {

// Malformed input records, duplicate keys, misaligned fact lists.
// CLI maps this to exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Distinct not-found signal: the requested title has no page in the store.
// Callers that score batches treat the topic's facts as unverifiable
// instead of aborting.
struct TitleNotFound : DataError {
    explicit TitleNotFound(const std::string& title)
        : DataError("title not found: " + title), title(title) {}
    std::string title;
};

// Bad invocation: missing flags, invalid config. CLI maps this to exit 1.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// LM backend failures. `transport` errors are retried with capped backoff;
// `malformed_reply` errors are never retried. CLI maps this to exit 3.
struct GatewayError : std::runtime_error {
    enum class Kind { transport, malformed_reply };
    GatewayError(Kind kind, const std::string& msg)
        : std::runtime_error(msg), kind(kind) {}
    Kind kind;
};

}  // namespace facteval

#endif
