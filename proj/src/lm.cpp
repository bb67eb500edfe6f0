#include "facteval/lm.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "facteval/detail/sha256.hpp"
#include "facteval/errors.hpp"
#include "facteval/text.hpp"

namespace facteval {

namespace {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string netstring(const std::string& s) {
    return std::to_string(s.size()) + ":" + s + ",";
}

}  // namespace

std::string canonical_request(const LmRequest& request) {
    std::string out = "lmreq1|";
    out += netstring(request.model_id);
    out += netstring(request.prompt);
    out += netstring(std::to_string(request.max_output_tokens));
    out += netstring(format_double(request.temperature));
    if (request.logprob_targets) {
        out += "T" + std::to_string(request.logprob_targets->size());
        for (const auto& t : *request.logprob_targets) out += netstring(t);
    } else {
        out += "N";
    }
    return out;
}

std::string cache_key(const LmRequest& request) {
    return detail::sha256_hex(canonical_request(request)).substr(0, 32);
}

bool decide_true_false(const LmResponse& response) {
    if (response.target_logprobs) {
        const auto& lp = *response.target_logprobs;
        auto t = lp.find("True");
        auto f = lp.find("False");
        if (t != lp.end() || f != lp.end()) {
            constexpr double neg_inf = -std::numeric_limits<double>::infinity();
            double lp_true = t != lp.end() ? t->second : neg_inf;
            double lp_false = f != lp.end() ? f->second : neg_inf;
            return lp_true > lp_false;
        }
    }
    for (const std::string& token : text::match_tokens(response.text)) {
        if (token == "true") return true;
        if (token == "false") return false;
    }
    return false;  // neither token: resolve against support
}

// ---------------------------------------------------------------------------
// MockBackend

void MockBackend::script(std::string prompt, Entry entry) {
    table_[std::move(prompt)] = std::move(entry);
}

MockBackend MockBackend::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open mock table: " + path);
    MockBackend backend;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": malformed mock record: " + e.what());
        }
        if (!rec.contains("prompt") || !rec.contains("text")) {
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": mock record needs 'prompt' and 'text'");
        }
        Entry entry;
        entry.text = rec["text"].get<std::string>();
        if (rec.contains("logprobs") && rec["logprobs"].is_object()) {
            std::map<std::string, double> lp;
            for (auto it = rec["logprobs"].begin(); it != rec["logprobs"].end(); ++it) {
                lp[it.key()] = it.value().get<double>();
            }
            entry.logprobs = std::move(lp);
        }
        backend.script(rec["prompt"].get<std::string>(), std::move(entry));
    }
    return backend;
}

LmResponse MockBackend::complete_once(const LmRequest& request) {
    auto it = table_.find(request.prompt);
    if (it == table_.end()) {
        std::string head = request.prompt.substr(0, 120);
        throw GatewayError(GatewayError::Kind::malformed_reply,
                           "mock backend has no entry for prompt starting: " + head);
    }
    LmResponse resp;
    resp.text = it->second.text;
    if (it->second.logprobs) {
        if (request.logprob_targets) {
            for (const auto& target : *request.logprob_targets) {
                if (it->second.logprobs->count(target) == 0) {
                    throw GatewayError(GatewayError::Kind::malformed_reply,
                                       "mock entry missing logprob target: " + target);
                }
            }
        }
        resp.target_logprobs = it->second.logprobs;
    }
    return resp;
}

// ---------------------------------------------------------------------------
// HttpBackend

namespace {

HttpBackend::HttpResult default_transport(const std::string& url, const std::string& body,
                                          const HttpBackendConfig& config) {
    HttpBackend::HttpResult result;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        result.error = "endpoint URL missing scheme: " + url;
        return result;
    }
    auto path_start = url.find('/', scheme_end + 3);
    std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    httplib::Client client(base);
    client.set_connection_timeout(config.timeout_seconds, 0);
    client.set_read_timeout(config.timeout_seconds, 0);
    httplib::Headers headers;
    if (!config.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config.api_key);
    }
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
        result.error = "transport failure: " + httplib::to_string(res.error());
        return result;
    }
    result.transport_ok = true;
    result.status = res->status;
    result.body = res->body;
    return result;
}

const nlohmann::json* navigate_path(const nlohmann::json& root, const std::string& dotted) {
    const nlohmann::json* node = &root;
    std::size_t pos = 0;
    while (pos <= dotted.size()) {
        std::size_t dot = dotted.find('.', pos);
        std::string part = dotted.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (node->is_array()) {
            std::size_t idx = 0;
            auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), idx);
            if (ec != std::errc() || p != part.data() + part.size() || idx >= node->size()) {
                return nullptr;
            }
            node = &(*node)[idx];
        } else if (node->is_object()) {
            auto it = node->find(part);
            if (it == node->end()) return nullptr;
            node = &*it;
        } else {
            return nullptr;
        }
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    return node;
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config, Transport transport)
    : config_(std::move(config)),
      transport_(transport ? std::move(transport) : Transport(default_transport)) {}

std::string HttpBackend::build_request_body(const LmRequest& request) const {
    nlohmann::ordered_json body;
    body[config_.model_field] = request.model_id;
    body[config_.prompt_field] = request.prompt;
    body[config_.max_tokens_field] = request.max_output_tokens;
    body[config_.temperature_field] = request.temperature;
    if (request.logprob_targets) {
        body[config_.logprob_targets_field] = *request.logprob_targets;
    }
    return body.dump();
}

LmResponse HttpBackend::parse_response_body(const std::string& body) const {
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw GatewayError(GatewayError::Kind::malformed_reply,
                           std::string("backend reply is not JSON: ") + e.what());
    }
    const nlohmann::json* text_node = navigate_path(parsed, config_.response_text_path);
    if (text_node == nullptr || !text_node->is_string()) {
        throw GatewayError(GatewayError::Kind::malformed_reply,
                           "backend reply missing text at path " + config_.response_text_path);
    }
    LmResponse resp;
    resp.text = text_node->get<std::string>();
    const nlohmann::json* lp_node = navigate_path(parsed, config_.response_logprobs_path);
    if (lp_node != nullptr && lp_node->is_object()) {
        std::map<std::string, double> lp;
        for (auto it = lp_node->begin(); it != lp_node->end(); ++it) {
            if (it.value().is_number()) lp[it.key()] = it.value().get<double>();
        }
        if (!lp.empty()) resp.target_logprobs = std::move(lp);
    }
    return resp;
}

LmResponse HttpBackend::complete_once(const LmRequest& request) {
    HttpResult result = transport_(config_.endpoint_url, build_request_body(request), config_);
    if (!result.transport_ok) {
        throw GatewayError(GatewayError::Kind::transport, result.error);
    }
    if (result.status == 429 || result.status >= 500) {
        throw GatewayError(GatewayError::Kind::transport,
                           "backend returned status " + std::to_string(result.status));
    }
    if (result.status != 200) {
        throw GatewayError(GatewayError::Kind::malformed_reply,
                           "backend returned status " + std::to_string(result.status) +
                               ": " + result.body.substr(0, 200));
    }
    LmResponse resp = parse_response_body(result.body);
    if (request.logprob_targets && resp.target_logprobs) {
        for (const auto& target : *request.logprob_targets) {
            if (resp.target_logprobs->count(target) == 0) {
                throw GatewayError(GatewayError::Kind::malformed_reply,
                                   "backend reply missing logprob target: " + target);
            }
        }
    }
    return resp;
}

// ---------------------------------------------------------------------------
// LmGateway

namespace {

nlohmann::ordered_json response_to_json(const LmResponse& resp) {
    nlohmann::ordered_json j;
    j["text"] = resp.text;
    if (resp.target_logprobs) {
        nlohmann::ordered_json lp = nlohmann::ordered_json::object();
        for (const auto& [k, v] : *resp.target_logprobs) lp[k] = v;
        j["logprobs"] = std::move(lp);
    }
    return j;
}

LmResponse response_from_json(const nlohmann::json& j) {
    LmResponse resp;
    resp.text = j.at("text").get<std::string>();
    if (j.contains("logprobs") && j["logprobs"].is_object()) {
        std::map<std::string, double> lp;
        for (auto it = j["logprobs"].begin(); it != j["logprobs"].end(); ++it) {
            lp[it.key()] = it.value().get<double>();
        }
        resp.target_logprobs = std::move(lp);
    }
    return resp;
}

}  // namespace

LmGateway::LmGateway(std::shared_ptr<LmBackend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(std::move(options)) {
    sleeper = [](int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
    if (options_.cache_path.empty()) return;
    std::ifstream in(options_.cache_path, std::ios::binary);
    if (!in) return;  // cache created on first write
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    std::size_t good_end = 0;
    while (pos < content.size()) {
        std::size_t nl = content.find('\n', pos);
        std::size_t line_end = nl == std::string::npos ? content.size() : nl + 1;
        std::string_view line(content.data() + pos, (nl == std::string::npos ? content.size() : nl) - pos);
        if (line.empty()) {
            good_end = line_end;
            pos = line_end;
            continue;
        }
        try {
            nlohmann::json rec = nlohmann::json::parse(line);
            std::string key = rec.at("key").get<std::string>();
            std::string digest = rec.at("digest").get<std::string>();
            cache_[key] = response_from_json(rec.at("response"));
            digests_[key] = digest;
        } catch (const nlohmann::json::exception&) {
            // Only a torn trailing record is recoverable: drop it. Damage
            // followed by further records means the file is not trustworthy.
            bool more_after = content.find_first_not_of(" \t\r\n", line_end) != std::string::npos;
            if (more_after) {
                throw DataError("cache file corrupt before end: " + options_.cache_path);
            }
            std::error_code ec;
            std::filesystem::resize_file(options_.cache_path, good_end, ec);
            if (ec) {
                throw DataError("cannot truncate corrupt cache tail: " + options_.cache_path);
            }
            return;
        }
        good_end = line_end;
        pos = line_end;
    }
}

LmResponse LmGateway::complete(const LmRequest& request) {
    if (request.prompt.empty()) throw DataError("LmRequest.prompt is empty");
    const std::string key = cache_key(request);
    const std::string digest = detail::sha256_hex(canonical_request(request));
    {
        std::shared_lock lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end() && digests_.at(key) == digest) {
            LmResponse hit = it->second;
            hit.from_cache = true;
            return hit;
        }
    }
    acquire_slot();
    LmResponse resp;
    try {
        resp = call_with_retries(request);
    } catch (...) {
        release_slot();
        throw;
    }
    release_slot();
    resp.from_cache = false;
    {
        std::lock_guard writer(writer_mutex_);
        {
            std::unique_lock lock(cache_mutex_);
            if (cache_.count(key) > 0) return resp;  // raced with another writer
            cache_[key] = resp;
            digests_[key] = digest;
        }
        if (!options_.cache_path.empty()) {
            nlohmann::ordered_json rec;
            rec["key"] = key;
            rec["digest"] = digest;
            rec["response"] = response_to_json(resp);
            std::ofstream out(options_.cache_path, std::ios::app | std::ios::binary);
            out << rec.dump() << "\n";
        }
    }
    return resp;
}

LmResponse LmGateway::call_with_retries(const LmRequest& request) {
    int attempts = std::max(1, options_.max_attempts);
    int backoff = options_.backoff_base_ms;
    for (int attempt = 1;; ++attempt) {
        try {
            return backend_->complete_once(request);
        } catch (const GatewayError& e) {
            if (e.kind == GatewayError::Kind::malformed_reply || attempt >= attempts) {
                throw;
            }
        }
        sleeper(backoff);
        backoff = std::min(backoff * 2, options_.backoff_cap_ms);
    }
}

void LmGateway::acquire_slot() {
    std::unique_lock lock(slots_mutex_);
    slots_cv_.wait(lock, [&] { return inflight_ < std::max(1, options_.max_inflight); });
    ++inflight_;
}

void LmGateway::release_slot() {
    {
        std::lock_guard lock(slots_mutex_);
        --inflight_;
    }
    slots_cv_.notify_one();
}

}  // namespace facteval
