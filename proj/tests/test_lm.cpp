#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include "facteval/errors.hpp"
#include "facteval/lm.hpp"
#include "test_util.hpp"

using namespace facteval;

namespace {

LmRequest make_request(const std::string& prompt) {
    LmRequest req;
    req.model_id = "test-model";
    req.prompt = prompt;
    req.max_output_tokens = 16;
    req.temperature = 0.0;
    return req;
}

// Backend that fails with transport errors a fixed number of times.
class FlakyBackend : public LmBackend {
public:
    FlakyBackend(int failures, LmResponse ok) : failures_(failures), ok_(std::move(ok)) {}
    LmResponse complete_once(const LmRequest&) override {
        ++calls;
        if (calls <= failures_) {
            throw GatewayError(GatewayError::Kind::transport, "connection refused");
        }
        return ok_;
    }
    int calls = 0;

private:
    int failures_;
    LmResponse ok_;
};

class MalformedBackend : public LmBackend {
public:
    LmResponse complete_once(const LmRequest&) override {
        ++calls;
        throw GatewayError(GatewayError::Kind::malformed_reply, "garbage");
    }
    int calls = 0;
};

}  // namespace

TEST_CASE("cache_key is stable and content-sensitive") {
    LmRequest a = make_request("Hello");
    LmRequest b = make_request("Hello");
    CHECK(cache_key(a) == cache_key(b));

    SUBCASE("temperature changes the key") {
        b.temperature = 0.5;
        CHECK(cache_key(a) != cache_key(b));
    }
    SUBCASE("prompt whitespace changes the key") {
        b.prompt = "Hello ";
        CHECK(cache_key(a) != cache_key(b));
    }
    SUBCASE("logprob targets change the key") {
        b.logprob_targets = std::vector<std::string>{"True", "False"};
        CHECK(cache_key(a) != cache_key(b));
    }
    SUBCASE("model id changes the key") {
        b.model_id = "other";
        CHECK(cache_key(a) != cache_key(b));
    }
}

TEST_CASE("decide_true_false") {
    LmResponse r;

    SUBCASE("logprobs comparison") {
        r.target_logprobs = std::map<std::string, double>{{"True", -0.1}, {"False", -2.3}};
        CHECK(decide_true_false(r));
        r.target_logprobs = std::map<std::string, double>{{"True", -3.0}, {"False", -0.2}};
        CHECK_FALSE(decide_true_false(r));
    }
    SUBCASE("text scan, first standalone token wins") {
        r.text = "False. The fact is wrong.";
        CHECK_FALSE(decide_true_false(r));
        r.text = "The answer is True, not False.";
        CHECK(decide_true_false(r));
        r.text = "TRUE";
        CHECK(decide_true_false(r));
    }
    SUBCASE("neither token resolves to false") {
        r.text = "I cannot judge this.";
        CHECK_FALSE(decide_true_false(r));
        r.text = "untrue";  // not standalone
        CHECK_FALSE(decide_true_false(r));
    }
    SUBCASE("logprobs win over contradictory text") {
        r.text = "False";
        r.target_logprobs = std::map<std::string, double>{{"True", -0.1}, {"False", -2.3}};
        CHECK(decide_true_false(r));
    }
}

TEST_CASE("mock backend: scripted responses and logprob pass-through") {
    MockBackend mock;
    mock.script("Q1", {"True", std::nullopt});
    mock.script("Q2", {"irrelevant", std::map<std::string, double>{{"True", -0.1}, {"False", -2.3}}});

    CHECK(mock.complete_once(make_request("Q1")).text == "True");
    LmRequest with_targets = make_request("Q2");
    with_targets.logprob_targets = std::vector<std::string>{"True", "False"};
    LmResponse resp = mock.complete_once(with_targets);
    REQUIRE(resp.target_logprobs.has_value());
    CHECK(resp.target_logprobs->at("True") == -0.1);
    CHECK(resp.target_logprobs->at("False") == -2.3);

    CHECK_THROWS_AS(mock.complete_once(make_request("unscripted")), GatewayError);
}

TEST_CASE("mock backend loads a table from a record file") {
    std::string path = testutil::temp_path("mock.jsonl");
    testutil::write_file(path,
                         "{\"prompt\": \"P1\", \"text\": \"True\"}\n"
                         "{\"prompt\": \"P2\", \"text\": \"x\", \"logprobs\": {\"True\": -1.0, \"False\": -0.5}}\n");
    MockBackend mock = MockBackend::from_file(path);
    CHECK(mock.complete_once(make_request("P1")).text == "True");
    CHECK(decide_true_false(mock.complete_once(make_request("P2"))) == false);
}

TEST_CASE("gateway: cache identity and persistence") {
    std::string cache = testutil::temp_path("cache.jsonl");
    std::filesystem::remove(cache);
    auto mock = std::make_shared<MockBackend>();
    mock->script("Q", {"True", std::nullopt});
    GatewayOptions opts;
    opts.cache_path = cache;
    {
        LmGateway gateway(mock, opts);
        LmResponse first = gateway.complete(make_request("Q"));
        CHECK_FALSE(first.from_cache);
        LmResponse second = gateway.complete(make_request("Q"));
        CHECK(second.from_cache);
        CHECK(second.text == first.text);
    }
    // A fresh gateway over the same cache file serves the hit without the
    // backend.
    auto empty_backend = std::make_shared<MockBackend>();
    LmGateway gateway2(empty_backend, opts);
    LmResponse hit = gateway2.complete(make_request("Q"));
    CHECK(hit.from_cache);
    CHECK(hit.text == "True");
}

TEST_CASE("gateway: corrupt trailing cache record is truncated on open") {
    std::string cache = testutil::temp_path("cache_corrupt.jsonl");
    std::filesystem::remove(cache);
    auto mock = std::make_shared<MockBackend>();
    mock->script("Q", {"True", std::nullopt});
    GatewayOptions opts;
    opts.cache_path = cache;
    {
        LmGateway gateway(mock, opts);
        gateway.complete(make_request("Q"));
    }
    // Simulate a torn append.
    std::string content = testutil::read_file(cache);
    testutil::write_file(cache, content + "{\"key\": \"zz\", \"dig");
    LmGateway gateway2(std::make_shared<MockBackend>(), opts);
    CHECK(gateway2.complete(make_request("Q")).from_cache);
    CHECK(testutil::read_file(cache) == content);

    SUBCASE("mid-file corruption is an error, not silently dropped") {
        testutil::write_file(cache, "{broken\n" + content);
        CHECK_THROWS_AS(LmGateway(std::make_shared<MockBackend>(), opts), DataError);
    }
}

TEST_CASE("gateway retry policy") {
    GatewayOptions opts;
    opts.max_attempts = 3;
    opts.backoff_base_ms = 50;
    opts.backoff_cap_ms = 60;

    SUBCASE("transport failures retry up to max_attempts then surface") {
        auto flaky = std::make_shared<FlakyBackend>(2, LmResponse{"True", std::nullopt, false});
        LmGateway gateway(flaky, opts);
        std::vector<int> sleeps;
        gateway.sleeper = [&](int ms) { sleeps.push_back(ms); };
        CHECK(gateway.complete(make_request("Q")).text == "True");
        CHECK(flaky->calls == 3);
        REQUIRE(sleeps.size() == 2);
        CHECK(sleeps[0] == 50);
        CHECK(sleeps[1] == 60);  // capped exponential
    }
    SUBCASE("persistent transport failure surfaces after the attempt cap") {
        auto flaky = std::make_shared<FlakyBackend>(10, LmResponse{});
        LmGateway gateway(flaky, opts);
        gateway.sleeper = [](int) {};
        CHECK_THROWS_AS(gateway.complete(make_request("Q")), GatewayError);
        CHECK(flaky->calls == 3);
    }
    SUBCASE("malformed replies never retry") {
        auto bad = std::make_shared<MalformedBackend>();
        LmGateway gateway(bad, opts);
        gateway.sleeper = [](int) {};
        CHECK_THROWS_AS(gateway.complete(make_request("Q")), GatewayError);
        CHECK(bad->calls == 1);
    }
}

TEST_CASE("http backend: request body mapping and response parsing") {
    HttpBackendConfig config;
    config.endpoint_url = "http://example.invalid/v1/completions";

    SUBCASE("parses the default completion shape") {
        std::string served = "{\"choices\": [{\"text\": \"True\"}]}";
        HttpBackend backend(config, [&](const std::string&, const std::string& body,
                                        const HttpBackendConfig&) {
            CHECK(body.find("\"prompt\":\"Q\"") != std::string::npos);
            CHECK(body.find("\"model\":\"test-model\"") != std::string::npos);
            return HttpBackend::HttpResult{200, served, true, ""};
        });
        CHECK(backend.complete_once(make_request("Q")).text == "True");
    }
    SUBCASE("custom field mapping") {
        config.prompt_field = "input";
        config.response_text_path = "output.completion";
        HttpBackend backend(config, [](const std::string&, const std::string& body,
                                       const HttpBackendConfig&) {
            CHECK(body.find("\"input\":\"Q\"") != std::string::npos);
            return HttpBackend::HttpResult{200, "{\"output\": {\"completion\": \"False\"}}", true, ""};
        });
        CHECK(backend.complete_once(make_request("Q")).text == "False");
    }
    SUBCASE("non-JSON reply is malformed, not retried") {
        HttpBackend backend(config, [](const std::string&, const std::string&,
                                       const HttpBackendConfig&) {
            return HttpBackend::HttpResult{200, "<html>oops</html>", true, ""};
        });
        CHECK_THROWS_AS(backend.complete_once(make_request("Q")), GatewayError);
        try {
            backend.complete_once(make_request("Q"));
        } catch (const GatewayError& e) {
            CHECK(e.kind == GatewayError::Kind::malformed_reply);
        }
    }
    SUBCASE("5xx maps to a retryable transport error") {
        HttpBackend backend(config, [](const std::string&, const std::string&,
                                       const HttpBackendConfig&) {
            return HttpBackend::HttpResult{503, "", true, ""};
        });
        try {
            backend.complete_once(make_request("Q"));
            FAIL("expected GatewayError");
        } catch (const GatewayError& e) {
            CHECK(e.kind == GatewayError::Kind::transport);
        }
    }
    SUBCASE("logprob targets round through the body and reply") {
        HttpBackend backend(config, [](const std::string&, const std::string& body,
                                       const HttpBackendConfig&) {
            CHECK(body.find("\"logprob_targets\":[\"True\",\"False\"]") != std::string::npos);
            return HttpBackend::HttpResult{
                200,
                "{\"choices\": [{\"text\": \"x\", \"target_logprobs\": {\"True\": -0.2, \"False\": -1.0}}]}",
                true, ""};
        });
        LmRequest req = make_request("Q");
        req.logprob_targets = std::vector<std::string>{"True", "False"};
        LmResponse resp = backend.complete_once(req);
        REQUIRE(resp.target_logprobs.has_value());
        CHECK(resp.target_logprobs->at("True") == -0.2);
    }
}

TEST_CASE("gateway serves concurrent requests within the in-flight limit") {
    auto mock = std::make_shared<MockBackend>();
    for (int i = 0; i < 32; ++i) {
        mock->script("Q" + std::to_string(i), {"True", std::nullopt});
    }
    GatewayOptions opts;
    opts.max_inflight = 4;
    LmGateway gateway(mock, opts);
    std::vector<std::thread> workers;
    std::atomic<int> ok{0};
    for (int t = 0; t < 8; ++t) {
        workers.emplace_back([&, t] {
            for (int i = t; i < 32; i += 8) {
                if (gateway.complete(make_request("Q" + std::to_string(i))).text == "True") {
                    ++ok;
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    CHECK(ok == 32);
}

TEST_CASE("cache soundness: stored responses come back byte-identical") {
    std::string cache = testutil::temp_path("cache_soundness.jsonl");
    std::filesystem::remove(cache);
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> len(1, 40);
    std::uniform_real_distribution<double> lp(-8.0, 0.0);
    auto mock = std::make_shared<MockBackend>();
    std::vector<LmRequest> requests;
    std::vector<LmResponse> originals;
    for (int i = 0; i < 25; ++i) {
        std::string prompt = "prompt " + std::to_string(i) + " " + testutil::make_sentence(rng, len(rng));
        MockBackend::Entry entry;
        entry.text = "completion " + std::to_string(i) + " \"quoted\" \n second line";
        if (i % 2 == 0) {
            entry.logprobs = std::map<std::string, double>{{"True", lp(rng)}, {"False", lp(rng)}};
        }
        mock->script(prompt, entry);
        LmRequest req = make_request(prompt);
        if (i % 2 == 0) req.logprob_targets = std::vector<std::string>{"True", "False"};
        requests.push_back(req);
    }
    GatewayOptions opts;
    opts.cache_path = cache;
    {
        LmGateway gateway(mock, opts);
        for (const auto& req : requests) originals.push_back(gateway.complete(req));
    }
    LmGateway reloaded(std::make_shared<MockBackend>(), opts);
    for (std::size_t i = 0; i < requests.size(); ++i) {
        LmResponse hit = reloaded.complete(requests[i]);
        CHECK(hit.from_cache);
        CHECK(hit.text == originals[i].text);
        CHECK(hit.target_logprobs == originals[i].target_logprobs);
    }
}
