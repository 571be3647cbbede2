#include <doctest.h>

#include <cstdlib>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "symscene/errors.hpp"
#include "symscene/llm_client.hpp"
#include "symscene/prompt.hpp"

using namespace symscene;

namespace {

// Local chat-completions stand-in on an ephemeral port.
class StubServer {
public:
    explicit StubServer(httplib::Server::Handler handler) {
        server_.Post("/v1/chat/completions", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }
    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

std::string reply_with(const std::string& content) {
    nlohmann::json j;
    j["choices"] = nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}});
    return j.dump();
}

void echo(const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    res.set_content(reply_with(body["messages"][0]["content"].get<std::string>()), "application/json");
}

PromptBundle sample_prompt() { return build_prompt(SceneGraph{}, "what is here?"); }

LlmEndpoint endpoint_for(const StubServer& s) {
    LlmEndpoint ep;
    ep.base_url = s.base_url();
    ep.api_key = "sk-test-123";
    ep.model = "stub-model";
    ep.timeout = std::chrono::milliseconds(5000);
    return ep;
}

}  // namespace

TEST_CASE("request body shape") {
    const auto body = chat_request_body(sample_prompt(), "gpt-4o");
    CHECK(body.dump() == nlohmann::ordered_json::parse(R"({"model":"gpt-4o","messages":[{"role":"user","content":)" +
                                                       nlohmann::json(sample_prompt().rendered).dump() + "}]}")
                             .dump());
}

TEST_CASE("echo stub returns the prompt text") {
    StubServer stub(echo);
    const PromptBundle p = sample_prompt();
    CHECK(relay_to_llm(p, endpoint_for(stub)) == p.rendered);
}

TEST_CASE("stub sees model, messages, content type and bearer key") {
    std::string auth, content_type;
    nlohmann::json seen;
    StubServer stub([&](const httplib::Request& req, httplib::Response& res) {
        auth = req.get_header_value("Authorization");
        content_type = req.get_header_value("Content-Type");
        seen = nlohmann::json::parse(req.body);
        res.set_content(reply_with("ok"), "application/json");
    });
    std::ostringstream log;
    CHECK(relay_to_llm(sample_prompt(), endpoint_for(stub), &log) == "ok");
    CHECK(auth == "Bearer sk-test-123");
    CHECK(content_type == "application/json");
    REQUIRE(seen.is_object());
    CHECK(seen.size() == 2);
    CHECK(seen["model"] == "stub-model");
    REQUIRE(seen["messages"].size() == 1);
    CHECK(seen["messages"][0]["role"] == "user");
    CHECK(seen["messages"][0]["content"] == sample_prompt().rendered);
    CHECK(log.str().find("sk-test-123") == std::string::npos);
    CHECK(log.str().find("<redacted>") != std::string::npos);
}

TEST_CASE("HTTP 500 becomes a transport error carrying the status") {
    StubServer stub([](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
        res.set_content(std::string(2000, 'x'), "text/plain");
    });
    try {
        relay_to_llm(sample_prompt(), endpoint_for(stub));
        FAIL("expected a transport error");
    } catch (const TransportError& e) {
        CHECK(e.status() == 500);
        CHECK(e.body().size() == 512);
    }
}

TEST_CASE("malformed replies are transport errors") {
    StubServer stub([](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"choices": []})", "application/json");
    });
    CHECK_THROWS_AS(relay_to_llm(sample_prompt(), endpoint_for(stub)), TransportError);
}

TEST_CASE("missing key and bad URL fail before any network use") {
    LlmEndpoint ep;
    ep.api_key.clear();
    CHECK_THROWS_AS(relay_to_llm(sample_prompt(), ep), ConfigError);
    ep.api_key = "k";
    ep.base_url = "ftp://example.com";
    CHECK_THROWS_AS(relay_to_llm(sample_prompt(), ep), ConfigError);
    ep.base_url = "localhost:8080";
    CHECK_THROWS_AS(relay_to_llm(sample_prompt(), ep), ConfigError);
}

TEST_CASE("unreachable endpoint is a transport error") {
    LlmEndpoint ep;
    ep.api_key = "k";
    ep.base_url = "http://127.0.0.1:1/v1";
    ep.timeout = std::chrono::milliseconds(500);
    CHECK_THROWS_AS(relay_to_llm(sample_prompt(), ep), TransportError);
}

TEST_CASE("defaults") {
    const LlmEndpoint ep;
    CHECK(ep.base_url == "https://api.openai.com/v1");
    CHECK(ep.model == "gpt-4o");
    CHECK(ep.timeout == std::chrono::seconds(30));
}
