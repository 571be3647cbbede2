#include "symscene/llm_client.hpp"

#include <cstdlib>
#include <ostream>

#include <httplib.h>

#include "symscene/errors.hpp"

namespace symscene {

namespace {

constexpr std::size_t kBodyPreview = 512;

std::string truncated(const std::string& s) { return s.size() <= kBodyPreview ? s : s.substr(0, kBodyPreview); }

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // without trailing slash
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("LLM base URL \"" + url + "\" has no scheme", "LLM_BASE_URL");
    }
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw ConfigError("LLM base URL scheme must be http or https", "LLM_BASE_URL");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    SplitUrl out;
    out.origin = url.substr(0, path_start);
    out.path = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
    if (out.origin.size() <= scheme_end + 3) {
        throw ConfigError("LLM base URL \"" + url + "\" has no host", "LLM_BASE_URL");
    }
    return out;
}

}  // namespace

LlmEndpoint LlmEndpoint::from_env() {
    LlmEndpoint ep;
    if (const char* v = std::getenv("LLM_API_KEY")) ep.api_key = v;
    if (const char* v = std::getenv("LLM_BASE_URL"); v && *v) ep.base_url = v;
    if (const char* v = std::getenv("LLM_MODEL"); v && *v) ep.model = v;
    return ep;
}

nlohmann::ordered_json chat_request_body(const PromptBundle& bundle, const std::string& model) {
    nlohmann::ordered_json message;
    message["role"] = "user";
    message["content"] = bundle.rendered;
    nlohmann::ordered_json body;
    body["model"] = model;
    body["messages"] = nlohmann::ordered_json::array({message});
    return body;
}

std::string relay_to_llm(const PromptBundle& bundle, const LlmEndpoint& endpoint, std::ostream* log) {
    if (endpoint.api_key.empty()) {
        throw ConfigError("LLM_API_KEY is not set", "LLM_API_KEY");
    }
    const SplitUrl url = split_url(endpoint.base_url);
    const std::string path = url.path + "/chat/completions";
    const std::string body = chat_request_body(bundle, endpoint.model).dump();

    if (log) {
        *log << "llm request: POST " << url.origin << path << "\n"
             << "llm request: Authorization: Bearer <redacted>\n"
             << "llm request body: " << body << "\n";
    }

    httplib::Client client(url.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers{{"Authorization", "Bearer " + endpoint.api_key}};
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
        throw TransportError("request to " + url.origin + path + " failed: " + httplib::to_string(res.error()), 0,
                             "");
    }
    if (log) {
        *log << "llm response: HTTP " << res->status << "\n"
             << "llm response body: " << truncated(res->body) << "\n";
    }
    if (res->status < 200 || res->status >= 300) {
        throw TransportError("LLM endpoint returned HTTP " + std::to_string(res->status), res->status,
                             truncated(res->body));
    }

    nlohmann::json reply;
    try {
        reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
        throw TransportError("LLM response is not JSON", res->status, truncated(res->body));
    }
    const auto* content = [&]() -> const nlohmann::json* {
        if (!reply.is_object()) return nullptr;
        auto choices = reply.find("choices");
        if (choices == reply.end() || !choices->is_array() || choices->empty()) return nullptr;
        const auto& first = (*choices)[0];
        if (!first.is_object()) return nullptr;
        auto msg = first.find("message");
        if (msg == first.end() || !msg->is_object()) return nullptr;
        auto c = msg->find("content");
        if (c == msg->end() || !c->is_string()) return nullptr;
        return &*c;
    }();
    if (!content) {
        throw TransportError("LLM response lacks choices[0].message.content", res->status, truncated(res->body));
    }
    return content->get<std::string>();
}

}  // namespace symscene
