#pragma once

#include <chrono>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "symscene/prompt.hpp"

namespace symscene {

inline constexpr const char* kDefaultLlmBaseUrl = "https://api.openai.com/v1";
inline constexpr const char* kDefaultLlmModel = "gpt-4o";

// Chat-completions compatible endpoint.
struct LlmEndpoint {
    std::string base_url = kDefaultLlmBaseUrl;
    std::string api_key;
    std::string model = kDefaultLlmModel;
    std::chrono::milliseconds timeout{30000};

    // LLM_API_KEY, LLM_BASE_URL, LLM_MODEL; unset variables keep defaults.
    static LlmEndpoint from_env();
};

// {"model": ..., "messages": [{"role": "user", "content": rendered}]}
nlohmann::ordered_json chat_request_body(const PromptBundle& bundle, const std::string& model);

// POSTs {base_url}/chat/completions and returns choices[0].message.content.
// Throws ConfigError (before any network traffic) when the key or URL is
// unusable, TransportError on network, HTTP or response-schema failures.
// When log is non-null the exchange is written there with the key redacted.
std::string relay_to_llm(const PromptBundle& bundle, const LlmEndpoint& endpoint, std::ostream* log = nullptr);

}  // namespace symscene
