#pragma once

#include "drpo/llm/backend.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <string>

namespace drpo::llm {

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{500};
  double factor = 2.0;
};

struct ParsedUrl {
  std::string scheme_host_port;  // "https://api.example.com:443"
  std::string path;              // "/v1/chat/completions"
};

ParsedUrl parse_url(const std::string& url);

// Request body for an OpenAI-style /chat/completions endpoint.
nlohmann::json build_chat_request(const BackendCall& call);

// Text of choices[0].message.content; throws ProviderError otherwise.
std::string parse_chat_response(const std::string& body);

// POSTs a JSON body, retrying connection failures, 429 and 5xx with
// exponential backoff. Returns the 2xx body. Other statuses throw
// ProviderError with the body; exhausted retries throw TransportError.
std::string post_json(const std::string& url, const std::string& body, const std::string& api_key,
                      const RetryPolicy& retry, std::chrono::seconds timeout);

// Chat-completions client over HTTP(S). The API key is read from the
// environment variable named by the profile at call time.
class HttpBackend : public Backend {
public:
  explicit HttpBackend(RetryPolicy retry = {}, std::chrono::seconds timeout = std::chrono::seconds(120));

  std::string complete(const BackendCall& call) override;

private:
  RetryPolicy retry_;
  std::chrono::seconds timeout_;
};

// Resolves the credential for `profile`; empty when no env var is named.
// Throws ConfigError when the named variable is unset or empty.
std::string resolve_api_key(const BackendProfile& profile);

} // namespace drpo::llm
