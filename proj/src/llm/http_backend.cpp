#include "drpo/llm/http_backend.hpp"

#include "drpo/errors.hpp"

#include <httplib.h>

#include <cstdlib>
#include <thread>

namespace drpo::llm {

ParsedUrl parse_url(const std::string& url)
{
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint is not an absolute URL: " + url);
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported URL scheme in " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl parsed;
  if (path_start == std::string::npos) {
    parsed.scheme_host_port = url;
    parsed.path = "/";
  } else {
    parsed.scheme_host_port = url.substr(0, path_start);
    parsed.path = url.substr(path_start);
  }
  if (parsed.scheme_host_port.size() <= scheme_end + 3) {
    throw ConfigError("endpoint has no host: " + url);
  }
  return parsed;
}

nlohmann::json build_chat_request(const BackendCall& call)
{
  return {{"model", call.profile.model_id},
          {"messages", to_json(call.messages)},
          {"temperature", call.temperature},
          {"max_tokens", call.max_tokens}};
}

std::string parse_chat_response(const std::string& body)
{
  const auto json = nlohmann::json::parse(body, nullptr, false);
  if (json.is_discarded()) {
    throw ProviderError("provider returned a non-JSON body", body);
  }
  if (json.contains("error")) {
    throw ProviderError("provider returned an error object", body);
  }
  const auto choices = json.find("choices");
  if (choices == json.end() || !choices->is_array() || choices->empty()) {
    throw ProviderError("provider reply has no choices", body);
  }
  const auto& message = (*choices)[0].value("message", nlohmann::json::object());
  const auto content = message.find("content");
  if (content == message.end() || !content->is_string() || content->get<std::string>().empty()) {
    throw ProviderError("provider reply has empty content", body);
  }
  return content->get<std::string>();
}

std::string resolve_api_key(const BackendProfile& profile)
{
  if (profile.api_key_env.empty()) {
    return {};
  }
  const char* value = std::getenv(profile.api_key_env.c_str());
  if (value == nullptr || *value == '\0') {
    throw ConfigError(std::string(to_string(profile.role)) + ": credential variable " +
                      profile.api_key_env + " is not set");
  }
  return value;
}

std::string post_json(const std::string& url, const std::string& body, const std::string& api_key,
                      const RetryPolicy& retry, std::chrono::seconds timeout)
{
  const auto target = parse_url(url);
  httplib::Client client(target.scheme_host_port);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + api_key);
  }

  const int attempts = std::max(1, retry.attempts);
  auto delay = retry.base_delay;
  std::string last_error;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    auto result = client.Post(target.path, headers, body, "application/json");
    if (!result) {
      last_error = "connection failed: " + httplib::to_string(result.error());
    } else if (result->status >= 200 && result->status < 300) {
      return result->body;
    } else if (result->status == 429 || result->status >= 500) {
      last_error = "HTTP " + std::to_string(result->status);
    } else {
      throw ProviderError("HTTP " + std::to_string(result->status) + " from " + url, result->body);
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(delay);
      delay = std::chrono::milliseconds(static_cast<long long>(delay.count() * retry.factor));
    }
  }
  throw TransportError(url + ": " + last_error + " after " + std::to_string(attempts) + " attempts");
}

HttpBackend::HttpBackend(RetryPolicy retry, std::chrono::seconds timeout)
    : retry_(retry), timeout_(timeout)
{
}

std::string HttpBackend::complete(const BackendCall& call)
{
  const auto key = resolve_api_key(call.profile);
  const auto body = post_json(call.profile.endpoint, build_chat_request(call).dump(), key, retry_, timeout_);
  return parse_chat_response(body);
}

} // namespace drpo::llm
