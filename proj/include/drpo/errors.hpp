#pragma once

#include <stdexcept>
#include <string>

namespace drpo {

// Root of every error the library throws on purpose.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad or missing configuration: unbound role, missing credential, bad path.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Network or HTTP failure that survived the retry budget.
class TransportError : public Error {
public:
  using Error::Error;
};

// The provider answered, but with a refusal, an error object or no text.
class ProviderError : public Error {
public:
  ProviderError(const std::string& what, std::string payload)
      : Error(what), payload_(std::move(payload)) {}

  const std::string& payload() const noexcept { return payload_; }

private:
  std::string payload_;
};

// Model text did not contain a usable JSON payload.
class ExtractionError : public Error {
public:
  ExtractionError(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}

  const std::string& raw() const noexcept { return raw_; }

private:
  std::string raw_;
};

// JSON parsed, but required content is missing or out of contract.
class SchemaError : public Error {
public:
  using Error::Error;
};

class TemplateError : public Error {
public:
  using Error::Error;
};

class RewardingError : public Error {
public:
  using Error::Error;
};

class TransitionError : public Error {
public:
  using Error::Error;
};

} // namespace drpo
