#include "drpo/llm/gateway.hpp"

#include "drpo/errors.hpp"
#include "drpo/llm/json_extract.hpp"

#include <algorithm>
#include <stdexcept>

namespace drpo::llm {
namespace {

constexpr std::string_view kJsonReminder = "Reply with valid JSON only, in the format requested above.";

class LimiterGuard {
public:
  explicit LimiterGuard(InFlightLimiter& limiter) : limiter_(limiter) { limiter_.acquire(); }
  ~LimiterGuard() { limiter_.release(); }
  LimiterGuard(const LimiterGuard&) = delete;
  LimiterGuard& operator=(const LimiterGuard&) = delete;

private:
  InFlightLimiter& limiter_;
};

std::string excerpt(const std::string& text)
{
  return text.size() <= 120 ? text : text.substr(0, 120) + "...";
}

} // namespace

InFlightLimiter::InFlightLimiter(int limit) : available_(std::max(1, limit)) {}

void InFlightLimiter::acquire()
{
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return available_ > 0; });
  --available_;
}

void InFlightLimiter::release()
{
  {
    std::lock_guard lock(mutex_);
    ++available_;
  }
  cv_.notify_one();
}

Gateway::Gateway(GatewayOptions options, std::shared_ptr<WarningLog> warnings)
    : options_(std::move(options)),
      warnings_(warnings ? std::move(warnings) : std::make_shared<WarningLog>()),
      cache_(options_.cache_dir)
{
}

void Gateway::bind(BackendProfile profile, std::shared_ptr<Backend> backend)
{
  validate(profile);
  if (!backend) {
    throw ConfigError(std::string(to_string(profile.role)) + ": no backend given");
  }
  const auto role = profile.role;
  bindings_[role] = Binding{std::move(profile), std::move(backend),
                            std::make_unique<InFlightLimiter>(options_.max_in_flight)};
}

bool Gateway::is_bound(Role role) const
{
  return bindings_.contains(role);
}

const Gateway::Binding& Gateway::binding(Role role) const
{
  const auto it = bindings_.find(role);
  if (it == bindings_.end()) {
    throw ConfigError("no backend bound for role " + std::string(to_string(role)));
  }
  return it->second;
}

const BackendProfile& Gateway::profile(Role role) const
{
  return binding(role).profile;
}

std::string Gateway::complete(const CompletionRequest& request)
{
  if (request.messages.empty()) {
    throw std::invalid_argument("completion request has no messages");
  }
  if (request.messages.front().speaker == Speaker::assistant) {
    throw std::invalid_argument("first message must be a system or user message");
  }
  const auto& bound = binding(request.role);
  const double temperature = request.temperature.value_or(bound.profile.temperature);
  const int max_tokens = request.max_tokens.value_or(bound.profile.max_tokens);

  const bool cacheable =
      options_.cache_enabled && request.cache_policy == CachePolicy::use && temperature == 0.0;
  std::optional<CacheKey> key;
  if (cacheable) {
    key = CacheKey::of(bound.profile.model_id, request.messages, temperature, max_tokens);
    if (auto hit = cache_.get(*key)) {
      ledger_.record(request.role, request.stage, CallOutcome::hit);
      return *hit;
    }
  }
  ledger_.record(request.role, request.stage,
                 cacheable ? CallOutcome::miss : CallOutcome::bypass);

  std::string text;
  {
    LimiterGuard guard(*bound.limiter);
    const BackendCall call{bound.profile, request.stage, request.messages, temperature, max_tokens,
                           request.meta};
    text = bound.backend->complete(call);
  }
  if (key) {
    cache_.put(*key, text, bound.profile.model_id);
  }
  return text;
}

nlohmann::json Gateway::complete_json(CompletionRequest request,
                                      const std::function<void(const nlohmann::json&)>& validate)
{
  int extraction_left = options_.extraction_reasks;
  int schema_left = options_.schema_reasks;
  const std::string stage(to_string(request.stage));

  auto evict = [&] {
    const auto& bound = binding(request.role);
    const double temperature = request.temperature.value_or(bound.profile.temperature);
    const int max_tokens = request.max_tokens.value_or(bound.profile.max_tokens);
    cache_.erase(CacheKey::of(bound.profile.model_id, request.messages, temperature, max_tokens));
  };

  while (true) {
    const auto text = complete(request);
    try {
      auto value = extract_json(text);
      if (validate) {
        validate(value);
      }
      return value;
    } catch (const ExtractionError&) {
      warnings_->warn("extraction", stage + ": no JSON in reply: " + excerpt(text));
      evict();
      if (extraction_left-- <= 0) {
        throw;
      }
      request.messages.push_back({Speaker::assistant, text});
      request.messages.push_back({Speaker::user, std::string(kJsonReminder)});
    } catch (const SchemaError& error) {
      warnings_->warn("schema", stage + ": " + error.what());
      evict();
      if (schema_left-- <= 0) {
        throw;
      }
      request.messages.push_back({Speaker::assistant, text});
      request.messages.push_back(
          {Speaker::user, std::string(error.what()) + ". Reply with the complete JSON only."});
    }
  }
}

LedgerSnapshot Gateway::call_ledger() const
{
  return ledger_.snapshot();
}

} // namespace drpo::llm
