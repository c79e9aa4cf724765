#include "drpo/opt/retrieval.hpp"

#include "drpo/errors.hpp"
#include "drpo/llm/http_backend.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <stdexcept>

namespace drpo::opt {

std::vector<std::string> tokenize(std::string_view text)
{
  std::vector<std::string> tokens;
  std::string current;
  for (const unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) {
    tokens.push_back(std::move(current));
  }
  return tokens;
}

std::vector<Vector> LexicalEmbedder::embed(const std::vector<std::string>& texts) const
{
  std::vector<std::vector<std::string>> tokenized;
  std::map<std::string, std::size_t> vocabulary;
  for (const auto& text : texts) {
    tokenized.push_back(tokenize(text));
    for (const auto& token : tokenized.back()) {
      vocabulary.emplace(token, 0);
    }
  }
  std::size_t next = 0;
  for (auto& [token, slot] : vocabulary) {
    slot = next++;
  }
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& tokens : tokenized) {
    Vector v(vocabulary.size(), 0.0);
    for (const auto& token : tokens) {
      v[vocabulary.at(token)] += 1.0;
    }
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (norm > 0) {
      for (auto& x : v) {
        x /= norm;
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

RemoteEmbedder::RemoteEmbedder(std::string endpoint, std::string model, std::string api_key_env)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), api_key_env_(std::move(api_key_env))
{
}

std::vector<Vector> RemoteEmbedder::embed(const std::vector<std::string>& texts) const
{
  std::string key;
  if (!api_key_env_.empty()) {
    const char* value = std::getenv(api_key_env_.c_str());
    if (!value || !*value) {
      throw ConfigError("environment variable " + api_key_env_ + " is not set");
    }
    key = value;
  }
  const nlohmann::json body = {{"model", model_}, {"input", texts}};
  const auto reply = nlohmann::json::parse(
      llm::post_json(endpoint_, body.dump(), key, llm::RetryPolicy{}, std::chrono::seconds(60)));
  const auto& data = reply.at("data");
  if (data.size() != texts.size()) {
    throw ProviderError("embedding count does not match input count", reply.dump());
  }
  std::vector<Vector> out(texts.size());
  for (const auto& item : data) {
    const auto index = item.value("index", std::size_t{0});
    if (index >= out.size()) {
      throw ProviderError("embedding index out of range", reply.dump());
    }
    out[index] = item.at("embedding").get<Vector>();
  }
  return out;
}

double cosine(const Vector& a, const Vector& b)
{
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine of vectors with different sizes");
  }
  const double dot = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  const double na = std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
  const double nb = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
  return na > 0 && nb > 0 ? dot / (na * nb) : 0.0;
}

Retriever::Retriever(std::shared_ptr<const Embedder> primary, WarningLog* warnings)
    : primary_(std::move(primary)), warnings_(warnings)
{
}

std::vector<Ranked> Retriever::rank(const std::string& query, const std::vector<ICLExample>& pool,
                                    int k) const
{
  if (k < 0 || static_cast<std::size_t>(k) > pool.size()) {
    throw std::invalid_argument("K=" + std::to_string(k) + " outside 0.." + std::to_string(pool.size()));
  }
  if (k == 0) {
    return {};
  }
  std::vector<std::string> texts{query};
  for (const auto& e : pool) {
    texts.push_back(e.query);
  }
  std::vector<Vector> vectors;
  if (primary_) {
    try {
      vectors = primary_->embed(texts);
      if (vectors.size() != texts.size()) {
        throw ProviderError("embedder returned the wrong number of vectors", "");
      }
    } catch (const std::exception& e) {
      if (warnings_) {
        warnings_->warn("embedder", std::string("falling back to lexical retrieval: ") + e.what());
      }
      vectors.clear();
    }
  }
  if (vectors.empty()) {
    vectors = lexical_.embed(texts);
  }

  std::vector<Ranked> ranked;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    ranked.push_back({i, cosine(vectors[0], vectors[i + 1])});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Ranked& a, const Ranked& b) { return a.similarity > b.similarity; });
  ranked.resize(static_cast<std::size_t>(k));
  return ranked;
}

std::vector<ICLExample> Retriever::retrieve_examples(const std::string& query,
                                                     const std::vector<ICLExample>& pool, int k) const
{
  std::vector<ICLExample> out;
  for (const auto& r : rank(query, pool, k)) {
    out.push_back(pool[r.index]);
  }
  return out;
}

} // namespace drpo::opt
