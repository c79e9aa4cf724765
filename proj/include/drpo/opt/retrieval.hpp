#pragma once

#include "drpo/events.hpp"
#include "drpo/opt/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace drpo::opt {

using Vector = std::vector<double>;

class Embedder {
public:
  virtual ~Embedder() = default;
  virtual std::vector<Vector> embed(const std::vector<std::string>& texts) const = 0;
};

// Lower-cased alphanumeric tokens of `text`, in order.
std::vector<std::string> tokenize(std::string_view text);

// Bag-of-words embedding over a per-call vocabulary, L2-normalized. Fully
// offline and deterministic.
class LexicalEmbedder : public Embedder {
public:
  std::vector<Vector> embed(const std::vector<std::string>& texts) const override;
};

// OpenAI-style /embeddings endpoint ({"model", "input": [...]}).
class RemoteEmbedder : public Embedder {
public:
  RemoteEmbedder(std::string endpoint, std::string model, std::string api_key_env);
  std::vector<Vector> embed(const std::vector<std::string>& texts) const override;

private:
  std::string endpoint_;
  std::string model_;
  std::string api_key_env_;
};

double cosine(const Vector& a, const Vector& b);

struct Ranked {
  std::size_t index;  // into the pool
  double similarity;
};

// Similarity-based example selection. Falls back to the lexical embedder,
// with an "embedder" warning, when the primary embedder throws.
class Retriever {
public:
  explicit Retriever(std::shared_ptr<const Embedder> primary = nullptr, WarningLog* warnings = nullptr);

  // Pool indices of the K examples whose queries are closest to `query`,
  // by descending cosine; ties keep pool order. Throws std::invalid_argument
  // when K > |pool| or K < 0.
  std::vector<Ranked> rank(const std::string& query, const std::vector<ICLExample>& pool,
                           int k) const;

  std::vector<ICLExample> retrieve_examples(const std::string& query,
                                            const std::vector<ICLExample>& pool, int k) const;

private:
  std::shared_ptr<const Embedder> primary_;
  LexicalEmbedder lexical_;
  WarningLog* warnings_;
};

} // namespace drpo::opt
