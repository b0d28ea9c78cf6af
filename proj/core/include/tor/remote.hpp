#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>

#include "tor/corpus.hpp"
#include "tor/llm.hpp"

namespace tor {

// Base URL (e.g. "https://api.openai.com/v1"), key and model of an
// OpenAI-compatible service.
struct RemoteEndpoint {
  std::string base_url;
  std::string api_key;
  std::string model;
  std::chrono::seconds timeout{120};

  // Reads <prefix>_BASE_URL, <prefix>_API_KEY and <prefix>_MODEL. Throws
  // ConfigError when the base URL or key is unset.
  static RemoteEndpoint from_env(std::string_view prefix);
};

inline constexpr std::string_view kLlmEnvPrefix = "TOR_LLM";
inline constexpr std::string_view kEmbedEnvPrefix = "TOR_EMBED";

// POST {base_url}/chat/completions with a single user message.
class RemoteChatProvider final : public LlmProvider {
 public:
  explicit RemoteChatProvider(RemoteEndpoint endpoint);

  std::string id() const override { return "remote:" + endpoint_.model; }
  std::string complete(const CompletionRequest& request) const override;

 private:
  RemoteEndpoint endpoint_;
};

// POST {base_url}/embeddings.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  RemoteEmbedder(RemoteEndpoint endpoint, std::size_t dim);

  std::string id() const override;
  std::size_t dim() const override { return dim_; }
  Embedding embed(std::string_view text) const override;

 private:
  RemoteEndpoint endpoint_;
  std::size_t dim_;
};

}  // namespace tor
