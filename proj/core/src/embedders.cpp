#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "jsonl.hpp"
#include "tor/corpus.hpp"
#include "tor/error.hpp"
#include "tor/text.hpp"

namespace tor {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

HashEmbedder::HashEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim_ == 0) throw std::invalid_argument("HashEmbedder: dim must be positive");
}

std::string HashEmbedder::id() const {
  return "hash:d=" + std::to_string(dim_) + ":seed=" + std::to_string(seed_);
}

Embedding HashEmbedder::embed(std::string_view text) const {
  std::string_view trimmed = trim(text);
  if (trimmed.empty()) throw std::invalid_argument("HashEmbedder: empty text");

  std::vector<std::string> tokens = word_tokens(trimmed);
  if (tokens.empty()) tokens.emplace_back(trimmed);

  const std::uint64_t basis = 0xcbf29ce484222325ULL ^ splitmix64(seed_);
  Embedding v(dim_, 0.0);
  for (const std::string& token : tokens) {
    std::uint64_t h = fnv1a64(token, basis);
    for (std::size_t b = 0; b < kBucketsPerToken; ++b) {
      std::uint64_t x = splitmix64(h + b);
      v[x % dim_] += (x >> 63) ? 1.0 : -1.0;
    }
  }
  if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) {
    // Signed buckets cancelled out; any fixed nonzero direction keeps the
    // vector usable.
    v[fnv1a64(trimmed, basis) % dim_] = 1.0;
  }
  return v;
}

PrecomputedEmbedder::PrecomputedEmbedder(std::unordered_map<std::string, Embedding> vectors,
                                         std::shared_ptr<const EmbeddingProvider> query_provider)
    : vectors_(std::move(vectors)), query_provider_(std::move(query_provider)) {
  if (!query_provider_) throw std::invalid_argument("PrecomputedEmbedder: query provider required");
  dim_ = query_provider_->dim();
  for (const auto& [id, v] : vectors_) {
    if (v.size() != dim_) {
      throw std::invalid_argument("PrecomputedEmbedder: vector for \"" + id + "\" has " +
                                  std::to_string(v.size()) + " values, expected " +
                                  std::to_string(dim_));
    }
  }
}

PrecomputedEmbedder PrecomputedEmbedder::load(
    const std::filesystem::path& path, std::shared_ptr<const EmbeddingProvider> query_provider) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file " + path.string());
  std::unordered_map<std::string, Embedding> vectors;
  detail::for_each_jsonl(in, [&](const detail::json& record, std::size_t line) {
    std::string id = detail::require_string(record, "id", line);
    auto it = record.find("values");
    if (it == record.end() || !it->is_array()) throw FormatError("missing \"values\" array", line);
    Embedding v;
    try {
      v = it->get<Embedding>();
    } catch (const detail::json::exception&) {
      throw FormatError("\"values\" must be numbers", line);
    }
    if (!vectors.emplace(id, std::move(v)).second) {
      throw FormatError("duplicate id \"" + id + "\"", line);
    }
  });
  try {
    return PrecomputedEmbedder(std::move(vectors), std::move(query_provider));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

std::string PrecomputedEmbedder::id() const { return query_provider_->id(); }

std::size_t PrecomputedEmbedder::dim() const { return dim_; }

Embedding PrecomputedEmbedder::embed(std::string_view text) const {
  return query_provider_->embed(text);
}

Embedding PrecomputedEmbedder::embed_paragraph(const Paragraph& p, bool) const {
  auto it = vectors_.find(p.id);
  if (it == vectors_.end()) {
    throw Error("no precomputed embedding for paragraph \"" + p.id + "\"");
  }
  return it->second;
}

}  // namespace tor
