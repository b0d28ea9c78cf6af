#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tor {

// One retrievable unit of the corpus.
struct Paragraph {
  std::string id;
  std::string title;
  std::string text;

  friend bool operator==(const Paragraph&, const Paragraph&) = default;
};

using Embedding = std::vector<double>;

// dot(a, b) / (|a| |b|). Throws std::invalid_argument on a dimension
// mismatch or when either vector is all-zero.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Text that gets embedded for a paragraph: "title\ntext", or just the text
// when titles are switched off.
std::string paragraph_embedding_text(const Paragraph& p, bool include_title);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  // Stable identifier of the embedder family, e.g. "hash:d=256:seed=0".
  virtual std::string id() const = 0;
  virtual std::size_t dim() const = 0;

  // Must be deterministic for identical input and safe to call concurrently.
  virtual Embedding embed(std::string_view text) const = 0;

  virtual Embedding embed_paragraph(const Paragraph& p, bool include_title) const {
    return embed(paragraph_embedding_text(p, include_title));
  }
};

// Offline embedder: every token is hashed (with the seed) into a few signed
// buckets of a fixed-size vector. Similarity tracks token overlap; there is no
// semantic knowledge behind it.
class HashEmbedder final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kBucketsPerToken = 4;

  explicit HashEmbedder(std::size_t dim = 256, std::uint64_t seed = 0);

  std::string id() const override;
  std::size_t dim() const override { return dim_; }
  Embedding embed(std::string_view text) const override;

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Paragraph vectors loaded from a line-delimited {"id", "values"} file. Query
// text is delegated to `query_provider`, which must be the model family that
// produced the file.
class PrecomputedEmbedder final : public EmbeddingProvider {
 public:
  PrecomputedEmbedder(std::unordered_map<std::string, Embedding> vectors,
                      std::shared_ptr<const EmbeddingProvider> query_provider);

  static PrecomputedEmbedder load(const std::filesystem::path& path,
                                  std::shared_ptr<const EmbeddingProvider> query_provider);

  std::string id() const override;
  std::size_t dim() const override;
  Embedding embed(std::string_view text) const override;
  Embedding embed_paragraph(const Paragraph& p, bool include_title) const override;

  std::size_t size() const noexcept { return vectors_.size(); }

 private:
  std::unordered_map<std::string, Embedding> vectors_;
  std::shared_ptr<const EmbeddingProvider> query_provider_;
  std::size_t dim_ = 0;
};

struct RetrievalHit {
  Paragraph paragraph;
  double score = 0.0;
};

// Immutable in-memory corpus with one embedding per paragraph. Safe to share
// between threads.
class CorpusIndex {
 public:
  CorpusIndex() = default;
  CorpusIndex(std::vector<Paragraph> paragraphs, std::vector<Embedding> embeddings,
              std::string provider_id);

  std::size_t size() const noexcept { return paragraphs_.size(); }
  bool empty() const noexcept { return paragraphs_.empty(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::string& provider_id() const noexcept { return provider_id_; }

  const std::vector<Paragraph>& paragraphs() const noexcept { return paragraphs_; }
  const Embedding& embedding(std::size_t i) const { return embeddings_.at(i); }
  const Paragraph* find(std::string_view id) const;

  // Top-min(k, size) paragraphs by cosine similarity to the query, score
  // descending, ties by ascending id. Throws on negative k, empty query or
  // an embedder whose id differs from the one that built the index.
  std::vector<RetrievalHit> retrieve(std::string_view query, int k,
                                     const EmbeddingProvider& provider) const;

  std::vector<RetrievalHit> retrieve_by_vector(std::span<const double> query,
                                               std::size_t k) const;

 private:
  std::vector<Paragraph> paragraphs_;
  std::vector<Embedding> embeddings_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::string provider_id_;
  std::size_t dim_ = 0;
};

struct IngestOptions {
  bool embed_title = true;
};

// Reads line-delimited {"id", "title", "text"} records. Malformed lines raise
// FormatError with the line number; a repeated id raises FormatError naming it.
CorpusIndex ingest_corpus(std::istream& in, const EmbeddingProvider& provider,
                          const IngestOptions& options = {});
CorpusIndex ingest_corpus(const std::filesystem::path& path, const EmbeddingProvider& provider,
                          const IngestOptions& options = {});

// Index persistence: one {"id", "title", "text", "values"} record per line.
void write_index(std::ostream& out, const CorpusIndex& index);
CorpusIndex read_index(std::istream& in, std::string provider_id);

}  // namespace tor
