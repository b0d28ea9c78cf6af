#include "tor/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "jsonl.hpp"
#include "tor/error.hpp"
#include "tor/text.hpp"

namespace tor {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_similarity: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    norm_a += a[i] * a[i];
    norm_b += b[i] * b[i];
  }
  if (norm_a == 0.0 || norm_b == 0.0) {
    throw std::invalid_argument("cosine_similarity: zero vector");
  }
  double value = dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
  return std::clamp(value, -1.0, 1.0);
}

std::string paragraph_embedding_text(const Paragraph& p, bool include_title) {
  if (!include_title || p.title.empty()) return p.text;
  return p.title + "\n" + p.text;
}

CorpusIndex::CorpusIndex(std::vector<Paragraph> paragraphs, std::vector<Embedding> embeddings,
                         std::string provider_id)
    : paragraphs_(std::move(paragraphs)),
      embeddings_(std::move(embeddings)),
      provider_id_(std::move(provider_id)) {
  if (paragraphs_.size() != embeddings_.size()) {
    throw std::invalid_argument("CorpusIndex: paragraph and embedding counts differ");
  }
  by_id_.reserve(paragraphs_.size());
  for (std::size_t i = 0; i < paragraphs_.size(); ++i) {
    const Paragraph& p = paragraphs_[i];
    if (p.id.empty()) throw std::invalid_argument("CorpusIndex: empty paragraph id");
    if (!by_id_.emplace(p.id, i).second) {
      throw std::invalid_argument("CorpusIndex: duplicate paragraph id \"" + p.id + "\"");
    }
    const Embedding& e = embeddings_[i];
    if (i == 0) dim_ = e.size();
    if (e.empty() || e.size() != dim_) {
      throw std::invalid_argument("CorpusIndex: inconsistent embedding dimension for \"" + p.id +
                                  "\"");
    }
    if (std::all_of(e.begin(), e.end(), [](double v) { return v == 0.0; })) {
      throw std::invalid_argument("CorpusIndex: all-zero embedding for \"" + p.id + "\"");
    }
  }
}

const Paragraph* CorpusIndex::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &paragraphs_[it->second];
}

std::vector<RetrievalHit> CorpusIndex::retrieve(std::string_view query, int k,
                                                const EmbeddingProvider& provider) const {
  if (k < 0) throw std::invalid_argument("retrieve: k must be non-negative");
  if (trim(query).empty()) throw std::invalid_argument("retrieve: empty query");
  if (!provider_id_.empty() && provider.id() != provider_id_) {
    throw ConfigError("retrieve: index was built with \"" + provider_id_ +
                      "\" but the query embedder is \"" + provider.id() + "\"");
  }
  if (k == 0 || empty()) return {};
  Embedding q = provider.embed(query);
  return retrieve_by_vector(q, static_cast<std::size_t>(k));
}

std::vector<RetrievalHit> CorpusIndex::retrieve_by_vector(std::span<const double> query,
                                                          std::size_t k) const {
  struct Scored {
    double score;
    std::size_t index;
  };
  std::vector<Scored> scored;
  scored.reserve(paragraphs_.size());
  for (std::size_t i = 0; i < paragraphs_.size(); ++i) {
    scored.push_back({cosine_similarity(query, embeddings_[i]), i});
  }
  auto better = [this](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return paragraphs_[a.index].id < paragraphs_[b.index].id;
  };
  k = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                    better);

  std::vector<RetrievalHit> hits;
  hits.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    hits.push_back({paragraphs_[scored[i].index], scored[i].score});
  }
  return hits;
}

CorpusIndex ingest_corpus(std::istream& in, const EmbeddingProvider& provider,
                          const IngestOptions& options) {
  std::vector<Paragraph> paragraphs;
  std::vector<Embedding> embeddings;
  std::unordered_map<std::string, std::size_t> first_line;

  detail::for_each_jsonl(in, [&](const detail::json& record, std::size_t line) {
    Paragraph p{detail::require_string(record, "id", line),
                detail::require_string(record, "title", line),
                detail::require_string(record, "text", line)};
    if (p.id.empty()) throw FormatError("empty id", line);
    if (trim(p.text).empty()) throw FormatError("empty text for id \"" + p.id + "\"", line);
    auto [it, inserted] = first_line.emplace(p.id, line);
    if (!inserted) {
      throw FormatError("duplicate id \"" + p.id + "\" (first seen on line " +
                            std::to_string(it->second) + ")",
                        line);
    }
    Embedding e = provider.embed_paragraph(p, options.embed_title);
    if (e.size() != provider.dim()) {
      throw FormatError("embedder returned " + std::to_string(e.size()) +
                            " values for \"" + p.id + "\", expected " +
                            std::to_string(provider.dim()),
                        line);
    }
    paragraphs.push_back(std::move(p));
    embeddings.push_back(std::move(e));
  });

  return CorpusIndex(std::move(paragraphs), std::move(embeddings), provider.id());
}

CorpusIndex ingest_corpus(const std::filesystem::path& path, const EmbeddingProvider& provider,
                          const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus " + path.string());
  return ingest_corpus(in, provider, options);
}

void write_index(std::ostream& out, const CorpusIndex& index) {
  for (std::size_t i = 0; i < index.size(); ++i) {
    const Paragraph& p = index.paragraphs()[i];
    detail::ordered_json record;
    record["id"] = p.id;
    record["title"] = p.title;
    record["text"] = p.text;
    record["values"] = index.embedding(i);
    out << record.dump() << '\n';
  }
}

CorpusIndex read_index(std::istream& in, std::string provider_id) {
  std::vector<Paragraph> paragraphs;
  std::vector<Embedding> embeddings;
  detail::for_each_jsonl(in, [&](const detail::json& record, std::size_t line) {
    Paragraph p{detail::require_string(record, "id", line),
                detail::require_string(record, "title", line),
                detail::require_string(record, "text", line)};
    auto it = record.find("values");
    if (it == record.end() || !it->is_array()) throw FormatError("missing \"values\" array", line);
    paragraphs.push_back(std::move(p));
    embeddings.push_back(it->get<Embedding>());
  });
  try {
    return CorpusIndex(std::move(paragraphs), std::move(embeddings), std::move(provider_id));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

}  // namespace tor
