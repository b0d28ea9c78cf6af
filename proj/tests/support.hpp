#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "tor/corpus.hpp"
#include "tor/llm.hpp"
#include "tor/review.hpp"

namespace tor::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("tor_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline CorpusIndex build_index(const std::vector<Paragraph>& paragraphs,
                               const EmbeddingProvider& embedder) {
  std::vector<Embedding> vectors;
  for (const Paragraph& p : paragraphs) vectors.push_back(embedder.embed_paragraph(p, true));
  return CorpusIndex(paragraphs, std::move(vectors), embedder.id());
}

// Provider backed by a function of the request. Requests are recorded.
class FnProvider final : public LlmProvider {
 public:
  using Fn = std::function<std::string(const CompletionRequest&)>;
  explicit FnProvider(Fn fn, bool deterministic = true)
      : fn_(std::move(fn)), deterministic_(deterministic) {}

  std::string id() const override { return "fn"; }
  std::string complete(const CompletionRequest& request) const override {
    {
      std::lock_guard lock(mutex_);
      requests_.push_back(request);
    }
    return fn_(request);
  }
  bool deterministic() const override { return deterministic_; }

  std::vector<CompletionRequest> requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
  }

 private:
  Fn fn_;
  bool deterministic_;
  mutable std::mutex mutex_;
  mutable std::vector<CompletionRequest> requests_;
};

inline std::string search_reply(const std::string& query) {
  return render_canonical_review(ReviewDecision::search(query));
}
inline std::string accept_reply(const std::string& analysis) {
  ReviewDecision d = ReviewDecision::accept(analysis);
  d.supported = true;
  return render_canonical_review(d);
}
inline std::string reject_reply() { return render_canonical_review(ReviewDecision::reject()); }
inline std::string mpc_reply(const std::string& info) {
  return render_canonical_mpc(MpcCompletion{info, "unknown"});
}

inline bool is_review(const CompletionRequest& r) {
  return r.tag.template_name == TemplateName::ReviewCot ||
         r.tag.template_name == TemplateName::ReviewDirect;
}

}  // namespace tor::testing
