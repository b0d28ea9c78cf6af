#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "support.hpp"
#include "tor/error.hpp"
#include "tor/text.hpp"

using namespace tor;
using tor::testing::build_index;

namespace {

// Plain cosine, written independently of the library.
double brute_cosine(const Embedding& a, const Embedding& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::string> brute_top_k(const std::vector<Paragraph>& corpus,
                                     const EmbeddingProvider& e, const std::string& query,
                                     std::size_t k) {
  Embedding q = e.embed(query);
  std::vector<std::pair<double, std::string>> all;
  for (const Paragraph& p : corpus) {
    all.emplace_back(brute_cosine(q, e.embed(p.title + "\n" + p.text)), p.id);
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) ids.push_back(all[i].second);
  return ids;
}

std::vector<std::string> ids_of(const std::vector<RetrievalHit>& hits) {
  std::vector<std::string> ids;
  for (const auto& h : hits) ids.push_back(h.paragraph.id);
  return ids;
}

}  // namespace

TEST_CASE("cosine similarity") {
  std::vector<double> a{1, 0}, b{0, 1}, c{2, 0}, d{-1, 0};
  CHECK(cosine_similarity(a, b) == doctest::Approx(0.0));
  CHECK(cosine_similarity(a, c) == doctest::Approx(1.0));
  CHECK(cosine_similarity(a, d) == doctest::Approx(-1.0));
  std::vector<double> zero{0, 0}, three{1, 2, 3};
  CHECK_THROWS_AS(cosine_similarity(a, zero), std::invalid_argument);
  CHECK_THROWS_AS(cosine_similarity(a, three), std::invalid_argument);
}

TEST_CASE("hash embedder is deterministic and seeded") {
  HashEmbedder e(64, 7);
  CHECK(e.id() == "hash:d=64:seed=7");
  CHECK(e.dim() == 64);
  CHECK(e.embed("Kirton End, Boston") == e.embed("kirton end boston"));
  CHECK(e.embed("alpha") != HashEmbedder(64, 8).embed("alpha"));
  Embedding v = e.embed("alpha beta");
  CHECK(v.size() == 64);
  CHECK(std::any_of(v.begin(), v.end(), [](double x) { return x != 0.0; }));
  // Shared words raise similarity.
  double close = cosine_similarity(e.embed("population of boston"), e.embed("boston population"));
  double far = cosine_similarity(e.embed("population of boston"), e.embed("river thames bridge"));
  CHECK(close > far);
}

TEST_CASE("paragraph embedding text") {
  Paragraph p{"p1", "Boston", "A town."};
  CHECK(paragraph_embedding_text(p, true) == "Boston\nA town.");
  CHECK(paragraph_embedding_text(p, false) == "A town.");
}

TEST_CASE("retrieve returns top-k by cosine with id tie-break") {
  HashEmbedder e;
  std::vector<Paragraph> corpus{{"c", "", "apple banana"},
                                {"a", "", "apple banana"},
                                {"b", "", "cherry"},
                                {"d", "", "apple"}};
  CorpusIndex index = build_index(corpus, e);

  auto hits = index.retrieve("apple banana", 2, e);
  REQUIRE(hits.size() == 2);
  // identical paragraphs tie; the smaller id comes first
  CHECK(ids_of(hits) == std::vector<std::string>{"a", "c"});
  CHECK(hits[0].score == doctest::Approx(1.0));
  CHECK(hits[0].score >= hits[1].score);

  CHECK(index.retrieve("apple", 10, e).size() == 4);
  CHECK(index.retrieve("apple", 0, e).empty());
  CHECK_THROWS(index.retrieve("apple", -1, e));
  CHECK_THROWS(index.retrieve("", 2, e));
  CHECK_THROWS_AS(index.retrieve("apple", 2, HashEmbedder(256, 1)), ConfigError);
}

TEST_CASE("retrieval matches a brute-force oracle on random corpora") {
  std::mt19937_64 rng(20240601);
  std::vector<std::string> vocab;
  for (int i = 0; i < 150; ++i) vocab.push_back("w" + std::to_string(i));
  for (int trial = 0; trial < 10; ++trial) {
    HashEmbedder e(128, trial);
    std::size_t n = 1 + rng() % 300;
    std::vector<Paragraph> corpus;
    for (std::size_t i = 0; i < n; ++i) {
      std::string text;
      for (int w = 0, len = 1 + static_cast<int>(rng() % 12); w < len; ++w) {
        text += vocab[rng() % vocab.size()] + " ";
      }
      corpus.push_back({"p" + std::to_string(i), vocab[rng() % vocab.size()], text});
    }
    CorpusIndex index = build_index(corpus, e);
    for (std::size_t k : {1, 5, 15}) {
      std::string query = vocab[rng() % vocab.size()] + " " + vocab[rng() % vocab.size()];
      CHECK(ids_of(index.retrieve(query, static_cast<int>(k), e)) ==
            brute_top_k(corpus, e, query, k));
    }
  }
}

TEST_CASE("ingest reads records and reports bad lines") {
  HashEmbedder e;
  std::istringstream good(
      R"({"id": "p1", "title": "A", "text": "alpha"})"
      "\n\n"
      R"({"id": "p2", "title": "B", "text": "beta"})"
      "\n");
  CorpusIndex index = ingest_corpus(good, e);
  CHECK(index.size() == 2);
  CHECK(index.dim() == 256);
  CHECK(index.provider_id() == e.id());
  REQUIRE(index.find("p2") != nullptr);
  CHECK(index.find("p2")->title == "B");
  CHECK(index.find("nope") == nullptr);

  auto message_of = [&](const std::string& text) {
    std::istringstream in(text);
    try {
      ingest_corpus(in, e);
    } catch (const FormatError& err) {
      return std::string(err.what());
    }
    return std::string("no error");
  };
  std::string dup = message_of(
      R"({"id": "p1", "title": "A", "text": "alpha"})"
      "\n"
      R"({"id": "p1", "title": "B", "text": "beta"})");
  CHECK(dup.find("line 2") != std::string::npos);
  CHECK(dup.find("\"p1\"") != std::string::npos);
  CHECK(message_of("{\"id\": \"p1\", \"title\": \"A\", \"text\": \"a\"}\n{not json")
            .find("line 2") != std::string::npos);
  CHECK(message_of(R"({"id": "p1", "title": "A"})").find("text") != std::string::npos);
  CHECK(message_of(R"({"id": 3, "title": "A", "text": "a"})").find("line 1") !=
        std::string::npos);
  CHECK(message_of("[1, 2]").find("line 1") != std::string::npos);
}

TEST_CASE("empty paragraphs cannot be embedded, punctuation-only ones can") {
  HashEmbedder e;
  std::istringstream empty(R"({"id": "p1", "title": "", "text": "  "})");
  CHECK_THROWS(ingest_corpus(empty, e));
  std::istringstream punct(R"({"id": "p1", "title": "", "text": "!!!"})");
  CHECK(ingest_corpus(punct, e).size() == 1);
}

TEST_CASE("titles can be left out of the embedding") {
  HashEmbedder e;
  std::vector<Paragraph> corpus{{"p1", "Zebra", "alpha"}, {"p2", "Other", "alpha beta"}};
  std::ostringstream jsonl;
  for (const auto& p : corpus) {
    jsonl << "{\"id\":\"" << p.id << "\",\"title\":\"" << p.title << "\",\"text\":\"" << p.text
          << "\"}\n";
  }
  std::istringstream with(jsonl.str()), without(jsonl.str());
  CorpusIndex titled = ingest_corpus(with, e);
  CorpusIndex plain = ingest_corpus(without, e, IngestOptions{false});
  CHECK(titled.retrieve("zebra", 1, e)[0].paragraph.id == "p1");
  CHECK(plain.embedding(0) == e.embed("alpha"));
}

TEST_CASE("index round-trips through its file format") {
  HashEmbedder e(32, 3);
  std::vector<Paragraph> corpus{{"x", "T \"quoted\"", "line one\nline two"}, {"y", "", "ü ok"}};
  CorpusIndex index = build_index(corpus, e);
  std::stringstream buf;
  write_index(buf, index);
  CorpusIndex back = read_index(buf, e.id());
  REQUIRE(back.size() == 2);
  CHECK(back.paragraphs() == index.paragraphs());
  CHECK(back.embedding(0) == index.embedding(0));
  CHECK(back.embedding(1) == index.embedding(1));
}

TEST_CASE("corpus index validates its inputs") {
  CHECK_THROWS(CorpusIndex({{"a", "", "x"}}, {}, "id"));
  CHECK_THROWS(CorpusIndex({{"a", "", "x"}, {"a", "", "y"}}, {{1.0}, {1.0}}, "id"));
  CHECK_THROWS(CorpusIndex({{"a", "", "x"}, {"b", "", "y"}}, {{1.0}, {1.0, 2.0}}, "id"));
  CHECK_THROWS(CorpusIndex({{"a", "", "x"}}, {{0.0, 0.0}}, "id"));
}

TEST_CASE("precomputed vectors serve paragraphs, queries go to the query model") {
  auto query = std::make_shared<HashEmbedder>(4, 0);
  tor::testing::TempDir dir;
  tor::testing::write_text(dir / "vec.jsonl",
                           "{\"id\": \"p1\", \"values\": [1, 0, 0, 0]}\n"
                           "{\"id\": \"p2\", \"values\": [0, 1, 0, 0]}\n");
  PrecomputedEmbedder pre = PrecomputedEmbedder::load(dir / "vec.jsonl", query);
  CHECK(pre.size() == 2);
  CHECK(pre.dim() == 4);
  CHECK(pre.id() == query->id());
  CHECK(pre.embed_paragraph({"p2", "t", "x"}, true) == Embedding{0, 1, 0, 0});
  CHECK(pre.embed("alpha") == query->embed("alpha"));
  CHECK_THROWS(pre.embed_paragraph({"p3", "t", "x"}, true));

  tor::testing::write_text(dir / "bad.jsonl",
                           "{\"id\": \"p1\", \"values\": [1, 0, 0, 0]}\n"
                           "{\"id\": \"p2\", \"values\": [0, 1]}\n");
  CHECK_THROWS(PrecomputedEmbedder::load(dir / "bad.jsonl", query));
}

TEST_CASE("text helpers") {
  CHECK(trim("  a b \n") == "a b");
  CHECK(to_lower_ascii("AbC") == "abc");
  CHECK(word_tokens("Kirton End, Boston's 2001!") ==
        std::vector<std::string>{"kirton", "end", "boston", "s", "2001"});
  CHECK(starts_with_ci("The Answer", "the"));
  CHECK(join({"a", "b"}, ", ") == "a, b");
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(255) == "00000000000000ff");
  CHECK(split_lines("a\nb").size() == 2);
}
