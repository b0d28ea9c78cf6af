#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tor/tree.hpp"

namespace tor {

struct QAExample {
  std::string id;
  std::string question;
  std::vector<std::string> gold_answers;      // nonempty
  std::set<std::string> gold_paragraph_ids;  // may be empty
};

// Line-delimited {"id", "question", "gold_answers", "gold_paragraph_ids"}.
std::vector<QAExample> load_dataset(std::istream& in);
std::vector<QAExample> load_dataset(const std::filesystem::path& path);

// SQuAD-style: lowercase, drop ASCII punctuation, drop the articles a/an/the,
// collapse whitespace.
std::string normalize_answer(std::string_view text);

int exact_match(std::string_view prediction, std::span<const std::string> gold_answers);

// Token F1 over normalized bags of words, max over gold answers.
double f1_score(std::string_view prediction, std::span<const std::string> gold_answers);

// |first k of retrieved ∩ gold| / |gold|; nullopt when gold is empty.
std::optional<double> recall_at_k(std::span<const std::string> retrieved,
                                  const std::set<std::string>& gold, std::size_t k = 15);

struct ExampleResult {
  std::string id;
  std::string prediction;
  std::vector<std::string> retrieved_ids;
  RunStats stats;
  int fusion_calls = 0;
};

struct MetricsReport {
  std::size_t n = 0;
  double em = 0.0;
  double f1 = 0.0;
  double recall_at_15 = 0.0;
  std::size_t recall_scored = 0;
  std::size_t recall_excluded = 0;
  double mean_api_calls = 0.0;
  double mean_distinct_docs = 0.0;
  double mean_rate = 0.0;
  double mean_evidence = 0.0;
  double mean_fusion_calls = 0.0;
  double parse_success_rate = 1.0;
};

// Matches results to examples by id. Throws Error naming the first example
// without a result.
MetricsReport evaluate_run(std::span<const QAExample> dataset,
                           std::span<const ExampleResult> results);

std::string report_to_json(const MetricsReport& report);
std::string report_to_table(const MetricsReport& report);

}  // namespace tor
