#include "tor/eval.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "jsonl.hpp"
#include "tor/error.hpp"
#include "tor/text.hpp"

namespace tor {

namespace {

constexpr std::string_view kPunctuation = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double token_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::map<std::string, int> counts;
  for (const auto& t : gold) ++counts[t];
  int common = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  double precision = static_cast<double>(common) / static_cast<double>(pred.size());
  double recall = static_cast<double>(common) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

std::vector<QAExample> load_dataset(std::istream& in) {
  std::vector<QAExample> examples;
  std::map<std::string, std::size_t> seen;
  detail::for_each_jsonl(in, [&](const detail::json& r, std::size_t line) {
    QAExample ex;
    ex.id = detail::require_string(r, "id", line);
    ex.question = detail::require_string(r, "question", line);
    if (ex.id.empty()) throw FormatError("empty id", line);
    if (!seen.emplace(ex.id, line).second) {
      throw FormatError("duplicate example id \"" + ex.id + "\"", line);
    }
    auto answers = r.find("gold_answers");
    if (answers == r.end() || !answers->is_array() || answers->empty()) {
      throw FormatError("\"gold_answers\" must be a nonempty array", line);
    }
    for (const auto& a : *answers) {
      if (!a.is_string()) throw FormatError("\"gold_answers\" entries must be strings", line);
      ex.gold_answers.push_back(a.get<std::string>());
    }
    if (auto ids = r.find("gold_paragraph_ids"); ids != r.end()) {
      if (!ids->is_array()) throw FormatError("\"gold_paragraph_ids\" must be an array", line);
      for (const auto& id : *ids) {
        if (!id.is_string()) throw FormatError("\"gold_paragraph_ids\" entries must be strings", line);
        ex.gold_paragraph_ids.insert(id.get<std::string>());
      }
    }
    examples.push_back(std::move(ex));
  });
  return examples;
}

std::vector<QAExample> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset " + path.string());
  return load_dataset(in);
}

std::string normalize_answer(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : to_lower_ascii(text)) {
    if (kPunctuation.find(c) == std::string_view::npos) cleaned.push_back(c);
  }
  std::vector<std::string> kept;
  for (std::string& tok : split_ws(cleaned)) {
    if (tok != "a" && tok != "an" && tok != "the") kept.push_back(std::move(tok));
  }
  return join(kept, " ");
}

int exact_match(std::string_view prediction, std::span<const std::string> gold_answers) {
  if (gold_answers.empty()) throw std::invalid_argument("exact_match: no gold answers");
  std::string pred = normalize_answer(prediction);
  for (const std::string& g : gold_answers) {
    if (normalize_answer(g) == pred) return 1;
  }
  return 0;
}

double f1_score(std::string_view prediction, std::span<const std::string> gold_answers) {
  if (gold_answers.empty()) throw std::invalid_argument("f1_score: no gold answers");
  std::vector<std::string> pred = split_ws(normalize_answer(prediction));
  double best = 0.0;
  for (const std::string& g : gold_answers) {
    best = std::max(best, token_f1(pred, split_ws(normalize_answer(g))));
  }
  return best;
}

std::optional<double> recall_at_k(std::span<const std::string> retrieved,
                                  const std::set<std::string>& gold, std::size_t k) {
  if (gold.empty()) return std::nullopt;
  std::set<std::string> hit;
  for (std::size_t i = 0; i < std::min(k, retrieved.size()); ++i) {
    if (gold.contains(retrieved[i])) hit.insert(retrieved[i]);
  }
  return static_cast<double>(hit.size()) / static_cast<double>(gold.size());
}

MetricsReport evaluate_run(std::span<const QAExample> dataset,
                           std::span<const ExampleResult> results) {
  std::map<std::string, const ExampleResult*> by_id;
  for (const ExampleResult& r : results) {
    if (!by_id.emplace(r.id, &r).second) throw Error("duplicate result for example \"" + r.id + "\"");
  }

  MetricsReport report;
  report.n = dataset.size();
  double recall_sum = 0.0;
  long total_calls = 0;
  long total_failures = 0;
  for (const QAExample& ex : dataset) {
    auto it = by_id.find(ex.id);
    if (it == by_id.end()) throw Error("no result for example \"" + ex.id + "\"");
    const ExampleResult& r = *it->second;

    report.em += exact_match(r.prediction, ex.gold_answers);
    report.f1 += f1_score(r.prediction, ex.gold_answers);
    if (auto recall = recall_at_k(r.retrieved_ids, ex.gold_paragraph_ids, 15)) {
      recall_sum += *recall;
      ++report.recall_scored;
    } else {
      ++report.recall_excluded;
    }
    report.mean_api_calls += r.stats.api_calls;
    report.mean_distinct_docs += r.stats.distinct_docs;
    report.mean_rate += r.stats.rate();
    report.mean_evidence += r.stats.evidence_count;
    report.mean_fusion_calls += r.fusion_calls;
    total_calls += r.stats.api_calls;
    total_failures += r.stats.parse_failures;
  }

  if (report.n > 0) {
    double n = static_cast<double>(report.n);
    report.em /= n;
    report.f1 /= n;
    report.mean_api_calls /= n;
    report.mean_distinct_docs /= n;
    report.mean_rate /= n;
    report.mean_evidence /= n;
    report.mean_fusion_calls /= n;
  }
  if (report.recall_scored > 0) {
    report.recall_at_15 = recall_sum / static_cast<double>(report.recall_scored);
  }
  if (total_calls > 0) {
    report.parse_success_rate =
        1.0 - static_cast<double>(total_failures) / static_cast<double>(total_calls);
  }
  return report;
}

std::string report_to_json(const MetricsReport& r) {
  detail::ordered_json j;
  j["n"] = r.n;
  j["em"] = r.em;
  j["f1"] = r.f1;
  j["recall_at_15"] = r.recall_at_15;
  j["recall_scored"] = r.recall_scored;
  j["recall_excluded"] = r.recall_excluded;
  j["mean_api_calls"] = r.mean_api_calls;
  j["mean_distinct_docs"] = r.mean_distinct_docs;
  j["mean_rate"] = r.mean_rate;
  j["mean_evidence"] = r.mean_evidence;
  j["mean_fusion_calls"] = r.mean_fusion_calls;
  j["parse_success_rate"] = r.parse_success_rate;
  return j.dump(2) + "\n";
}

std::string report_to_table(const MetricsReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  out << "examples      " << r.n << "\n";
  out << "EM            " << 100.0 * r.em << "\n";
  out << "F1            " << 100.0 * r.f1 << "\n";
  out << "Recall@15     " << 100.0 * r.recall_at_15 << "  (" << r.recall_scored << " scored, "
      << r.recall_excluded << " without gold paragraphs)\n";
  out << "#API          " << r.mean_api_calls << "\n";
  out << "#Doc          " << r.mean_distinct_docs << "\n";
  out << "Rate          " << 100.0 * r.mean_rate << "\n";
  out << "#Evidence     " << r.mean_evidence << "\n";
  out << "fusion calls  " << r.mean_fusion_calls << "\n";
  out << "parse success " << 100.0 * r.parse_success_rate << "\n";
  return out.str();
}

}  // namespace tor
