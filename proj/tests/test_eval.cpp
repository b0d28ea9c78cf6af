#include <doctest.h>

#include <cmath>
#include <sstream>

#include "metric_oracle.hpp"
#include "tor/error.hpp"
#include "tor/eval.hpp"

#include <json.hpp>

using namespace tor;
namespace oracle = tor::testing::oracle;

namespace {

std::vector<std::string> golds(std::initializer_list<const char*> g) {
  return {g.begin(), g.end()};
}

std::vector<QAExample> parse(const std::string& text) {
  std::istringstream in(text);
  return load_dataset(in);
}

}  // namespace

TEST_CASE("normalization") {
  CHECK(normalize_answer("The  City of Boston!") == "city of boston");
  CHECK(normalize_answer("an apple, a day") == "apple day");
  CHECK(normalize_answer("35,124") == "35124");
  CHECK(normalize_answer("U.S.A.") == "usa");
  CHECK(normalize_answer("Theatre") == "theatre");  // only whole-word articles
  CHECK(normalize_answer("  \t\n") == "");
  CHECK(normalize_answer("ZÜRICH") == "zÜrich");  // ASCII lowercasing only
}

TEST_CASE("exact match and F1 by hand") {
  CHECK(exact_match("the Boston.", golds({"Boston"})) == 1);
  CHECK(exact_match("Boston MA", golds({"Boston"})) == 0);
  CHECK(exact_match("x", golds({"y", "X!"})) == 1);
  CHECK(f1_score("Boston", golds({"the city of Boston"})) == 0.5);
  CHECK(f1_score("the city of Boston", golds({"Boston"})) == 0.5);
  CHECK(f1_score("new york new york", golds({"new york"})) == doctest::Approx(2.0 / 3.0));
  CHECK(f1_score("a", golds({"the"})) == 1.0);
  CHECK(f1_score("", golds({"Boston"})) == 0.0);
  CHECK(f1_score("Boston", golds({"Paris", "Boston Lincolnshire"})) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(exact_match("x", {}), std::invalid_argument);
  CHECK_THROWS_AS(f1_score("x", {}), std::invalid_argument);
}

TEST_CASE("metrics agree with the reference implementation") {
  for (const auto& c : oracle::metric_cases()) {
    CAPTURE(c.prediction);
    CHECK(normalize_answer(c.prediction) == oracle::normalize(c.prediction));
    CHECK(exact_match(c.prediction, c.golds) == oracle::em(c.prediction, c.golds));
    CHECK(std::abs(f1_score(c.prediction, c.golds) - oracle::f1(c.prediction, c.golds)) < 1e-12);
    auto r = recall_at_k(c.retrieved, c.gold_ids, 15);
    double expect = oracle::recall15(c.retrieved, c.gold_ids);
    if (expect < 0) {
      CHECK_FALSE(r.has_value());
    } else {
      REQUIRE(r.has_value());
      CHECK(std::abs(*r - expect) < 1e-12);
    }
  }
}

TEST_CASE("recall at k") {
  std::vector<std::string> retrieved{"a", "b", "a", "c"};
  CHECK(recall_at_k(retrieved, {"a", "c"}, 15) == 1.0);
  CHECK(recall_at_k(retrieved, {"a", "c"}, 3) == 0.5);
  CHECK(recall_at_k(retrieved, {"z"}, 15) == 0.0);
  CHECK_FALSE(recall_at_k(retrieved, {}, 15).has_value());
  CHECK(recall_at_k({}, {"a"}, 15) == 0.0);
}

TEST_CASE("evaluate_run averages per example") {
  std::vector<QAExample> data{{"q1", "?", {"Boston"}, {"g1", "g2"}},
                              {"q2", "?", {"35,124"}, {}},
                              {"q3", "?", {"the city of Boston"}, {"g3"}}};
  std::vector<ExampleResult> results(3);
  results[0] = {"q1", "boston", {"g1", "x"}, {}, 1};
  results[0].stats.api_calls = 10;
  results[0].stats.distinct_docs = 5;
  results[0].stats.evidence_count = 2;
  results[0].stats.parse_failures = 1;
  results[1] = {"q2", "35124", {}, {}, 1};
  results[1].stats.api_calls = 0;
  results[2] = {"q3", "Boston", {"g3"}, {}, 0};
  results[2].stats.api_calls = 10;
  results[2].stats.distinct_docs = 10;
  results[2].stats.parse_failures = 3;
  // results arrive in any order
  std::swap(results[0], results[2]);

  MetricsReport r = evaluate_run(data, results);
  CHECK(r.n == 3);
  CHECK(r.em == doctest::Approx(2.0 / 3.0));
  CHECK(r.f1 == doctest::Approx((1.0 + 1.0 + 0.5) / 3.0));
  CHECK(r.recall_scored == 2);
  CHECK(r.recall_excluded == 1);
  CHECK(r.recall_at_15 == doctest::Approx((0.5 + 1.0) / 2.0));
  CHECK(r.mean_api_calls == doctest::Approx(20.0 / 3.0));
  CHECK(r.mean_distinct_docs == doctest::Approx(5.0));
  CHECK(r.mean_rate == doctest::Approx((0.5 + 0.0 + 1.0) / 3.0));
  CHECK(r.mean_evidence == doctest::Approx(2.0 / 3.0));
  CHECK(r.mean_fusion_calls == doctest::Approx(2.0 / 3.0));
  CHECK(r.parse_success_rate == doctest::Approx(1.0 - 4.0 / 20.0));

  std::string table = report_to_table(r);
  CHECK(table.find("EM            66.7\n") != std::string::npos);
  CHECK(table.find("Recall@15     75.0  (2 scored, 1 without gold paragraphs)") !=
        std::string::npos);
  auto j = nlohmann::ordered_json::parse(report_to_json(r));
  CHECK(j["recall_scored"] == 2);
  CHECK(j.begin().key() == "n");
}

TEST_CASE("evaluate_run refuses incomplete or duplicated runs") {
  std::vector<QAExample> data{{"q1", "?", {"a"}, {}}, {"q2", "?", {"b"}, {}}};
  std::vector<ExampleResult> partial{{"q1", "a", {}, {}, 1}};
  CHECK_THROWS_WITH_AS(evaluate_run(data, partial), "no result for example \"q2\"", Error);
  std::vector<ExampleResult> dup{{"q1", "a", {}, {}, 1}, {"q1", "a", {}, {}, 1}};
  CHECK_THROWS_AS(evaluate_run(data, dup), Error);
  // extra results for unknown ids are ignored
  std::vector<ExampleResult> extra{{"q1", "a", {}, {}, 1}, {"q2", "b", {}, {}, 1},
                                   {"q9", "z", {}, {}, 1}};
  CHECK(evaluate_run(data, extra).em == 1.0);
  MetricsReport none = evaluate_run({}, {});
  CHECK(none.n == 0);
  CHECK(none.parse_success_rate == 1.0);
}

TEST_CASE("dataset loading") {
  auto ok = parse(
      R"({"id": "q1", "question": "Where?", "gold_answers": ["Boston"], "gold_paragraph_ids": ["g1", "g2"]})"
      "\n\n"
      R"({"id": "q2", "question": "Who?", "gold_answers": ["x", "y"]})"
      "\n");
  REQUIRE(ok.size() == 2);
  CHECK(ok[0].gold_paragraph_ids == std::set<std::string>{"g1", "g2"});
  CHECK(ok[1].gold_answers.size() == 2);
  CHECK(ok[1].gold_paragraph_ids.empty());

  auto fails_on_line = [](const std::string& text, std::size_t line) {
    CAPTURE(text);
    try {
      parse(text);
      FAIL("expected a FormatError");
    } catch (const FormatError& e) {
      CHECK(e.line() == line);
    }
  };
  fails_on_line(R"({"id": "q1", "question": "?", "gold_answers": []})", 1);
  fails_on_line(R"({"id": "q1", "question": "?"})", 1);
  fails_on_line("{\"id\": \"q1\", \"question\": \"?\", \"gold_answers\": [\"a\"]}\n"
                "{\"id\": \"q1\", \"question\": \"?\", \"gold_answers\": [\"a\"]}",
                2);
  fails_on_line("{\"id\": \"\", \"question\": \"?\", \"gold_answers\": [\"a\"]}", 1);
  fails_on_line("{\"id\": \"q\", \"question\": \"?\", \"gold_answers\": [1]}", 1);
  fails_on_line("\n\nnot json", 3);
  CHECK_THROWS_AS(load_dataset(std::filesystem::path("/nonexistent/data.jsonl")), Error);
}
