#pragma once

// Synthetic corpora and oracle scripts shared by the unit and acceptance tests.

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tor/corpus.hpp"

namespace tor::testing {

// A corpus shaped like a full tree: the children of node X are the only
// paragraphs containing the token "kidsofX", so retrieving "kidsofX" with the
// layer width returns exactly them. Every retrieval is fresh.
inline std::vector<Paragraph> fresh_tree_corpus(const std::vector<std::size_t>& widths) {
  std::vector<Paragraph> out;
  int counter = 0;
  std::vector<std::string> parents{"root"};
  for (std::size_t w : widths) {
    std::vector<std::string> next;
    for (const std::string& parent : parents) {
      for (std::size_t i = 0; i < w; ++i) {
        std::string num = std::to_string(++counter);
        std::string id = "n" + std::string(3 - std::min<std::size_t>(3, num.size()), '0') + num;
        std::string kin = "kidsof" + parent;
        // Siblings embed identically, so they tie and come back in id order.
        out.push_back({id, "", kin + " " + kin + " " + kin});
        next.push_back(id);
      }
    }
    parents = std::move(next);
  }
  return out;
}

inline const char* kFreshTreeQuestion = "kidsofroot";

// Always Search, always towards the children of the last paragraph.
inline std::string always_search_rules() {
  return R"({"template": ["review_cot", "review_direct"], "response": "- Thought: keep going.\n- Judgment: [RELEVANT]\n- Output: [QUERY] kidsof{last_id}"})"
         "\n"
         R"({"template": "mpc", "response": "- Information: [INFO] kidsof{last_id}\n- Answer: [ANSWER] unknown"})"
         "\n"
         R"({"default": "So the answer is unknown."})"
         "\n";
}

// Hand-traced repetitive pruning scenario, widths [2, 2], Direct expansion.
//
//   question "alpha" -> a, b
//   a: Search "gamma xray"   -> g (Accept), x (Reject)
//   b: Search "gamma yankee" -> g, y (Reject)
//
// With repetitive pruning g is inside accepted evidence when b's children are
// created, so it is skipped: 5 review calls instead of 6.
struct RepetitiveFixture {
  std::vector<Paragraph> corpus{{"a", "", "alpha apple"},
                                {"b", "", "alpha banana"},
                                {"g", "", "gamma"},
                                {"x", "", "xray"},
                                {"y", "", "yankee"}};
  std::string question = "alpha";
  std::vector<std::size_t> widths{2, 2};
  std::string rules =
      R"({"last": "a", "response": "- Judgment: [RELEVANT]\n- Output: [QUERY] gamma xray"})"
      "\n"
      R"({"last": "b", "response": "- Judgment: [RELEVANT]\n- Output: [QUERY] gamma yankee"})"
      "\n"
      R"({"last": "g", "response": "- Judgment: [RELEVANT]\n- Output: [ANSWER] g settles it"})"
      "\n"
      R"({"default": "- Judgment: [IRRELEVANT]"})"
      "\n";
  int calls_with_pruning = 5;
  int calls_without_pruning = 6;
};

// Two-hop question in the style of "population of the city in which Kirton
// End is located": g1 links Kirton End to Boston, g2 holds the census figure.
// d_ma is the Boston, Massachusetts distractor.
struct TwoHopFixture {
  std::vector<Paragraph> corpus;
  std::string question;
  std::vector<std::string> gold_answers;
  std::set<std::string> gold_ids;
  std::string tor_rules;
  std::string cor_rules;
  std::string dataset_line;
};

inline TwoHopFixture two_hop_fixture() {
  TwoHopFixture f;
  f.question =
      "According to the 2001 census, what was the population of the city in which Kirton End "
      "is located?";
  f.gold_answers = {"35,124"};
  f.gold_ids = {"g1", "g2"};

  f.corpus = {
      {"g1", "Kirton End",
       "Kirton End is a hamlet in the civil parish of Kirton in the Boston district of "
       "Lincolnshire, England. It is located about four miles south of the town of Boston."},
      {"g2", "Boston, Lincolnshire",
       "Boston is a market town and inland port in the borough of Boston in Lincolnshire, "
       "England. At the 2001 census the town had a population of 35,124."},
      {"d_ma", "Boston",
       "Boston is the capital and most populous city of Massachusetts. According to the 2001 "
       "census estimate the city had a population of 589,141."},
      {"d_kirton", "Kirton",
       "Kirton is a village and civil parish in Lincolnshire with a population of 3,556 at the "
       "2011 census."},
      {"d_lindsey", "Kirton in Lindsey",
       "Kirton in Lindsey is a small town in North Lincolnshire, located on the Lincoln Cliff."},
      {"d_holme", "Kirton Holme",
       "Kirton Holme is a hamlet in Lincolnshire near the village of Kirton."},
      {"d_skirbeck", "Skirbeck",
       "Skirbeck is a district and former parish of Boston in Lincolnshire."},
      {"d_frampton", "Frampton, Lincolnshire",
       "Frampton is a village in the Boston district of Lincolnshire, south of Kirton."},
  };
  const char* towns[][3] = {
      {"Spalding", "Lincolnshire", "22,081"},   {"Grantham", "Lincolnshire", "34,592"},
      {"Sleaford", "Lincolnshire", "14,627"},   {"Louth", "Lincolnshire", "15,930"},
      {"Skegness", "Lincolnshire", "18,910"},   {"Stamford", "Lincolnshire", "19,525"},
      {"Gainsborough", "Lincolnshire", "18,556"}, {"Horncastle", "Lincolnshire", "6,090"},
      {"Holbeach", "Lincolnshire", "7,247"},    {"Bourne", "Lincolnshire", "11,933"},
      {"Wisbech", "Cambridgeshire", "26,536"},  {"King's Lynn", "Norfolk", "34,565"},
      {"Newark", "Nottinghamshire", "25,376"},  {"Peterborough", "Cambridgeshire", "156,061"},
      {"Lincoln", "Lincolnshire", "85,963"},    {"Grimsby", "Lincolnshire", "87,574"},
      {"Scunthorpe", "Lincolnshire", "72,660"}, {"Cleethorpes", "Lincolnshire", "31,853"},
      {"Market Rasen", "Lincolnshire", "3,491"}, {"Brigg", "Lincolnshire", "5,076"},
      {"Alford", "Lincolnshire", "3,459"},      {"Mablethorpe", "Lincolnshire", "12,531"},
      {"Crowland", "Lincolnshire", "3,779"},    {"Long Sutton", "Lincolnshire", "4,809"},
      {"Donington", "Lincolnshire", "2,731"},   {"Swineshead", "Lincolnshire", "2,650"},
      {"Sutterton", "Lincolnshire", "1,471"},   {"Wyberton", "Lincolnshire", "3,968"},
      {"Fishtoft", "Lincolnshire", "6,900"},    {"Leverton", "Lincolnshire", "704"},
      {"Quincy", "Massachusetts", "88,025"},    {"Cambridge", "Massachusetts", "101,355"},
  };
  int i = 0;
  for (const auto& t : towns) {
    f.corpus.push_back({"d" + std::to_string(++i), t[0],
                        std::string(t[0]) + " is a town in " + t[1] +
                            ". At the 2001 census it had a population of " + t[2] + "."});
  }

  using nlohmann::json;
  auto line = [](json j) { return j.dump() + "\n"; };
  f.tor_rules =
      line({{"template", "review_cot"},
            {"path", {"g1", "g2"}},
            {"response",
             "- Thought: The first paragraph places Kirton End in the Boston district and the "
             "second gives the 2001 census population of Boston.\n- Judgment: [RELEVANT]\n"
             "- Judgment: [SUPPORTED]\n- Output: [ANSWER] Kirton End is located in Boston, "
             "Lincolnshire, which had a population of 35,124 at the 2001 census."}}) +
      line({{"template", "review_cot"},
            {"path", {"g1"}},
            {"response",
             "- Thought: Kirton End is in the Boston district, but the population is missing.\n"
             "- Judgment: [RELEVANT]\n- Judgment: [UNSUPPORTED]\n"
             "- Output: [QUERY] population of Boston, Lincolnshire at the 2001 census"}}) +
      line({{"template", "mpc"},
            {"path", {"g1"}},
            {"response",
             "- Information: [INFO] Boston is a market town in Lincolnshire, England. At the "
             "2001 census the town had a population of about 35,000.\n"
             "- Answer: [ANSWER] about 35,000"}}) +
      line({{"template", "review_cot"},
            {"response",
             "- Thought: The documents do not mention Kirton End.\n- Judgment: [IRRELEVANT]"}}) +
      line({{"template", "fusion_evidence"},
            {"contains", "g2"},
            {"excludes", "d_ma"},
            {"response",
             "Kirton End lies in the Boston district of Lincolnshire. Boston, Lincolnshire had "
             "35,124 residents at the 2001 census. So the answer is 35,124."}}) +
      line({{"default", "Boston had a population of 589,141. So the answer is 589,141."}});

  // The chain sees every paragraph retrieved so far, so the Massachusetts
  // distractor from the first turn stays in its context and misleads it.
  f.cor_rules =
      line({{"template", "cor"},
            {"contains", "d_ma"},
            {"response",
             "- Thought: Kirton End is in Boston, and the documents give Boston's 2001 census "
             "population.\n- Judgment: [RELEVANT]\n- Judgment: [SUPPORTED]\n"
             "- Output: [ANSWER] Kirton End is located in Boston, which had a population of "
             "589,141 at the 2001 census."}}) +
      line({{"template", "cor"},
            {"response",
             "- Judgment: [RELEVANT]\n- Output: [QUERY] population of Boston 2001 census"}}) +
      line({{"template", "fusion_evidence"},
            {"contains", "g2"},
            {"excludes", "d_ma"},
            {"response", "So the answer is 35,124."}}) +
      line({{"default", "Boston had a population of 589,141. So the answer is 589,141."}});

  json record{{"id", "kirton"},
              {"question", f.question},
              {"gold_answers", f.gold_answers},
              {"gold_paragraph_ids", f.gold_ids}};
  f.dataset_line = record.dump() + "\n";
  return f;
}

inline std::string corpus_jsonl(const std::vector<Paragraph>& corpus) {
  std::string out;
  for (const Paragraph& p : corpus) {
    out += nlohmann::json{{"id", p.id}, {"title", p.title}, {"text", p.text}}.dump() + "\n";
  }
  return out;
}

}  // namespace tor::testing
