#include <benchmark/benchmark.h>

#include <sstream>

#include "fixtures.hpp"
#include "support.hpp"
#include "tor/oracle.hpp"
#include "tor/tree.hpp"

namespace {

// Full expansion against the scripted oracle: measures orchestration overhead
// (retrieval, prompt rendering, parsing, trace building) without a model.
void BM_FullTree(benchmark::State& state) {
  std::vector<std::size_t> widths{5, 3, 3};
  tor::HashEmbedder e;
  tor::CorpusIndex index = tor::testing::build_index(tor::testing::fresh_tree_corpus(widths), e);
  std::istringstream rules(tor::testing::always_search_rules());
  tor::ScriptedOracle oracle = tor::ScriptedOracle::load(rules);
  tor::PromptLibrary prompts = tor::PromptLibrary::builtin();
  tor::TreeConfig cfg;
  cfg.widths = widths;
  cfg.relevance_pruning = false;
  cfg.repetitive_pruning = false;
  cfg.expansion = static_cast<tor::ExpansionStrategy>(state.range(0));
  for (auto _ : state) {
    tor::LlmSession s(oracle);
    benchmark::DoNotOptimize(run_tree(tor::testing::kFreshTreeQuestion, cfg, index, e, s, prompts));
  }
}
BENCHMARK(BM_FullTree)
    ->Arg(static_cast<int>(tor::ExpansionStrategy::Direct))
    ->Arg(static_cast<int>(tor::ExpansionStrategy::Mpc));

}  // namespace
