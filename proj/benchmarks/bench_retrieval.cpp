#include <benchmark/benchmark.h>

#include <random>

#include "support.hpp"
#include "tor/corpus.hpp"

namespace {

std::vector<tor::Paragraph> random_corpus(std::size_t n) {
  std::mt19937_64 rng(n);
  std::vector<tor::Paragraph> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    for (int w = 0; w < 40; ++w) text += "w" + std::to_string(rng() % 5000) + " ";
    out.push_back({"p" + std::to_string(i), "t" + std::to_string(i), text});
  }
  return out;
}

void BM_HashEmbed(benchmark::State& state) {
  tor::HashEmbedder e(256);
  std::string text = random_corpus(1)[0].text;
  for (auto _ : state) benchmark::DoNotOptimize(e.embed(text));
}
BENCHMARK(BM_HashEmbed);

void BM_Retrieve(benchmark::State& state) {
  tor::HashEmbedder e(256);
  tor::CorpusIndex index =
      tor::testing::build_index(random_corpus(static_cast<std::size_t>(state.range(0))), e);
  for (auto _ : state) benchmark::DoNotOptimize(index.retrieve("w17 w230 w4999", 5, e));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Retrieve)->Arg(1000)->Arg(10000)->Arg(50000);

}  // namespace
