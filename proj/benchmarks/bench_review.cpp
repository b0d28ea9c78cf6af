#include <benchmark/benchmark.h>

#include <random>

#include "generators.hpp"

namespace {

void BM_ParseReview(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<std::string> texts;
  for (int i = 0; i < 256; ++i) texts.push_back(tor::render_canonical_review(tor::testing::random_decision(rng)));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(tor::parse_review_output(texts[i++ % texts.size()]));
}
BENCHMARK(BM_ParseReview);

void BM_ParseSoup(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::vector<std::string> texts;
  for (int i = 0; i < 256; ++i) texts.push_back(tor::testing::random_soup(rng));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(tor::parse_review_output(texts[i++ % texts.size()]));
}
BENCHMARK(BM_ParseSoup);

}  // namespace
