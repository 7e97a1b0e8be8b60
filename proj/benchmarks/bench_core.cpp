#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "raven/index.hpp"
#include "raven/lab.hpp"
#include "raven/novelty.hpp"

using namespace raven;

namespace {

constexpr std::size_t kVocab = 1000;

const TokenCorpus& corpus(std::size_t tokens) {
  static std::map<std::size_t, TokenCorpus> cache;
  auto it = cache.find(tokens);
  if (it == cache.end()) it = cache.emplace(tokens, lab::synthetic_corpus(tokens, kVocab, 1)).first;
  return it->second;
}

const SuffixIndex& index(std::size_t tokens) {
  static std::map<std::size_t, SuffixIndex> cache;
  auto it = cache.find(tokens);
  if (it == cache.end()) it = cache.emplace(tokens, SuffixIndex::build(corpus(tokens), Vocab::synthetic(kVocab))).first;
  return it->second;
}

// A continuation that alternates copied training spans and random tokens.
GenerationRecord record(std::size_t tokens, std::size_t length) {
  std::mt19937_64 rng(7);
  const auto& ids = corpus(tokens).ids;
  GenerationRecord r{"bench", {}, {}};
  while (r.continuation.size() < length) {
    if (rng() % 2) {
      const std::size_t a = rng() % (ids.size() - 50);
      r.continuation.insert(r.continuation.end(), ids.begin() + a, ids.begin() + a + 1 + rng() % 50);
    } else {
      r.continuation.push_back(static_cast<TokenId>(rng() % kVocab));
    }
  }
  r.continuation.resize(length);
  r.prompt.assign(r.continuation.begin(), r.continuation.begin() + 64);
  return r;
}

void BM_IndexBuild(benchmark::State& state) {
  const auto& c = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(SuffixIndex::build(c, Vocab::synthetic(kVocab)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IndexBuild)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

void BM_MatchingStats(benchmark::State& state) {
  const auto& idx = index(1 << 20);
  const auto r = record(1 << 20, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(idx.matching_stats(r.continuation));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MatchingStats)->Arg(1000)->Arg(10000);

void BM_PointwiseScores(benchmark::State& state) {
  const auto& idx = index(1 << 20);
  const auto r = record(1 << 20, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pointwise_scores(idx, r, SourceMode::TrainingAndContext));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PointwiseScores)->Arg(1000)->Arg(10000);

void BM_Supercopies(benchmark::State& state) {
  const auto& idx = index(1 << 20);
  const auto r = record(1 << 20, 10000);
  for (auto _ : state) benchmark::DoNotOptimize(find_supercopies(idx, r, 20));
}
BENCHMARK(BM_Supercopies);

}  // namespace

BENCHMARK_MAIN();
