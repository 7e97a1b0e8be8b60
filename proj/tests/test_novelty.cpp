#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "raven/error.hpp"
#include "raven/novelty.hpp"

using namespace raven;

namespace {

constexpr TokenId a = 0, b = 1, c = 2, d = 3, z = 100;
const std::vector<TokenSeq> kToyDocs{{a, b, c, a, b, d}, {c, a, b, c}};

SuffixIndex toy_index() {
  return SuffixIndex::build(TokenCorpus::from_documents(kToyDocs), Vocab::from_tokens({"a", "b", "c", "d"}));
}

GenerationRecord rec(TokenSeq cont, TokenSeq prompt = {}) { return {"r", std::move(prompt), std::move(cont)}; }

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "<no error>";
}

constexpr SourceMode kModes[] = {SourceMode::TrainingAndContext, SourceMode::TrainingOnly, SourceMode::ContextOnly};

}  // namespace

TEST(IsDuplicated, ToyExamples) {
  const auto idx = toy_index();
  EXPECT_FALSE(is_duplicated(idx, rec({a, b, d, c}), 2, 3, SourceMode::TrainingAndContext));
  EXPECT_TRUE(is_duplicated(idx, rec({a, b, d, c}), 2, 1, SourceMode::TrainingOnly));
  EXPECT_TRUE(is_duplicated(idx, rec({a, b, a, b}), 2, 3, SourceMode::ContextOnly));
  EXPECT_FALSE(is_duplicated(idx, rec({a, b, a, b}), 2, 1, SourceMode::ContextOnly));
}

TEST(IsDuplicated, WindowLimit) {
  const auto idx = toy_index();
  EXPECT_EQ(error_of([&] { is_duplicated(idx, rec({a, b}), 3, 1, SourceMode::TrainingOnly); }),
            "n-gram exceeds continuation prefix");
  // With cross-prompt n-grams the prompt extends the window.
  EXPECT_TRUE(is_duplicated(idx, rec({b}, {a}), 2, 0, SourceMode::TrainingOnly, {true}));
}

TEST(IsDuplicated, ContextIncludesPrompt) {
  const auto idx = toy_index();
  const auto r = rec({z, z + 1}, {z, z + 1});
  EXPECT_TRUE(is_duplicated(idx, r, 2, 1, SourceMode::ContextOnly));
  EXPECT_FALSE(is_duplicated(idx, r, 2, 1, SourceMode::TrainingOnly));
}

TEST(IsDuplicated, OverlappingSelfOccurrence) {
  // "x x x": the bigram ending at t=2 starts at 1, and "x x" also starts at 0.
  const auto idx = toy_index();
  EXPECT_TRUE(is_duplicated(idx, rec({z, z, z}), 2, 2, SourceMode::ContextOnly));
  EXPECT_FALSE(is_duplicated(idx, rec({z, z, z}), 3, 2, SourceMode::ContextOnly));
}

TEST(NoveltyProfile, ToyBigrams) {
  const auto idx = toy_index();
  const std::vector<GenerationRecord> recs{rec({a, b, d, c})};
  const auto p = novelty_profile(idx, recs, 2, 2, SourceMode::TrainingAndContext);
  ASSERT_EQ(p.rows.size(), 1u);
  EXPECT_EQ(p.rows[0].total, 3u);
  EXPECT_EQ(p.rows[0].novel, 1u);
  EXPECT_DOUBLE_EQ(*p.rows[0].fraction, 1.0 / 3.0);
}

TEST(NoveltyProfile, VerbatimAndOov) {
  const auto idx = toy_index();
  const std::vector<GenerationRecord> verbatim{rec(kToyDocs[0])};
  for (const auto& row : novelty_profile(idx, verbatim, 1, 6, SourceMode::TrainingAndContext).rows)
    EXPECT_EQ(*row.fraction, 0.0) << row.n;

  const std::vector<GenerationRecord> oov{rec({z, z + 1, z + 2, z + 3})};
  for (const auto& row : novelty_profile(idx, oov, 1, 4, SourceMode::TrainingOnly).rows)
    EXPECT_EQ(*row.fraction, 1.0) << row.n;
}

TEST(NoveltyProfile, TotalsAndEmptyRows) {
  const auto idx = toy_index();
  const std::vector<GenerationRecord> recs{rec({a, b, d}), rec({c})};
  const auto p = novelty_profile(idx, recs, 1, 4, SourceMode::TrainingOnly);
  EXPECT_EQ(p.rows[0].total, 4u);
  EXPECT_EQ(p.rows[1].total, 2u);
  EXPECT_EQ(p.rows[2].total, 1u);
  EXPECT_EQ(p.rows[3].total, 0u);
  EXPECT_FALSE(p.rows[3].fraction.has_value());
  EXPECT_EQ(error_of([&] { novelty_profile(idx, {}, 1, 2, SourceMode::TrainingOnly); }), "no generation records");
}

TEST(NoveltyProfile, MicroAndMacroDiffer) {
  const auto idx = toy_index();
  // Record 1: one novel unigram of four. Record 2: a single novel unigram.
  const std::vector<GenerationRecord> recs{rec({a, b, c, z}), rec({z})};
  const auto row = novelty_profile(idx, recs, 1, 1, SourceMode::TrainingOnly).rows[0];
  EXPECT_DOUBLE_EQ(*row.fraction, 2.0 / 5.0);
  EXPECT_DOUBLE_EQ(*row.macro_fraction, (0.25 + 1.0) / 2.0);
}

TEST(PointwiseScores, ToyExamples) {
  const auto idx = toy_index();
  const auto s = pointwise_scores(idx, rec({a, b, d, c}), SourceMode::TrainingAndContext, 5);
  EXPECT_EQ(s.scores, (std::vector<std::uint32_t>{2, 3, 4, 2}));
  EXPECT_DOUBLE_EQ(s.truncated_mean, 2.75);

  EXPECT_EQ(pointwise_scores(idx, rec({z}), SourceMode::TrainingAndContext).scores, std::vector<std::uint32_t>{1});

  const auto v = pointwise_scores(idx, rec(kToyDocs[0]), SourceMode::TrainingAndContext, 5);
  EXPECT_EQ(v.scores, (std::vector<std::uint32_t>{2, 3, 4, 5, 6, 7}));
  EXPECT_DOUBLE_EQ(v.truncated_mean, 4.0);
  EXPECT_DOUBLE_EQ(v.mean, 27.0 / 6.0);
}

TEST(PointwiseScores, SmallestNovelFourGram) {
  const Vocab vocab = Vocab::from_tokens({"we", "will", "not", "be", "late", "rules", "apply", "these"});
  auto ids = [&](std::initializer_list<const char*> words) {
    TokenSeq out;
    for (auto w : words) out.push_back(*vocab.find(w));
    return out;
  };
  const auto corpus = TokenCorpus::from_documents(
      {ids({"we", "will", "not", "be", "late"}), ids({"rules", "will", "apply"})});
  const auto idx = SuffixIndex::build(corpus, vocab);
  const auto s = pointwise_scores(idx, rec(ids({"these", "rules", "will", "not", "be"})), SourceMode::TrainingOnly);
  EXPECT_EQ(s.scores.back(), 4u);
  EXPECT_EQ(s.scores, (std::vector<std::uint32_t>{1, 2, 3, 3, 4}));
}

TEST(PointwiseScores, UncappedMeanEqualsPlainMean) {
  const std::vector<std::uint32_t> scores{1, 7, 3, 12, 2};
  EXPECT_DOUBLE_EQ(truncated_mean(scores, kNoCap), 25.0 / 5.0);
  EXPECT_DOUBLE_EQ(truncated_mean(scores, 5), (1 + 5 + 3 + 5 + 2) / 5.0);
}

TEST(Supercopies, ToyExamples) {
  const auto idx = toy_index();
  const auto spans = find_supercopies(idx, rec({c, a, b, c, a, b, d}), 3);
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(spans[0].start, 0u);
  EXPECT_EQ(spans[0].length, 4u);
  EXPECT_EQ(spans[0].train_occurrences, 1u);
  EXPECT_EQ(spans[1].start, 1u);
  EXPECT_EQ(spans[1].length, 6u);
  EXPECT_EQ(spans[1].train_occurrences, 1u);
  EXPECT_FALSE(spans[1].lead_100gram_occurrences.has_value());

  EXPECT_TRUE(find_supercopies(idx, rec({d, c, d, c}), 3).empty());

  const auto whole = find_supercopies(idx, rec(kToyDocs[1]), 3);
  ASSERT_EQ(whole.size(), 1u);
  EXPECT_EQ(whole[0].start, 0u);
  EXPECT_EQ(whole[0].length, 4u);
  EXPECT_EQ(whole[0].train_occurrences, 1u);
  EXPECT_THROW(find_supercopies(idx, rec({a}), 1), Error);
}

TEST(Supercopies, LeadHundredGram) {
  TokenSeq doc(150);
  for (std::size_t i = 0; i < doc.size(); ++i) doc[i] = static_cast<TokenId>(i);
  TokenSeq second(doc.begin(), doc.begin() + 100);
  const auto idx = SuffixIndex::build(TokenCorpus::from_documents({doc, second}), Vocab::synthetic(150));
  const auto spans = find_supercopies(idx, rec(TokenSeq(doc.begin(), doc.begin() + 120)), 100);
  ASSERT_EQ(spans.size(), 1u);
  EXPECT_EQ(spans[0].length, 120u);
  EXPECT_EQ(spans[0].train_occurrences, 1u);
  EXPECT_EQ(spans[0].lead_100gram_occurrences, 2u);
}

TEST(PositionProfile, BinsAndValues) {
  TokenSeq doc(300);
  for (std::size_t i = 0; i < doc.size(); ++i) doc[i] = static_cast<TokenId>(i);
  const auto idx = SuffixIndex::build(TokenCorpus::from_documents({doc}), Vocab::synthetic(300));

  const std::vector<GenerationRecord> copy{rec(doc)};
  const auto p = position_profile(idx, copy);
  ASSERT_EQ(p.bins.size(), 2u);
  EXPECT_EQ(p.bins[0].begin, 100u);
  EXPECT_EQ(p.bins[0].end, 200u);
  EXPECT_EQ(p.bins[1].begin, 200u);
  EXPECT_EQ(p.bins[1].end, 300u);
  for (const auto& bin : p.bins) EXPECT_DOUBLE_EQ(bin.mean, 10.0);

  TokenSeq oov(300);
  for (std::size_t i = 0; i < oov.size(); ++i) oov[i] = static_cast<TokenId>(1000 + i);
  const std::vector<GenerationRecord> novel{rec(oov)};
  for (const auto& bin : position_profile(idx, novel).bins) EXPECT_DOUBLE_EQ(bin.mean, 1.0);

  const std::vector<GenerationRecord> short_recs{rec(TokenSeq(doc.begin(), doc.begin() + 150))};
  EXPECT_EQ(error_of([&] { position_profile(idx, short_recs); }), "insufficient length for position profile");
}

TEST(PositionProfile, MatchesBruteForceMeans) {
  std::mt19937_64 rng(21);
  for (int iter = 0; iter < 5; ++iter) {
    auto inst = oracle::random_instance(rng, 400, 120, 20, 3);
    for (auto& r : inst.records) r.continuation.resize(std::max<std::size_t>(r.continuation.size(), 40), 7);
    const auto idx = SuffixIndex::build(TokenCorpus::from_documents(inst.docs), Vocab::synthetic(inst.vocab));
    const std::size_t width = 20;
    const auto p = position_profile(idx, inst.records, SourceMode::TrainingOnly, width, 10);
    std::map<std::size_t, std::pair<double, std::size_t>> sums;
    for (const auto& r : inst.records) {
      const auto s = oracle::scores_fast(inst.docs, r, SourceMode::TrainingOnly);
      for (std::size_t t = width; t < s.size(); ++t) {
        auto& [sum, n] = sums[t / width];
        sum += std::min<std::uint32_t>(s[t], 10);
        ++n;
      }
    }
    ASSERT_EQ(p.bins.size(), sums.size());
    std::size_t k = 0;
    for (const auto& [bin, acc] : sums) {
      EXPECT_EQ(p.bins[k].begin, bin * width);
      EXPECT_EQ(p.bins[k].tokens, acc.second);
      EXPECT_NEAR(p.bins[k].mean, acc.first / static_cast<double>(acc.second), 1e-12);
      ++k;
    }
  }
}

// Smaller random suite than the acceptance run; the direct per-n oracle is
// used here, the scan-based oracle in the acceptance binary.
TEST(NoveltyOracle, RandomInstances) {
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 25; ++iter) {
    const auto inst = oracle::random_instance(rng, 300, 60, 15);
    const auto idx = SuffixIndex::build(TokenCorpus::from_documents(inst.docs), Vocab::synthetic(inst.vocab));
    for (bool cross : {false, true}) {
      const NoveltyOptions opts{cross};
      for (auto mode : kModes) {
        for (const auto& r : inst.records) {
          const auto got = pointwise_scores(idx, r, mode, 5, opts);
          ASSERT_EQ(got.scores, oracle::scores(inst.docs, r, mode, cross)) << "iter " << iter;
          ASSERT_EQ(got.scores, oracle::scores_fast(inst.docs, r, mode, cross));
        }
        const auto profile = novelty_profile(idx, inst.records, 1, 10, mode, opts);
        for (const auto& row : profile.rows) {
          std::uint64_t total = 0, novel = 0;
          for (const auto& r : inst.records) {
            for (std::size_t t = 0; t < r.continuation.size(); ++t) {
              if (row.n > oracle::window(r, t, cross)) continue;
              ++total;
              novel += !oracle::duplicated(inst.docs, r, row.n, t, mode);
            }
          }
          ASSERT_EQ(row.total, total);
          ASSERT_EQ(row.novel, novel);
        }
      }
    }
    for (const auto& r : inst.records) {
      for (std::uint32_t th : {3u, 5u}) {
        const auto got = find_supercopies(idx, r, th);
        const auto expect = oracle::supercopies(inst.docs, r.continuation, th);
        ASSERT_EQ(got.size(), expect.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
          EXPECT_EQ(got[i].start, expect[i].start);
          EXPECT_EQ(got[i].length, expect[i].length);
          EXPECT_EQ(got[i].train_occurrences, expect[i].occurrences);
        }
      }
    }
  }
}

TEST(NoveltyProperties, DownwardClosureAndModeAlgebra) {
  std::mt19937_64 rng(123);
  for (int iter = 0; iter < 20; ++iter) {
    const auto inst = oracle::random_instance(rng, 200, 40, 10);
    const auto idx = SuffixIndex::build(TokenCorpus::from_documents(inst.docs), Vocab::synthetic(inst.vocab));
    for (const auto& r : inst.records) {
      for (std::size_t t = 0; t < r.continuation.size(); ++t) {
        for (std::uint32_t n = 1; n <= t + 1; ++n) {
          const bool both = is_duplicated(idx, r, n, t, SourceMode::TrainingAndContext);
          const bool train = is_duplicated(idx, r, n, t, SourceMode::TrainingOnly);
          const bool ctx = is_duplicated(idx, r, n, t, SourceMode::ContextOnly);
          ASSERT_EQ(both, train || ctx);
          if (n >= 2) {
            for (auto mode : kModes) {
              if (is_duplicated(idx, r, n, t, mode)) {
                ASSERT_TRUE(is_duplicated(idx, r, n - 1, t, mode));
              }
            }
          }
        }
      }
    }
  }
}

TEST(NoveltyProperties, ScoreBounds) {
  std::mt19937_64 rng(77);
  for (int iter = 0; iter < 20; ++iter) {
    const auto inst = oracle::random_instance(rng, 500, 100, 20);
    const auto idx = SuffixIndex::build(TokenCorpus::from_documents(inst.docs), Vocab::synthetic(inst.vocab));
    for (const auto& r : inst.records) {
      const auto s = pointwise_scores(idx, r, SourceMode::TrainingAndContext, kNoCap);
      for (std::size_t t = 0; t < s.scores.size(); ++t) {
        ASSERT_GE(s.scores[t], 1u);
        ASSERT_LE(s.scores[t], t + 2);
      }
      ASSERT_DOUBLE_EQ(s.truncated_mean, s.mean);
    }
  }
}

TEST(SourceModeNames, RoundTrip) {
  for (auto m : kModes) EXPECT_EQ(parse_source_mode(to_string(m)), m);
  EXPECT_THROW(parse_source_mode("neither"), Error);
}
