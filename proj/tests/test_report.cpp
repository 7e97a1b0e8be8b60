#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "raven/commands.hpp"
#include "raven/report.hpp"

using namespace raven;
using namespace raven::report;

namespace {

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "<no error>";
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto dir = std::filesystem::temp_directory_path() / "raven_report_tests";
  std::filesystem::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p, std::ios::binary) << content;
  return p;
}

}  // namespace

TEST(Report, CsvLayout) {
  Header h{"ngram", 0xabcULL, 0x1234ULL, {{"mode", "both"}}};
  Table t{{"n", "fraction", "text"}, {{Cell(std::uint64_t{2}), Cell(1.0 / 3.0), Cell(std::string("a, \"b\""))},
                                      {Cell(std::uint64_t{3}), Cell(), Cell(std::string("c"))}}};
  std::ostringstream out;
  write_report(out, h, t, Format::Csv);
  const std::string expect = std::string("# raven ") + std::string(toolkit_version()) +
                             "\n# command: ngram\n# config_hash: 0000000000000abc\n"
                             "# index_fingerprint: 0000000000001234\n# mode: both\n"
                             "n,fraction,text\n2,0.333333,\"a, \"\"b\"\"\"\n3,,c\n";
  EXPECT_EQ(out.str(), expect);

  std::istringstream in(out.str());
  const auto back = read_csv(in);
  EXPECT_EQ(back.columns, t.columns);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(format_cell(back.rows[0][2]), "a, \"b\"");
}

TEST(Report, JsonMirror) {
  Header h{"ngram", 1, std::nullopt, {}};
  Table t{{"n", "fraction"}, {{Cell(std::uint64_t{1}), Cell(0.5)}, {Cell(std::uint64_t{2}), Cell()}}};
  std::ostringstream out;
  write_report(out, h, t, Format::Json);
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j["command"], "ngram");
  EXPECT_FALSE(j.contains("index_fingerprint"));
  EXPECT_EQ(j["rows"][0]["fraction"], 0.5);
  EXPECT_TRUE(j["rows"][1]["fraction"].is_null());
}

TEST(Report, ConfigHashTracksSemanticFields) {
  commands::RunConfig base;
  base.index = "a.idx";
  base.generations = "g.jsonl";
  const auto h0 = config_hash(base.semantic_fields());

  auto same = base;
  same.out = "elsewhere.csv";
  same.format = Format::Json;
  same.jobs = 8;
  same.index = "other.idx";
  EXPECT_EQ(config_hash(same.semantic_fields()), h0);

  std::set<std::uint64_t> hashes{h0};
  auto vary = [&](auto mutate) {
    auto c = base;
    mutate(c);
    return hashes.insert(config_hash(c.semantic_fields())).second;
  };
  EXPECT_TRUE(vary([](auto& c) { c.n_max = 9; }));
  EXPECT_TRUE(vary([](auto& c) { c.n_min = 2; }));
  EXPECT_TRUE(vary([](auto& c) { c.cap = 10; }));
  EXPECT_TRUE(vary([](auto& c) { c.mode = SourceMode::TrainingOnly; }));
  EXPECT_TRUE(vary([](auto& c) { c.ngrams_cross_prompt = true; }));
  EXPECT_TRUE(vary([](auto& c) { c.prompt_length_tag = "512"; }));
  EXPECT_TRUE(vary([](auto& c) { c.analysis = commands::Analysis::Quotes; }));
}

TEST(SamplePrompts, DistinctWindowsWithinDocuments) {
  TokenCorpus corpus = TokenCorpus::from_documents({{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}});
  const auto recs = sample_prompts(corpus, 2, 2, 3, 1);
  ASSERT_EQ(recs.size(), 2u);
  std::set<TokenSeq> windows;
  for (const auto& r : recs) {
    EXPECT_EQ(r.prompt.size(), 2u);
    EXPECT_EQ(r.continuation.size(), 3u);
    TokenSeq w = r.prompt;
    w.insert(w.end(), r.continuation.begin(), r.continuation.end());
    // Every feasible window is a run of consecutive ids here.
    for (std::size_t i = 1; i < w.size(); ++i) EXPECT_EQ(w[i], w[i - 1] + 1);
    windows.insert(w);
  }
  EXPECT_EQ(windows.size(), 2u);

  EXPECT_EQ(sample_prompts(corpus, 6, 2, 3, 1).size(), 6u);
  EXPECT_EQ(error_of([&] { sample_prompts(corpus, 7, 2, 3, 1); }), "cannot sample distinct prompts");
  EXPECT_NE(error_of([&] { sample_prompts(corpus, 1, 8, 3, 1); }).find("corpus too short"), std::string::npos);
}

TEST(SamplePrompts, EmptyPromptsAndDeterminism) {
  const auto corpus = TokenCorpus::from_documents({{0, 1, 2, 3}, {4, 5, 6}});
  const auto a = sample_prompts(corpus, 4, 0, 2, 9);
  for (const auto& r : a) EXPECT_TRUE(r.prompt.empty());
  const auto b = sample_prompts(corpus, 4, 0, 2, 9);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].continuation, b[i].continuation);
  // Windows never span a document boundary.
  for (const auto& r : a) EXPECT_FALSE(r.continuation == (TokenSeq{3, 4}));
}

TEST(SamplePrompts, RepeatedTextIsNotSampledTwice) {
  const auto corpus = TokenCorpus::from_documents({{1, 1, 1, 1, 1}});
  EXPECT_EQ(sample_prompts(corpus, 1, 1, 1, 0).size(), 1u);
  EXPECT_EQ(error_of([&] { sample_prompts(corpus, 2, 1, 1, 0); }), "cannot sample distinct prompts");
}

TEST(ReadGrid, Configs) {
  const auto p = temp_file("grid.json", R"([{"top_k": 5}, {"top_k": null, "top_p": 0.9, "seed": 3},
                                            {"top_k": "inf", "temperature": 1.5}])");
  const auto grid = commands::read_grid(p);
  ASSERT_EQ(grid.size(), 3u);
  EXPECT_EQ(grid[0].top_k, 5u);
  EXPECT_FALSE(grid[1].top_k.has_value());
  EXPECT_DOUBLE_EQ(grid[1].top_p, 0.9);
  EXPECT_EQ(grid[1].seed, 3u);
  EXPECT_DOUBLE_EQ(grid[2].temperature, 1.5);
  EXPECT_THROW(commands::read_grid(temp_file("bad.json", R"([{"top_k": 0}])")), Error);
}
