#include <gtest/gtest.h>

#include <random>

#include "emi/preprocess.hpp"

using namespace emi;
using namespace emi::preprocess;

namespace {

CommonWordList synthetic_list() {
  std::vector<std::string> words;
  for (int i = 0; i < 100; ++i) words.push_back("w" + std::to_string(i));
  return CommonWordList("en", words);
}

corpus::SpeechRecord speech(const std::string& id, const std::string& text, const std::string& lang = "en") {
  corpus::SpeechRecord r;
  r.speech_id = id;
  r.country = "XA";
  r.year = 2001;
  r.date = "2001-02-03";
  r.language = lang;
  r.text = text;
  return r;
}

std::string repeat(const std::string& token, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + token;
  return out;
}

}  // namespace

TEST(Tokenize, KeepsPunctuationAttached) {
  EXPECT_EQ(tokenize("  Hello, world!  Again. "), (std::vector<std::string>{"Hello,", "world!", "Again."}));
  EXPECT_TRUE(tokenize("   ").empty());
}

TEST(CommonWordList, RequiresExactlyHundredUniqueLowercaseWords) {
  std::vector<std::string> words;
  for (int i = 0; i < 99; ++i) words.push_back("w" + std::to_string(i));
  EXPECT_THROW(CommonWordList("en", words), std::invalid_argument);
  words.push_back("w0");
  EXPECT_THROW(CommonWordList("en", words), std::invalid_argument);
  words.back() = "UPPER";
  EXPECT_THROW(CommonWordList("en", words), std::invalid_argument);
  EXPECT_NO_THROW((void)synthetic_list());
}

TEST(CommonWordList, ShippedListsLoad) {
  const std::filesystem::path data(EMI_DATA_DIR);
  for (const char* lang : {"en", "de"}) {
    const auto list = CommonWordList::load(data / "common_words" / (std::string(lang) + ".txt"));
    EXPECT_EQ(list.language(), lang);
    EXPECT_EQ(list.words().size(), 100u);
  }
}

TEST(CommonWordRatio, CountsLookupForms) {
  const auto list = synthetic_list();
  EXPECT_DOUBLE_EQ(common_word_ratio("W1, w2. zz zz", list), 0.5);
  EXPECT_THROW((void)common_word_ratio("   ", list), UndefinedRatio);
}

TEST(LexicalFilters, BoundariesAreInclusiveForKeeping) {
  const auto list = synthetic_list();
  auto d = apply_lexical_filters(speech("a", repeat("w1", 10)), list);
  EXPECT_FALSE(d.keep);
  EXPECT_EQ(d.reason, "min_tokens");
  EXPECT_TRUE(apply_lexical_filters(speech("a", repeat("w1", 11)), list).keep);

  d = apply_lexical_filters(speech("a", repeat("w1", 49) + " " + repeat("zz", 951)), list);
  EXPECT_FALSE(d.keep);
  EXPECT_EQ(d.reason, "lexical_ratio");
  EXPECT_DOUBLE_EQ(d.ratio, 0.049);
  d = apply_lexical_filters(speech("a", repeat("w1", 50) + " " + repeat("zz", 950)), list);
  EXPECT_TRUE(d.keep);
  EXPECT_EQ(d.ratio, 0.05);
}

TEST(LexicalFilters, NameListsFallBelowTheRatio) {
  const auto list = synthetic_list();
  const auto d = apply_lexical_filters(
      speech("n", "Smith, Jones, Taylor, Brown, Williams, Wilson, Johnson, Davies, Robinson, Wright, Evans, Hall"),
      list);
  EXPECT_FALSE(d.keep);
  EXPECT_EQ(d.reason, "lexical_ratio");
}

TEST(ChunkSizes, ExactExamples) {
  EXPECT_EQ(chunk_sizes(320), (std::vector<std::size_t>{150, 170}));
  EXPECT_EQ(chunk_sizes(200), (std::vector<std::size_t>{150, 50}));
  EXPECT_EQ(chunk_sizes(150), (std::vector<std::size_t>{150}));
  EXPECT_EQ(chunk_sizes(199), (std::vector<std::size_t>{199}));
  EXPECT_EQ(chunk_sizes(300), (std::vector<std::size_t>{150, 150}));
  EXPECT_EQ(chunk_sizes(30), (std::vector<std::size_t>{30}));
  EXPECT_TRUE(chunk_sizes(0).empty());
}

TEST(ChunkSizes, ConservationAndBoundsProperty) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 5000; ++i) {
    const std::size_t n = 11 + rng() % 5000;
    const auto sizes = chunk_sizes(n);
    std::size_t total = 0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      total += sizes[k];
      if (n >= 50) {
        EXPECT_GE(sizes[k], 50u);
        EXPECT_LE(sizes[k], 199u);
      }
      if (k + 1 < sizes.size()) {
        EXPECT_EQ(sizes[k], 150u);
      }
    }
    EXPECT_EQ(total, n);
  }
}

TEST(Chunk, SegmentsCarryProvenanceAndConserveTokens) {
  std::string text;
  for (int i = 0; i < 320; ++i) text += "t" + std::to_string(i) + (i % 7 == 0 ? ",  " : " ");
  const auto segs = chunk(speech("sp1", text));
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[0].segment_id, segment_id("sp1", 0));
  EXPECT_EQ(segs[1].chunk_index, 1u);
  EXPECT_EQ(segs[0].token_count, 150u);
  EXPECT_EQ(segs[1].token_count, 170u);
  EXPECT_EQ(segs[1].speech_id, "sp1");
  EXPECT_EQ(segs[1].country, "XA");
  EXPECT_EQ(segs[1].year, 2001);
  EXPECT_EQ(tokenize(segs[0].text).front(), "t0,");
  EXPECT_EQ(tokenize(segs[1].text).front(), "t150");
  EXPECT_EQ(tokenize(segs[1].text).back(), "t319");
}

TEST(DeriveCommonWords, RanksByFrequencyThenLexically) {
  std::vector<corpus::SpeechRecord> rs{speech("a", "b a a c"), speech("b", "B, c d"), speech("c", "x y", "de")};
  const auto top = derive_common_words(rs, "en", 3);
  EXPECT_EQ(top, (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Run, FiltersAndChunksEverySpeech) {
  const auto list = synthetic_list();
  std::map<std::string, CommonWordList> lists{{"en", list}};
  const std::vector<corpus::SpeechRecord> rs{speech("short", repeat("w1", 5)),
                                             speech("long", repeat("w1", 200)),
                                             speech("names", repeat("Name", 30))};
  Config cfg;
  const auto res = run(rs, lists, cfg);
  ASSERT_EQ(res.kept.size(), 1u);
  EXPECT_EQ(res.kept[0].speech_id, "long");
  ASSERT_EQ(res.dropped.size(), 2u);
  EXPECT_EQ(res.segments.size(), 2u);

  std::vector<corpus::SpeechRecord> german{speech("g", repeat("w1", 20), "de")};
  EXPECT_THROW((void)run(german, lists, cfg), std::exception);
}

TEST(Config, PerCountryOverrideAndJsonRoundTrip) {
  auto cfg = Config::from_json({{"ratio_threshold", 0.07}, {"ratio_overrides", {{"XB", 0.02}}}});
  EXPECT_EQ(cfg.threshold_for("XA"), 0.07);
  EXPECT_EQ(cfg.threshold_for("XB"), 0.02);
  EXPECT_EQ(Config::from_json(cfg.to_json()).to_json(), cfg.to_json());
  EXPECT_THROW((void)Config::from_json({{"chunk_target", 40}, {"chunk_min", 50}}), std::invalid_argument);
}
