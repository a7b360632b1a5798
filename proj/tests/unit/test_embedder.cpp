#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>

#include "emi/embedder.hpp"
#include "emi/util/hash.hpp"

using namespace emi;
using namespace emi::embedder;

namespace {

EndpointConfig endpoint(std::size_t batch = 4) {
  EndpointConfig e;
  e.base_url = "http://fake.invalid";
  e.model_name = "emb";
  e.batch_size = batch;
  e.max_retries = 1;
  e.backoff_ms = 0;
  return e;
}

// Deterministic pseudo-embeddings keyed by text; "EV" and "IN" prefixes pull
// toward fixed axes.
class FakeEmbed final : public EmbeddingClient {
 public:
  std::vector<Vector> embed(const EndpointConfig&, const std::vector<std::string>& texts) override {
    {
      std::lock_guard lock(mu_);
      ++calls;
      inputs += texts.size();
      if (fail_next > 0) {
        --fail_next;
        throw TransportError("boom", 503);
      }
    }
    std::vector<Vector> out;
    for (const auto& t : texts) {
      std::mt19937_64 rng(hash::fnv1a64(t));
      std::normal_distribution<double> n(0.0, 0.1);
      Vector v(dim);
      for (auto& x : v) x = n(rng);
      if (t.rfind("EV", 0) == 0) v[0] += 1.0;
      if (t.rfind("IN", 0) == 0) v[1] += 1.0;
      out.push_back(v);
    }
    if (ragged && out.size() > 1) out.back().push_back(0.5);
    return out;
  }
  bool healthy(const EndpointConfig&) override { return up; }

  std::size_t dim = 8;
  int fail_next = 0;
  bool ragged = false;
  bool up = true;
  std::size_t calls = 0;
  std::size_t inputs = 0;

 private:
  std::mutex mu_;
};

AnchorSet anchors() {
  AnchorSet a;
  a.language = "en";
  for (std::size_t i = 0; i < AnchorSet::kEntriesPerCategory; ++i) {
    a.evidence.push_back({"EV" + std::to_string(i), "def"});
    a.intuition.push_back({"IN" + std::to_string(i), "def"});
  }
  return a;
}

}  // namespace

TEST(Anchors, ValidationRejectsBadSets) {
  auto a = anchors();
  EXPECT_NO_THROW(a.validate());
  a.evidence.pop_back();
  EXPECT_THROW(a.validate(), AnchorError);
  a = anchors();
  a.intuition[3].term = a.intuition[2].term;
  EXPECT_THROW(a.validate(), AnchorError);
  a = anchors();
  a.evidence[0].definition.clear();
  EXPECT_THROW(a.validate(), AnchorError);
}

TEST(Anchors, ShippedSetsLoadAndValidate) {
  const std::filesystem::path data(EMI_DATA_DIR);
  for (const char* lang : {"en", "de", "is", "it", "pl", "tr"}) {
    const auto set = load_anchors(data / "anchors" / (std::string(lang) + ".tsv"));
    EXPECT_EQ(set.language, lang);
    EXPECT_NO_THROW(set.validate());
  }
}

TEST(Anchors, TextsFollowMode) {
  const std::vector<AnchorEntry> e{{"data", "numbers"}, {"study", "research"}};
  EXPECT_EQ(anchor_texts(e, AnchorEmbedMode::joined), (std::vector<std::string>{"data: numbers", "study: research"}));
  EXPECT_EQ(anchor_texts(e, AnchorEmbedMode::separate).size(), 4u);
  EXPECT_EQ(parse_anchor_embed_mode(to_string(AnchorEmbedMode::separate)), AnchorEmbedMode::separate);
  EXPECT_THROW((void)parse_anchor_embed_mode("both"), std::invalid_argument);
}

TEST(Cosine, ExactValuesAndErrors) {
  EXPECT_DOUBLE_EQ(cosine({1, 0}, {0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(cosine({1, 1}, {2, 2}), 1.0);
  EXPECT_DOUBLE_EQ(cosine({1, 0}, {-3, 0}), -1.0);
  EXPECT_THROW((void)cosine({1, 0}, {1, 0, 0}), DimensionError);
  EXPECT_THROW((void)cosine({0, 0}, {1, 0}), std::invalid_argument);
}

TEST(Cosine, BoundedAndScaleInvariantProperty) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int t = 0; t < 1000; ++t) {
    Vector a(16), b(16);
    for (auto& x : a) x = n(rng);
    for (auto& x : b) x = n(rng);
    const double c = cosine(a, b);
    EXPECT_GE(c, -1.0);
    EXPECT_LE(c, 1.0);
    Vector scaled = a;
    for (auto& x : scaled) x *= 7.5;
    EXPECT_NEAR(cosine(scaled, b), c, 1e-12);
  }
}

TEST(MeanVector, PlainAndNormalized) {
  const auto m = mean_vector({{2, 0}, {0, 4}}, false, "x");
  EXPECT_EQ(m, (Vector{1, 2}));
  const auto n = mean_vector({{2, 0}, {0, 4}}, true, "x");
  EXPECT_DOUBLE_EQ(n[0], 0.5);
  EXPECT_DOUBLE_EQ(n[1], 0.5);
  EXPECT_THROW((void)mean_vector({{1, 0}, {-1, 0}}, false, "x"), AnchorError);
}

TEST(EmbedTexts, BatchesPreserveOrderAndRetry) {
  FakeEmbed client;
  std::vector<std::string> texts;
  for (int i = 0; i < 10; ++i) texts.push_back("t" + std::to_string(i));
  EmbedStats stats;
  client.fail_next = 1;
  const auto v = embed_texts(texts, endpoint(4), client, {}, &stats);
  ASSERT_EQ(v.size(), 10u);
  EXPECT_EQ(stats.batches, 3u);
  EXPECT_EQ(stats.retries, 1u);
  FakeEmbed single;
  const auto one = embed_texts({"t7"}, endpoint(4), single);
  EXPECT_EQ(one[0], v[7]);
  // float32 rounding on receipt
  for (double x : v[0]) EXPECT_EQ(x, static_cast<double>(static_cast<float>(x)));
}

TEST(EmbedTexts, CacheServesRepeatsIdentically) {
  const auto dir = std::filesystem::temp_directory_path() / "emi_embed_cache_test";
  std::filesystem::remove_all(dir);
  EmbedOptions opts;
  opts.cache = DiskCache(dir);
  FakeEmbed client;
  const std::vector<std::string> texts{"a", "b", "c"};
  EmbedStats s1, s2;
  const auto first = embed_texts(texts, endpoint(), client, opts, &s1);
  const auto second = embed_texts(texts, endpoint(), client, opts, &s2);
  EXPECT_EQ(first, second);
  EXPECT_EQ(s2.cache_hits, 3u);
  EXPECT_EQ(client.inputs, 3u);
  std::filesystem::remove_all(dir);
}

TEST(EmbedTexts, Failures) {
  FakeEmbed client;
  EXPECT_THROW((void)embed_texts({"a", ""}, endpoint(), client), std::invalid_argument);
  client.ragged = true;
  EXPECT_THROW((void)embed_texts({"a", "b"}, endpoint(), client), std::exception);
  FakeEmbed down;
  down.fail_next = 100;
  down.up = false;
  EXPECT_THROW((void)embed_texts({"a"}, endpoint(), down), EndpointDownError);
}

TEST(ScoreSegments, AnchorGeometryDrivesTheDifference) {
  FakeEmbed client;
  const auto av = build_anchor_vectors(anchors(), endpoint(), client);
  EXPECT_EQ(av.dim, 8u);
  std::vector<preprocess::Segment> segs(3);
  const char* texts[] = {"EV report", "IN feeling", "neutral words"};
  for (int i = 0; i < 3; ++i) {
    segs[i].segment_id = "s#" + std::to_string(i);
    segs[i].language = "en";
    segs[i].text = texts[i];
  }
  const auto scores = score_segments(segs, {{"en", av}}, endpoint(), client);
  ASSERT_EQ(scores.size(), 3u);
  EXPECT_GT(scores[0].emi_emb_raw, 0.5);
  EXPECT_LT(scores[1].emi_emb_raw, -0.5);
  for (const auto& s : scores) {
    EXPECT_DOUBLE_EQ(s.emi_emb_raw, s.cos_evidence - s.cos_intuition);
    EXPECT_GE(s.emi_emb_raw, -2.0);
    EXPECT_LE(s.emi_emb_raw, 2.0);
  }
  segs[0].language = "de";
  EXPECT_THROW((void)score_segments(segs, {{"en", av}}, endpoint(), client), AnchorError);
}
