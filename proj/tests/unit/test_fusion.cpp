#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "emi/fusion.hpp"
#include "oracles.hpp"

using namespace emi;
using namespace emi::fusion;

namespace {

preprocess::Segment seg(const std::string& id, const std::string& country) {
  preprocess::Segment s;
  s.segment_id = id;
  s.speech_id = id.substr(0, id.find('#'));
  s.country = country;
  s.year = 2001;
  s.language = "en";
  return s;
}

}  // namespace

TEST(ZScore, ExactExample) {
  const auto z = zscore({1, 2, 3});
  EXPECT_DOUBLE_EQ(z[0], -1.0);
  EXPECT_DOUBLE_EQ(z[1], 0.0);
  EXPECT_DOUBLE_EQ(z[2], 1.0);
  EXPECT_THROW((void)zscore({5, 5, 5}), ZeroVarianceError);
  EXPECT_THROW((void)zscore({1}), std::invalid_argument);
}

TEST(ZScore, StandardizedMomentsProperty) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(3.0, 2.5);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(2 + rng() % 300);
    for (auto& x : v) x = n(rng);
    const auto [m, s] = oracle::mean_sd(zscore(v));
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Fuse, AveragesComponentZScoresPerCountry) {
  std::vector<preprocess::Segment> segs{seg("a#0", "XA"), seg("a#1", "XA"), seg("b#0", "XB"),
                                        seg("b#1", "XB"), seg("b#2", "XB")};
  std::vector<rater::EnsembleEpistemicScore> llm;
  std::vector<embedder::SegmentEmbeddingScore> emb;
  const double l[] = {1, 3, 0, 2, 4};
  const double e[] = {0.2, 0.1, 10, 20, 30};
  for (int i = 0; i < 5; ++i) {
    rater::EnsembleEpistemicScore s;
    s.segment_id = segs[i].segment_id;
    s.emi_llm_raw = l[i];
    llm.push_back(s);
    emb.push_back({segs[i].segment_id, 0, 0, e[i]});
  }
  const auto res = fuse(segs, llm, emb, ZScope::country);
  ASSERT_EQ(res.scores.size(), 5u);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(res.scores[0].z_llm, -r, 1e-12);
  EXPECT_NEAR(res.scores[0].z_emb, r, 1e-12);
  EXPECT_NEAR(res.scores[0].emi, 0.0, 1e-12);
  EXPECT_NEAR(res.scores[4].emi, 1.0, 1e-12);
  EXPECT_EQ(res.groups.at("XB").n, 3u);
  for (const auto& s : res.scores) EXPECT_DOUBLE_EQ(s.emi, (s.z_llm + s.z_emb) / 2.0);

  const auto global = fuse(segs, llm, emb, ZScope::global);
  EXPECT_EQ(global.groups.count("ALL"), 1u);
}

TEST(Fuse, DropsSegmentsMissingAComponent) {
  std::vector<preprocess::Segment> segs{seg("a#0", "XA"), seg("a#1", "XA"), seg("a#2", "XA"), seg("a#3", "XA")};
  std::vector<rater::EnsembleEpistemicScore> llm(3);
  llm[0].segment_id = "a#0";
  llm[0].emi_llm_raw = 1;
  llm[1].segment_id = "a#1";
  llm[1].emi_llm_raw = 2;
  llm[2].segment_id = "a#2";
  llm[2].emi_llm_raw = 0;
  std::vector<embedder::SegmentEmbeddingScore> emb{{"a#0", 0, 0, 0.5}, {"a#1", 0, 0, 0.1}};
  const auto res = fuse(segs, llm, emb);
  EXPECT_EQ(res.scores.size(), 2u);
  ASSERT_EQ(res.dropped.size(), 2u);
  EXPECT_EQ(res.dropped[0].reason, "missing_emb");
  EXPECT_EQ(res.dropped[1].reason, "missing_both");
  EXPECT_THROW((void)fuse(segs, {}, {}), std::exception);
}

TEST(Fuse, GroupMeansOfFusedScoreVanishProperty) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  std::vector<preprocess::Segment> segs;
  std::vector<rater::EnsembleEpistemicScore> llm;
  std::vector<embedder::SegmentEmbeddingScore> emb;
  for (int i = 0; i < 300; ++i) {
    const std::string c = i % 3 == 0 ? "XA" : (i % 3 == 1 ? "XB" : "XC");
    segs.push_back(seg("s" + std::to_string(i) + "#0", c));
    rater::EnsembleEpistemicScore s;
    s.segment_id = segs.back().segment_id;
    s.emi_llm_raw = std::round(n(rng) * 2) / 3.0;
    llm.push_back(s);
    emb.push_back({s.segment_id, 0, 0, n(rng) * 0.05 + (c == "XA" ? 0.3 : 0.0)});
  }
  const auto res = fuse(segs, llm, emb);
  std::map<std::string, std::pair<double, int>> sums;
  for (const auto& s : res.scores) {
    sums[s.country].first += s.emi;
    ++sums[s.country].second;
  }
  for (const auto& [c, p] : sums) EXPECT_NEAR(p.first / p.second, 0.0, 1e-12) << c;
}

TEST(ZScope, ParsesBothNames) {
  EXPECT_EQ(parse_z_scope("country"), ZScope::country);
  EXPECT_EQ(parse_z_scope(to_string(ZScope::global)), ZScope::global);
  EXPECT_THROW((void)parse_z_scope("year"), std::invalid_argument);
}
