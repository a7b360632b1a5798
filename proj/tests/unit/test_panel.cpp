#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "emi/panel.hpp"
#include "oracles.hpp"

using namespace emi;
using namespace emi::panel;

namespace {

fusion::SegmentScore score(const std::string& c, int year, double emi) {
  fusion::SegmentScore s;
  s.country = c;
  s.year = year;
  s.emi = emi;
  return s;
}

csv::Table table(const std::string& text) {
  std::istringstream in(text);
  return csv::read_table(in, ',');
}

}  // namespace

TEST(DrawIndex, StaysInRangeAndCoversEnds) {
  EXPECT_EQ(draw_index(0, 10), 0u);
  EXPECT_EQ(draw_index(~0ULL, 10), 9u);
  std::mt19937_64 rng(1);
  std::vector<int> hits(7);
  for (int i = 0; i < 70000; ++i) ++hits[draw_index(rng(), 7)];
  for (int h : hits) EXPECT_NEAR(h, 10000, 500);
}

TEST(Quantile, Type7Interpolation) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.025), 1.075);
}

TEST(YearlyMean, GroupsAndSorts) {
  const auto y = yearly_mean({score("XB", 2001, 1), score("XA", 2002, 2), score("XA", 2001, 4),
                              score("XA", 2002, 0)});
  ASSERT_EQ(y.size(), 3u);
  EXPECT_EQ(y[0].country, "XA");
  EXPECT_EQ(y[0].year, 2001);
  EXPECT_EQ(y[1].n, 2u);
  EXPECT_DOUBLE_EQ(y[1].mean, 1.0);
  EXPECT_EQ(y[2].country, "XB");
}

TEST(BootstrapMean, ContainsMeanAndIsReproducible) {
  const auto v = oracle::normal_sample(4, 50);
  BootstrapOptions o;
  o.iters = 2000;
  const auto a = bootstrap_mean_ci(v, o, "XA:2001");
  o.jobs = 4;
  const auto b = bootstrap_mean_ci(v, o, "XA:2001");
  EXPECT_EQ(a, b);
  const auto [m, sd] = oracle::mean_sd(v);
  EXPECT_LT(a.first, m);
  EXPECT_GT(a.second, m);
  // Percentile width tracks the normal-theory interval 2 * 1.96 * sd / sqrt(n).
  EXPECT_NEAR(a.second - a.first, 2 * 1.96 * sd / std::sqrt(50.0), 0.1);
  EXPECT_NE(bootstrap_mean_ci(v, o, "XA:2002"), a);
  const auto single = bootstrap_mean_ci({3.5}, o);
  EXPECT_EQ(single.first, 3.5);
  EXPECT_EQ(single.second, 3.5);
}

TEST(JoinIndicators, InnerJoinWithGdpLeftJoin) {
  const auto ind = table(
      "cc,yr,ddi,tpl,cl,ji\n"
      "XA,2001,0.5,0.6,0.2,0.9\n"
      "XA,2002,0.4,,0.3,0.8\n"
      "XB,2001,0.7,0.7,0.1,0.95\n"
      "XB,2005,0.1,0.1,0.1,0.1\n");
  TableMapping im;
  im.columns = {{"country", "cc"}, {"year", "yr"}, {"clientelism", "cl"}, {"judicial_independence", "ji"}};
  const auto gdp = table(
      "code,year,gdp_pc\n"
      "AAA,2001,1000\n"
      "AAA,2002,-5\n");
  TableMapping gm;
  gm.columns = {{"country", "code"}};
  gm.country_aliases = {{"AAA", "XA"}};
  std::vector<YearlyStat> emi{{"XA", 2001, 0.1, 3, 0, 0.2}, {"XA", 2002, 0.2, 4, 0.1, 0.3},
                              {"XB", 2001, -0.1, 2, -0.2, 0}, {"XC", 2001, 0, 1, 0, 0}};
  const auto res = join_indicators(emi, ind, im, gdp, gm);
  ASSERT_EQ(res.rows.size(), 3u);
  EXPECT_EQ(*res.rows[0].get("clientelism_flipped"), -0.2);
  EXPECT_NEAR(*res.rows[0].get("log_gdp_pc"), std::log(1000.0), 1e-12);
  EXPECT_FALSE(res.rows[1].get("tpl"));
  EXPECT_FALSE(res.rows[1].get("log_gdp_pc"));
  EXPECT_FALSE(res.rows[2].get("log_gdp_pc"));
  EXPECT_EQ(*res.rows[1].get("n_segments"), 4.0);
  EXPECT_EQ(res.coverage.unmatched_emi.size(), 1u);
  EXPECT_EQ(res.coverage.unused_indicator_rows, 1u);
  EXPECT_EQ(res.coverage.row_errors.size(), 1u);
  EXPECT_EQ(res.coverage.missing_by_column.at("log_gdp_pc"), 2u);

  const auto dup = table("cc,yr,ddi,tpl,cl,ji\nXA,2001,1,1,1,1\nXA,2001,1,1,1,1\n");
  EXPECT_THROW((void)join_indicators(emi, dup, im, gdp, gm), std::runtime_error);
}

TEST(TableMapping, AliasThenYearSplit) {
  TableMapping m;
  m.country_aliases = {{"Germany", "DE"}};
  m.country_cases = {{"DE", 1990, "DE_W"}};
  EXPECT_EQ(m.country_code("Germany", 1985), "DE_W");
  EXPECT_EQ(m.country_code("Germany", 1995), "DE");
  EXPECT_EQ(m.country_code("FR", 1985), "FR");
  EXPECT_EQ(TableMapping::from_json(m.to_json()).to_json(), m.to_json());
}

TEST(AddLags, UsesPreviousYearOfSameCountryOnly) {
  std::vector<PanelRow> rows(4);
  const std::pair<const char*, int> keys[] = {{"XB", 2000}, {"XA", 2002}, {"XA", 2000}, {"XB", 2001}};
  for (int i = 0; i < 4; ++i) {
    rows[i].country = keys[i].first;
    rows[i].year = keys[i].second;
    rows[i].set("emi", i);
  }
  add_lags(rows, {"emi"});
  EXPECT_EQ(rows[0].country, "XA");
  EXPECT_FALSE(rows[0].get("emi_lag1"));
  EXPECT_FALSE(rows[1].get("emi_lag1"));  // 2001 missing for XA
  EXPECT_FALSE(rows[2].get("emi_lag1"));
  EXPECT_EQ(*rows[3].get("emi_lag1"), 0.0);
  EXPECT_THROW(add_lags(rows, {"emi"}, 0), std::invalid_argument);
}

TEST(PanelCsv, RoundTripsValuesAndMissingness) {
  auto p = oracle::make_panel(12, 4, 6, 0.5, 0.3);
  p.rows[3].set("ddi", std::nullopt);
  p.rows[5].set("extra_col", 1.0 / 3.0);
  const auto path = std::filesystem::temp_directory_path() / "emi_panel_roundtrip.csv";
  write_panel_csv(path, p.rows);
  const auto back = read_panel_csv(path);
  ASSERT_EQ(back.size(), p.rows.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].country, p.rows[i].country);
    EXPECT_EQ(back[i].year, p.rows[i].year);
    for (const auto& [name, value] : p.rows[i].values) EXPECT_EQ(back[i].get(name), value) << name;
  }
  EXPECT_FALSE(back[3].get("ddi"));
  EXPECT_EQ(*back[5].get("extra_col"), 1.0 / 3.0);
  std::filesystem::remove(path);

  std::ostringstream a, b;
  write_panel_csv(a, p.rows);
  write_panel_csv(b, back);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().rfind("country,year,n_segments,emi", 0), 0u);
}
