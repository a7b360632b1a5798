#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "emi/cli/app.hpp"
#include "emi/cli/config.hpp"
#include "emi/cli/manifest.hpp"
#include "emi/cli/plot.hpp"
#include "emi/cli/report.hpp"
#include "emi/cli/stages.hpp"
#include "emi/mockserve.hpp"
#include "emi/util/hash.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace emi;
using namespace emi::cli;

namespace {

fs::path sample_config() { return fs::path(EMI_DATA_DIR) / "sample" / "config.json"; }

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("emi_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Report, PValueFormatting) {
  EXPECT_EQ(format_p(0.006), "p=0.006");
  EXPECT_EQ(format_p(0.00014512), "p=1.451e-04");
  EXPECT_EQ(format_p(0.5), "p=0.500");
  EXPECT_EQ(significance_marker(0.049), "*");
  EXPECT_EQ(significance_marker(0.05), "");
}

TEST(Manifest, ConfigHashIsKeyOrderIndependent) {
  const auto a = nlohmann::json::parse(R"({"x":1,"y":[1,2]})");
  const auto b = nlohmann::json::parse(R"({"y":[1,2],"x":1})");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(nlohmann::json::parse(R"({"x":2,"y":[1,2]})")));
}

TEST(Manifest, PlanStageResumesSkipsAndRejectsChangedConfig) {
  const auto out = fresh_dir("manifest");
  const auto inputs = std::map<std::string, std::string>{{"in.jsonl", "abc"}};
  EXPECT_EQ(plan_stage(out, "fuse", "h1", inputs, false), ResumeAction::run);

  std::ofstream(out / "scores.jsonl") << "{}\n";
  StageManifest m;
  m.stage = "fuse";
  m.config_hash = "h1";
  m.inputs = inputs;
  m.outputs = hash_inputs({{"scores.jsonl", out / "scores.jsonl"}});
  write_manifest(out, m);
  EXPECT_EQ(read_manifest(out, "fuse")->to_json(), m.to_json());

  EXPECT_EQ(plan_stage(out, "fuse", "h1", inputs, false), ResumeAction::skip);
  EXPECT_EQ(plan_stage(out, "fuse", "h1", inputs, true), ResumeAction::run);
  EXPECT_EQ(plan_stage(out, "fuse", "h1", {{"in.jsonl", "changed"}}, false), ResumeAction::run);
  EXPECT_THROW((void)plan_stage(out, "fuse", "h2", inputs, false), ConfigMismatchError);
  EXPECT_EQ(plan_stage(out, "fuse", "h2", inputs, true), ResumeAction::run);

  std::ofstream(out / "scores.jsonl") << "{\"edited\":1}\n";
  EXPECT_EQ(plan_stage(out, "fuse", "h1", inputs, false), ResumeAction::run);
  fs::remove_all(out);
}

TEST(Config, SampleLoadsAndStageHashesIgnoreTransportSettings) {
  auto cfg = RunConfig::load(sample_config());
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.raters.size(), 3u);
  const auto before = config_hash(cfg.stage_config("rate"));
  for (auto& r : cfg.raters) {
    r.base_url = "http://elsewhere:1";
    r.timeout_s = 999;
    r.max_parallel = 16;
  }
  EXPECT_EQ(config_hash(cfg.stage_config("rate")), before);
  cfg.raters[0].model_name = "other";
  EXPECT_NE(config_hash(cfg.stage_config("rate")), before);
}

TEST(Config, MissingSeedIsAConfigError) {
  auto j = nlohmann::json::parse(slurp(sample_config()));
  j["panel"].erase("seed");
  EXPECT_THROW((void)RunConfig::from_json(j, sample_config().parent_path()), ConfigError);
}

TEST(Stages, MissingUpstreamNamesTheStage) {
  const auto out = fresh_dir("upstream");
  StageContext ctx;
  ctx.config = RunConfig::load(sample_config());
  ctx.config.out_dir = out;
  try {
    (void)run_stage("analyze", ctx);
    FAIL();
  } catch (const MissingUpstreamError& e) {
    EXPECT_EQ(std::string(e.what()), "run `panel` first (missing panel.csv)");
  }
  fs::remove_all(out);
}

TEST(Stages, PipelineOverMockServerResumesAndRefusesConfigDrift) {
  const auto out = fresh_dir("pipeline");
  mock::MockServer server(mock::MockRules::load(fs::path(EMI_DATA_DIR) / "sample" / "mock_rules.json"));
  server.start();
  StageContext ctx;
  ctx.config = RunConfig::load(sample_config());
  ctx.config.out_dir = out;
  for (auto& r : ctx.config.raters) r.base_url = server.base_url();
  ctx.config.embedder.base_url = server.base_url();
  ctx.config.panel_bootstrap_iters = 200;
  ctx.config.coef_bootstrap_iters = 200;

  const auto first = run_all(ctx);
  for (const auto& o : first) EXPECT_FALSE(o.skipped) << o.stage;
  EXPECT_TRUE(fs::exists(out / "panel.csv"));
  EXPECT_TRUE(fs::exists(out / "analysis.txt"));
  EXPECT_TRUE(fs::exists(out / "validation.json"));
  const auto panel_bytes = slurp(out / "panel.csv");

  const auto requests = server.requests();
  const auto second = run_all(ctx);
  for (const auto& o : second) EXPECT_TRUE(o.skipped) << o.stage;
  EXPECT_EQ(server.requests(), requests);

  ctx.config.z_scope = fusion::ZScope::global;
  EXPECT_THROW((void)run_stage("fuse", ctx), ConfigMismatchError);
  ctx.force = true;
  EXPECT_FALSE(run_stage("fuse", ctx).skipped);
  ctx.force = false;
  ctx.config.z_scope = fusion::ZScope::country;
  // The cached responses make the rerun request-free.
  fs::remove(out / "emb_scores.jsonl");
  ctx.force = true;
  (void)run_stage("embed", ctx);
  (void)run_stage("fuse", ctx);
  (void)run_stage("panel", ctx);
  EXPECT_EQ(slurp(out / "panel.csv"), panel_bytes);
  fs::remove_all(out);
}

TEST(Plot, SvgIsDeterministicAndCarriesProvenance) {
  const auto p = oracle::make_panel(5, 3, 10, 0.5, 0.2);
  auto rows = p.rows;
  for (auto& r : rows) {
    r.set("emi", r.get("x"));
    r.set("ddi", r.get("y"));
  }
  std::vector<panel::PanelRow> c0(rows.begin(), rows.begin() + 10);
  const auto a = trend_svg("C0", c0, "ddi", {{"C0", 1995, "reform"}}, "cfg=abc");
  EXPECT_EQ(a, trend_svg("C0", c0, "ddi", {{"C0", 1995, "reform"}}, "cfg=abc"));
  EXPECT_NE(a.find("<svg"), std::string::npos);
  EXPECT_NE(a.find("cfg=abc"), std::string::npos);
  EXPECT_NE(a.find("reform"), std::string::npos);
  const auto s = scatter_svg(rows, "ddi", "cfg=abc");
  EXPECT_EQ(s, scatter_svg(rows, "ddi", "cfg=abc"));
}

TEST(Plot, LineFitAndTicks) {
  const auto fit = fit_line({1, 2, 3, 4}, {3, 5, 7, 9.5});
  ASSERT_TRUE(fit);
  EXPECT_NEAR(fit->slope, 2.15, 1e-12);
  EXPECT_GT(fit->band(2.5), 0.0);
  EXPECT_LT(fit->band(2.5), fit->band(10.0));
  EXPECT_FALSE(fit_line({1, 1, 1}, {1, 2, 3}));
  const auto ticks = nice_ticks(0.0, 1.0);
  ASSERT_EQ(ticks.size(), 6u);
  for (std::size_t i = 0; i < ticks.size(); ++i) EXPECT_NEAR(ticks[i], 0.2 * static_cast<double>(i), 1e-12);
}

TEST(RunMain, ExitCodes) {
  EXPECT_EQ(run_main({"emi", "--help"}), 0);
  EXPECT_EQ(run_main({"emi", "ingest"}), 2);
  EXPECT_EQ(run_main({"emi", "bogus"}), 2);
  const auto dir = fresh_dir("badcfg");
  std::ofstream(dir / "bad.json") << "{\"corpus\": 5}";
  EXPECT_EQ(run_main({"emi", "-q", "ingest", "-c", (dir / "bad.json").string()}), 1);
  EXPECT_EQ(run_main({"emi", "-q", "ingest", "-c", (dir / "absent.json").string()}), 2);
  fs::remove_all(dir);
}
