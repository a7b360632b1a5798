#include <gtest/gtest.h>

#include "emi/econ/model_spec.hpp"
#include "oracles.hpp"

using namespace emi;
using namespace emi::econ;

TEST(ModelSpecFile, ShippedPlanLoads) {
  const auto spec = ModelSpecFile::load(std::filesystem::path(EMI_DATA_DIR) / "models" / "panel_models.json");
  EXPECT_EQ(spec.models.size(), 8u);
  EXPECT_NO_THROW(spec.validate());
  EXPECT_EQ(spec.model("emi_ddi").spec.outcome, "emi");
  EXPECT_EQ(ModelSpecFile::from_json(spec.to_json()).to_json(), spec.to_json());
  EXPECT_EQ(spec.label("unlabelled_var"), "unlabelled_var");
}

TEST(ModelSpecFile, ValidationCatchesBadReferences) {
  nlohmann::json j{{"models",
                    {{{"id", "a"}, {"outcome", "y"}, {"predictors", {"x"}}, {"table", "T"}, {"column", "(1)"}}}},
                   {"comparisons", {{{"restricted", "a"}, {"full", "missing"}}}}};
  EXPECT_THROW((void)ModelSpecFile::from_json(j).validate(), std::exception);
  j["comparisons"] = nlohmann::json::array();
  j["models"].push_back(j["models"][0]);
  EXPECT_THROW((void)ModelSpecFile::from_json(j).validate(), std::exception);
}

TEST(RunAnalysis, RecordsPerModelFailuresWithoutAborting) {
  auto p = oracle::make_panel(17, 4, 8, 0.5, 0.3);
  nlohmann::json j{
      {"lag_vars", {"x"}},
      {"models",
       {{{"id", "ok"}, {"outcome", "y"}, {"predictors", {"x"}}, {"fixed_effects", {"country", "year"}},
         {"table", "T"}, {"column", "(1)"}},
        {{"id", "lagged"}, {"outcome", "y"}, {"predictors", {"x", "x_lag1"}}, {"table", "T"}, {"column", "(2)"}},
        {{"id", "broken"}, {"outcome", "y"}, {"predictors", {"not_a_column"}}, {"table", "T"}, {"column", "(3)"}}}},
      {"bootstrap", {{{"model", "ok"}, {"target", "x"}}}},
      {"correlations", nlohmann::json::array({nlohmann::json::array({"x", "y"})})}};
  const auto spec = ModelSpecFile::from_json(j);
  AnalysisOptions o;
  o.bootstrap_iters = 200;
  const auto report = run_analysis(p.rows, spec, o);
  ASSERT_EQ(report.models.size(), 3u);
  EXPECT_TRUE(report.models[0].result);
  EXPECT_EQ(report.models[1].result->n_obs, 28u);
  EXPECT_FALSE(report.models[2].result);
  EXPECT_FALSE(report.models[2].error.empty());
  ASSERT_EQ(report.bootstrap.size(), 1u);
  EXPECT_TRUE(report.bootstrap[0].result);
  ASSERT_EQ(report.correlations.size(), 5u);  // four countries plus pooled
  EXPECT_EQ(report.correlations.back().country, "pooled");
  EXPECT_EQ(report.correlations.back().result->n, 32u);
  nlohmann::json out = report;
  EXPECT_TRUE(out.contains("models"));
}
