#include "emi/econ/model_spec.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "emi/util/jsonl.hpp"

namespace emi::econ {

using nlohmann::json;

void ModelSpecFile::validate() const {
  std::set<std::string> ids;
  for (const auto& m : models) {
    m.spec.validate();
    if (!ids.insert(m.spec.id).second) throw std::invalid_argument("model spec: duplicate model id '" + m.spec.id + "'");
  }
  auto known = [&](const std::string& id, const char* where) {
    if (!ids.count(id)) throw std::invalid_argument(std::string("model spec: ") + where + " refers to unknown model '" + id + "'");
  };
  for (const auto& c : comparisons) {
    known(c.restricted, "comparison");
    known(c.full, "comparison");
  }
  for (const auto& b : bootstrap) {
    known(b.model, "bootstrap");
    const auto& preds = model(b.model).spec.predictors;
    if (std::find(preds.begin(), preds.end(), b.target) == preds.end()) {
      throw std::invalid_argument("model spec: bootstrap target '" + b.target + "' is not a predictor of '" + b.model + "'");
    }
  }
  if (lag < 1) throw std::invalid_argument("model spec: lag must be >= 1");
}

const ModelEntry& ModelSpecFile::model(const std::string& id) const {
  for (const auto& m : models) {
    if (m.spec.id == id) return m;
  }
  throw std::out_of_range("model spec: no model '" + id + "'");
}

std::string ModelSpecFile::label(const std::string& variable) const {
  const auto it = labels.find(variable);
  return it == labels.end() ? variable : it->second;
}

ModelSpecFile ModelSpecFile::from_json(const json& j) {
  ModelSpecFile f;
  f.lag_vars = j.value("lag_vars", std::vector<std::string>{});
  f.lag = j.value("lag", 1);
  for (const auto& m : j.at("models")) {
    ModelEntry e;
    e.spec = m.get<RegressionSpec>();
    e.table = m.value("table", e.spec.id);
    e.column = m.value("column", e.spec.id);
    f.models.push_back(std::move(e));
  }
  for (const auto& c : j.value("comparisons", json::array())) {
    f.comparisons.push_back({c.at("restricted").get<std::string>(), c.at("full").get<std::string>()});
  }
  for (const auto& b : j.value("bootstrap", json::array())) {
    f.bootstrap.push_back({b.at("model").get<std::string>(), b.at("target").get<std::string>()});
  }
  for (const auto& c : j.value("correlations", json::array())) {
    f.correlations.emplace_back(c.at(0).get<std::string>(), c.at(1).get<std::string>());
  }
  f.labels = j.value("labels", std::map<std::string, std::string>{});
  f.validate();
  return f;
}

ModelSpecFile ModelSpecFile::load(const std::filesystem::path& path) {
  try {
    return from_json(io::read_json(path));
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

json ModelSpecFile::to_json() const {
  json models_j = json::array();
  for (const auto& m : models) {
    json e = m.spec;
    e["table"] = m.table;
    e["column"] = m.column;
    models_j.push_back(std::move(e));
  }
  json comps = json::array();
  for (const auto& c : comparisons) comps.push_back({{"restricted", c.restricted}, {"full", c.full}});
  json boots = json::array();
  for (const auto& b : bootstrap) boots.push_back({{"model", b.model}, {"target", b.target}});
  json corrs = json::array();
  for (const auto& [x, y] : correlations) corrs.push_back({x, y});
  return json{{"lag_vars", lag_vars}, {"lag", lag},         {"models", models_j}, {"comparisons", comps},
              {"bootstrap", boots},   {"correlations", corrs}, {"labels", labels}};
}

void to_json(json& j, const AnalysisReport& r) {
  j = json::object();
  j["panel_rows"] = r.panel_rows;
  json models = json::array();
  for (const auto& m : r.models) {
    json e{{"id", m.entry.spec.id}, {"table", m.entry.table}, {"column", m.entry.column}};
    if (m.result) e["result"] = *m.result;
    if (m.diagnostics) e["diagnostics"] = *m.diagnostics;
    if (!m.error.empty()) e["error"] = m.error;
    models.push_back(std::move(e));
  }
  j["models"] = std::move(models);
  json comps = json::array();
  for (const auto& c : r.comparisons) {
    json e{{"restricted", c.comparison.restricted}, {"full", c.comparison.full}};
    if (c.test) e["lr"] = *c.test;
    if (!c.error.empty()) e["error"] = c.error;
    comps.push_back(std::move(e));
  }
  j["comparisons"] = std::move(comps);
  json boots = json::array();
  for (const auto& b : r.bootstrap) {
    json e{{"model", b.target.model}, {"target", b.target.target}};
    if (b.result) e["result"] = *b.result;
    if (!b.error.empty()) e["error"] = b.error;
    boots.push_back(std::move(e));
  }
  j["bootstrap"] = std::move(boots);
  json corrs = json::array();
  for (const auto& c : r.correlations) {
    json e{{"x", c.x}, {"y", c.y}, {"country", c.country}};
    if (c.result) e["result"] = *c.result;
    if (!c.error.empty()) e["error"] = c.error;
    corrs.push_back(std::move(e));
  }
  j["correlations"] = std::move(corrs);
}

namespace {

CorrelationOutcome correlate(const std::vector<panel::PanelRow>& panel, const std::string& x,
                             const std::string& y, const std::string& country, double level) {
  CorrelationOutcome out{x, y, country, std::nullopt, {}};
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& row : panel) {
    if (country != "pooled" && row.country != country) continue;
    const auto vx = row.get(x);
    const auto vy = row.get(y);
    if (vx && vy && std::isfinite(*vx) && std::isfinite(*vy)) {
      xs.push_back(*vx);
      ys.push_back(*vy);
    }
  }
  try {
    out.result = pearson_r_ci(xs, ys, level);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

AnalysisReport run_analysis(std::vector<panel::PanelRow> panel, const ModelSpecFile& spec,
                            const AnalysisOptions& options) {
  spec.validate();
  if (!spec.lag_vars.empty()) panel::add_lags(panel, spec.lag_vars, spec.lag);
  AnalysisReport report;
  report.panel_rows = panel.size();

  std::map<std::string, const RegressionResult*> fitted;
  report.models.reserve(spec.models.size());
  for (const auto& entry : spec.models) {
    ModelOutcome m{entry, std::nullopt, std::nullopt, {}};
    try {
      m.result = ols_fe(panel, entry.spec, options.level);
      m.diagnostics = diagnose(panel, *m.result);
    } catch (const std::exception& e) {
      m.error = e.what();
      spdlog::warn("model {}: {}", entry.spec.id, e.what());
    }
    report.models.push_back(std::move(m));
  }
  for (const auto& m : report.models) {
    if (m.result) fitted[m.entry.spec.id] = &*m.result;
  }

  for (const auto& c : spec.comparisons) {
    ComparisonOutcome out{c, std::nullopt, {}};
    const auto r = fitted.find(c.restricted);
    const auto f = fitted.find(c.full);
    if (r == fitted.end() || f == fitted.end()) {
      out.error = "a compared model could not be fitted";
    } else {
      try {
        out.test = lr_compare(*r->second, *f->second);
      } catch (const std::exception& e) {
        out.error = e.what();
      }
    }
    report.comparisons.push_back(std::move(out));
  }

  for (const auto& b : spec.bootstrap) {
    BootstrapOutcome out{b, std::nullopt, {}};
    if (!fitted.count(b.model)) {
      out.error = "model could not be fitted";
    } else {
      try {
        BootstrapCoefOptions bo;
        bo.iters = options.bootstrap_iters;
        bo.level = options.level;
        bo.seed = options.seed;
        bo.jobs = options.jobs;
        bo.scheme = options.resampling;
        out.result = bootstrap_coef(panel, spec.model(b.model).spec, b.target, bo);
      } catch (const std::exception& e) {
        out.error = e.what();
      }
    }
    report.bootstrap.push_back(std::move(out));
  }

  std::set<std::string> countries;
  for (const auto& row : panel) countries.insert(row.country);
  for (const auto& [x, y] : spec.correlations) {
    for (const auto& c : countries) report.correlations.push_back(correlate(panel, x, y, c, options.level));
    report.correlations.push_back(correlate(panel, x, y, "pooled", options.level));
  }
  return report;
}

}  // namespace emi::econ
