#include "emi/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include <fmt/format.h>

namespace emi::cli {

namespace {

std::string num(double v, int digits = 3) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  auto s = fmt::format("{:.{}f}", v, digits);
  if (s == "-" + fmt::format("{:.{}f}", 0.0, digits)) s.erase(0, 1);  // no "-0.000"
  return s;
}

std::string ci(double lo, double hi) { return "[" + num(lo) + ", " + num(hi) + "]"; }

struct Grid {
  std::vector<std::vector<std::string>> cells;

  void add(std::vector<std::string> row) { cells.push_back(std::move(row)); }

  [[nodiscard]] std::string render() const {
    std::vector<std::size_t> width;
    for (const auto& row : cells) {
      if (width.size() < row.size()) width.resize(row.size(), 0);
      for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::string out;
    for (const auto& row : cells) {
      std::string line;
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c == 0) {
          line += fmt::format("{:<{}}", row[c], width[c]);
        } else {
          line += "  " + fmt::format("{:>{}}", row[c], width[c]);
        }
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      out += line + "\n";
    }
    return out;
  }
};

std::string rule(std::size_t n) { return std::string(n, '-') + "\n"; }

void render_table(std::ostringstream& out, const std::string& table,
                  const std::vector<const econ::ModelOutcome*>& models, const econ::ModelSpecFile& spec) {
  out << "Table " << table << "\n";
  Grid g;
  std::vector<std::string> heading{""}, columns{""};
  for (const auto* m : models) {
    heading.push_back(spec.label(m->entry.spec.outcome));
    columns.push_back(m->entry.column.empty() ? m->entry.spec.id : m->entry.column);
  }
  g.add(heading);
  g.add(columns);

  // Variables in first-appearance order across the table's models.
  std::vector<std::string> vars;
  for (const auto* m : models) {
    for (const auto& p : m->entry.spec.predictors) {
      if (std::find(vars.begin(), vars.end(), p) == vars.end()) vars.push_back(p);
    }
  }
  for (const auto& v : vars) {
    std::vector<std::string> est{spec.label(v)}, interval{""}, pval{""};
    for (const auto* m : models) {
      const bool has = m->result && std::find(m->entry.spec.predictors.begin(),
                                              m->entry.spec.predictors.end(),
                                              v) != m->entry.spec.predictors.end();
      if (!has) {
        est.emplace_back(m->result ? "" : "n/a");
        interval.emplace_back("");
        pval.emplace_back("");
        continue;
      }
      const auto& c = m->result->coef(v);
      est.push_back(num(c.estimate) + significance_marker(c.p));
      interval.push_back(ci(c.ci_low, c.ci_high));
      pval.push_back(format_p(c.p));
    }
    g.add(est);
    g.add(interval);
    g.add(pval);
  }
  std::vector<std::string> nobs{"Num.Obs."}, r2{"R2"}, adj{"R2 Adj."}, f{"F"};
  for (const auto* m : models) {
    if (!m->result) {
      for (auto* row : {&nobs, &r2, &adj, &f}) row->emplace_back("");
      continue;
    }
    nobs.push_back(std::to_string(m->result->n_obs));
    r2.push_back(num(m->result->r2));
    adj.push_back(num(m->result->adj_r2));
    f.push_back(num(m->result->f_stat));
  }
  for (auto& row : {nobs, r2, adj, f}) g.add(row);
  const auto body = g.render();
  const auto width = body.substr(0, body.find('\n')).size();
  std::size_t line_no = 0;
  std::istringstream lines(body);
  std::string line;
  const std::size_t stats_start = 2 + 3 * vars.size();
  out << rule(std::max<std::size_t>(width, 20));
  while (std::getline(lines, line)) {
    if (line_no == 2 || line_no == stats_start) out << rule(std::max<std::size_t>(width, 20));
    out << line << "\n";
    ++line_no;
  }
  out << rule(std::max<std::size_t>(width, 20));
  std::vector<std::string> fe{"FE:"};
  for (const auto* m : models) {
    const auto& f = m->entry.spec.fixed_effects;
    fe.push_back(f.country && f.year ? "country+year" : f.country ? "country" : f.year ? "year" : "none");
  }
  out << "Fixed effects per column:";
  for (std::size_t i = 1; i < fe.size(); ++i) out << " " << columns[i] << "=" << fe[i];
  out << "; * p < 0.05; 95% confidence intervals in brackets.\n";
  for (const auto* m : models) {
    if (!m->error.empty()) out << "Model " << m->entry.spec.id << " not estimated: " << m->error << "\n";
  }
  out << "\n";
}

}  // namespace

std::string significance_marker(double p) { return p < 0.05 ? "*" : ""; }

std::string format_p(double p) {
  if (std::isnan(p)) return "p=NA";
  if (p < 0.001) return fmt::format("p={:.3e}", p);
  return "p=" + num(p);
}

std::string render_analysis(const econ::AnalysisReport& report, const econ::ModelSpecFile& spec) {
  std::ostringstream out;
  out << "Panel rows: " << report.panel_rows << "\n\n";

  std::vector<std::string> tables;
  std::map<std::string, std::vector<const econ::ModelOutcome*>> by_table;
  for (const auto& m : report.models) {
    const auto key = m.entry.table.empty() ? m.entry.spec.id : m.entry.table;
    if (!by_table.count(key)) tables.push_back(key);
    by_table[key].push_back(&m);
  }
  for (const auto& t : tables) render_table(out, t, by_table[t], spec);

  out << "Diagnostics\n" << rule(11);
  for (const auto& m : report.models) {
    if (!m.diagnostics) continue;
    const auto& d = *m.diagnostics;
    out << m.entry.spec.id << ":";
    if (!d.vif.empty()) {
      double max_vif = 0.0;
      std::string max_name;
      for (const auto& [name, v] : d.vif) {
        if (v > max_vif || max_name.empty()) {
          max_vif = v;
          max_name = name;
        }
      }
      out << " max VIF = " << num(max_vif) << " (" << spec.label(max_name) << ");";
    }
    if (d.adf) out << " ADF p = " << num(d.adf->p, 2) << ";";
    if (d.kpss) out << " KPSS p = " << num(d.kpss->p, 2) << ";";
    if (d.jb) out << " JB = " << num(d.jb->statistic) << ", " << format_p(d.jb->p) << ";";
    out << "\n";
    for (const auto& note : d.notes) out << "  note: " << note << "\n";
  }
  out << "\n";

  if (!report.comparisons.empty()) {
    out << "Model comparisons (likelihood ratio)\n" << rule(35);
    for (const auto& c : report.comparisons) {
      out << c.comparison.restricted << " vs " << c.comparison.full << ": ";
      if (c.test) {
        out << "chi2(" << c.test->df << ") = " << num(c.test->chi2) << ", " << format_p(c.test->p) << "\n";
      } else {
        out << "not computed: " << c.error << "\n";
      }
    }
    out << "\n";
  }

  if (!report.bootstrap.empty()) {
    out << "Bootstrap coefficient intervals\n" << rule(31);
    for (const auto& b : report.bootstrap) {
      out << b.target.model << " " << spec.label(b.target.target) << ": ";
      if (b.result) {
        out << "b = " << num(b.result->estimate) << ", 95% CI = " << ci(b.result->ci_low, b.result->ci_high)
            << " (" << b.result->used << "/" << b.result->iters << " resamples)";
        if (!b.result->warning.empty()) out << " warning: " << b.result->warning;
        out << "\n";
      } else {
        out << "not computed: " << b.error << "\n";
      }
    }
    out << "\n";
  }

  if (!report.correlations.empty()) {
    out << "Correlations\n" << rule(12);
    for (const auto& c : report.correlations) {
      out << spec.label(c.x) << " ~ " << spec.label(c.y) << " [" << c.country << "]: ";
      if (c.result) {
        out << "r = " << num(c.result->r) << ", 95% CI " << ci(c.result->ci_low, c.result->ci_high) << ", "
            << format_p(c.result->p) << ", n = " << c.result->n << "\n";
      } else {
        out << "not computed: " << c.error << "\n";
      }
    }
  }
  return out.str();
}

}  // namespace emi::cli
