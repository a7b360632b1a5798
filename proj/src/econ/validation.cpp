#include "emi/econ/validation.hpp"

#include <stdexcept>

#include "emi/util/csv.hpp"

namespace emi::econ {

using nlohmann::json;

std::vector<Annotation> load_annotations(const std::filesystem::path& path) {
  const auto table = csv::read_table(path);
  const auto c_id = table.column("id");
  const auto c_ev = table.column("evidence");
  const auto c_in = table.column("intuition");
  const auto c_text = table.find_column("text");
  std::vector<Annotation> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Annotation a;
    a.id = row[c_id];
    try {
      a.evidence = csv::parse_number(row[c_ev]);
      a.intuition = csv::parse_number(row[c_in]);
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(table.lines[r]) +
                               ": bad annotation rating: " + e.what());
    }
    if (a.id.empty()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(table.lines[r]) + ": empty id");
    }
    if (c_text) a.text = row[*c_text];
    out.push_back(std::move(a));
  }
  return out;
}

std::optional<int> binary_label(const Annotation& a) {
  if (a.evidence > a.intuition) return 1;
  if (a.evidence < a.intuition) return 0;
  return std::nullopt;
}

void to_json(json& j, const ValidationResult& v) {
  j = json{{"n_annotations", v.n_annotations},
           {"n_ties", v.n_ties},
           {"n_unmatched", v.n_unmatched},
           {"n_used", v.n_used},
           {"methods", v.methods}};
  if (v.compared && v.comparison) {
    j["comparison"] = json{{"a", v.compared->first}, {"b", v.compared->second}, {"delong", *v.comparison}};
  } else {
    j["comparison"] = nullptr;
  }
}

ValidationResult validate_emi(const std::vector<Annotation>& annotations, const Predictions& predictions,
                              const std::optional<std::pair<std::string, std::string>>& compare) {
  if (predictions.empty()) throw std::invalid_argument("validate_emi: no prediction columns");
  if (compare) {
    for (const auto& m : {compare->first, compare->second}) {
      if (!predictions.count(m)) throw std::invalid_argument("validate_emi: unknown method '" + m + "'");
    }
  }
  ValidationResult out;
  out.n_annotations = annotations.size();
  std::vector<int> labels;
  std::map<std::string, std::vector<double>> scores;
  for (const auto& a : annotations) {
    const auto label = binary_label(a);
    if (!label) {
      ++out.n_ties;
      continue;
    }
    bool matched = true;
    for (const auto& [method, preds] : predictions) matched = matched && preds.count(a.id);
    if (!matched) {
      ++out.n_unmatched;
      continue;
    }
    labels.push_back(*label);
    for (const auto& [method, preds] : predictions) scores[method].push_back(preds.at(a.id));
  }
  if (labels.empty()) {
    throw std::runtime_error("validate_emi: no usable annotations (" + std::to_string(out.n_ties) +
                             " ties, " + std::to_string(out.n_unmatched) + " without predictions)");
  }
  out.n_used = labels.size();
  for (const auto& [method, s] : scores) out.methods[method] = auc(s, labels);
  if (compare) {
    out.compared = compare;
    out.comparison = delong_compare(scores.at(compare->first), scores.at(compare->second), labels);
  }
  return out;
}

}  // namespace emi::econ
