#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "emi/econ/auc.hpp"

namespace emi::econ {

struct Annotation {
  std::string id;
  double evidence = 0.0;
  double intuition = 0.0;
  std::string text;
};

/// Delimited file with header columns id, evidence, intuition and an
/// optional text column.
[[nodiscard]] std::vector<Annotation> load_annotations(const std::filesystem::path& path);

/// 1 when evidence > intuition, 0 when below, nullopt on a tie.
[[nodiscard]] std::optional<int> binary_label(const Annotation& a);

/// method name -> (annotation id -> predicted score)
using Predictions = std::map<std::string, std::unordered_map<std::string, double>>;

struct ValidationResult {
  std::size_t n_annotations = 0;
  std::size_t n_ties = 0;
  std::size_t n_unmatched = 0;
  std::size_t n_used = 0;
  std::map<std::string, AucResult> methods;
  std::optional<std::pair<std::string, std::string>> compared;
  std::optional<DelongResult> comparison;
};

void to_json(nlohmann::json& j, const ValidationResult& v);

/// Labels each annotation by the sign of (evidence - intuition), drops ties
/// and rows lacking a prediction for any method, and reports the AUC per
/// method plus an optional DeLong comparison of two methods.
[[nodiscard]] ValidationResult validate_emi(
    const std::vector<Annotation>& annotations, const Predictions& predictions,
    const std::optional<std::pair<std::string, std::string>>& compare = std::nullopt);

}  // namespace emi::econ
