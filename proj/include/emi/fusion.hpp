#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "emi/embedder.hpp"
#include "emi/preprocess.hpp"
#include "emi/rater/rater.hpp"

namespace emi::fusion {

class ZeroVarianceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// (v - mean) / sd with the sample (n - 1) standard deviation. Throws
/// std::invalid_argument for fewer than two values and ZeroVarianceError
/// when all values are equal.
[[nodiscard]] std::vector<double> zscore(const std::vector<double>& values);

enum class ZScope { country, global };

[[nodiscard]] ZScope parse_z_scope(std::string_view text);
[[nodiscard]] std::string to_string(ZScope scope);

struct SegmentScore {
  std::string segment_id;
  std::string country;
  int year = 0;
  double emi_llm_raw = 0.0;
  double emi_emb_raw = 0.0;
  double z_llm = 0.0;
  double z_emb = 0.0;
  double emi = 0.0;
};

void to_json(nlohmann::json& j, const SegmentScore& s);
void from_json(const nlohmann::json& j, SegmentScore& s);

struct GroupStats {
  std::size_t n = 0;
  double mean_llm = 0.0;
  double sd_llm = 0.0;
  double mean_emb = 0.0;
  double sd_emb = 0.0;
};

void to_json(nlohmann::json& j, const GroupStats& g);

struct FuseDrop {
  std::string segment_id;
  std::string reason;  // "missing_llm" | "missing_emb" | "missing_both"
};

struct FuseResult {
  std::vector<SegmentScore> scores;      // in segment order
  std::vector<FuseDrop> dropped;
  std::map<std::string, GroupStats> groups;  // keyed by country, or "ALL"
};

/// Joins both components on segment id, z-scores each within its
/// standardization group and averages the two z values. Segments lacking a
/// component are dropped and reported. Throws when no segment has both.
[[nodiscard]] FuseResult fuse(const std::vector<preprocess::Segment>& segments,
                              const std::vector<rater::EnsembleEpistemicScore>& llm,
                              const std::vector<embedder::SegmentEmbeddingScore>& emb,
                              ZScope scope = ZScope::country);

}  // namespace emi::fusion
