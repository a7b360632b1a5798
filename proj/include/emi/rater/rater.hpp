#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "emi/endpoint.hpp"
#include "emi/preprocess.hpp"
#include "emi/rater/prompts.hpp"
#include "emi/util/cache.hpp"

namespace emi::rater {

// ---------------------------------------------------------------------------
// Payload parsing

struct FieldRange {
  std::string name;
  int min = 0;
  int max = 4;
};

using RatingSchema = std::vector<FieldRange>;

[[nodiscard]] const RatingSchema& schema_for(Task task);

struct ParsedRating {
  std::map<std::string, int> values;
  std::vector<std::string> warnings;  // e.g. unexpected extra fields
};

class RatingParseError : public std::runtime_error {
 public:
  RatingParseError(const std::string& what, std::string raw)
      : std::runtime_error(what), raw_(std::move(raw)) {}
  [[nodiscard]] const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

/// Extracts the first balanced JSON object from `raw` and validates every
/// schema field as an in-range integer. Extra fields produce warnings.
[[nodiscard]] ParsedRating parse_rating_payload(std::string_view raw, const RatingSchema& schema);

// ---------------------------------------------------------------------------
// Chat transport

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  /// Returns choices[0].message.content. Throws TransportError.
  virtual std::string complete(const EndpointConfig& endpoint,
                               const std::vector<ChatMessage>& messages) = 0;
  virtual bool healthy(const EndpointConfig& endpoint) = 0;
};

/// POST {base_url}/v1/chat/completions with model, messages, temperature and
/// max_tokens.
class HttpChatClient final : public ChatClient {
 public:
  std::string complete(const EndpointConfig& endpoint,
                       const std::vector<ChatMessage>& messages) override;
  bool healthy(const EndpointConfig& endpoint) override;
};

// ---------------------------------------------------------------------------
// Ratings

struct ProceduralRating {
  std::string segment_id;
  std::string model_name;
  int rating = 0;
};

struct EpistemicRating {
  std::string segment_id;
  std::string model_name;
  int evidence_based = 0;
  int evidence_free = 0;
};

void to_json(nlohmann::json& j, const ProceduralRating& r);
void from_json(const nlohmann::json& j, ProceduralRating& r);
void to_json(nlohmann::json& j, const EpistemicRating& r);
void from_json(const nlohmann::json& j, EpistemicRating& r);

/// Unit of rating work: a segment, or a whole speech for speech-level
/// procedural filtering.
struct RatingItem {
  std::string id;
  std::string language;
  std::string text;
};

[[nodiscard]] RatingItem to_item(const preprocess::Segment& segment);

struct RawRating {
  std::string item_id;
  std::string model_name;
  std::map<std::string, int> values;
  int retries = 0;
  bool from_cache = false;
};

struct MissingRating {
  std::string item_id;
  std::string model_name;
  std::string reason;
  int attempts = 0;
};

void to_json(nlohmann::json& j, const MissingRating& m);

struct RateOptions {
  std::size_t jobs = 0;   // global cap on concurrent requests; 0 = no cap
  bool health_probe = true;
  DiskCache cache;
};

struct RateResult {
  std::vector<RawRating> ratings;  // ordered by (item order, endpoint order)
  std::vector<MissingRating> missing;
  std::size_t retries = 0;
  std::size_t cache_hits = 0;

  [[nodiscard]] std::vector<ProceduralRating> procedural() const;
  [[nodiscard]] std::vector<EpistemicRating> epistemic() const;
};

/// Rates every item with every endpoint. Transport and parse failures are
/// retried with exponential backoff up to max_retries; exhausted pairs are
/// reported as missing. Throws EndpointDownError when the initial health
/// probe fails or an endpoint stays unreachable mid-run.
[[nodiscard]] RateResult rate_segments(const std::vector<RatingItem>& items,
                                       const std::vector<EndpointConfig>& endpoints, Task task,
                                       ChatClient& client, const RateOptions& options = {});

[[nodiscard]] RateResult rate_segments(const std::vector<preprocess::Segment>& segments,
                                       const std::vector<EndpointConfig>& endpoints, Task task,
                                       ChatClient& client, const RateOptions& options = {});

// ---------------------------------------------------------------------------
// Aggregation

struct ProceduralDecision {
  std::string segment_id;
  bool keep = false;
  std::string reason;  // "procedural" | "unrated" | empty when kept
  std::optional<double> mean_rating;
  std::size_t n_models = 0;
};

void to_json(nlohmann::json& j, const ProceduralDecision& d);

/// Mean rating across models per id; keep iff mean <= threshold. Ids with no
/// rating are excluded as "unrated". Output follows `ids` order.
[[nodiscard]] std::vector<ProceduralDecision> filter_procedural(
    const std::vector<std::string>& ids, const std::vector<ProceduralRating>& ratings,
    int threshold = 2);

struct EnsembleEpistemicScore {
  std::string segment_id;
  double mean_evidence = 0.0;
  double mean_intuition = 0.0;
  double emi_llm_raw = 0.0;
  std::size_t n_models = 0;
};

void to_json(nlohmann::json& j, const EnsembleEpistemicScore& s);
void from_json(const nlohmann::json& j, EnsembleEpistemicScore& s);

/// Averages the available model ratings for one segment; nullopt when there
/// are none (segment is unscored).
[[nodiscard]] std::optional<EnsembleEpistemicScore> ensemble_epistemic(
    const std::vector<EpistemicRating>& ratings);

/// Groups by segment id in first-seen order and applies ensemble_epistemic.
[[nodiscard]] std::vector<EnsembleEpistemicScore> ensemble_all(
    const std::vector<EpistemicRating>& ratings);

}  // namespace emi::rater
