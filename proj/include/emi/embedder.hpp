#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "emi/endpoint.hpp"
#include "emi/preprocess.hpp"
#include "emi/util/cache.hpp"

namespace emi::embedder {

using Vector = std::vector<double>;

class AnchorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AnchorEntry {
  std::string term;
  std::string definition;

  /// "term: definition", the form that is embedded in joined mode.
  [[nodiscard]] std::string joined() const { return term + ": " + definition; }
};

struct AnchorSet {
  static constexpr std::size_t kEntriesPerCategory = 15;

  std::string language;
  std::vector<AnchorEntry> evidence;
  std::vector<AnchorEntry> intuition;

  /// Throws AnchorError on a wrong entry count, duplicate terms or empty
  /// terms/definitions.
  void validate() const;
};

/// Reads a delimited file with columns category, term, definition (category
/// is "evidence" or "intuition"). The language defaults to the file stem.
[[nodiscard]] AnchorSet load_anchors(const std::filesystem::path& path, std::string language = {});

enum class AnchorEmbedMode { joined, separate };

[[nodiscard]] AnchorEmbedMode parse_anchor_embed_mode(std::string_view text);
[[nodiscard]] std::string to_string(AnchorEmbedMode mode);

/// Strings embedded for one category: one per entry ("term: definition"),
/// or term and definition separately.
[[nodiscard]] std::vector<std::string> anchor_texts(const std::vector<AnchorEntry>& entries,
                                                    AnchorEmbedMode mode);

// ---------------------------------------------------------------------------
// Transport

class EmbeddingClient {
 public:
  virtual ~EmbeddingClient() = default;
  /// One vector per input in input order. Throws TransportError.
  virtual std::vector<Vector> embed(const EndpointConfig& endpoint,
                                    const std::vector<std::string>& texts) = 0;
  virtual bool healthy(const EndpointConfig& endpoint) = 0;
};

/// POST {base_url}/v1/embeddings with model and input; reads data[i].embedding.
class HttpEmbeddingClient final : public EmbeddingClient {
 public:
  std::vector<Vector> embed(const EndpointConfig& endpoint,
                            const std::vector<std::string>& texts) override;
  bool healthy(const EndpointConfig& endpoint) override;
};

class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EmbedOptions {
  std::size_t jobs = 0;  // concurrent batches; 0 = endpoint.max_parallel
  DiskCache cache;
  bool normalize_before_mean = false;
  AnchorEmbedMode anchor_mode = AnchorEmbedMode::joined;
};

struct EmbedStats {
  std::size_t requested = 0;
  std::size_t cache_hits = 0;
  std::size_t batches = 0;
  std::size_t retries = 0;
};

/// Embeds texts in batches of endpoint.batch_size. Vectors are rounded to
/// float32 on receipt, so cached and fresh results are identical. Throws on
/// empty input strings, inconsistent dimensions, and exhausted retries
/// (EndpointDownError when the endpoint no longer answers its probe).
[[nodiscard]] std::vector<Vector> embed_texts(const std::vector<std::string>& texts,
                                              const EndpointConfig& endpoint,
                                              EmbeddingClient& client,
                                              const EmbedOptions& options = {},
                                              EmbedStats* stats = nullptr);

struct AnchorVectors {
  std::string language;
  Vector evidence;
  Vector intuition;
  std::size_t dim = 0;
};

void to_json(nlohmann::json& j, const AnchorVectors& a);

/// Arithmetic mean of the given embeddings, optionally L2-normalizing each
/// first. Throws AnchorError if the mean is the zero vector.
[[nodiscard]] Vector mean_vector(const std::vector<Vector>& vectors, bool normalize_before_mean,
                                 std::string_view label);

[[nodiscard]] AnchorVectors build_anchor_vectors(const AnchorSet& anchors,
                                                 const EndpointConfig& endpoint,
                                                 EmbeddingClient& client,
                                                 const EmbedOptions& options = {});

/// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Throws on unequal dimensions
/// or a zero vector.
[[nodiscard]] double cosine(const Vector& a, const Vector& b);

struct SegmentEmbeddingScore {
  std::string segment_id;
  double cos_evidence = 0.0;
  double cos_intuition = 0.0;
  double emi_emb_raw = 0.0;
};

void to_json(nlohmann::json& j, const SegmentEmbeddingScore& s);
void from_json(const nlohmann::json& j, SegmentEmbeddingScore& s);

[[nodiscard]] SegmentEmbeddingScore score_segment_embedding(std::string segment_id,
                                                            const Vector& segment_vector,
                                                            const AnchorVectors& anchors);

/// Embeds and scores segments; each segment is scored against the anchors
/// of its language.
[[nodiscard]] std::vector<SegmentEmbeddingScore> score_segments(
    const std::vector<preprocess::Segment>& segments,
    const std::map<std::string, AnchorVectors>& anchors_by_language,
    const EndpointConfig& endpoint, EmbeddingClient& client, const EmbedOptions& options = {},
    EmbedStats* stats = nullptr);

}  // namespace emi::embedder
