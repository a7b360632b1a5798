#include "emi/embedder.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <mutex>
#include <optional>
#include <set>
#include <thread>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "emi/util/csv.hpp"
#include "emi/util/parallel.hpp"
#include "emi/util/utf8.hpp"

namespace emi::embedder {

using nlohmann::json;

namespace {

void validate_category(const std::vector<AnchorEntry>& entries, std::string_view category,
                       std::string_view language) {
  if (entries.size() != AnchorSet::kEntriesPerCategory) {
    throw AnchorError("anchor set '" + std::string(language) + "': category '" +
                      std::string(category) + "' has " + std::to_string(entries.size()) +
                      " entries, expected " + std::to_string(AnchorSet::kEntriesPerCategory));
  }
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (e.term.empty()) {
      throw AnchorError("anchor set '" + std::string(language) + "': empty term in category '" +
                        std::string(category) + "'");
    }
    if (e.definition.empty()) {
      throw AnchorError("anchor set '" + std::string(language) + "': term '" + e.term +
                        "' has an empty definition");
    }
    if (!seen.insert(e.term).second) {
      throw AnchorError("anchor set '" + std::string(language) + "': duplicate term '" + e.term +
                        "' in category '" + std::string(category) + "'");
    }
  }
}

}  // namespace

void AnchorSet::validate() const {
  validate_category(evidence, "evidence", language);
  validate_category(intuition, "intuition", language);
}

AnchorSet load_anchors(const std::filesystem::path& path, std::string language) {
  const auto table = csv::read_table(path);
  const auto c_category = table.column("category");
  const auto c_term = table.column("term");
  const auto c_definition = table.column("definition");
  AnchorSet set;
  set.language = language.empty() ? path.stem().string() : std::move(language);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    AnchorEntry entry{std::string(utf8::trim(row[c_term])), std::string(utf8::trim(row[c_definition]))};
    const auto category = utf8::to_lower(utf8::trim(row[c_category]));
    if (category == "evidence") {
      set.evidence.push_back(std::move(entry));
    } else if (category == "intuition") {
      set.intuition.push_back(std::move(entry));
    } else {
      throw AnchorError(path.string() + ":" + std::to_string(table.lines[r]) +
                        ": unknown anchor category '" + row[c_category] + "'");
    }
  }
  set.validate();
  return set;
}

AnchorEmbedMode parse_anchor_embed_mode(std::string_view text) {
  if (text == "joined") return AnchorEmbedMode::joined;
  if (text == "separate") return AnchorEmbedMode::separate;
  throw std::invalid_argument("unknown anchor_embed_mode '" + std::string(text) + "'");
}

std::string to_string(AnchorEmbedMode mode) {
  return mode == AnchorEmbedMode::joined ? "joined" : "separate";
}

std::vector<std::string> anchor_texts(const std::vector<AnchorEntry>& entries, AnchorEmbedMode mode) {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (mode == AnchorEmbedMode::joined) {
      out.push_back(e.joined());
    } else {
      out.push_back(e.term);
      out.push_back(e.definition);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transport

std::vector<Vector> HttpEmbeddingClient::embed(const EndpointConfig& endpoint,
                                               const std::vector<std::string>& texts) {
  const json body{{"model", endpoint.model_name}, {"input", texts}};
  const auto reply = http::post_json(endpoint, "/v1/embeddings", body);
  std::vector<Vector> out(texts.size());
  try {
    const auto& data = reply.at("data");
    if (!data.is_array() || data.size() != texts.size()) {
      throw TransportError(endpoint.model_name + ": embeddings reply has " +
                           std::to_string(data.is_array() ? data.size() : 0) + " items for " +
                           std::to_string(texts.size()) + " inputs");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto idx = data[i].contains("index") ? data[i].at("index").get<std::size_t>() : i;
      if (idx >= out.size() || !out[idx].empty()) {
        throw TransportError(endpoint.model_name + ": embeddings reply has a bad index");
      }
      out[idx] = data[i].at("embedding").get<Vector>();
    }
  } catch (const json::exception& e) {
    throw TransportError(endpoint.model_name + ": malformed embeddings reply: " + e.what());
  }
  return out;
}

bool HttpEmbeddingClient::healthy(const EndpointConfig& endpoint) { return http::probe(endpoint); }

namespace {

std::string encode_vector(const Vector& v) {
  std::string out(v.size() * sizeof(float), '\0');
  for (std::size_t i = 0; i < v.size(); ++i) {
    const float f = static_cast<float>(v[i]);
    std::memcpy(out.data() + i * sizeof(float), &f, sizeof(float));
  }
  return out;
}

std::optional<Vector> decode_vector(const std::string& bytes) {
  if (bytes.empty() || bytes.size() % sizeof(float) != 0) return std::nullopt;
  Vector v(bytes.size() / sizeof(float));
  for (std::size_t i = 0; i < v.size(); ++i) {
    float f = 0;
    std::memcpy(&f, bytes.data() + i * sizeof(float), sizeof(float));
    v[i] = f;
  }
  return v;
}

std::string cache_key(const EndpointConfig& endpoint, const std::string& text) {
  return "embed\x1f" + endpoint.model_name + '\x1f' + text;
}

std::vector<Vector> embed_batch(const std::vector<std::string>& texts, const EndpointConfig& endpoint,
                                EmbeddingClient& client, std::size_t& retries) {
  std::string last_error;
  const int attempts = endpoint.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      ++retries;
      if (endpoint.backoff_ms > 0) {
        const auto delay =
            std::min<long long>(30'000, static_cast<long long>(endpoint.backoff_ms) << (attempt - 1));
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      }
    }
    try {
      auto vectors = client.embed(endpoint, texts);
      if (vectors.size() != texts.size()) {
        throw TransportError(endpoint.model_name + ": got " + std::to_string(vectors.size()) +
                             " vectors for " + std::to_string(texts.size()) + " inputs");
      }
      for (auto& v : vectors) {
        if (v.empty()) throw TransportError(endpoint.model_name + ": empty embedding vector");
        for (auto& x : v) {
          x = static_cast<float>(x);
          if (!std::isfinite(x)) throw TransportError(endpoint.model_name + ": non-finite embedding value");
        }
      }
      return vectors;
    } catch (const TransportError& e) {
      last_error = e.what();
      spdlog::debug("embed batch attempt {} failed: {}", attempt + 1, e.what());
    }
  }
  if (!client.healthy(endpoint)) {
    throw EndpointDownError("embedding endpoint " + endpoint.model_name + " at " + endpoint.base_url +
                            " is down (" + last_error + "); cached vectors are kept, rerun to resume");
  }
  throw std::runtime_error("embedding batch failed after " + std::to_string(attempts) +
                           " attempts: " + last_error);
}

}  // namespace

std::vector<Vector> embed_texts(const std::vector<std::string>& texts, const EndpointConfig& endpoint,
                                EmbeddingClient& client, const EmbedOptions& options,
                                EmbedStats* stats) {
  endpoint.validate();
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) {
      throw std::invalid_argument("embed_texts: empty input at position " + std::to_string(i));
    }
  }

  std::vector<Vector> out(texts.size());
  std::vector<std::string> pending;  // unique uncached texts
  std::unordered_map<std::string, std::vector<std::size_t>> positions;
  EmbedStats local;
  local.requested = texts.size();
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (auto it = positions.find(texts[i]); it != positions.end()) {
      it->second.push_back(i);
      continue;
    }
    if (auto bytes = options.cache.get(cache_key(endpoint, texts[i]))) {
      if (auto v = decode_vector(*bytes)) {
        out[i] = std::move(*v);
        ++local.cache_hits;
        continue;
      }
    }
    positions[texts[i]].push_back(i);
    pending.push_back(texts[i]);
  }

  const std::size_t batch = std::max<std::size_t>(1, endpoint.batch_size);
  const std::size_t n_batches = (pending.size() + batch - 1) / batch;
  local.batches = n_batches;
  std::size_t workers = endpoint.max_parallel;
  if (options.jobs > 0) workers = std::min(workers, options.jobs);
  std::mutex mu;
  parallel_for(n_batches, workers, [&](std::size_t b) {
    const auto first = b * batch;
    const auto last = std::min(pending.size(), first + batch);
    std::vector<std::string> chunk(pending.begin() + static_cast<std::ptrdiff_t>(first),
                                   pending.begin() + static_cast<std::ptrdiff_t>(last));
    std::size_t retries = 0;
    auto vectors = embed_batch(chunk, endpoint, client, retries);
    for (std::size_t k = 0; k < chunk.size(); ++k) {
      options.cache.put(cache_key(endpoint, chunk[k]), encode_vector(vectors[k]));
    }
    std::lock_guard lock(mu);
    local.retries += retries;
    for (std::size_t k = 0; k < chunk.size(); ++k) {
      for (const auto i : positions.at(chunk[k])) out[i] = vectors[k];
    }
  });

  if (!out.empty()) {
    const auto dim = out.front().size();
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i].size() != dim) {
        throw DimensionError("embedding dimension mismatch: input 0 has dim " + std::to_string(dim) +
                             ", input " + std::to_string(i) + " has dim " +
                             std::to_string(out[i].size()));
      }
    }
  }
  if (stats) {
    stats->requested += local.requested;
    stats->cache_hits += local.cache_hits;
    stats->batches += local.batches;
    stats->retries += local.retries;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Anchors and scoring

namespace {

double norm(const Vector& v) {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

Vector mean_vector(const std::vector<Vector>& vectors, bool normalize_before_mean,
                   std::string_view label) {
  if (vectors.empty()) throw AnchorError("anchor '" + std::string(label) + "': no vectors");
  const auto dim = vectors.front().size();
  Vector mean(dim, 0.0);
  double scale_ref = 0.0;
  for (const auto& v : vectors) {
    if (v.size() != dim) {
      throw DimensionError("anchor '" + std::string(label) + "': dimension " +
                           std::to_string(v.size()) + " differs from " + std::to_string(dim));
    }
    const double n = norm(v);
    scale_ref = std::max(scale_ref, n);
    const double w = normalize_before_mean && n > 0.0 ? 1.0 / n : 1.0;
    for (std::size_t k = 0; k < dim; ++k) mean[k] += w * v[k];
  }
  for (auto& x : mean) x /= static_cast<double>(vectors.size());
  const double reference = normalize_before_mean ? 1.0 : scale_ref;
  if (!(norm(mean) > 1e-12 * reference)) {
    throw AnchorError("anchor '" + std::string(label) + "' mean is the zero vector");
  }
  return mean;
}

void to_json(json& j, const AnchorVectors& a) {
  j = json{{"language", a.language}, {"dim", a.dim}, {"evidence", a.evidence},
           {"intuition", a.intuition}};
}

AnchorVectors build_anchor_vectors(const AnchorSet& anchors, const EndpointConfig& endpoint,
                                   EmbeddingClient& client, const EmbedOptions& options) {
  anchors.validate();
  const auto ev_texts = anchor_texts(anchors.evidence, options.anchor_mode);
  const auto in_texts = anchor_texts(anchors.intuition, options.anchor_mode);
  std::vector<std::string> all(ev_texts);
  all.insert(all.end(), in_texts.begin(), in_texts.end());
  auto vectors = embed_texts(all, endpoint, client, options);
  std::vector<Vector> ev(vectors.begin(), vectors.begin() + static_cast<std::ptrdiff_t>(ev_texts.size()));
  std::vector<Vector> in(vectors.begin() + static_cast<std::ptrdiff_t>(ev_texts.size()), vectors.end());
  AnchorVectors out;
  out.language = anchors.language;
  out.evidence = mean_vector(ev, options.normalize_before_mean, anchors.language + "/evidence");
  out.intuition = mean_vector(in, options.normalize_before_mean, anchors.language + "/intuition");
  out.dim = out.evidence.size();
  return out;
}

double cosine(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw DimensionError("cosine: dimensions differ (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
  }
  double dot = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  if (aa == 0.0 || bb == 0.0) throw std::invalid_argument("cosine: zero vector");
  return std::clamp(dot / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

void to_json(json& j, const SegmentEmbeddingScore& s) {
  j = json{{"segment_id", s.segment_id}, {"cos_evidence", s.cos_evidence},
           {"cos_intuition", s.cos_intuition}, {"emi_emb_raw", s.emi_emb_raw}};
}

void from_json(const json& j, SegmentEmbeddingScore& s) {
  s.segment_id = j.at("segment_id").get<std::string>();
  s.cos_evidence = j.at("cos_evidence").get<double>();
  s.cos_intuition = j.at("cos_intuition").get<double>();
  s.emi_emb_raw = j.at("emi_emb_raw").get<double>();
}

SegmentEmbeddingScore score_segment_embedding(std::string segment_id, const Vector& segment_vector,
                                              const AnchorVectors& anchors) {
  if (segment_vector.size() != anchors.evidence.size() ||
      segment_vector.size() != anchors.intuition.size()) {
    throw DimensionError("segment '" + segment_id + "' has dim " +
                         std::to_string(segment_vector.size()) + " but anchors have dim " +
                         std::to_string(anchors.evidence.size()));
  }
  SegmentEmbeddingScore s;
  s.segment_id = std::move(segment_id);
  s.cos_evidence = cosine(segment_vector, anchors.evidence);
  s.cos_intuition = cosine(segment_vector, anchors.intuition);
  s.emi_emb_raw = s.cos_evidence - s.cos_intuition;
  return s;
}

std::vector<SegmentEmbeddingScore> score_segments(
    const std::vector<preprocess::Segment>& segments,
    const std::map<std::string, AnchorVectors>& anchors_by_language, const EndpointConfig& endpoint,
    EmbeddingClient& client, const EmbedOptions& options, EmbedStats* stats) {
  std::vector<const AnchorVectors*> anchors(segments.size());
  std::vector<std::string> texts;
  texts.reserve(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto it = anchors_by_language.find(segments[i].language);
    if (it == anchors_by_language.end()) {
      throw AnchorError("no anchor set for language '" + segments[i].language + "' (segment " +
                        segments[i].segment_id + ")");
    }
    anchors[i] = &it->second;
    texts.push_back(segments[i].text);
  }
  const auto vectors = embed_texts(texts, endpoint, client, options, stats);
  std::vector<SegmentEmbeddingScore> out(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    out[i] = score_segment_embedding(segments[i].segment_id, vectors[i], *anchors[i]);
  }
  return out;
}

}  // namespace emi::embedder
