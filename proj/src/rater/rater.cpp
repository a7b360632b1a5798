#include "emi/rater/rater.hpp"

#include <algorithm>
#include <chrono>
#include <semaphore>
#include <thread>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "emi/util/parallel.hpp"

namespace emi::rater {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Payload parsing

const RatingSchema& schema_for(Task task) {
  static const RatingSchema kProcedural = {{"procedural", 0, 4}};
  static const RatingSchema kEpistemic = {{"evidence_free", 0, 4}, {"evidence_based", 0, 4}};
  return task == Task::procedural ? kProcedural : kEpistemic;
}

namespace {

// End offset (exclusive) of the balanced object starting at `open`, or npos.
std::size_t match_object(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

}  // namespace

ParsedRating parse_rating_payload(std::string_view raw, const RatingSchema& schema) {
  std::optional<json> object;
  for (auto open = raw.find('{'); open != std::string_view::npos; open = raw.find('{', open + 1)) {
    const auto end = match_object(raw, open);
    if (end == std::string_view::npos) break;
    try {
      auto candidate = json::parse(raw.substr(open, end - open));
      if (candidate.is_object()) {
        object = std::move(candidate);
        break;
      }
    } catch (const json::parse_error&) {
      // try the next opening brace
    }
  }
  if (!object) throw RatingParseError("no JSON object in model output", std::string(raw));

  ParsedRating out;
  for (const auto& field : schema) {
    if (!object->contains(field.name)) {
      throw RatingParseError("missing field '" + field.name + "'", std::string(raw));
    }
    const auto& v = object->at(field.name);
    if (!v.is_number_integer()) {
      throw RatingParseError("field '" + field.name + "' is not an integer", std::string(raw));
    }
    const auto value = v.get<long long>();
    if (value < field.min || value > field.max) {
      throw RatingParseError("field '" + field.name + "' = " + std::to_string(value) +
                                 " outside [" + std::to_string(field.min) + ", " +
                                 std::to_string(field.max) + "]",
                             std::string(raw));
    }
    out.values[field.name] = static_cast<int>(value);
  }
  for (const auto& [key, _] : object->items()) {
    const bool known = std::any_of(schema.begin(), schema.end(),
                                   [&](const FieldRange& f) { return f.name == key; });
    if (!known) out.warnings.push_back("unexpected field '" + key + "'");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Chat transport

std::string HttpChatClient::complete(const EndpointConfig& endpoint,
                                     const std::vector<ChatMessage>& messages) {
  const json body{{"model", endpoint.model_name},
                  {"messages", messages},
                  {"temperature", endpoint.temperature},
                  {"max_tokens", endpoint.max_tokens}};
  const auto reply = http::post_json(endpoint, "/v1/chat/completions", body);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw TransportError(endpoint.model_name + ": reply lacks choices[0].message.content");
  }
}

bool HttpChatClient::healthy(const EndpointConfig& endpoint) { return http::probe(endpoint); }

// ---------------------------------------------------------------------------
// Ratings

void to_json(json& j, const ProceduralRating& r) {
  j = json{{"segment_id", r.segment_id}, {"model", r.model_name}, {"procedural", r.rating}};
}

void from_json(const json& j, ProceduralRating& r) {
  r.segment_id = j.at("segment_id").get<std::string>();
  r.model_name = j.at("model").get<std::string>();
  r.rating = j.at("procedural").get<int>();
}

void to_json(json& j, const EpistemicRating& r) {
  j = json{{"segment_id", r.segment_id},
           {"model", r.model_name},
           {"evidence_based", r.evidence_based},
           {"evidence_free", r.evidence_free}};
}

void from_json(const json& j, EpistemicRating& r) {
  r.segment_id = j.at("segment_id").get<std::string>();
  r.model_name = j.at("model").get<std::string>();
  r.evidence_based = j.at("evidence_based").get<int>();
  r.evidence_free = j.at("evidence_free").get<int>();
}

void to_json(json& j, const MissingRating& m) {
  j = json{{"segment_id", m.item_id}, {"model", m.model_name}, {"reason", m.reason},
           {"attempts", m.attempts}};
}

RatingItem to_item(const preprocess::Segment& segment) {
  return {segment.segment_id, segment.language, segment.text};
}

std::vector<ProceduralRating> RateResult::procedural() const {
  std::vector<ProceduralRating> out;
  for (const auto& r : ratings) out.push_back({r.item_id, r.model_name, r.values.at("procedural")});
  return out;
}

std::vector<EpistemicRating> RateResult::epistemic() const {
  std::vector<EpistemicRating> out;
  for (const auto& r : ratings) {
    out.push_back({r.item_id, r.model_name, r.values.at("evidence_based"), r.values.at("evidence_free")});
  }
  return out;
}

namespace {

struct Cell {
  std::optional<RawRating> rating;
  std::optional<MissingRating> missing;
};

// Counting semaphore that can be disabled.
class RequestGate {
 public:
  explicit RequestGate(std::size_t permits) {
    if (permits > 0) sem_.emplace(static_cast<std::ptrdiff_t>(permits));
  }
  void acquire() {
    if (sem_) sem_->acquire();
  }
  void release() {
    if (sem_) sem_->release();
  }

 private:
  std::optional<std::counting_semaphore<>> sem_;
};

Cell rate_one(const RatingItem& item, const std::vector<ChatMessage>& prompt,
              const std::string& cache_key, const EndpointConfig& endpoint,
              const RatingSchema& schema, ChatClient& client, const DiskCache& cache,
              RequestGate& gate) {
  Cell cell;
  if (auto cached = cache.get(cache_key)) {
    try {
      auto parsed = parse_rating_payload(*cached, schema);
      cell.rating = RawRating{item.id, endpoint.model_name, std::move(parsed.values), 0, true};
      return cell;
    } catch (const RatingParseError&) {
      spdlog::warn("ignoring unparseable cache entry for {} / {}", item.id, endpoint.model_name);
    }
  }

  bool all_transport = true;
  std::string last_error;
  const int attempts = endpoint.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0 && endpoint.backoff_ms > 0) {
      const auto delay = std::min<long long>(30'000, static_cast<long long>(endpoint.backoff_ms) << (attempt - 1));
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    std::string content;
    try {
      gate.acquire();
      struct Release {
        RequestGate& g;
        ~Release() { g.release(); }
      } release{gate};
      content = client.complete(endpoint, prompt);
    } catch (const TransportError& e) {
      last_error = std::string("transport: ") + e.what();
      spdlog::debug("{} / {}: attempt {} failed: {}", item.id, endpoint.model_name, attempt + 1, e.what());
      continue;
    }
    try {
      auto parsed = parse_rating_payload(content, schema);
      for (const auto& w : parsed.warnings) {
        spdlog::warn("{} / {}: {}", item.id, endpoint.model_name, w);
      }
      cache.put(cache_key, content);
      if (attempt > 0) {
        spdlog::info("{} / {}: rated after {} retries", item.id, endpoint.model_name, attempt);
      }
      cell.rating = RawRating{item.id, endpoint.model_name, std::move(parsed.values), attempt, false};
      return cell;
    } catch (const RatingParseError& e) {
      all_transport = false;
      last_error = std::string("parse: ") + e.what();
      spdlog::debug("{} / {}: attempt {} unparseable: {}", item.id, endpoint.model_name, attempt + 1, e.what());
    }
  }
  if (all_transport && !client.healthy(endpoint)) {
    throw EndpointDownError("endpoint " + endpoint.model_name + " at " + endpoint.base_url +
                            " is down (" + last_error + "); completed ratings are cached, rerun to resume");
  }
  cell.missing = MissingRating{item.id, endpoint.model_name, last_error, attempts};
  return cell;
}

}  // namespace

RateResult rate_segments(const std::vector<RatingItem>& items,
                         const std::vector<EndpointConfig>& endpoints, Task task,
                         ChatClient& client, const RateOptions& options) {
  if (endpoints.empty()) throw std::invalid_argument("rate_segments: no endpoints configured");
  for (const auto& e : endpoints) e.validate();
  if (options.health_probe) {
    for (const auto& e : endpoints) {
      if (!client.healthy(e)) {
        throw EndpointDownError("endpoint " + e.model_name + " at " + e.base_url +
                                " failed its health probe");
      }
    }
  }

  const auto& schema = schema_for(task);
  std::vector<std::vector<ChatMessage>> prompts(items.size());
  std::vector<std::string> prompt_hashes(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    prompts[i] = build_prompt(task, items[i].language, items[i].text);
    prompt_hashes[i] = prompt_hash(prompts[i]);
  }

  RequestGate gate(options.jobs);
  std::vector<std::vector<Cell>> cells(endpoints.size(), std::vector<Cell>(items.size()));
  parallel_for(endpoints.size(), endpoints.size(), [&](std::size_t e) {
    const auto& endpoint = endpoints[e];
    std::size_t workers = endpoint.max_parallel;
    if (options.jobs > 0) workers = std::min(workers, options.jobs);
    parallel_for(items.size(), workers, [&](std::size_t i) {
      const std::string key = items[i].id + '\x1f' + endpoint.model_name + '\x1f' + to_string(task) +
                              '\x1f' + prompt_hashes[i];
      cells[e][i] = rate_one(items[i], prompts[i], key, endpoint, schema, client, options.cache, gate);
    });
  });

  RateResult out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t e = 0; e < endpoints.size(); ++e) {
      auto& cell = cells[e][i];
      if (cell.rating) {
        out.retries += static_cast<std::size_t>(cell.rating->retries);
        if (cell.rating->from_cache) ++out.cache_hits;
        out.ratings.push_back(std::move(*cell.rating));
      } else if (cell.missing) {
        out.missing.push_back(std::move(*cell.missing));
      }
    }
  }
  spdlog::info("rate[{}]: {} ratings, {} missing, {} retries, {} cache hits", to_string(task),
               out.ratings.size(), out.missing.size(), out.retries, out.cache_hits);
  return out;
}

RateResult rate_segments(const std::vector<preprocess::Segment>& segments,
                         const std::vector<EndpointConfig>& endpoints, Task task,
                         ChatClient& client, const RateOptions& options) {
  std::vector<RatingItem> items;
  items.reserve(segments.size());
  for (const auto& s : segments) items.push_back(to_item(s));
  return rate_segments(items, endpoints, task, client, options);
}

// ---------------------------------------------------------------------------
// Aggregation

void to_json(json& j, const ProceduralDecision& d) {
  j = json{{"segment_id", d.segment_id}, {"keep", d.keep}, {"reason", d.reason},
           {"n_models", d.n_models}};
  j["mean_rating"] = d.mean_rating ? json(*d.mean_rating) : json(nullptr);
}

std::vector<ProceduralDecision> filter_procedural(const std::vector<std::string>& ids,
                                                  const std::vector<ProceduralRating>& ratings,
                                                  int threshold) {
  std::unordered_map<std::string, std::pair<long long, std::size_t>> sums;
  for (const auto& r : ratings) {
    auto& [sum, n] = sums[r.segment_id];
    sum += r.rating;
    ++n;
  }
  std::vector<ProceduralDecision> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    ProceduralDecision d;
    d.segment_id = id;
    const auto it = sums.find(id);
    if (it == sums.end() || it->second.second == 0) {
      d.reason = "unrated";
    } else {
      const auto [sum, n] = it->second;
      d.n_models = n;
      d.mean_rating = static_cast<double>(sum) / static_cast<double>(n);
      // sum/n <= threshold without rounding
      d.keep = sum <= static_cast<long long>(threshold) * static_cast<long long>(n);
      if (!d.keep) d.reason = "procedural";
    }
    out.push_back(std::move(d));
  }
  return out;
}

void to_json(json& j, const EnsembleEpistemicScore& s) {
  j = json{{"segment_id", s.segment_id},     {"mean_evidence", s.mean_evidence},
           {"mean_intuition", s.mean_intuition}, {"emi_llm_raw", s.emi_llm_raw},
           {"n_models", s.n_models}};
}

void from_json(const json& j, EnsembleEpistemicScore& s) {
  s.segment_id = j.at("segment_id").get<std::string>();
  s.mean_evidence = j.at("mean_evidence").get<double>();
  s.mean_intuition = j.at("mean_intuition").get<double>();
  s.emi_llm_raw = j.at("emi_llm_raw").get<double>();
  s.n_models = j.at("n_models").get<std::size_t>();
}

std::optional<EnsembleEpistemicScore> ensemble_epistemic(const std::vector<EpistemicRating>& ratings) {
  if (ratings.empty()) return std::nullopt;
  long long evidence = 0;
  long long intuition = 0;
  for (const auto& r : ratings) {
    evidence += r.evidence_based;
    intuition += r.evidence_free;
  }
  EnsembleEpistemicScore s;
  s.segment_id = ratings.front().segment_id;
  s.n_models = ratings.size();
  const auto n = static_cast<double>(ratings.size());
  s.mean_evidence = static_cast<double>(evidence) / n;
  s.mean_intuition = static_cast<double>(intuition) / n;
  s.emi_llm_raw = s.mean_evidence - s.mean_intuition;
  return s;
}

std::vector<EnsembleEpistemicScore> ensemble_all(const std::vector<EpistemicRating>& ratings) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<EpistemicRating>> groups;
  for (const auto& r : ratings) {
    auto [it, inserted] = groups.try_emplace(r.segment_id);
    if (inserted) order.push_back(r.segment_id);
    it->second.push_back(r);
  }
  std::vector<EnsembleEpistemicScore> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    if (auto s = ensemble_epistemic(groups.at(id))) out.push_back(std::move(*s));
  }
  return out;
}

}  // namespace emi::rater
