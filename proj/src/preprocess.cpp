#include "emi/preprocess.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "emi/util/utf8.hpp"

namespace emi::preprocess {

using nlohmann::json;

std::vector<std::string> tokenize(std::string_view text) {
  const auto views = utf8::split_whitespace(text);
  return {views.begin(), views.end()};
}

CommonWordList::CommonWordList(std::string language, std::vector<std::string> words)
    : language_(std::move(language)), words_(std::move(words)) {
  if (words_.size() != kSize) {
    throw std::invalid_argument("common-word list '" + language_ + "' has " +
                                std::to_string(words_.size()) + " entries, expected " +
                                std::to_string(kSize));
  }
  for (const auto& w : words_) {
    if (w.empty() || w != utf8::to_lower(w)) {
      throw std::invalid_argument("common-word list '" + language_ + "': entry '" + w +
                                  "' is not a lowercase token");
    }
    if (!set_.insert(w).second) {
      throw std::invalid_argument("common-word list '" + language_ + "': duplicate entry '" + w + "'");
    }
  }
}

CommonWordList CommonWordList::load(const std::filesystem::path& path, std::string language) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open common-word list " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto w = utf8::trim(line);
    if (!w.empty()) words.emplace_back(w);
  }
  if (language.empty()) language = path.stem().string();
  return CommonWordList(std::move(language), std::move(words));
}

bool CommonWordList::contains(std::string_view lookup_form) const {
  return set_.count(std::string(lookup_form)) > 0;
}

std::vector<std::string> derive_common_words(const std::vector<corpus::SpeechRecord>& records,
                                             std::string_view language, std::size_t size) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& r : records) {
    if (r.language != language) continue;
    for (const auto token : utf8::split_whitespace(r.text)) {
      auto form = utf8::lookup_form(token);
      if (!form.empty()) ++counts[std::move(form)];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(size, ranked.size()); ++i) out.push_back(ranked[i].first);
  return out;
}

double common_word_ratio(std::string_view text, const CommonWordList& list) {
  const auto tokens = utf8::split_whitespace(text);
  if (tokens.empty()) throw UndefinedRatio();
  std::size_t hits = 0;
  for (const auto token : tokens) {
    if (list.contains(utf8::lookup_form(token))) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(tokens.size());
}

FilterDecision apply_lexical_filters(const corpus::SpeechRecord& speech, const CommonWordList& list,
                                     double ratio_threshold, std::size_t min_tokens) {
  FilterDecision d;
  d.token_count = utf8::split_whitespace(speech.text).size();
  if (d.token_count < min_tokens || d.token_count == 0) {
    d.keep = false;
    d.reason = "min_tokens";
    return d;
  }
  d.ratio = common_word_ratio(speech.text, list);
  if (d.ratio < ratio_threshold) {
    d.keep = false;
    d.reason = "lexical_ratio";
  }
  return d;
}

void to_json(json& j, const Segment& s) {
  j = json{{"segment_id", s.segment_id}, {"speech_id", s.speech_id},   {"country", s.country},
           {"year", s.year},             {"language", s.language},     {"chunk_index", s.chunk_index},
           {"text", s.text},             {"token_count", s.token_count}};
}

void from_json(const json& j, Segment& s) {
  s.segment_id = j.at("segment_id").get<std::string>();
  s.speech_id = j.at("speech_id").get<std::string>();
  s.country = j.at("country").get<std::string>();
  s.year = j.at("year").get<int>();
  s.language = j.at("language").get<std::string>();
  s.chunk_index = j.at("chunk_index").get<std::size_t>();
  s.text = j.at("text").get<std::string>();
  s.token_count = j.at("token_count").get<std::size_t>();
}

std::vector<std::size_t> chunk_sizes(std::size_t n_tokens, std::size_t target, std::size_t min_chunk) {
  if (target == 0) throw std::invalid_argument("chunk target must be positive");
  if (n_tokens == 0) return {};
  if (n_tokens <= target) return {n_tokens};
  const std::size_t full = n_tokens / target;
  const std::size_t residual = n_tokens % target;
  std::vector<std::size_t> sizes(full, target);
  if (residual == 0) return sizes;
  if (residual >= min_chunk) {
    sizes.push_back(residual);
  } else {
    sizes.back() += residual;
  }
  return sizes;
}

std::string segment_id(std::string_view speech_id, std::size_t index) {
  return std::string(speech_id) + "#" + std::to_string(index);
}

std::vector<Segment> chunk(const corpus::SpeechRecord& speech, std::size_t target,
                           std::size_t min_chunk) {
  const auto tokens = utf8::split_whitespace(speech.text);
  const auto sizes = chunk_sizes(tokens.size(), target, min_chunk);
  std::vector<Segment> out;
  out.reserve(sizes.size());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    Segment s;
    s.segment_id = segment_id(speech.speech_id, i);
    s.speech_id = speech.speech_id;
    s.country = speech.country;
    s.year = speech.year;
    s.language = speech.language;
    s.chunk_index = i;
    s.token_count = sizes[i];
    for (std::size_t t = 0; t < sizes[i]; ++t) {
      if (t) s.text.push_back(' ');
      s.text.append(tokens[offset + t]);
    }
    offset += sizes[i];
    out.push_back(std::move(s));
  }
  return out;
}

double Config::threshold_for(const std::string& country) const {
  const auto it = ratio_overrides.find(country);
  return it == ratio_overrides.end() ? ratio_threshold : it->second;
}

Config Config::from_json(const json& j) {
  Config c;
  c.ratio_threshold = j.value("ratio_threshold", c.ratio_threshold);
  c.min_tokens = j.value("min_tokens", c.min_tokens);
  c.chunk_target = j.value("chunk_target", c.chunk_target);
  c.chunk_min = j.value("chunk_min", c.chunk_min);
  if (j.contains("ratio_overrides")) {
    c.ratio_overrides = j.at("ratio_overrides").get<std::map<std::string, double>>();
  }
  if (c.chunk_target == 0 || c.chunk_min > c.chunk_target) {
    throw std::invalid_argument("preprocess: need 0 < chunk_min <= chunk_target");
  }
  return c;
}

json Config::to_json() const {
  return json{{"ratio_threshold", ratio_threshold}, {"min_tokens", min_tokens},
              {"chunk_target", chunk_target},       {"chunk_min", chunk_min},
              {"ratio_overrides", ratio_overrides}};
}

Result run(const std::vector<corpus::SpeechRecord>& speeches,
           const std::map<std::string, CommonWordList>& lists, const Config& config) {
  Result out;
  for (const auto& speech : speeches) {
    const auto it = lists.find(speech.language);
    if (it == lists.end()) {
      throw std::runtime_error("no common-word list for language '" + speech.language +
                               "' (speech " + speech.speech_id + ")");
    }
    const auto d = apply_lexical_filters(speech, it->second, config.threshold_for(speech.country),
                                         config.min_tokens);
    if (!d.keep) {
      out.dropped.push_back({speech.speech_id, d.reason, d.token_count, d.ratio});
      continue;
    }
    out.kept.push_back(speech);
    auto segs = chunk(speech, config.chunk_target, config.chunk_min);
    std::move(segs.begin(), segs.end(), std::back_inserter(out.segments));
  }
  return out;
}

}  // namespace emi::preprocess
