#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "emi/corpus.hpp"

namespace emi::preprocess {

/// Whitespace tokenizer: trims, splits on Unicode whitespace, keeps
/// punctuation attached to words.
[[nodiscard]] std::vector<std::string> tokenize(std::string_view text);

class CommonWordList {
 public:
  static constexpr std::size_t kSize = 100;

  /// Validates exactly kSize unique lowercase entries.
  CommonWordList(std::string language, std::vector<std::string> words);

  /// One token per line; the language tag is the file stem unless given.
  [[nodiscard]] static CommonWordList load(const std::filesystem::path& path,
                                           std::string language = {});

  [[nodiscard]] const std::string& language() const noexcept { return language_; }
  [[nodiscard]] const std::vector<std::string>& words() const noexcept { return words_; }
  [[nodiscard]] bool contains(std::string_view lookup_form) const;

 private:
  std::string language_;
  std::vector<std::string> words_;
  std::unordered_set<std::string> set_;
};

/// Top-`size` lookup forms by frequency across the records' texts for one
/// language (ties broken lexicographically).
[[nodiscard]] std::vector<std::string> derive_common_words(
    const std::vector<corpus::SpeechRecord>& records, std::string_view language,
    std::size_t size = CommonWordList::kSize);

class UndefinedRatio : public std::domain_error {
 public:
  UndefinedRatio() : std::domain_error("common-word ratio undefined for zero tokens") {}
};

/// Share of tokens whose lowercased, punctuation-stripped form is listed.
[[nodiscard]] double common_word_ratio(std::string_view text, const CommonWordList& list);

struct FilterDecision {
  bool keep = true;
  std::string reason;  // "min_tokens" | "lexical_ratio" | empty when kept
  std::size_t token_count = 0;
  double ratio = 0.0;
};

/// Drops a speech iff it has fewer than `min_tokens` tokens or its ratio is
/// below `ratio_threshold`. Exactly-at-threshold speeches are kept.
[[nodiscard]] FilterDecision apply_lexical_filters(const corpus::SpeechRecord& speech,
                                                   const CommonWordList& list,
                                                   double ratio_threshold = 0.05,
                                                   std::size_t min_tokens = 11);

struct Segment {
  std::string segment_id;
  std::string speech_id;
  std::string country;
  int year = 0;
  std::string language;
  std::size_t chunk_index = 0;
  std::string text;
  std::size_t token_count = 0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

void to_json(nlohmann::json& j, const Segment& s);
void from_json(const nlohmann::json& j, Segment& s);

/// Chunk lengths for a speech of `n_tokens` tokens: runs of `target`, with a
/// residual shorter than `min_chunk` merged into the preceding run.
[[nodiscard]] std::vector<std::size_t> chunk_sizes(std::size_t n_tokens, std::size_t target = 150,
                                                   std::size_t min_chunk = 50);

[[nodiscard]] std::vector<Segment> chunk(const corpus::SpeechRecord& speech,
                                         std::size_t target = 150, std::size_t min_chunk = 50);

/// Segment id for chunk `index` of a speech.
[[nodiscard]] std::string segment_id(std::string_view speech_id, std::size_t index);

struct Config {
  double ratio_threshold = 0.05;
  std::size_t min_tokens = 11;
  std::size_t chunk_target = 150;
  std::size_t chunk_min = 50;
  std::map<std::string, double> ratio_overrides;  // per country

  [[nodiscard]] double threshold_for(const std::string& country) const;
  [[nodiscard]] static Config from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;
};

struct Dropped {
  std::string speech_id;
  std::string reason;
  std::size_t token_count = 0;
  double ratio = 0.0;
};

struct Result {
  std::vector<corpus::SpeechRecord> kept;
  std::vector<Dropped> dropped;
  std::vector<Segment> segments;
};

/// Lexical filters then chunking for every speech. Throws when a speech's
/// language has no common-word list.
[[nodiscard]] Result run(const std::vector<corpus::SpeechRecord>& speeches,
                         const std::map<std::string, CommonWordList>& lists, const Config& config);

}  // namespace emi::preprocess
