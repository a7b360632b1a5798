#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "emi/util/csv.hpp"

namespace emi::corpus {

enum class Chamber { lower, upper, unicameral };

[[nodiscard]] std::string to_string(Chamber c);
[[nodiscard]] std::optional<Chamber> parse_chamber(std::string_view text);

struct SpeechRecord {
  std::string speech_id;
  std::string country;
  Chamber chamber = Chamber::unicameral;
  std::string date;  // ISO 8601 calendar date, YYYY-MM-DD
  int year = 0;
  std::string speaker;
  bool is_chair = false;
  std::string language;
  std::string text;

  friend bool operator==(const SpeechRecord&, const SpeechRecord&) = default;
};

void to_json(nlohmann::json& j, const SpeechRecord& r);
void from_json(const nlohmann::json& j, SpeechRecord& r);

/// Splits one source country into disjoint cases by year, e.g. DE before
/// 1990 becomes DE_W.
struct CountryCase {
  std::string country;
  int before_year = 0;
  std::string code;
};

enum class InputFormat { jsonl, delimited };

/// Source-field mapping for one corpus. Keys of `fields` are SpeechRecord
/// field names, values are source keys/columns. Chairship comes either from
/// a boolean-like `is_chair` field or from `role_field` matched
/// case-insensitively against `chair_roles`.
struct FieldMapping {
  std::map<std::string, std::string> fields;
  std::map<std::string, std::string> constants;
  std::optional<std::string> role_field;
  std::vector<std::string> chair_roles;
  std::vector<CountryCase> country_cases;
  std::optional<InputFormat> format;

  [[nodiscard]] static FieldMapping from_json(const nlohmann::json& j);
  [[nodiscard]] static FieldMapping load(const std::filesystem::path& path);
  [[nodiscard]] nlohmann::json to_json() const;
};

struct Reject {
  std::string source;
  std::size_t line = 0;
  std::string reason;
  std::string raw;
};

void to_json(nlohmann::json& j, const Reject& r);

/// Thrown for unrecoverable input problems (unreadable file, bad encoding).
class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single-pass reader yielding validated records in file order. Rows that
/// fail validation are collected in rejects(), never silently skipped.
class CorpusReader {
 public:
  CorpusReader(const std::filesystem::path& path, FieldMapping mapping);

  [[nodiscard]] std::optional<SpeechRecord> next();

  [[nodiscard]] const std::vector<Reject>& rejects() const noexcept { return rejects_; }
  [[nodiscard]] std::size_t rows_read() const noexcept { return rows_; }

 private:
  std::optional<SpeechRecord> from_json_row(std::string_view line, std::size_t line_no);
  std::optional<SpeechRecord> from_fields(const std::vector<std::string>& fields,
                                          std::size_t line_no);
  std::optional<SpeechRecord> build(const std::map<std::string, std::string>& values,
                                    const std::map<std::string, bool>& present,
                                    std::size_t line_no, std::string raw);
  void reject(std::size_t line, std::string reason, std::string raw);

  std::filesystem::path path_;
  FieldMapping mapping_;
  InputFormat format_;
  std::ifstream in_;
  std::optional<csv::Reader> csv_;
  std::vector<std::string> header_;
  std::size_t line_ = 0;
  std::size_t rows_ = 0;
  std::unordered_set<std::string> seen_ids_;
  std::vector<Reject> rejects_;
};

struct ReadResult {
  std::vector<SpeechRecord> records;
  std::vector<Reject> rejects;
  std::size_t rows = 0;
};

[[nodiscard]] ReadResult read_corpus(const std::filesystem::path& path, const FieldMapping& mapping);

struct FilterResult {
  std::vector<SpeechRecord> records;
  std::size_t removed = 0;
};

[[nodiscard]] FilterResult drop_chair_speeches(std::vector<SpeechRecord> records);

enum class DedupScope { country, global };

[[nodiscard]] std::optional<DedupScope> parse_dedup_scope(std::string_view text);

/// Trimmed, whitespace-collapsed text: the duplicate key.
[[nodiscard]] std::string normalize_text(std::string_view text);

/// Streaming first-wins deduplication over normalized text.
class Deduper {
 public:
  explicit Deduper(DedupScope scope = DedupScope::country) : scope_(scope) {}
  /// True if the record is the first occurrence of its key.
  bool admit(const SpeechRecord& record);

 private:
  DedupScope scope_;
  std::unordered_set<std::string> seen_;
};

[[nodiscard]] FilterResult dedup(std::vector<SpeechRecord> records,
                                 DedupScope scope = DedupScope::country);

struct RunReport {
  std::size_t parsed = 0;
  std::size_t rejected = 0;
  std::size_t chair_removed = 0;
  std::size_t dedup_removed = 0;
  std::size_t emitted = 0;

  [[nodiscard]] bool conserved() const noexcept {
    return parsed == emitted + rejected + chair_removed + dedup_removed;
  }
};

void to_json(nlohmann::json& j, const RunReport& r);

struct CorpusManifest {
  std::string country;
  int start_year = 0;
  int end_year = 0;
  std::vector<std::string> source_files;
  std::size_t record_count = 0;
};

void to_json(nlohmann::json& j, const CorpusManifest& m);

[[nodiscard]] std::vector<CorpusManifest> summarize(const std::vector<SpeechRecord>& records,
                                                    const std::vector<std::string>& sources);

struct IngestResult {
  std::vector<SpeechRecord> records;
  std::vector<Reject> rejects;
  RunReport report;
};

/// read_corpus over every file (in the given order), then chair removal and
/// deduplication with one shared seen-set.
[[nodiscard]] IngestResult ingest(const std::vector<std::filesystem::path>& files,
                                  const FieldMapping& mapping, DedupScope scope);

}  // namespace emi::corpus
