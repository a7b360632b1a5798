#include "emi/corpus.hpp"

#include <algorithm>
#include <charconv>

#include <spdlog/spdlog.h>

#include "emi/util/jsonl.hpp"
#include "emi/util/utf8.hpp"

namespace emi::corpus {

using nlohmann::json;

namespace {

constexpr const char* kRequiredFields[] = {"speech_id", "country", "chamber", "date",
                                           "speaker",   "language", "text"};

bool parse_int(std::string_view s, int& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

// Strict YYYY-MM-DD; returns the year or nullopt.
std::optional<int> parse_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), m) ||
      !parse_int(s.substr(8, 2), d)) {
    return std::nullopt;
  }
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m < 1 || m > 12 || d < 1) return std::nullopt;
  const int max_day = (m == 2 && is_leap(y)) ? 29 : kDays[m - 1];
  if (d > max_day) return std::nullopt;
  return y;
}

bool is_alpha2(std::string_view s) {
  return s.size() == 2 && std::all_of(s.begin(), s.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

std::optional<bool> parse_boolish(std::string_view s) {
  const auto lower = utf8::to_lower(utf8::trim(s));
  if (lower == "true" || lower == "1" || lower == "yes" || lower == "t") return true;
  if (lower == "false" || lower == "0" || lower == "no" || lower == "f" || lower.empty()) return false;
  return std::nullopt;
}

std::string json_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "";
  return v.dump();
}

}  // namespace

std::string to_string(Chamber c) {
  switch (c) {
    case Chamber::lower: return "lower";
    case Chamber::upper: return "upper";
    case Chamber::unicameral: return "unicameral";
  }
  return "unicameral";
}

std::optional<Chamber> parse_chamber(std::string_view text) {
  const auto lower = utf8::to_lower(utf8::trim(text));
  if (lower == "lower") return Chamber::lower;
  if (lower == "upper") return Chamber::upper;
  if (lower == "unicameral") return Chamber::unicameral;
  return std::nullopt;
}

void to_json(json& j, const SpeechRecord& r) {
  j = json{{"speech_id", r.speech_id}, {"country", r.country}, {"chamber", to_string(r.chamber)},
           {"date", r.date},           {"year", r.year},       {"speaker", r.speaker},
           {"is_chair", r.is_chair},   {"language", r.language}, {"text", r.text}};
}

void from_json(const json& j, SpeechRecord& r) {
  r.speech_id = j.at("speech_id").get<std::string>();
  r.country = j.at("country").get<std::string>();
  const auto chamber = parse_chamber(j.at("chamber").get<std::string>());
  if (!chamber) throw std::invalid_argument("bad chamber in record " + r.speech_id);
  r.chamber = *chamber;
  r.date = j.at("date").get<std::string>();
  r.year = j.at("year").get<int>();
  r.speaker = j.at("speaker").get<std::string>();
  r.is_chair = j.at("is_chair").get<bool>();
  r.language = j.at("language").get<std::string>();
  r.text = j.at("text").get<std::string>();
}

FieldMapping FieldMapping::from_json(const json& j) {
  FieldMapping m;
  if (j.contains("fields")) m.fields = j.at("fields").get<std::map<std::string, std::string>>();
  if (j.contains("constants")) m.constants = j.at("constants").get<std::map<std::string, std::string>>();
  if (j.contains("role_field")) m.role_field = j.at("role_field").get<std::string>();
  if (j.contains("chair_roles")) m.chair_roles = j.at("chair_roles").get<std::vector<std::string>>();
  if (j.contains("country_cases")) {
    for (const auto& c : j.at("country_cases")) {
      m.country_cases.push_back({c.at("country").get<std::string>(), c.at("before_year").get<int>(),
                                 c.at("code").get<std::string>()});
    }
  }
  if (j.contains("format")) {
    const auto f = j.at("format").get<std::string>();
    if (f == "jsonl") m.format = InputFormat::jsonl;
    else if (f == "csv" || f == "tsv") m.format = InputFormat::delimited;
    else throw std::invalid_argument("mapping: unknown format '" + f + "'");
  }
  for (const char* field : kRequiredFields) {
    if (!m.fields.count(field) && !m.constants.count(field)) {
      throw std::invalid_argument(std::string("mapping: no source for field '") + field + "'");
    }
  }
  if (!m.fields.count("is_chair") && !m.role_field) {
    throw std::invalid_argument("mapping: chairship needs 'fields.is_chair' or 'role_field'");
  }
  return m;
}

FieldMapping FieldMapping::load(const std::filesystem::path& path) {
  return from_json(io::read_json(path));
}

json FieldMapping::to_json() const {
  json j{{"fields", fields}, {"constants", constants}, {"chair_roles", chair_roles}};
  if (role_field) j["role_field"] = *role_field;
  json cases = json::array();
  for (const auto& c : country_cases) {
    cases.push_back({{"country", c.country}, {"before_year", c.before_year}, {"code", c.code}});
  }
  j["country_cases"] = cases;
  if (format) j["format"] = *format == InputFormat::jsonl ? "jsonl" : "csv";
  return j;
}

void to_json(json& j, const Reject& r) {
  j = json{{"source", r.source}, {"line", r.line}, {"reason", r.reason}, {"raw", r.raw}};
}

CorpusReader::CorpusReader(const std::filesystem::path& path, FieldMapping mapping)
    : path_(path), mapping_(std::move(mapping)), in_(path, std::ios::binary) {
  if (!in_) throw CorpusError("cannot open corpus file " + path.string());
  if (mapping_.format) {
    format_ = *mapping_.format;
  } else {
    const auto ext = path.extension().string();
    format_ = (ext == ".csv" || ext == ".tsv" || ext == ".tab") ? InputFormat::delimited
                                                                 : InputFormat::jsonl;
  }
  if (format_ == InputFormat::delimited) {
    csv_.emplace(in_, csv::delimiter_for(path));
    std::size_t line = 0;
    if (!csv_->next(header_, line)) throw CorpusError(path.string() + ": missing header row");
    for (const auto& h : header_) {
      if (!utf8::is_valid(h)) throw CorpusError(path.string() + ": header is not valid UTF-8");
    }
  }
}

void CorpusReader::reject(std::size_t line, std::string reason, std::string raw) {
  rejects_.push_back({path_.string(), line, std::move(reason), std::move(raw)});
}

std::optional<SpeechRecord> CorpusReader::next() {
  while (true) {
    if (format_ == InputFormat::jsonl) {
      std::string line;
      if (!std::getline(in_, line)) return std::nullopt;
      ++line_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (utf8::trim(line).empty()) continue;
      ++rows_;
      if (const auto bad = utf8::first_invalid(line); bad != std::string::npos) {
        throw CorpusError(path_.string() + ":" + std::to_string(line_) +
                          ": input is not valid UTF-8 (byte offset " + std::to_string(bad) +
                          "); only UTF-8 corpora are supported");
      }
      if (auto rec = from_json_row(line, line_)) return rec;
    } else {
      std::vector<std::string> fields;
      std::size_t line_no = 0;
      if (!csv_->next(fields, line_no)) return std::nullopt;
      if (fields.size() == 1 && utf8::trim(fields[0]).empty()) continue;
      ++rows_;
      for (const auto& f : fields) {
        if (!utf8::is_valid(f)) {
          throw CorpusError(path_.string() + ":" + std::to_string(line_no) +
                            ": input is not valid UTF-8; only UTF-8 corpora are supported");
        }
      }
      if (auto rec = from_fields(fields, line_no)) return rec;
    }
  }
}

std::optional<SpeechRecord> CorpusReader::from_json_row(std::string_view line, std::size_t line_no) {
  json row;
  try {
    row = json::parse(line);
  } catch (const json::parse_error&) {
    reject(line_no, "malformed_line", std::string(line));
    return std::nullopt;
  }
  if (!row.is_object()) {
    reject(line_no, "not_an_object", std::string(line));
    return std::nullopt;
  }
  std::map<std::string, std::string> values;
  std::map<std::string, bool> present;
  for (const auto& [field, source] : mapping_.fields) {
    if (row.contains(source) && !row.at(source).is_null()) {
      values[field] = json_scalar(row.at(source));
      present[field] = true;
    }
  }
  if (mapping_.role_field && row.contains(*mapping_.role_field)) {
    values["__role"] = json_scalar(row.at(*mapping_.role_field));
    present["__role"] = true;
  }
  return build(values, present, line_no, std::string(line));
}

std::optional<SpeechRecord> CorpusReader::from_fields(const std::vector<std::string>& fields,
                                                      std::size_t line_no) {
  std::string raw;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) raw.push_back(csv::delimiter_for(path_));
    raw += fields[i];
  }
  if (fields.size() != header_.size()) {
    reject(line_no, "field_count", raw);
    return std::nullopt;
  }
  std::map<std::string, std::string> values;
  std::map<std::string, bool> present;
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header_.begin(), header_.end(), name);
    if (it == header_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header_.begin());
  };
  for (const auto& [field, source] : mapping_.fields) {
    if (auto idx = column(source)) {
      values[field] = fields[*idx];
      present[field] = true;
    }
  }
  if (mapping_.role_field) {
    if (auto idx = column(*mapping_.role_field)) {
      values["__role"] = fields[*idx];
      present["__role"] = true;
    }
  }
  return build(values, present, line_no, raw);
}

std::optional<SpeechRecord> CorpusReader::build(const std::map<std::string, std::string>& values,
                                                const std::map<std::string, bool>& present,
                                                std::size_t line_no, std::string raw) {
  auto get = [&](const std::string& field) -> std::optional<std::string> {
    if (present.count(field)) return values.at(field);
    if (auto it = mapping_.constants.find(field); it != mapping_.constants.end()) return it->second;
    return std::nullopt;
  };
  for (const char* field : kRequiredFields) {
    if (!get(field)) {
      reject(line_no, std::string("missing_field:") + field, std::move(raw));
      return std::nullopt;
    }
  }

  SpeechRecord r;
  r.speech_id = std::string(utf8::trim(*get("speech_id")));
  if (r.speech_id.empty()) {
    reject(line_no, "empty_id", std::move(raw));
    return std::nullopt;
  }
  r.text = *get("text");
  if (utf8::trim(r.text).empty()) {
    reject(line_no, "empty_text", std::move(raw));
    return std::nullopt;
  }
  const auto country = std::string(utf8::trim(*get("country")));
  if (!is_alpha2(country)) {
    reject(line_no, "bad_country", std::move(raw));
    return std::nullopt;
  }
  const auto chamber = parse_chamber(*get("chamber"));
  if (!chamber) {
    reject(line_no, "bad_chamber", std::move(raw));
    return std::nullopt;
  }
  r.chamber = *chamber;
  r.date = std::string(utf8::trim(*get("date")));
  const auto year = parse_iso_date(r.date);
  if (!year) {
    reject(line_no, "bad_date", std::move(raw));
    return std::nullopt;
  }
  r.year = *year;
  r.country = country;
  for (const auto& c : mapping_.country_cases) {
    if (c.country == country && r.year < c.before_year) {
      r.country = c.code;
      break;
    }
  }
  r.speaker = *get("speaker");
  r.language = std::string(utf8::trim(*get("language")));
  if (r.language.empty()) {
    reject(line_no, "missing_field:language", std::move(raw));
    return std::nullopt;
  }

  if (auto chair = get("is_chair")) {
    const auto flag = parse_boolish(*chair);
    if (!flag) {
      reject(line_no, "bad_chair_flag", std::move(raw));
      return std::nullopt;
    }
    r.is_chair = *flag;
  } else if (mapping_.fields.count("is_chair")) {
    reject(line_no, "missing_field:is_chair", std::move(raw));
    return std::nullopt;
  }
  if (mapping_.role_field && present.count("__role")) {
    const auto role = utf8::to_lower(utf8::trim(values.at("__role")));
    for (const auto& chair_role : mapping_.chair_roles) {
      if (utf8::to_lower(utf8::trim(chair_role)) == role) {
        r.is_chair = true;
        break;
      }
    }
  }

  if (!seen_ids_.insert(r.speech_id).second) {
    reject(line_no, "duplicate_id", std::move(raw));
    return std::nullopt;
  }
  return r;
}

ReadResult read_corpus(const std::filesystem::path& path, const FieldMapping& mapping) {
  CorpusReader reader(path, mapping);
  ReadResult out;
  while (auto rec = reader.next()) out.records.push_back(std::move(*rec));
  out.rejects = reader.rejects();
  out.rows = reader.rows_read();
  return out;
}

FilterResult drop_chair_speeches(std::vector<SpeechRecord> records) {
  FilterResult out;
  out.records.reserve(records.size());
  for (auto& r : records) {
    if (r.is_chair) {
      ++out.removed;
    } else {
      out.records.push_back(std::move(r));
    }
  }
  spdlog::debug("chair filter removed {} speeches", out.removed);
  return out;
}

std::optional<DedupScope> parse_dedup_scope(std::string_view text) {
  if (text == "country") return DedupScope::country;
  if (text == "global") return DedupScope::global;
  return std::nullopt;
}

std::string normalize_text(std::string_view text) { return utf8::collapse_whitespace(text); }

bool Deduper::admit(const SpeechRecord& record) {
  std::string key = normalize_text(record.text);
  if (scope_ == DedupScope::country) key = record.country + '\x1f' + key;
  return seen_.insert(std::move(key)).second;
}

FilterResult dedup(std::vector<SpeechRecord> records, DedupScope scope) {
  Deduper deduper(scope);
  FilterResult out;
  out.records.reserve(records.size());
  for (auto& r : records) {
    if (deduper.admit(r)) {
      out.records.push_back(std::move(r));
    } else {
      ++out.removed;
    }
  }
  return out;
}

void to_json(json& j, const RunReport& r) {
  j = json{{"parsed", r.parsed},
           {"rejected", r.rejected},
           {"chair_removed", r.chair_removed},
           {"dedup_removed", r.dedup_removed},
           {"emitted", r.emitted},
           {"conserved", r.conserved()}};
}

void to_json(json& j, const CorpusManifest& m) {
  j = json{{"country", m.country},
           {"period", {m.start_year, m.end_year}},
           {"source_files", m.source_files},
           {"record_count", m.record_count}};
}

std::vector<CorpusManifest> summarize(const std::vector<SpeechRecord>& records,
                                      const std::vector<std::string>& sources) {
  std::map<std::string, CorpusManifest> by_country;
  for (const auto& r : records) {
    auto [it, inserted] = by_country.try_emplace(r.country);
    auto& m = it->second;
    if (inserted) {
      m.country = r.country;
      m.start_year = m.end_year = r.year;
      m.source_files = sources;
    }
    m.start_year = std::min(m.start_year, r.year);
    m.end_year = std::max(m.end_year, r.year);
    ++m.record_count;
  }
  std::vector<CorpusManifest> out;
  for (auto& [_, m] : by_country) out.push_back(std::move(m));
  return out;
}

IngestResult ingest(const std::vector<std::filesystem::path>& files, const FieldMapping& mapping,
                    DedupScope scope) {
  IngestResult out;
  Deduper deduper(scope);
  for (const auto& file : files) {
    CorpusReader reader(file, mapping);
    while (auto rec = reader.next()) {
      if (rec->is_chair) {
        ++out.report.chair_removed;
        continue;
      }
      if (!deduper.admit(*rec)) {
        ++out.report.dedup_removed;
        continue;
      }
      out.records.push_back(std::move(*rec));
    }
    out.report.parsed += reader.rows_read();
    out.rejects.insert(out.rejects.end(), reader.rejects().begin(), reader.rejects().end());
  }
  out.report.rejected = out.rejects.size();
  out.report.emitted = out.records.size();
  spdlog::info("ingest: parsed={} rejected={} chair_removed={} dedup_removed={} emitted={}",
               out.report.parsed, out.report.rejected, out.report.chair_removed,
               out.report.dedup_removed, out.report.emitted);
  return out;
}

}  // namespace emi::corpus
