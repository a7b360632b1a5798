#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "emi/corpus.hpp"

namespace fs = std::filesystem;
using namespace emi::corpus;

namespace {

class CorpusTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("emi_corpus_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& content) {
    const auto p = dir_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

  static FieldMapping json_mapping() {
    return FieldMapping::from_json({{"fields",
                                     {{"speech_id", "id"},
                                      {"country", "country"},
                                      {"chamber", "chamber"},
                                      {"date", "date"},
                                      {"speaker", "speaker"},
                                      {"is_chair", "chair"},
                                      {"language", "lang"},
                                      {"text", "text"}}}});
  }

  fs::path dir_;
};

std::string line(const std::string& id, const std::string& text, bool chair = false,
                 const std::string& country = "US") {
  nlohmann::json j{{"id", id},        {"country", country}, {"chamber", "lower"}, {"date", "1999-03-02"},
                   {"speaker", "X"},  {"chair", chair},     {"lang", "en"},       {"text", text}};
  return j.dump() + "\n";
}

SpeechRecord rec(const std::string& id, const std::string& text, bool chair = false,
                 const std::string& country = "US") {
  SpeechRecord r;
  r.speech_id = id;
  r.country = country;
  r.date = "2001-01-01";
  r.year = 2001;
  r.speaker = "s";
  r.is_chair = chair;
  r.language = "en";
  r.text = text;
  return r;
}

std::vector<std::string> ids(const std::vector<SpeechRecord>& rs) {
  std::vector<std::string> out;
  for (const auto& r : rs) out.push_back(r.speech_id);
  return out;
}

}  // namespace

TEST_F(CorpusTest, MapsJsonLineToRecord) {
  const auto p = write("a.jsonl",
                       R"({"id":"a1","country":"US","chamber":"lower","date":"1999-03-02","speaker":"X","chair":false,"lang":"en","text":"We reviewed the data."})"
                       "\n");
  const auto res = read_corpus(p, json_mapping());
  ASSERT_EQ(res.records.size(), 1u);
  const auto& r = res.records[0];
  EXPECT_EQ(r.speech_id, "a1");
  EXPECT_EQ(r.year, 1999);
  EXPECT_EQ(r.chamber, Chamber::lower);
  EXPECT_FALSE(r.is_chair);
  EXPECT_EQ(r.text, "We reviewed the data.");
}

TEST_F(CorpusTest, EmptyTextIsRejected) {
  const auto p = write("a.jsonl", line("a1", ""));
  const auto res = read_corpus(p, json_mapping());
  EXPECT_TRUE(res.records.empty());
  ASSERT_EQ(res.rejects.size(), 1u);
  EXPECT_EQ(res.rejects[0].reason, "empty_text");
}

TEST_F(CorpusTest, MalformedLineIsReportedWithItsLineNumber) {
  const auto p = write("a.jsonl", line("a1", "one") + "{not json\n" + line("a3", "three"));
  const auto res = read_corpus(p, json_mapping());
  EXPECT_EQ(ids(res.records), (std::vector<std::string>{"a1", "a3"}));
  ASSERT_EQ(res.rejects.size(), 1u);
  EXPECT_EQ(res.rejects[0].line, 2u);
  EXPECT_EQ(res.rows, 3u);
}

TEST_F(CorpusTest, RowLevelValidationErrors) {
  nlohmann::json bad_date{{"id", "b"}, {"country", "US"}, {"chamber", "lower"}, {"date", "1999-13-40"},
                          {"speaker", "X"}, {"chair", false}, {"lang", "en"}, {"text", "t"}};
  nlohmann::json bad_chamber = bad_date;
  bad_chamber["id"] = "c";
  bad_chamber["date"] = "1999-01-01";
  bad_chamber["chamber"] = "middle";
  nlohmann::json missing = bad_chamber;
  missing["id"] = "d";
  missing["chamber"] = "upper";
  missing.erase("speaker");
  const auto p = write("a.jsonl", bad_date.dump() + "\n" + bad_chamber.dump() + "\n" + missing.dump() + "\n" +
                                      line("e", "ok") + line("e", "dup id"));
  const auto res = read_corpus(p, json_mapping());
  ASSERT_EQ(res.rejects.size(), 4u);
  EXPECT_EQ(res.rejects[0].reason, "bad_date");
  EXPECT_EQ(res.rejects[1].reason, "bad_chamber");
  EXPECT_EQ(res.rejects[2].reason, "missing_field:speaker");
  EXPECT_EQ(res.rejects[3].reason, "duplicate_id");
  EXPECT_EQ(res.records.size(), 1u);
}

TEST_F(CorpusTest, DelimitedInputWithChairRoles) {
  const auto p = write("a.tsv",
                       "sid\tcc\tdate\twho\trole\ttext\n"
                       "1\tDE\t2003-05-06\tA\tPräsident\tDie Sitzung ist eröffnet.\n"
                       "2\tDE\t2003-05-06\tB\tMember\t\"Wir haben, mit Daten, geprüft.\"\n");
  const auto m = FieldMapping::from_json({{"fields",
                                           {{"speech_id", "sid"},
                                            {"country", "cc"},
                                            {"date", "date"},
                                            {"speaker", "who"},
                                            {"text", "text"}}},
                                          {"constants", {{"chamber", "unicameral"}, {"language", "de"}}},
                                          {"role_field", "role"},
                                          {"chair_roles", {"PRÄSIDENT"}}});
  const auto res = read_corpus(p, m);
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_TRUE(res.records[0].is_chair);
  EXPECT_FALSE(res.records[1].is_chair);
  EXPECT_EQ(res.records[1].text, "Wir haben, mit Daten, geprüft.");
  EXPECT_EQ(res.records[1].chamber, Chamber::unicameral);
}

TEST_F(CorpusTest, CountryCasesSplitByYear) {
  const auto p = write("a.jsonl", line("a", "before", false, "DE") + [] {
    nlohmann::json j{{"id", "b"},     {"country", "DE"}, {"chamber", "lower"}, {"date", "1995-01-01"},
                     {"speaker", "X"}, {"chair", false},  {"lang", "de"},       {"text", "after"}};
    return j.dump() + "\n";
  }());
  auto m = json_mapping();
  m.country_cases.push_back({"DE", 1997, "DE_W"});
  const auto res = read_corpus(p, m);
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_EQ(res.records[0].country, "DE");
  EXPECT_EQ(res.records[1].country, "DE_W");
}

TEST_F(CorpusTest, InvalidUtf8IsFatal) {
  const auto p = write("a.jsonl", line("a", "ok") + "{\"id\":\"b\",\"text\":\"\xFF\xFE\"}\n");
  EXPECT_THROW((void)read_corpus(p, json_mapping()), CorpusError);
  EXPECT_THROW((void)read_corpus(dir_ / "missing.jsonl", json_mapping()), CorpusError);
}

TEST_F(CorpusTest, MappingNeedsEveryField) {
  EXPECT_THROW((void)FieldMapping::from_json({{"fields", {{"speech_id", "id"}}}}), std::invalid_argument);
}

TEST(ChairFilter, KeepsMembersInOrder) {
  auto out = drop_chair_speeches({rec("1", "a", true), rec("2", "b"), rec("3", "c", true)});
  EXPECT_EQ(ids(out.records), (std::vector<std::string>{"2"}));
  EXPECT_EQ(out.removed, 2u);
  EXPECT_TRUE(drop_chair_speeches({rec("1", "a", true)}).records.empty());

  std::vector<SpeechRecord> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(rec(std::to_string(i), "t", i % 5 < 2));
  const auto f = drop_chair_speeches(ten);
  EXPECT_EQ(f.records.size(), 6u);
  EXPECT_EQ(f.removed, 4u);
}

TEST(Dedup, FirstOccurrenceWinsOnNormalizedText) {
  const auto out = dedup({rec("1", "A"), rec("2", "B"), rec("3", "A")});
  EXPECT_EQ(ids(out.records), (std::vector<std::string>{"1", "2"}));
  const auto spaced = dedup({rec("1", "we  agree"), rec("2", " we agree ")});
  EXPECT_EQ(spaced.records.size(), 1u);
}

TEST(Dedup, ScopeControlsCrossCountryDuplicates) {
  const std::vector<SpeechRecord> rs{rec("1", "same", false, "AA"), rec("2", "same", false, "BB")};
  EXPECT_EQ(dedup(rs, DedupScope::country).records.size(), 2u);
  EXPECT_EQ(dedup(rs, DedupScope::global).records.size(), 1u);
}

TEST(Dedup, PlantedDuplicatesAreRemovedAndDedupIsIdempotent) {
  std::mt19937_64 rng(17);
  std::vector<SpeechRecord> rs;
  for (int i = 0; i < 900; ++i) rs.push_back(rec("u" + std::to_string(i), "text number " + std::to_string(i)));
  for (int i = 0; i < 100; ++i) {
    const auto src = rng() % 900;
    auto copy = rs[src];
    copy.speech_id = "d" + std::to_string(i);
    copy.text = "  " + copy.text;
    rs.insert(rs.begin() + static_cast<long>(src + 1 + rng() % (rs.size() - src)), copy);
  }
  const auto once = dedup(rs);
  EXPECT_EQ(once.records.size(), 900u);
  EXPECT_EQ(once.removed, 100u);
  for (const auto& r : once.records) EXPECT_EQ(r.speech_id[0], 'u');
  const auto twice = dedup(once.records);
  EXPECT_EQ(ids(twice.records), ids(once.records));
}

TEST_F(CorpusTest, IngestConservesCountsAcrossFiles) {
  const auto a = write("a.jsonl", line("a1", "one") + line("a2", "chair", true) + "broken\n");
  const auto b = write("b.jsonl", line("b1", "one") + line("b2", "two"));
  const auto res = ingest({a, b}, json_mapping(), DedupScope::country);
  EXPECT_EQ(res.report.parsed, 5u);
  EXPECT_EQ(res.report.rejected, 1u);
  EXPECT_EQ(res.report.chair_removed, 1u);
  EXPECT_EQ(res.report.dedup_removed, 1u);
  EXPECT_EQ(res.report.emitted, 2u);
  EXPECT_TRUE(res.report.conserved());
  EXPECT_EQ(ids(res.records), (std::vector<std::string>{"a1", "b2"}));

  const auto manifests = summarize(res.records, {"a.jsonl", "b.jsonl"});
  ASSERT_EQ(manifests.size(), 1u);
  EXPECT_EQ(manifests[0].record_count, 2u);
  EXPECT_EQ(manifests[0].start_year, 1999);
}

TEST(SpeechRecordJson, RoundTrips) {
  const auto r = rec("x", "Grüße");
  nlohmann::json j = r;
  EXPECT_EQ(j.get<SpeechRecord>(), r);
}
