#include "emi/cli/stages.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "emi/cli/manifest.hpp"
#include "emi/cli/plot.hpp"
#include "emi/cli/report.hpp"
#include "emi/corpus.hpp"
#include "emi/econ/model_spec.hpp"
#include "emi/econ/validation.hpp"
#include "emi/fusion.hpp"
#include "emi/panel.hpp"
#include "emi/preprocess.hpp"
#include "emi/util/csv.hpp"
#include "emi/util/hash.hpp"
#include "emi/util/jsonl.hpp"

namespace emi::cli {

using nlohmann::json;

rater::ChatClient& StageContext::chat_client() {
  if (chat) return *chat;
  if (!own_chat_) own_chat_ = std::make_shared<rater::HttpChatClient>();
  return *own_chat_;
}

embedder::EmbeddingClient& StageContext::embedding_client() {
  if (embed) return *embed;
  if (!own_embed_) own_embed_ = std::make_shared<embedder::HttpEmbeddingClient>();
  return *own_embed_;
}

namespace {

// Artifact names, relative to the output directory.
constexpr const char* kSpeeches = "speeches.jsonl";
constexpr const char* kRejects = "rejects.jsonl";
constexpr const char* kIngestReport = "ingest.report.json";
constexpr const char* kFiltered = "speeches_filtered.jsonl";
constexpr const char* kSegments = "segments.jsonl";
constexpr const char* kDropped = "preprocess.dropped.jsonl";
constexpr const char* kPreReport = "preprocess.report.json";
constexpr const char* kProcRatings = "procedural_ratings.jsonl";
constexpr const char* kProcDecisions = "procedural_decisions.jsonl";
constexpr const char* kKept = "segments_kept.jsonl";
constexpr const char* kEpiRatings = "epistemic_ratings.jsonl";
constexpr const char* kLlmScores = "llm_scores.jsonl";
constexpr const char* kMissing = "ratings_missing.jsonl";
constexpr const char* kAnchors = "anchors.json";
constexpr const char* kEmbScores = "emb_scores.jsonl";
constexpr const char* kScores = "scores.jsonl";
constexpr const char* kFuseSummary = "fusion.summary.json";
constexpr const char* kPanel = "panel.csv";
constexpr const char* kCoverage = "coverage.json";
constexpr const char* kAnalysisJson = "analysis.json";
constexpr const char* kAnalysisTxt = "analysis.txt";
constexpr const char* kValidation = "validation.json";

/// Artifact -> stage that writes it.
const std::map<std::string, std::string>& producers() {
  static const std::map<std::string, std::string> kMap = {
      {kSpeeches, "ingest"},     {kFiltered, "preprocess"}, {kSegments, "preprocess"},
      {kKept, "rate"},           {kLlmScores, "rate"},      {kEmbScores, "embed"},
      {kScores, "fuse"},         {kPanel, "panel"},
  };
  return kMap;
}

struct Written {
  std::vector<std::string> files;
  json counts = json::object();
};

struct StageDef {
  std::vector<std::string> upstream;                              // artifacts in out_dir
  std::vector<std::pair<std::string, fs::path>> external;         // other input files
  std::function<Written(StageContext&, const std::string& cfg_hash)> body;
};

class Out {
 public:
  explicit Out(fs::path dir) : dir_(std::move(dir)) {}

  [[nodiscard]] fs::path path(const std::string& name) const { return dir_ / name; }

  void text(Written& w, const std::string& name, const std::string& content) const {
    const auto p = path(name);
    fs::create_directories(p.parent_path());
    io::write_file_atomic(p, content);
    w.files.push_back(name);
  }

  void json_file(Written& w, const std::string& name, const json& value) const {
    text(w, name, value.dump(2) + "\n");
  }

  template <typename Range>
  void jsonl(Written& w, const std::string& name, const Range& items) const {
    std::string content;
    for (const auto& item : items) {
      content += json(item).dump();
      content += '\n';
    }
    text(w, name, content);
  }

 private:
  fs::path dir_;
};

template <typename T>
std::vector<T> read_records(const fs::path& path) {
  std::vector<T> out;
  for (const auto& j : io::read_jsonl(path)) out.push_back(j.get<T>());
  return out;
}

std::string file_label(const fs::path& p) { return p.filename().string(); }

// ---------------------------------------------------------------------------

Written ingest_body(StageContext& ctx, const std::string&) {
  const auto& cfg = ctx.config;
  const Out out(cfg.out_dir);
  const auto mapping = corpus::FieldMapping::load(cfg.mapping);
  auto res = corpus::ingest(cfg.corpus_files, mapping, cfg.dedup_scope);
  std::vector<std::string> sources;
  for (const auto& f : cfg.corpus_files) sources.push_back(file_label(f));
  for (auto& r : res.rejects) r.source = fs::path(r.source).filename().string();

  Written w;
  out.jsonl(w, kSpeeches, res.records);
  out.jsonl(w, kRejects, res.rejects);
  out.json_file(w, kIngestReport,
                json{{"report", res.report}, {"corpora", corpus::summarize(res.records, sources)}});
  w.counts = res.report;
  return w;
}

Written preprocess_body(StageContext& ctx, const std::string&) {
  const auto& cfg = ctx.config;
  const Out out(cfg.out_dir);
  const auto speeches = read_records<corpus::SpeechRecord>(out.path(kSpeeches));

  std::set<std::string> languages;
  for (const auto& s : speeches) languages.insert(s.language);
  std::map<std::string, preprocess::CommonWordList> lists;
  std::vector<std::string> derived;
  for (const auto& lang : languages) {
    if (const auto it = cfg.common_words.find(lang); it != cfg.common_words.end()) {
      lists.emplace(lang, preprocess::CommonWordList::load(it->second, lang));
    } else {
      lists.emplace(lang, preprocess::CommonWordList(lang, preprocess::derive_common_words(speeches, lang)));
      derived.push_back(lang);
      spdlog::warn("no common-word list for '{}'; derived one from the corpus", lang);
    }
  }

  auto res = preprocess::run(speeches, lists, cfg.preprocess);
  const std::size_t total_segments = res.segments.size();
  if (ctx.limit && res.segments.size() > *ctx.limit) res.segments.resize(*ctx.limit);

  std::vector<json> dropped;
  std::map<std::string, std::size_t> by_reason;
  for (const auto& d : res.dropped) {
    dropped.push_back(
        {{"speech_id", d.speech_id}, {"reason", d.reason}, {"token_count", d.token_count}, {"ratio", d.ratio}});
    ++by_reason[d.reason];
  }
  Written w;
  out.jsonl(w, kFiltered, res.kept);
  out.jsonl(w, kSegments, res.segments);
  out.jsonl(w, kDropped, dropped);
  w.counts = json{{"speeches_in", speeches.size()},
                  {"speeches_kept", res.kept.size()},
                  {"dropped", by_reason},
                  {"segments", res.segments.size()},
                  {"segments_before_limit", total_segments},
                  {"derived_common_words", derived}};
  out.json_file(w, kPreReport, w.counts);
  return w;
}

Written rate_body(StageContext& ctx, const std::string&) {
  const auto& cfg = ctx.config;
  const Out out(cfg.out_dir);
  const auto segments = read_records<preprocess::Segment>(out.path(kSegments));
  const bool speech_level = cfg.procedural_level == "speech";

  rater::RateOptions opts;
  opts.jobs = ctx.jobs;
  opts.cache = DiskCache(cfg.cache_root() / "chat");
  auto& client = ctx.chat_client();

  std::vector<rater::RatingItem> items;
  std::vector<std::string> ids;
  if (speech_level) {
    std::unordered_set<std::string> with_segments;
    for (const auto& s : segments) with_segments.insert(s.speech_id);
    for (const auto& sp : read_records<corpus::SpeechRecord>(out.path(kFiltered))) {
      if (!with_segments.count(sp.speech_id)) continue;
      items.push_back({sp.speech_id, sp.language, sp.text});
      ids.push_back(sp.speech_id);
    }
  } else {
    for (const auto& s : segments) {
      items.push_back(rater::to_item(s));
      ids.push_back(s.segment_id);
    }
  }

  spdlog::info("rate: procedural pass over {} {}s", items.size(), cfg.procedural_level);
  const auto proc = rater::rate_segments(items, cfg.raters, rater::Task::procedural, client, opts);
  const auto decisions = rater::filter_procedural(ids, proc.procedural(), cfg.procedural_threshold);
  std::unordered_set<std::string> keep;
  for (const auto& d : decisions) {
    if (d.keep) keep.insert(d.segment_id);
  }
  std::vector<preprocess::Segment> kept;
  for (const auto& s : segments) {
    if (keep.count(speech_level ? s.speech_id : s.segment_id)) kept.push_back(s);
  }

  spdlog::info("rate: epistemic pass over {} segments", kept.size());
  const auto epi = rater::rate_segments(kept, cfg.raters, rater::Task::epistemic, client, opts);
  const auto llm = rater::ensemble_all(epi.epistemic());

  std::vector<json> proc_rows;
  for (const auto& r : proc.procedural()) {
    json j = r;
    j["level"] = cfg.procedural_level;
    proc_rows.push_back(std::move(j));
  }
  std::vector<json> missing;
  for (const auto& m : proc.missing) {
    json j = m;
    j["task"] = "procedural";
    missing.push_back(std::move(j));
  }
  for (const auto& m : epi.missing) {
    json j = m;
    j["task"] = "epistemic";
    missing.push_back(std::move(j));
  }

  Written w;
  out.jsonl(w, kProcRatings, proc_rows);
  out.jsonl(w, kProcDecisions, decisions);
  out.jsonl(w, kKept, kept);
  out.jsonl(w, kEpiRatings, epi.epistemic());
  out.jsonl(w, kLlmScores, llm);
  out.jsonl(w, kMissing, missing);
  const auto excluded = static_cast<std::size_t>(
      std::count_if(decisions.begin(), decisions.end(), [](const auto& d) { return !d.keep; }));
  w.counts = json{{"procedural_items", items.size()},
                  {"procedural_excluded", excluded},
                  {"segments_in", segments.size()},
                  {"segments_kept", kept.size()},
                  {"llm_scored", llm.size()},
                  {"missing", missing.size()}};
  spdlog::info("rate: retries={} cache_hits={}", proc.retries + epi.retries, proc.cache_hits + epi.cache_hits);
  return w;
}

std::map<std::string, embedder::AnchorVectors> anchor_vectors(StageContext& ctx,
                                                               const std::set<std::string>& languages,
                                                               const embedder::EmbedOptions& opts) {
  const auto& cfg = ctx.config;
  std::map<std::string, embedder::AnchorVectors> out;
  for (const auto& lang : languages) {
    const auto it = cfg.anchors.find(lang);
    if (it == cfg.anchors.end()) throw ConfigError("embed.anchors has no file for language '" + lang + "'");
    const auto set = embedder::load_anchors(it->second, lang);
    out.emplace(lang, embedder::build_anchor_vectors(set, cfg.embedder, ctx.embedding_client(), opts));
  }
  return out;
}

embedder::EmbedOptions embed_options(const StageContext& ctx) {
  embedder::EmbedOptions opts;
  opts.jobs = std::max<std::size_t>(1, std::min(ctx.jobs, ctx.config.embedder.max_parallel));
  opts.cache = DiskCache(ctx.config.cache_root() / "embed");
  opts.normalize_before_mean = ctx.config.normalize_before_mean;
  opts.anchor_mode = ctx.config.anchor_mode;
  return opts;
}

Written embed_body(StageContext& ctx, const std::string&) {
  const Out out(ctx.config.out_dir);
  const auto segments = read_records<preprocess::Segment>(out.path(kKept));
  std::set<std::string> languages;
  for (const auto& s : segments) languages.insert(s.language);
  const auto opts = embed_options(ctx);
  const auto anchors = anchor_vectors(ctx, languages, opts);
  embedder::EmbedStats stats;
  const auto scores =
      embedder::score_segments(segments, anchors, ctx.config.embedder, ctx.embedding_client(), opts, &stats);

  Written w;
  json anchors_json = json::object();
  for (const auto& [lang, a] : anchors) anchors_json[lang] = a;
  out.json_file(w, kAnchors, anchors_json);
  out.jsonl(w, kEmbScores, scores);
  w.counts = json{{"segments", segments.size()}, {"scored", scores.size()}, {"languages", languages}};
  spdlog::info("embed: batches={} cache_hits={} retries={}", stats.batches, stats.cache_hits, stats.retries);
  return w;
}

Written fuse_body(StageContext& ctx, const std::string&) {
  const Out out(ctx.config.out_dir);
  const auto segments = read_records<preprocess::Segment>(out.path(kKept));
  const auto llm = read_records<rater::EnsembleEpistemicScore>(out.path(kLlmScores));
  const auto emb = read_records<embedder::SegmentEmbeddingScore>(out.path(kEmbScores));
  const auto res = fusion::fuse(segments, llm, emb, ctx.config.z_scope);

  std::vector<json> dropped;
  std::map<std::string, std::size_t> by_reason;
  for (const auto& d : res.dropped) {
    dropped.push_back({{"segment_id", d.segment_id}, {"reason", d.reason}});
    ++by_reason[d.reason];
  }
  Written w;
  out.jsonl(w, kScores, res.scores);
  w.counts = json{{"scored", res.scores.size()}, {"dropped", by_reason}};
  out.json_file(w, kFuseSummary,
                json{{"z_scope", fusion::to_string(ctx.config.z_scope)},
                     {"scored", res.scores.size()},
                     {"groups", res.groups},
                     {"dropped", dropped}});
  return w;
}

Written panel_body(StageContext& ctx, const std::string&) {
  const auto& cfg = ctx.config;
  const Out out(cfg.out_dir);
  const auto scores = read_records<fusion::SegmentScore>(out.path(kScores));
  panel::BootstrapOptions bo;
  bo.iters = cfg.panel_bootstrap_iters;
  bo.seed = cfg.panel_seed;
  bo.jobs = ctx.jobs;
  const auto years = panel::aggregate_years(scores, bo);
  auto joined = panel::join_indicators(years, csv::read_table(cfg.indicators), cfg.indicator_mapping,
                                       csv::read_table(cfg.gdp), cfg.gdp_mapping);
  panel::add_lags(joined.rows, cfg.lag_vars, 1);

  Written w;
  panel::write_panel_csv(out.path(kPanel), joined.rows);
  w.files.push_back(kPanel);
  out.json_file(w, kCoverage, joined.coverage);
  w.counts = json{{"country_years", years.size()}, {"panel_rows", joined.rows.size()}};
  return w;
}

Written analyze_body(StageContext& ctx, const std::string&) {
  const auto& cfg = ctx.config;
  const Out out(cfg.out_dir);
  auto rows = panel::read_panel_csv(out.path(kPanel));
  const auto spec = econ::ModelSpecFile::load(cfg.models);
  econ::AnalysisOptions opts;
  opts.bootstrap_iters = cfg.coef_bootstrap_iters;
  opts.level = cfg.level;
  opts.seed = cfg.analysis_seed;
  opts.jobs = ctx.jobs;
  opts.resampling = cfg.resampling;
  const auto report = econ::run_analysis(std::move(rows), spec, opts);

  Written w;
  out.json_file(w, kAnalysisJson, report);
  out.text(w, kAnalysisTxt, render_analysis(report, spec));
  std::size_t fitted = 0;
  for (const auto& m : report.models) fitted += m.result ? 1 : 0;
  w.counts = json{{"models", report.models.size()}, {"fitted", fitted}, {"panel_rows", report.panel_rows}};
  return w;
}

bool annotations_have_text(const std::vector<econ::Annotation>& annotations) {
  return !annotations.empty() &&
         std::all_of(annotations.begin(), annotations.end(), [](const auto& a) { return !a.text.empty(); });
}

/// Scores annotation texts with the same rater and embedder settings as the
/// corpus, fusing over the annotation set as a single group.
econ::Predictions score_annotation_texts(StageContext& ctx, const std::vector<econ::Annotation>& annotations) {
  const auto& cfg = ctx.config;
  std::vector<preprocess::Segment> segs;
  for (const auto& a : annotations) {
    preprocess::Segment s;
    s.segment_id = a.id;
    s.speech_id = a.id;
    s.country = "ALL";
    s.language = cfg.validation_language;
    s.text = a.text;
    segs.push_back(std::move(s));
  }
  rater::RateOptions ro;
  ro.jobs = ctx.jobs;
  ro.cache = DiskCache(cfg.cache_root() / "chat");
  const auto epi = rater::rate_segments(segs, cfg.raters, rater::Task::epistemic, ctx.chat_client(), ro);
  const auto llm = rater::ensemble_all(epi.epistemic());

  const auto opts = embed_options(ctx);
  const auto anchors = anchor_vectors(ctx, {cfg.validation_language}, opts);
  const auto emb = embedder::score_segments(segs, anchors, cfg.embedder, ctx.embedding_client(), opts);
  const auto fused = fusion::fuse(segs, llm, emb, fusion::ZScope::global);

  econ::Predictions preds;
  for (const auto& s : llm) preds["llm"][s.segment_id] = s.emi_llm_raw;
  for (const auto& s : emb) preds["embedding"][s.segment_id] = s.emi_emb_raw;
  for (const auto& s : fused.scores) preds["emi"][s.segment_id] = s.emi;
  return preds;
}

econ::Predictions predictions_from_scores(const fs::path& scores_path) {
  econ::Predictions preds;
  for (const auto& s : read_records<fusion::SegmentScore>(scores_path)) {
    preds["emi"][s.segment_id] = s.emi;
    preds["llm"][s.segment_id] = s.emi_llm_raw;
    preds["embedding"][s.segment_id] = s.emi_emb_raw;
  }
  return preds;
}

Written validate_body(StageContext& ctx, const std::string&) {
  const auto& cfg = ctx.config;
  const Out out(cfg.out_dir);
  const auto annotations = econ::load_annotations(*cfg.annotations);
  const bool has_text = annotations_have_text(annotations);
  const auto preds = has_text ? score_annotation_texts(ctx, annotations) : predictions_from_scores(out.path(kScores));
  const auto res = econ::validate_emi(annotations, preds, cfg.validation_compare);

  Written w;
  json j = res;
  j["source"] = has_text ? "annotation_text" : "scores";
  out.json_file(w, kValidation, j);
  w.counts = json{{"annotations", res.n_annotations}, {"used", res.n_used}};
  return w;
}

Written plot_body(StageContext& ctx, const std::string& cfg_hash) {
  const auto& cfg = ctx.config;
  const Out out(cfg.out_dir);
  const auto rows = panel::read_panel_csv(out.path(kPanel));
  const std::string provenance =
      "emi plot; config sha256 " + cfg_hash + "; panel.csv sha256 " + hash::sha256_file(out.path(kPanel));

  std::map<std::string, std::vector<panel::PanelRow>> by_country;
  for (const auto& r : rows) by_country[r.country].push_back(r);

  Written w;
  for (auto& [country, cr] : by_country) {
    std::sort(cr.begin(), cr.end(), [](const auto& a, const auto& b) { return a.year < b.year; });
    out.text(w, "plots/trend_" + country + ".svg",
             trend_svg(country, cr, cfg.plot_indicator, cfg.plot_events, provenance));
  }
  out.text(w, "plots/scatter.svg", scatter_svg(rows, cfg.plot_indicator, provenance));
  w.counts = json{{"trend_plots", by_country.size()}, {"scatter_plots", 1}};
  return w;
}

StageDef definition(const std::string& stage, const RunConfig& cfg) {
  if (stage == "ingest") {
    StageDef d{{}, {}, ingest_body};
    for (const auto& f : cfg.corpus_files) d.external.emplace_back("corpus:" + file_label(f), f);
    d.external.emplace_back("mapping", cfg.mapping);
    return d;
  }
  if (stage == "preprocess") {
    StageDef d{{kSpeeches}, {}, preprocess_body};
    for (const auto& [lang, p] : cfg.common_words) d.external.emplace_back("common_words:" + lang, p);
    return d;
  }
  if (stage == "rate") {
    return StageDef{cfg.procedural_level == "speech" ? std::vector<std::string>{kSegments, kFiltered}
                                                     : std::vector<std::string>{kSegments},
                    {},
                    rate_body};
  }
  if (stage == "embed") {
    StageDef d{{kKept}, {}, embed_body};
    for (const auto& [lang, p] : cfg.anchors) d.external.emplace_back("anchors:" + lang, p);
    return d;
  }
  if (stage == "fuse") return StageDef{{kKept, kLlmScores, kEmbScores}, {}, fuse_body};
  if (stage == "panel") {
    return StageDef{{kScores}, {{"indicators", cfg.indicators}, {"gdp", cfg.gdp}}, panel_body};
  }
  if (stage == "analyze") return StageDef{{kPanel}, {{"models", cfg.models}}, analyze_body};
  if (stage == "validate") {
    if (!cfg.annotations) throw ConfigError("validate.annotations is not configured");
    StageDef d{{}, {{"annotations", *cfg.annotations}}, validate_body};
    if (!annotations_have_text(econ::load_annotations(*cfg.annotations))) {
      d.upstream.emplace_back(kScores);
    } else {
      for (const auto& [lang, p] : cfg.anchors) d.external.emplace_back("anchors:" + lang, p);
    }
    return d;
  }
  if (stage == "plot") return StageDef{{kPanel}, {}, plot_body};
  throw std::invalid_argument("unknown stage '" + stage + "'");
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> kNames = {"ingest", "preprocess", "rate",    "embed", "fuse",
                                                  "panel",  "analyze",    "plot",    "validate"};
  return kNames;
}

StageOutcome run_stage(const std::string& stage, StageContext& ctx) {
  const auto& cfg = ctx.config;
  const auto def = definition(stage, cfg);

  std::vector<std::pair<std::string, fs::path>> inputs = def.external;
  for (const auto& name : def.upstream) {
    const auto p = cfg.out_dir / name;
    if (!fs::exists(p)) throw MissingUpstreamError(producers().at(name), p);
    inputs.emplace_back(name, p);
  }
  for (const auto& [name, p] : def.external) {
    if (!fs::exists(p)) throw ConfigError(stage + ": input file not found: " + p.string());
  }

  json stage_cfg = cfg.stage_config(stage);
  if (stage == "preprocess") stage_cfg["limit"] = ctx.limit ? json(*ctx.limit) : json(nullptr);
  const auto cfg_hash = config_hash(stage_cfg);
  const auto input_hashes = hash_inputs(inputs);

  if (plan_stage(cfg.out_dir, stage, cfg_hash, input_hashes, ctx.force) == ResumeAction::skip) {
    const auto m = read_manifest(cfg.out_dir, stage);
    spdlog::info("{}: up to date, skipped", stage);
    return StageOutcome{stage, true, m ? m->counts : json::object()};
  }

  fs::create_directories(cfg.out_dir);
  spdlog::info("{}: running", stage);
  auto written = def.body(ctx, cfg_hash);

  StageManifest manifest;
  manifest.stage = stage;
  manifest.config_hash = cfg_hash;
  manifest.inputs = input_hashes;
  for (const auto& f : written.files) manifest.outputs[f] = hash::sha256_file(cfg.out_dir / f);
  manifest.counts = written.counts;
  write_manifest(cfg.out_dir, manifest);
  spdlog::info("{}: done {}", stage, written.counts.dump());
  return StageOutcome{stage, false, std::move(written.counts)};
}

std::vector<StageOutcome> run_all(StageContext& ctx) {
  std::vector<StageOutcome> out;
  for (const auto& stage : stage_names()) {
    if (stage == "validate" && !ctx.config.annotations) continue;
    out.push_back(run_stage(stage, ctx));
  }
  return out;
}

}  // namespace emi::cli
