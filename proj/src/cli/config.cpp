#include "emi/cli/config.hpp"

#include "emi/util/jsonl.hpp"

namespace emi::cli {

using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::map<std::string, fs::path> path_map(const json& j, const fs::path& base) {
  std::map<std::string, fs::path> out;
  for (const auto& [k, v] : j.items()) out[k] = resolve(base, v.get<std::string>());
  return out;
}

std::string relative_name(const fs::path& p, const fs::path& base) {
  // Paths enter the config hash relative to the config file, so moving a
  // checkout does not invalidate manifests.
  return p.lexically_relative(base).generic_string();
}

json transport_free(const EndpointConfig& e) {
  return json{{"model_name", e.model_name}, {"temperature", e.temperature},
              {"max_tokens", e.max_tokens}, {"batch_size", e.batch_size}};
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
  RunConfig c;
  std::string current;
  try {
    auto section = [&](const char* name) -> const json& {
      current = name;
      static const json kEmpty = json::object();
      return j.contains(name) ? j.at(name) : kEmpty;
    };
    c.out_dir = resolve(base_dir, j.value("out_dir", std::string("out")));
    if (j.contains("cache_dir")) c.cache_dir = resolve(base_dir, j.at("cache_dir").get<std::string>());

    const auto& corpus = section("corpus");
    for (const auto& f : corpus.at("files")) c.corpus_files.push_back(resolve(base_dir, f.get<std::string>()));
    c.mapping = resolve(base_dir, corpus.at("mapping").get<std::string>());
    if (corpus.contains("dedup_scope")) {
      const auto scope = corpus::parse_dedup_scope(corpus.at("dedup_scope").get<std::string>());
      if (!scope) throw ConfigError("corpus.dedup_scope must be 'country' or 'global'");
      c.dedup_scope = *scope;
    }

    const auto& pre = section("preprocess");
    c.common_words = path_map(pre.at("common_words"), base_dir);
    c.preprocess = preprocess::Config::from_json(pre);

    const auto& rate = section("rate");
    for (const auto& e : rate.at("endpoints")) c.raters.push_back(EndpointConfig::from_json(e));
    c.procedural_threshold = rate.value("procedural_threshold", c.procedural_threshold);
    c.procedural_level = rate.value("procedural_level", c.procedural_level);
    if (c.procedural_level != "speech" && c.procedural_level != "segment") {
      throw ConfigError("rate.procedural_level must be 'speech' or 'segment'");
    }

    const auto& emb = section("embed");
    c.embedder = EndpointConfig::from_json(emb.at("endpoint"));
    c.anchors = path_map(emb.at("anchors"), base_dir);
    c.anchor_mode = embedder::parse_anchor_embed_mode(emb.value("anchor_embed_mode", std::string("joined")));
    c.normalize_before_mean = emb.value("normalize_before_mean", false);

    const auto& fuse = section("fuse");
    c.z_scope = fusion::parse_z_scope(fuse.value("z_scope", std::string("country")));

    const auto& pan = section("panel");
    c.indicators = resolve(base_dir, pan.at("indicators").get<std::string>());
    if (pan.contains("indicator_mapping")) c.indicator_mapping = panel::TableMapping::from_json(pan.at("indicator_mapping"));
    c.gdp = resolve(base_dir, pan.at("gdp").get<std::string>());
    if (pan.contains("gdp_mapping")) c.gdp_mapping = panel::TableMapping::from_json(pan.at("gdp_mapping"));
    c.panel_bootstrap_iters = pan.value("bootstrap_iters", c.panel_bootstrap_iters);
    c.panel_seed = pan.at("seed").get<std::uint64_t>();
    c.lag_vars = pan.value("lags", c.lag_vars);

    const auto& an = section("analyze");
    c.models = resolve(base_dir, an.at("models").get<std::string>());
    c.coef_bootstrap_iters = an.value("bootstrap_iters", c.coef_bootstrap_iters);
    c.analysis_seed = an.at("seed").get<std::uint64_t>();
    c.resampling = econ::parse_resampling(an.value("resampling", std::string("rows")));
    c.level = an.value("level", c.level);

    const auto& val = section("validate");
    if (val.contains("annotations")) c.annotations = resolve(base_dir, val.at("annotations").get<std::string>());
    c.validation_language = val.value("language", c.validation_language);
    if (val.contains("compare")) {
      const auto pair = val.at("compare").get<std::vector<std::string>>();
      if (pair.size() != 2) throw ConfigError("validate.compare must name two methods");
      c.validation_compare = std::make_pair(pair[0], pair[1]);
    }

    const auto& plot = section("plot");
    c.plot_indicator = plot.value("indicator", c.plot_indicator);
    for (const auto& e : plot.value("events", json::array())) {
      c.plot_events.push_back({e.at("country").get<std::string>(), e.at("year").get<int>(),
                               e.value("label", std::string())});
    }
  } catch (const json::exception& e) {
    throw ConfigError("config section '" + current + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config section '" + current + "': " + e.what());
  }
  if (c.raters.empty()) throw ConfigError("rate.endpoints must list at least one endpoint");
  c.config_path = base_dir;
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  json j;
  try {
    j = io::read_json(path);
  } catch (const std::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  auto c = from_json(j, fs::absolute(path).parent_path());
  c.config_path = fs::absolute(path);
  return c;
}

void RunConfig::validate() const {
  auto need = [](const fs::path& p, const std::string& key) {
    if (!fs::exists(p)) throw ConfigError(key + ": file not found: " + p.string());
  };
  for (const auto& f : corpus_files) need(f, "corpus.files");
  need(mapping, "corpus.mapping");
  for (const auto& [lang, p] : common_words) need(p, "preprocess.common_words." + lang);
  for (const auto& [lang, p] : anchors) need(p, "embed.anchors." + lang);
  need(indicators, "panel.indicators");
  need(gdp, "panel.gdp");
  need(models, "analyze.models");
  if (annotations) need(*annotations, "validate.annotations");
  for (const auto& e : raters) e.validate();
  embedder.validate();
}

fs::path RunConfig::cache_root() const { return cache_dir.value_or(out_dir / "cache"); }

json RunConfig::stage_config(const std::string& stage) const {
  const fs::path base = config_path.has_filename() && fs::is_regular_file(config_path)
                            ? config_path.parent_path()
                            : config_path;
  auto rel = [&](const fs::path& p) { return relative_name(p, base); };
  if (stage == "ingest") {
    json files = json::array();
    for (const auto& f : corpus_files) files.push_back(rel(f));
    return json{{"files", files}, {"mapping", rel(mapping)},
                {"dedup_scope", dedup_scope == corpus::DedupScope::country ? "country" : "global"}};
  }
  if (stage == "preprocess") {
    json lists = json::object();
    for (const auto& [lang, p] : common_words) lists[lang] = rel(p);
    return json{{"common_words", lists}, {"params", preprocess.to_json()}};
  }
  if (stage == "rate") {
    json eps = json::array();
    for (const auto& e : raters) eps.push_back(transport_free(e));
    return json{{"endpoints", eps}, {"procedural_threshold", procedural_threshold},
                {"procedural_level", procedural_level}};
  }
  if (stage == "embed") {
    json anc = json::object();
    for (const auto& [lang, p] : anchors) anc[lang] = rel(p);
    return json{{"endpoint", transport_free(embedder)},
                {"anchors", anc},
                {"anchor_embed_mode", embedder::to_string(anchor_mode)},
                {"normalize_before_mean", normalize_before_mean}};
  }
  if (stage == "fuse") return json{{"z_scope", fusion::to_string(z_scope)}};
  if (stage == "panel") {
    return json{{"indicators", rel(indicators)},
                {"indicator_mapping", indicator_mapping.to_json()},
                {"gdp", rel(gdp)},
                {"gdp_mapping", gdp_mapping.to_json()},
                {"bootstrap_iters", panel_bootstrap_iters},
                {"seed", panel_seed},
                {"lags", lag_vars}};
  }
  if (stage == "analyze") {
    return json{{"models", rel(models)},
                {"bootstrap_iters", coef_bootstrap_iters},
                {"seed", analysis_seed},
                {"resampling", econ::to_string(resampling)},
                {"level", level}};
  }
  if (stage == "validate") {
    json j{{"language", validation_language}, {"rate", stage_config("rate")}, {"embed", stage_config("embed")}};
    j["annotations"] = annotations ? json(rel(*annotations)) : json(nullptr);
    j["compare"] = validation_compare ? json({validation_compare->first, validation_compare->second}) : json(nullptr);
    return j;
  }
  if (stage == "plot") {
    json events = json::array();
    for (const auto& e : plot_events) events.push_back({{"country", e.country}, {"year", e.year}, {"label", e.label}});
    return json{{"indicator", plot_indicator}, {"events", events}};
  }
  throw std::invalid_argument("unknown stage '" + stage + "'");
}

}  // namespace emi::cli
