#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "emi/corpus.hpp"
#include "emi/econ/inference.hpp"
#include "emi/embedder.hpp"
#include "emi/endpoint.hpp"
#include "emi/fusion.hpp"
#include "emi/panel.hpp"
#include "emi/preprocess.hpp"

namespace emi::cli {

namespace fs = std::filesystem;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlotEvent {
  std::string country;
  int year = 0;
  std::string label;
};

/// Whole-run configuration. Relative paths are resolved against the config
/// file's directory.
struct RunConfig {
  fs::path config_path;
  fs::path out_dir;
  std::optional<fs::path> cache_dir;

  // ingest
  std::vector<fs::path> corpus_files;
  fs::path mapping;
  corpus::DedupScope dedup_scope = corpus::DedupScope::country;

  // preprocess
  std::map<std::string, fs::path> common_words;  // language -> list file
  preprocess::Config preprocess;

  // rate
  std::vector<EndpointConfig> raters;
  int procedural_threshold = 2;
  std::string procedural_level = "speech";  // "speech" | "segment"

  // embed
  EndpointConfig embedder;
  std::map<std::string, fs::path> anchors;  // language -> anchor file
  embedder::AnchorEmbedMode anchor_mode = embedder::AnchorEmbedMode::joined;
  bool normalize_before_mean = false;

  // fuse
  fusion::ZScope z_scope = fusion::ZScope::country;

  // panel
  fs::path indicators;
  panel::TableMapping indicator_mapping;
  fs::path gdp;
  panel::TableMapping gdp_mapping;
  std::size_t panel_bootstrap_iters = 10000;
  std::uint64_t panel_seed = 42;
  std::vector<std::string> lag_vars{"emi", "ddi"};

  // analyze
  fs::path models;
  std::size_t coef_bootstrap_iters = 10000;
  std::uint64_t analysis_seed = 42;
  econ::Resampling resampling = econ::Resampling::rows;
  double level = 0.95;

  // validate
  std::optional<fs::path> annotations;
  std::string validation_language = "en";
  std::optional<std::pair<std::string, std::string>> validation_compare;

  // plot
  std::string plot_indicator = "ddi";
  std::vector<PlotEvent> plot_events;

  /// Parses and resolves paths; throws ConfigError naming the key.
  [[nodiscard]] static RunConfig from_json(const nlohmann::json& j, const fs::path& base_dir);
  [[nodiscard]] static RunConfig load(const fs::path& path);

  /// Checks that every referenced input file exists.
  void validate() const;

  /// Stage-relevant settings hashed into each manifest. Transport details
  /// (base_url, timeouts, parallelism) and the output directory are left out.
  [[nodiscard]] nlohmann::json stage_config(const std::string& stage) const;

  [[nodiscard]] fs::path cache_root() const;
};

}  // namespace emi::cli
