#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace emi::cli {

namespace fs = std::filesystem;

/// An upstream artifact is absent; the message names the stage to run.
class MissingUpstreamError : public std::runtime_error {
 public:
  MissingUpstreamError(const std::string& stage, const fs::path& artifact)
      : std::runtime_error("run `" + stage + "` first (missing " + artifact.filename().string() + ")"),
        stage_(stage) {}
  [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// The stage ran before under a different configuration.
class ConfigMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Record written next to a stage's artifacts. Holds no timestamps, so a
/// rerun with the same inputs rewrites it byte for byte.
struct StageManifest {
  std::string stage;
  std::string config_hash;
  std::map<std::string, std::string> inputs;   // name -> sha256
  std::map<std::string, std::string> outputs;  // file name -> sha256
  nlohmann::json counts = nlohmann::json::object();

  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] static StageManifest from_json(const nlohmann::json& j);
};

[[nodiscard]] std::string config_hash(const nlohmann::json& stage_config);
[[nodiscard]] fs::path manifest_path(const fs::path& out_dir, const std::string& stage);
[[nodiscard]] std::optional<StageManifest> read_manifest(const fs::path& out_dir,
                                                         const std::string& stage);
void write_manifest(const fs::path& out_dir, const StageManifest& manifest);

/// Hashes each input; names are kept as given (relative names keep the
/// manifest independent of the checkout location).
[[nodiscard]] std::map<std::string, std::string> hash_inputs(
    const std::vector<std::pair<std::string, fs::path>>& inputs);

enum class ResumeAction { run, skip };

/// Decides whether a stage must run. Skips only when a previous manifest has
/// the same config hash and input hashes and every output still matches its
/// recorded hash. A config-hash change throws ConfigMismatchError unless
/// `force` is set; `force` also reruns an up-to-date stage.
[[nodiscard]] ResumeAction plan_stage(const fs::path& out_dir, const std::string& stage,
                                      const std::string& cfg_hash,
                                      const std::map<std::string, std::string>& inputs, bool force);

}  // namespace emi::cli
