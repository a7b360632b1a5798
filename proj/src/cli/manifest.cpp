#include "emi/cli/manifest.hpp"

#include "emi/util/hash.hpp"
#include "emi/util/jsonl.hpp"

namespace emi::cli {

using nlohmann::json;

json StageManifest::to_json() const {
  return json{{"stage", stage},     {"config_hash", config_hash}, {"inputs", inputs},
              {"outputs", outputs}, {"counts", counts}};
}

StageManifest StageManifest::from_json(const json& j) {
  StageManifest m;
  m.stage = j.at("stage").get<std::string>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
  m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  m.counts = j.value("counts", json::object());
  return m;
}

std::string config_hash(const json& stage_config) { return hash::sha256_hex(stage_config.dump()); }

fs::path manifest_path(const fs::path& out_dir, const std::string& stage) {
  return out_dir / "manifests" / (stage + ".json");
}

std::optional<StageManifest> read_manifest(const fs::path& out_dir, const std::string& stage) {
  const auto path = manifest_path(out_dir, stage);
  if (!fs::exists(path)) return std::nullopt;
  try {
    return StageManifest::from_json(io::read_json(path));
  } catch (const std::exception&) {
    return std::nullopt;  // unreadable manifests just force a rerun
  }
}

void write_manifest(const fs::path& out_dir, const StageManifest& manifest) {
  const auto path = manifest_path(out_dir, manifest.stage);
  fs::create_directories(path.parent_path());
  io::write_file_atomic(path, manifest.to_json().dump(2) + "\n");
}

std::map<std::string, std::string> hash_inputs(
    const std::vector<std::pair<std::string, fs::path>>& inputs) {
  std::map<std::string, std::string> out;
  for (const auto& [name, path] : inputs) out[name] = hash::sha256_file(path);
  return out;
}

ResumeAction plan_stage(const fs::path& out_dir, const std::string& stage, const std::string& cfg_hash,
                        const std::map<std::string, std::string>& inputs, bool force) {
  const auto previous = read_manifest(out_dir, stage);
  if (!previous) return ResumeAction::run;
  if (previous->config_hash != cfg_hash) {
    if (force) return ResumeAction::run;
    throw ConfigMismatchError("stage `" + stage +
                              "` was run with a different configuration; rerun with --force to "
                              "overwrite its artifacts");
  }
  if (force || previous->inputs != inputs) return ResumeAction::run;
  for (const auto& [name, digest] : previous->outputs) {
    const auto path = out_dir / name;
    if (!fs::exists(path) || hash::sha256_file(path) != digest) return ResumeAction::run;
  }
  return ResumeAction::skip;
}

}  // namespace emi::cli
