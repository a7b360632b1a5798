#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emi/cli/config.hpp"
#include "emi/embedder.hpp"
#include "emi/rater/rater.hpp"

namespace emi::cli {

/// Everything a stage needs besides its input files. Clients default to the
/// HTTP implementations; tests inject in-process fakes.
struct StageContext {
  RunConfig config;
  std::size_t jobs = 1;
  std::optional<std::size_t> limit;  // cap on segments passed downstream
  bool force = false;
  rater::ChatClient* chat = nullptr;
  embedder::EmbeddingClient* embed = nullptr;

  [[nodiscard]] rater::ChatClient& chat_client();
  [[nodiscard]] embedder::EmbeddingClient& embedding_client();

 private:
  std::shared_ptr<rater::ChatClient> own_chat_;
  std::shared_ptr<embedder::EmbeddingClient> own_embed_;
};

struct StageOutcome {
  std::string stage;
  bool skipped = false;
  nlohmann::json counts = nlohmann::json::object();
};

/// Stages in pipeline order (validate last).
[[nodiscard]] const std::vector<std::string>& stage_names();

/// Runs one stage, or skips it when its manifest shows the artifacts are
/// current. Throws MissingUpstreamError and ConfigMismatchError.
StageOutcome run_stage(const std::string& stage, StageContext& ctx);

/// Every stage in order; validate runs only when annotations are configured.
std::vector<StageOutcome> run_all(StageContext& ctx);

}  // namespace emi::cli
