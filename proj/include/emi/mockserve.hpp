#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include <json.hpp>

namespace emi::mock {

struct FailureInjection {
  std::size_t fail_every_n = 0;     // every Nth request answers HTTP 503
  std::size_t garbage_every_n = 0;  // every Nth chat request returns non-JSON content
};

struct MockRules {
  std::uint64_t seed = 42;
  std::vector<std::string> evidence_lexicon;
  std::vector<std::string> intuition_lexicon;
  std::vector<std::string> procedural_lexicon;
  std::size_t embedding_dim = 64;
  double category_weight = 3.0;  // pull of a lexicon word toward its category direction
  FailureInjection failures;
  int delay_ms = 0;

  /// Throws std::invalid_argument on empty lexicons or embedding_dim < 8.
  void validate() const;
  [[nodiscard]] static MockRules from_json(const nlohmann::json& j);
  [[nodiscard]] static MockRules load(const std::filesystem::path& path);
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Malformed request; served as HTTP 400.
class MockRequestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pure request -> response functions over fixed rules.
class MockModel {
 public:
  explicit MockModel(MockRules rules);

  [[nodiscard]] const MockRules& rules() const noexcept { return rules_; }

  /// Lexicon hit counts of `text`, clipped to 0..4.
  struct Counts {
    int evidence = 0;
    int intuition = 0;
    int procedural = 0;
  };
  [[nodiscard]] Counts count(std::string_view text) const;

  /// Unit-length embedding of `text`.
  [[nodiscard]] std::vector<double> embed(std::string_view text) const;

  [[nodiscard]] nlohmann::json chat(const nlohmann::json& request) const;
  [[nodiscard]] nlohmann::json embeddings(const nlohmann::json& request) const;

 private:
  [[nodiscard]] std::vector<double> direction(std::uint64_t key) const;

  MockRules rules_;
  std::unordered_set<std::string> evidence_;
  std::unordered_set<std::string> intuition_;
  std::unordered_set<std::string> procedural_;
  std::vector<double> evidence_dir_;
  std::vector<double> intuition_dir_;
};

[[nodiscard]] nlohmann::json mock_chat(const MockRules& rules, const nlohmann::json& request);
[[nodiscard]] nlohmann::json mock_embed(const MockRules& rules, const nlohmann::json& request);

/// HTTP server for both wire protocols plus GET /v1/models and /health.
class MockServer {
 public:
  explicit MockServer(MockRules rules);
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  /// Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Serves on the calling thread until stop() is called.
  void serve(const std::string& host, int port);
  void stop();

  [[nodiscard]] std::string base_url() const;
  [[nodiscard]] std::size_t requests() const noexcept { return requests_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<std::size_t> requests_{0};
};

}  // namespace emi::mock
