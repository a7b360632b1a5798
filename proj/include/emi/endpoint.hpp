#pragma once

#include <string>
#include <stdexcept>

#include <json.hpp>

namespace emi {

/// One model served over an OpenAI-style HTTP API.
struct EndpointConfig {
  std::string base_url;
  std::string model_name;
  std::size_t max_parallel = 1;
  double timeout_s = 60.0;
  int max_retries = 3;
  double temperature = 0.0;
  int max_tokens = 64;
  int backoff_ms = 200;
  std::size_t batch_size = 32;  // embeddings only

  void validate() const;
  [[nodiscard]] static EndpointConfig from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Connection failures, non-2xx statuses and unparseable protocol envelopes.
class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, int status = 0)
      : std::runtime_error(what), status_(status) {}
  [[nodiscard]] int status() const noexcept { return status_; }

 private:
  int status_;
};

/// Raised when an endpoint stays unreachable after retries and a fresh
/// health probe; completed work is already in the response cache.
class EndpointDownError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace http {

struct BaseUrl {
  std::string scheme_host_port;
  std::string path_prefix;
};

[[nodiscard]] BaseUrl split_base_url(const std::string& base_url);

/// POSTs a JSON body to base_url + path and returns the parsed JSON reply.
/// Sends `Authorization: Bearer $EMI_API_KEY` when that variable is set.
[[nodiscard]] nlohmann::json post_json(const EndpointConfig& endpoint, const std::string& path,
                                       const nlohmann::json& body);

/// GET {base_url}/v1/models; true on any 2xx reply.
[[nodiscard]] bool probe(const EndpointConfig& endpoint);

}  // namespace http
}  // namespace emi
