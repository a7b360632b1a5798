#include "emi/endpoint.hpp"

#include <cmath>
#include <cstdlib>

#include <httplib.h>

namespace emi {

using nlohmann::json;

void EndpointConfig::validate() const {
  if (base_url.empty()) throw std::invalid_argument("endpoint: base_url is empty");
  if (model_name.empty()) throw std::invalid_argument("endpoint: model_name is empty");
  if (max_parallel < 1) throw std::invalid_argument("endpoint " + model_name + ": max_parallel < 1");
  if (temperature < 0) throw std::invalid_argument("endpoint " + model_name + ": temperature < 0");
  if (max_retries < 0) throw std::invalid_argument("endpoint " + model_name + ": max_retries < 0");
  if (batch_size < 1) throw std::invalid_argument("endpoint " + model_name + ": batch_size < 1");
}

EndpointConfig EndpointConfig::from_json(const json& j) {
  EndpointConfig e;
  e.base_url = j.value("base_url", e.base_url);
  e.model_name = j.at("model_name").get<std::string>();
  e.max_parallel = j.value("max_parallel", e.max_parallel);
  e.timeout_s = j.value("timeout", e.timeout_s);
  e.max_retries = j.value("max_retries", e.max_retries);
  e.temperature = j.value("temperature", e.temperature);
  e.max_tokens = j.value("max_tokens", e.max_tokens);
  e.backoff_ms = j.value("backoff_ms", e.backoff_ms);
  e.batch_size = j.value("batch_size", e.batch_size);
  return e;
}

json EndpointConfig::to_json() const {
  return json{{"base_url", base_url},       {"model_name", model_name},   {"max_parallel", max_parallel},
              {"timeout", timeout_s},       {"max_retries", max_retries}, {"temperature", temperature},
              {"max_tokens", max_tokens},   {"backoff_ms", backoff_ms},   {"batch_size", batch_size}};
}

namespace http {

BaseUrl split_base_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("base_url needs a scheme: " + base_url);
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  BaseUrl out;
  if (path_start == std::string::npos) {
    out.scheme_host_port = base_url;
  } else {
    out.scheme_host_port = base_url.substr(0, path_start);
    out.path_prefix = base_url.substr(path_start);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
  }
  return out;
}

namespace {

httplib::Client make_client(const EndpointConfig& endpoint, const BaseUrl& url) {
  httplib::Client client(url.scheme_host_port);
  const auto secs = static_cast<time_t>(endpoint.timeout_s);
  const auto usecs = static_cast<time_t>((endpoint.timeout_s - std::floor(endpoint.timeout_s)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  if (const char* key = std::getenv("EMI_API_KEY"); key && *key) {
    client.set_bearer_token_auth(key);
  }
  return client;
}

}  // namespace

json post_json(const EndpointConfig& endpoint, const std::string& path, const json& body) {
  const auto url = split_base_url(endpoint.base_url);
  auto client = make_client(endpoint, url);
  const auto res = client.Post(url.path_prefix + path, body.dump(), "application/json");
  if (!res) {
    throw TransportError(endpoint.model_name + ": request to " + endpoint.base_url + path +
                         " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError(endpoint.model_name + ": HTTP " + std::to_string(res->status) + " from " +
                             endpoint.base_url + path,
                         res->status);
  }
  try {
    return json::parse(res->body);
  } catch (const json::parse_error&) {
    throw TransportError(endpoint.model_name + ": response body is not JSON");
  }
}

bool probe(const EndpointConfig& endpoint) {
  try {
    const auto url = split_base_url(endpoint.base_url);
    auto client = make_client(endpoint, url);
    const auto res = client.Get(url.path_prefix + "/v1/models");
    return res && res->status >= 200 && res->status < 300;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace http
}  // namespace emi
