#include "emi/mockserve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "emi/rater/prompts.hpp"
#include "emi/util/hash.hpp"
#include "emi/util/jsonl.hpp"
#include "emi/util/utf8.hpp"

namespace emi::mock {

using nlohmann::json;

void MockRules::validate() const {
  if (evidence_lexicon.empty() || intuition_lexicon.empty() || procedural_lexicon.empty()) {
    throw std::invalid_argument("mock rules: lexicons must be non-empty");
  }
  if (embedding_dim < 8) throw std::invalid_argument("mock rules: embedding_dim must be >= 8");
}

MockRules MockRules::from_json(const json& j) {
  MockRules r;
  r.seed = j.value("seed", r.seed);
  r.evidence_lexicon = j.at("evidence_lexicon").get<std::vector<std::string>>();
  r.intuition_lexicon = j.at("intuition_lexicon").get<std::vector<std::string>>();
  r.procedural_lexicon = j.at("procedural_lexicon").get<std::vector<std::string>>();
  r.embedding_dim = j.value("embedding_dim", r.embedding_dim);
  r.category_weight = j.value("category_weight", r.category_weight);
  r.delay_ms = j.value("delay_ms", r.delay_ms);
  if (j.contains("failures")) {
    const auto& f = j.at("failures");
    r.failures.fail_every_n = f.value("fail_every_n", std::size_t{0});
    r.failures.garbage_every_n = f.value("garbage_every_n", std::size_t{0});
  }
  r.validate();
  return r;
}

MockRules MockRules::load(const std::filesystem::path& path) {
  try {
    return from_json(io::read_json(path));
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

json MockRules::to_json() const {
  return json{{"seed", seed},
              {"evidence_lexicon", evidence_lexicon},
              {"intuition_lexicon", intuition_lexicon},
              {"procedural_lexicon", procedural_lexicon},
              {"embedding_dim", embedding_dim},
              {"category_weight", category_weight},
              {"delay_ms", delay_ms},
              {"failures", {{"fail_every_n", failures.fail_every_n},
                            {"garbage_every_n", failures.garbage_every_n}}}};
}

namespace {

std::unordered_set<std::string> lexicon_set(const std::vector<std::string>& words) {
  std::unordered_set<std::string> out;
  for (const auto& w : words) out.insert(utf8::lookup_form(w));
  return out;
}

}  // namespace

MockModel::MockModel(MockRules rules) : rules_(std::move(rules)) {
  rules_.validate();
  evidence_ = lexicon_set(rules_.evidence_lexicon);
  intuition_ = lexicon_set(rules_.intuition_lexicon);
  procedural_ = lexicon_set(rules_.procedural_lexicon);
  evidence_dir_ = direction(hash::fnv1a64("\x01" "category:evidence"));
  intuition_dir_ = direction(hash::fnv1a64("\x01" "category:intuition"));
}

std::vector<double> MockModel::direction(std::uint64_t key) const {
  std::vector<double> v(rules_.embedding_dim);
  const std::uint64_t base = hash::mix64(rules_.seed ^ key);
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::uint64_t bits = hash::mix64(base + k);
    v[k] = static_cast<double>(bits >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  }
  return v;
}

MockModel::Counts MockModel::count(std::string_view text) const {
  Counts c;
  for (const auto token : utf8::split_whitespace(text)) {
    const auto w = utf8::lookup_form(token);
    if (w.empty()) continue;
    c.evidence += evidence_.count(w) ? 1 : 0;
    c.intuition += intuition_.count(w) ? 1 : 0;
    c.procedural += procedural_.count(w) ? 1 : 0;
  }
  c.evidence = std::min(c.evidence, 4);
  c.intuition = std::min(c.intuition, 4);
  c.procedural = std::min(c.procedural, 4);
  return c;
}

std::vector<double> MockModel::embed(std::string_view text) const {
  std::vector<double> v(rules_.embedding_dim, 0.0);
  for (const auto token : utf8::split_whitespace(text)) {
    const auto w = utf8::lookup_form(token);
    if (w.empty()) continue;
    const auto d = direction(hash::fnv1a64(w));
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += d[k];
    if (evidence_.count(w)) {
      for (std::size_t k = 0; k < v.size(); ++k) v[k] += rules_.category_weight * evidence_dir_[k];
    }
    if (intuition_.count(w)) {
      for (std::size_t k = 0; k < v.size(); ++k) v[k] += rules_.category_weight * intuition_dir_[k];
    }
  }
  double norm = 0.0;
  for (const double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    // Punctuation-only text: fall back to a direction keyed on the raw bytes.
    v = direction(hash::fnv1a64(text));
    norm = 0.0;
    for (const double x : v) norm += x * x;
    norm = std::sqrt(norm);
  }
  for (auto& x : v) x /= norm;
  return v;
}

json MockModel::chat(const json& request) const {
  if (!request.is_object() || !request.contains("messages") || !request.at("messages").is_array()) {
    throw MockRequestError("request must be an object with a messages array");
  }
  std::string system;
  std::string user;
  for (const auto& m : request.at("messages")) {
    if (!m.is_object() || !m.contains("role") || !m.contains("content") || !m.at("content").is_string()) {
      throw MockRequestError("each message needs string role and content");
    }
    const auto role = m.at("role").get<std::string>();
    if (role == "system") system = m.at("content").get<std::string>();
    else if (role == "user") user = m.at("content").get<std::string>();
  }
  std::string_view text = user;
  if (text.substr(0, rater::kUserPrefix.size()) == rater::kUserPrefix) text.remove_prefix(rater::kUserPrefix.size());
  const auto counts = count(text);
  std::string content;
  if (system.rfind(rater::kProceduralOpening, 0) == 0) {
    content = "{\"procedural\": " + std::to_string(counts.procedural) + "}";
  } else if (system.rfind(rater::kEpistemicOpening, 0) == 0) {
    content = "{\"evidence_free\": " + std::to_string(counts.intuition) +
              ", \"evidence_based\": " + std::to_string(counts.evidence) + "}";
  } else {
    throw MockRequestError("unrecognized system prompt");
  }
  const std::string model = request.value("model", std::string("mock"));
  return json{{"id", "mock-" + hash::sha256_hex(request.dump()).substr(0, 16)},
              {"object", "chat.completion"},
              {"model", model},
              {"choices", json::array({json{{"index", 0},
                                            {"message", {{"role", "assistant"}, {"content", content}}},
                                            {"finish_reason", "stop"}}})}};
}

json MockModel::embeddings(const json& request) const {
  if (!request.is_object() || !request.contains("input")) throw MockRequestError("request needs an input field");
  std::vector<std::string> inputs;
  const auto& input = request.at("input");
  if (input.is_string()) {
    inputs.push_back(input.get<std::string>());
  } else if (input.is_array()) {
    for (const auto& item : input) {
      if (!item.is_string()) throw MockRequestError("input items must be strings");
      inputs.push_back(item.get<std::string>());
    }
  } else {
    throw MockRequestError("input must be a string or an array of strings");
  }
  json data = json::array();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].empty()) throw MockRequestError("input item " + std::to_string(i) + " is empty");
    data.push_back(json{{"object", "embedding"}, {"index", i}, {"embedding", embed(inputs[i])}});
  }
  return json{{"object", "list"}, {"model", request.value("model", std::string("mock"))}, {"data", data}};
}

json mock_chat(const MockRules& rules, const json& request) { return MockModel(rules).chat(request); }
json mock_embed(const MockRules& rules, const json& request) { return MockModel(rules).embeddings(request); }

// ---------------------------------------------------------------------------

struct MockServer::Impl {
  explicit Impl(MockRules rules) : model(std::move(rules)) {}
  MockModel model;
  httplib::Server server;
  std::thread thread;
  std::string host = "127.0.0.1";
  int port = 0;
  std::atomic<std::size_t> counter{0};
  std::atomic<std::size_t> chat_counter{0};
};

MockServer::MockServer(MockRules rules) : impl_(std::make_unique<Impl>(std::move(rules))) {
  auto& s = impl_->server;
  auto* impl = impl_.get();
  auto error = [](httplib::Response& res, int status, const std::string& message) {
    res.status = status;
    res.set_content(json{{"error", {{"message", message}}}}.dump(), "application/json");
  };
  auto handle = [this, impl, error](const httplib::Request& req, httplib::Response& res, bool chat) {
    ++requests_;
    const auto n = ++impl->counter;
    const auto& rules = impl->model.rules();
    if (rules.delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(rules.delay_ms));
    if (rules.failures.fail_every_n > 0 && n % rules.failures.fail_every_n == 0) {
      error(res, 503, "injected failure");
      return;
    }
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error&) {
      error(res, 400, "body is not JSON");
      return;
    }
    try {
      json reply;
      if (chat) {
        reply = impl->model.chat(body);
        const auto c = ++impl->chat_counter;
        if (rules.failures.garbage_every_n > 0 && c % rules.failures.garbage_every_n == 0) {
          reply["choices"][0]["message"]["content"] = "I am unable to provide a rating.";
        }
      } else {
        reply = impl->model.embeddings(body);
      }
      res.set_content(reply.dump(), "application/json");
    } catch (const MockRequestError& e) {
      error(res, 400, e.what());
    }
  };
  s.Post("/v1/chat/completions", [handle](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, true);
  });
  s.Post("/v1/embeddings", [handle](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, false);
  });
  s.Get("/v1/models", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"object", "list"}, {"data", json::array({json{{"id", "mock"}, {"object", "model"}}})}}.dump(),
                    "application/json");
  });
  s.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"status\":\"ok\"}", "application/json");
  });
}

MockServer::~MockServer() { stop(); }

int MockServer::start(const std::string& host, int port) {
  auto& s = impl_->server;
  impl_->host = host;
  impl_->port = port == 0 ? s.bind_to_any_port(host) : (s.bind_to_port(host, port) ? port : -1);
  if (impl_->port < 0) throw std::runtime_error("mock server: cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
  spdlog::debug("mock server listening on {}", base_url());
  return impl_->port;
}

void MockServer::serve(const std::string& host, int port) {
  impl_->host = host;
  impl_->port = port;
  if (!impl_->server.bind_to_port(host, port)) {
    throw std::runtime_error("mock server: cannot bind " + host + ":" + std::to_string(port));
  }
  spdlog::info("mock server listening on {}", base_url());
  impl_->server.listen_after_bind();
}

void MockServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockServer::base_url() const {
  return "http://" + impl_->host + ":" + std::to_string(impl_->port);
}

}  // namespace emi::mock
