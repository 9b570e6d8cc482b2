// SPDX-License-Identifier: Apache-2.0
// Eigen must precede httplib: <resolv.h> defines `_res` as a macro.
#include "srr/embedder.hpp"
#include "srr/errors.hpp"
#include "srr/llm.hpp"

#include <semaphore>

#include <httplib.h>

namespace srr {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("service URL '" + url + "' has no scheme");
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = url.substr(0, path_start);
  ep.prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
  return ep;
}

// Posts JSON and returns the parsed body, mapping transport failures onto the
// provider error hierarchy.
json post_json(const Endpoint& ep, const std::string& path, const json& body, double timeout_seconds,
               const httplib::Headers& headers, std::counting_semaphore<>& in_flight) {
  httplib::Client client(ep.origin);
  const auto secs = static_cast<time_t>(timeout_seconds);
  const auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  in_flight.acquire();
  auto result = client.Post(ep.prefix + path, headers, body.dump(), "application/json");
  in_flight.release();

  if (!result) {
    const auto err = result.error();
    const auto what = "request to " + ep.origin + ep.prefix + path + " failed: " + httplib::to_string(err);
    if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) throw TimeoutError(what);
    if (err == httplib::Error::Connection || err == httplib::Error::Write) throw TransientProviderError(what);
    throw ProviderError(what);
  }
  const int status = result->status;
  if (status != 200) {
    const auto what = ep.origin + ep.prefix + path + " answered HTTP " + std::to_string(status);
    if (status == 429 || status >= 500) throw TransientProviderError(what);
    throw ProviderError(what);
  }
  try {
    return json::parse(result->body);
  } catch (const json::parse_error& e) {
    throw ProviderError("unparseable response from " + ep.origin + ep.prefix + path + ": " + e.what());
  }
}

class HttpChatTransport final : public ChatTransport {
 public:
  HttpChatTransport(const std::string& base_url, std::string api_key, double timeout_seconds, int max_in_flight)
      : endpoint_(split_url(base_url)),
        api_key_(std::move(api_key)),
        timeout_(timeout_seconds),
        in_flight_(max_in_flight) {}

  ChatResponse send(const ChatRequest& request) override {
    json body = {{"model", request.model_name},
                 {"messages",
                  json::array({{{"role", "system"}, {"content", request.system_text}},
                               {{"role", "user"}, {"content", request.user_text}}})},
                 {"temperature", request.temperature},
                 {"max_tokens", request.max_output_tokens}};
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto doc = post_json(endpoint_, "/chat", body, timeout_, headers, in_flight_);
    if (!doc.is_object() || !doc.contains("text") || !doc["text"].is_string())
      throw ProviderError("chat response lacks a string 'text' field");
    ChatResponse out;
    out.text = doc["text"].get<std::string>();
    if (doc.contains("usage") && doc["usage"].is_object()) {
      out.input_tokens = doc["usage"].value("input_tokens", 0L);
      out.output_tokens = doc["usage"].value("output_tokens", 0L);
    }
    return out;
  }

 private:
  Endpoint endpoint_;
  std::string api_key_;
  double timeout_;
  std::counting_semaphore<> in_flight_;
};

class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(const std::string& base_url, std::string model_name, int dimension, double timeout_seconds,
               int max_in_flight)
      : endpoint_(split_url(base_url)),
        model_name_(std::move(model_name)),
        dimension_(dimension),
        timeout_(timeout_seconds),
        in_flight_(max_in_flight) {}

  std::vector<DenseVector<double>> embed(const std::vector<std::string>& texts) override {
    ++calls_;
    json doc;
    try {
      doc = post_json(endpoint_, "/embed", json{{"texts", texts}}, timeout_, {}, in_flight_);
    } catch (const ProviderError& e) {
      throw EmbeddingError(e.what());
    }
    if (!doc.is_object() || !doc.contains("vectors") || !doc["vectors"].is_array())
      throw EmbeddingError("embedding response lacks a 'vectors' array");
    if (doc.contains("dimension") && doc["dimension"] != dimension_)
      throw DimensionMismatchError("embedding service reports dimension " + doc["dimension"].dump() + ", expected " +
                                   std::to_string(dimension_));
    std::vector<DenseVector<double>> out;
    for (const auto& row : doc["vectors"]) {
      if (!row.is_array()) throw EmbeddingError("embedding row is not an array");
      DenseVector<double> v(static_cast<Eigen::Index>(row.size()));
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (!row[i].is_number()) throw EmbeddingError("embedding value is not a number");
        v[static_cast<Eigen::Index>(i)] = row[i].get<double>();
      }
      if (v.size() != dimension_)
        throw DimensionMismatchError("embedding row has dimension " + std::to_string(v.size()) + ", expected " +
                                     std::to_string(dimension_));
      out.push_back(std::move(v));
    }
    return out;
  }

  std::string name() const override { return "http:" + model_name_; }
  int dimension() const override { return dimension_; }
  std::size_t network_calls() const override { return calls_.load(); }

 private:
  Endpoint endpoint_;
  std::string model_name_;
  int dimension_;
  double timeout_;
  std::counting_semaphore<> in_flight_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace

std::shared_ptr<ChatTransport> make_http_chat_transport(const std::string& base_url, const std::string& api_key,
                                                        double timeout_seconds, int max_in_flight) {
  return std::make_shared<HttpChatTransport>(base_url, api_key, timeout_seconds, max_in_flight);
}

std::shared_ptr<Embedder> make_http_embedder(const std::string& base_url, const std::string& model_name, int dimension,
                                             double timeout_seconds, int max_in_flight) {
  return std::make_shared<HttpEmbedder>(base_url, model_name, dimension, timeout_seconds, max_in_flight);
}

}  // namespace srr
