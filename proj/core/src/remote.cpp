#include "tor/remote.hpp"

#include <cstdlib>

#include <httplib.h>

#include "jsonl.hpp"
#include "tor/error.hpp"
#include "tor/text.hpp"

namespace tor {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

SplitUrl split_url(const std::string& base_url) {
  auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("base URL must start with http:// or https://: " + base_url);
  }
  std::string scheme = base_url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported URL scheme \"" + scheme + "\"");
  }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") throw ConfigError("built without TLS support; cannot reach " + base_url);
#endif
  auto path_start = base_url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = base_url.substr(0, path_start);
  out.prefix = path_start == std::string::npos ? std::string() : base_url.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

std::string getenv_string(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  return v ? std::string(v) : std::string();
}

detail::json post_json(const RemoteEndpoint& endpoint, const std::string& path,
                       const detail::json& body) {
  SplitUrl url = split_url(endpoint.base_url);
  httplib::Client client(url.origin);
  auto timeout = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout).count();
  client.set_connection_timeout(static_cast<time_t>(timeout), 0);
  client.set_read_timeout(static_cast<time_t>(timeout), 0);
  client.set_write_timeout(static_cast<time_t>(timeout), 0);

  httplib::Headers headers{{"Authorization", "Bearer " + endpoint.api_key}};
  auto res = client.Post(url.prefix + path, headers, body.dump(), "application/json");
  if (!res) {
    throw TransportError("POST " + endpoint.base_url + path + ": " +
                         httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw TransportError("POST " + endpoint.base_url + path + ": HTTP " +
                         std::to_string(res->status));
  }
  if (res->status != 200) {
    throw Error("POST " + endpoint.base_url + path + ": HTTP " + std::to_string(res->status) +
                ": " + res->body.substr(0, 500));
  }
  try {
    return detail::json::parse(res->body);
  } catch (const detail::json::parse_error& e) {
    throw Error("unparseable response from " + endpoint.base_url + path + ": " + e.what());
  }
}

}  // namespace

RemoteEndpoint RemoteEndpoint::from_env(std::string_view prefix) {
  std::string p(prefix);
  RemoteEndpoint endpoint;
  endpoint.base_url = getenv_string(p + "_BASE_URL");
  endpoint.api_key = getenv_string(p + "_API_KEY");
  endpoint.model = getenv_string(p + "_MODEL");
  if (endpoint.base_url.empty()) throw ConfigError(p + "_BASE_URL is not set");
  if (endpoint.api_key.empty()) throw ConfigError(p + "_API_KEY is not set");
  split_url(endpoint.base_url);
  return endpoint;
}

RemoteChatProvider::RemoteChatProvider(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (endpoint_.api_key.empty()) throw ConfigError("remote chat provider: API key is empty");
  split_url(endpoint_.base_url);
}

std::string RemoteChatProvider::complete(const CompletionRequest& request) const {
  detail::json body;
  body["model"] = endpoint_.model;
  body["messages"] = detail::json::array({{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.temperature;

  detail::json reply = post_json(endpoint_, "/chat/completions", body);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const detail::json::exception&) {
    throw Error("chat completion response has no choices[0].message.content");
  }
}

RemoteEmbedder::RemoteEmbedder(RemoteEndpoint endpoint, std::size_t dim)
    : endpoint_(std::move(endpoint)), dim_(dim) {
  if (endpoint_.api_key.empty()) throw ConfigError("remote embedder: API key is empty");
  if (dim_ == 0) throw ConfigError("remote embedder: dimension must be positive");
  split_url(endpoint_.base_url);
}

std::string RemoteEmbedder::id() const {
  return "remote:" + endpoint_.model + ":d=" + std::to_string(dim_);
}

Embedding RemoteEmbedder::embed(std::string_view text) const {
  if (trim(text).empty()) throw std::invalid_argument("RemoteEmbedder: empty text");
  detail::json body;
  body["model"] = endpoint_.model;
  body["input"] = std::string(text);
  detail::json reply = post_json(endpoint_, "/embeddings", body);
  Embedding v;
  try {
    v = reply.at("data").at(0).at("embedding").get<Embedding>();
  } catch (const detail::json::exception&) {
    throw Error("embedding response has no data[0].embedding");
  }
  if (v.size() != dim_) {
    throw Error("embedding service returned " + std::to_string(v.size()) + " values, expected " +
                std::to_string(dim_));
  }
  return v;
}

}  // namespace tor
