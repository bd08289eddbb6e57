#include "toxtrig/remote_scorer.hpp"

#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <thread>

#include "toxtrig/errors.hpp"
#include "toxtrig/io.hpp"

namespace toxtrig {

using nlohmann::json;

HttplibTransport::HttplibTransport(std::string endpoint, std::string api_key, std::chrono::seconds timeout)
    : api_key_(std::move(api_key)), timeout_(timeout) {
  const auto scheme = endpoint.find("://");
  if (scheme == std::string::npos) throw ConfigError("scorer.remote.endpoint", "expected scheme://host/path");
  const auto slash = endpoint.find('/', scheme + 3);
  origin_ = endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : endpoint.substr(slash);
}

HttpResponse HttplibTransport::post_json(const std::string& body) {
  httplib::Client client(origin_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  std::string path = path_;
  if (!api_key_.empty()) {
    path += (path.find('?') == std::string::npos ? "?key=" : "&key=");
    path += httplib::detail::encode_query_param(api_key_);
  }
  auto res = client.Post(path, body, "application/json");
  if (!res) return {};
  return {res->status, res->body};
}

RemoteScorer::RemoteScorer(RemoteScorerConfig config, std::unique_ptr<HttpTransport> transport, Sleeper sleeper)
    : config_(std::move(config)), transport_(std::move(transport)), sleeper_(std::move(sleeper)) {
  if (config_.max_attempts < 1) throw ConfigError("scorer.remote.max_attempts", "must be >= 1");
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  load_cache();
}

std::unique_ptr<RemoteScorer> RemoteScorer::from_config(const RemoteScorerConfig& config) {
  std::string key;
  if (!config.api_key_env.empty()) {
    const char* v = std::getenv(config.api_key_env.c_str());
    if (!v || !*v) throw ServiceError("environment variable " + config.api_key_env + " is not set");
    key = v;
  }
  return std::make_unique<RemoteScorer>(config, std::make_unique<HttplibTransport>(config.endpoint, key));
}

void RemoteScorer::load_cache() {
  if (config_.cache_path.empty() || !std::filesystem::exists(config_.cache_path)) return;
  std::ifstream in(config_.cache_path);
  if (!in) throw IoError("cannot read score cache " + config_.cache_path.string());
  std::string line;
  while (std::getline(in, line)) {
    json j = json::parse(line, nullptr, false);
    // A torn final line from an interrupted run is skipped.
    if (j.is_discarded() || !j.is_object() || !j.contains("sha256") || !j.contains("score")) continue;
    if (!j["sha256"].is_string() || !j["score"].is_number()) continue;
    cache_.emplace(j["sha256"].get<std::string>(), j["score"].get<double>());
  }
}

std::size_t RemoteScorer::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

std::string RemoteScorer::request_body(std::string_view text) {
  json j;
  j["comment"]["text"] = text;
  j["requestedAttributes"]["TOXICITY"] = json::object();
  return j.dump();
}

std::optional<double> RemoteScorer::parse_response(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  const json::json_pointer ptr("/attributeScores/TOXICITY/summaryScore/value");
  if (!j.contains(ptr) || !j[ptr].is_number()) return std::nullopt;
  const double v = j[ptr].get<double>();
  if (!(v >= 0.0 && v <= 1.0)) return std::nullopt;
  return v;
}

ScoreResult RemoteScorer::score(std::string_view, std::string_view text) {
  const std::string key = sha256_hex(text);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return ScoreResult::present(it->second);
  }

  const std::string body = request_body(text);
  std::optional<double> value;
  auto backoff = config_.initial_backoff;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    ++calls_;
    const HttpResponse res = transport_->post_json(body);
    if (res.status == 200) {
      value = parse_response(res.body);
      break;
    }
    const bool retryable = res.status == 0 || res.status == 429 || res.status >= 500;
    if (!retryable || attempt == config_.max_attempts) break;
    sleeper_(backoff);
    backoff = std::min(backoff * 2, config_.max_backoff);
  }
  if (!value) return ScoreResult::absent(std::string(reasons::kRemoteError));

  std::lock_guard lock(mutex_);
  auto [it, inserted] = cache_.emplace(key, *value);
  if (inserted && !config_.cache_path.empty()) {
    std::ofstream out(config_.cache_path, std::ios::app);
    if (out) out << json{{"sha256", key}, {"score", *value}}.dump() << '\n';
  }
  return ScoreResult::present(it->second);
}

}  // namespace toxtrig
