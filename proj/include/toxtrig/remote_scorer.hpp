#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "toxtrig/toxicity.hpp"

namespace toxtrig {

struct HttpResponse {
  int status = 0;  // 0: no response (connection failure, timeout)
  std::string body;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post_json(const std::string& body) = 0;
};

/// cpp-httplib client for a single endpoint URL ("https://host[:port]/path"). The API key,
/// when non-empty, is sent as the `key` query parameter.
class HttplibTransport final : public HttpTransport {
 public:
  HttplibTransport(std::string endpoint, std::string api_key,
                   std::chrono::seconds timeout = std::chrono::seconds(30));
  HttpResponse post_json(const std::string& body) override;

 private:
  std::string origin_;
  std::string path_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

struct RemoteScorerConfig {
  std::string endpoint = "https://commentanalyzer.googleapis.com/v1alpha1/comments:analyze";
  /// Name of the environment variable holding the API key; never the key itself.
  std::string api_key_env = "PERSPECTIVE_API_KEY";
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{30000};
  /// NDJSON {"sha256": ..., "score": ...}; empty disables the on-disk cache.
  std::filesystem::path cache_path;
};

/// Perspective-style HTTP scorer with retry, exponential backoff and a text-keyed cache.
///
/// Request:  {"comment": {"text": ...}, "requestedAttributes": {"TOXICITY": {}}}
/// Response: {"attributeScores": {"TOXICITY": {"summaryScore": {"value": r}}}}
class RemoteScorer final : public ToxicityScorer {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  RemoteScorer(RemoteScorerConfig config, std::unique_ptr<HttpTransport> transport, Sleeper sleeper = {});

  /// Builds an HttplibTransport, reading the key from config.api_key_env.
  static std::unique_ptr<RemoteScorer> from_config(const RemoteScorerConfig& config);

  ScoreResult score(std::string_view comment_id, std::string_view text) override;
  std::string name() const override { return "remote"; }

  /// Number of HTTP requests issued, retries included.
  std::size_t network_calls() const { return calls_.load(); }
  std::size_t cache_size() const;

  static std::string request_body(std::string_view text);
  /// Extracts the toxicity summary score; nullopt if the payload has the wrong shape.
  static std::optional<double> parse_response(const std::string& body);

 private:
  void load_cache();

  RemoteScorerConfig config_;
  std::unique_ptr<HttpTransport> transport_;
  Sleeper sleeper_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, double> cache_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace toxtrig
