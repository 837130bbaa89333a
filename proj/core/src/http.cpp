#include "graphcal/http.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "graphcal/errors.hpp"

namespace graphcal {

namespace {

struct SplitUrl {
  std::string scheme_host_port;
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint URL lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::optional<std::string> env_value(const char* name) {
  const char* value = std::getenv(name);
  if (value == nullptr || *value == '\0') return std::nullopt;
  return std::string(value);
}

std::string post_json(const std::string& url, const std::string& body,
                      const std::optional<std::string>& bearer_token,
                      const RetryPolicy& retry, std::chrono::seconds timeout) {
  const SplitUrl target = split_url(url);
  httplib::Client client(target.scheme_host_port);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (bearer_token) headers.emplace("Authorization", "Bearer " + *bearer_token);

  std::string last_error;
  auto backoff = retry.initial_backoff;
  const int attempts = std::max(1, retry.attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    auto result = client.Post(target.path, headers, body, "application/json");
    if (result && result->status >= 200 && result->status < 300) return result->body;

    if (result) {
      last_error = "HTTP " + std::to_string(result->status);
    } else {
      last_error = httplib::to_string(result.error());
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw TransportError("POST " + url + " failed after " + std::to_string(attempts) +
                           " attempt(s): " + last_error,
                       true);
}

}  // namespace graphcal
