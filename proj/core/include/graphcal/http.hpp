#pragma once

#include <chrono>
#include <optional>
#include <string>

namespace graphcal {

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{500};  // doubles after each failure
};

/// POSTs a JSON body and returns the raw response body. Non-2xx replies and
/// connection failures are retried per `retry`; the final failure surfaces
/// as TransportError. `bearer_token`, when set, goes into Authorization.
std::string post_json(const std::string& url, const std::string& body,
                      const std::optional<std::string>& bearer_token,
                      const RetryPolicy& retry,
                      std::chrono::seconds timeout = std::chrono::seconds(60));

/// Value of an environment variable, if set and non-empty.
std::optional<std::string> env_value(const char* name);

}  // namespace graphcal
