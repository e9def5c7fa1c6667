#pragma once

#include <string>

namespace evida {

struct HttpRequestSpec {
  std::string base_url;        // scheme://host[:port][/prefix]
  std::string path;            // joined after any base-url prefix
  std::string body;            // JSON payload
  std::string bearer_token;    // Authorization: Bearer ... when non-empty
  int timeout_seconds = 30;
  int max_attempts = 3;
  int backoff_base_ms = 250;   // doubled per retry, capped at 4s
};

// POSTs JSON and returns the response body. Retries connection errors and
// retryable statuses (408/429/5xx) with exponential backoff; other non-2xx
// statuses fail immediately. Throws TransportError when attempts run out.
std::string post_json_with_retries(const HttpRequestSpec& spec);

}  // namespace evida
