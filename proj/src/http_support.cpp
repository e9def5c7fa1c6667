#include "evida/http_support.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "evida/errors.hpp"

namespace evida {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix, no trailing slash
};

SplitUrl split_base_url(const std::string& base_url) {
  const std::size_t scheme = base_url.find("://");
  if (scheme == std::string::npos) {
    throw InputError("base URL must include a scheme: " + base_url);
  }
  const std::size_t path_start = base_url.find('/', scheme + 3);
  SplitUrl out;
  if (path_start == std::string::npos) {
    out.origin = base_url;
  } else {
    out.origin = base_url.substr(0, path_start);
    out.prefix = base_url.substr(path_start);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  }
  return out;
}

bool retryable_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

}  // namespace

std::string post_json_with_retries(const HttpRequestSpec& spec) {
  const SplitUrl url = split_base_url(spec.base_url);
  std::string path = spec.path;
  if (!path.empty() && path.front() != '/') path = "/" + path;
  path = url.prefix + path;

  httplib::Client client(url.origin);
  client.set_connection_timeout(spec.timeout_seconds, 0);
  client.set_read_timeout(spec.timeout_seconds, 0);
  client.set_write_timeout(spec.timeout_seconds, 0);

  httplib::Headers headers;
  if (!spec.bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + spec.bearer_token);
  }

  const int attempts = std::max(1, spec.max_attempts);
  std::string last_error;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      const int delay = std::min(spec.backoff_base_ms << (attempt - 1), 4000);
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    httplib::Result result = client.Post(path, headers, spec.body, "application/json");
    if (!result) {
      last_error = "connection error: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status >= 200 && result->status < 300) {
      return result->body;
    }
    last_error = "HTTP " + std::to_string(result->status) + ": " +
                 result->body.substr(0, 200);
    if (!retryable_status(result->status)) {
      throw TransportError("request to " + spec.base_url + path + " failed: " + last_error);
    }
  }
  throw TransportError("request to " + spec.base_url + path + " failed after " +
                       std::to_string(attempts) + " attempts: " + last_error);
}

}  // namespace evida
