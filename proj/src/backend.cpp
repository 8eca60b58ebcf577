#include "paraforge/backend.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "paraforge/errors.hpp"
#include "paraforge/prompt.hpp"

namespace paraforge {

std::string MockBackend::complete(const std::string& prompt, int max_new_tokens,
                                  const CompletionParams& params) {
  (void)params;
  ++calls_;
  last_max_new_tokens_ = max_new_tokens;
  if (!fixed_text_.empty()) return fixed_text_;
  return extract_prompt_target(prompt);
}

std::string SpinnerBackend::complete(const std::string& prompt, int max_new_tokens,
                                     const CompletionParams& params) {
  (void)max_new_tokens;
  return spin(extract_prompt_target(prompt), policy_, params.seed);
}

std::string SpinnerBackend::identity() const {
  if (policy_.mode == SpinPolicy::Mode::kEveryKth) {
    return "spinner:every_kth:" + std::to_string(policy_.period);
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", policy_.prob);
  return std::string("spinner:probability:") + buf;
}

std::string fill_body_template(const std::string& body_template,
                               const std::string& prompt, int max_new_tokens,
                               double temperature) {
  // JSON-escape without the surrounding quotes.
  const std::string quoted = nlohmann::json(prompt).dump();
  const std::string escaped = quoted.substr(1, quoted.size() - 2);

  auto replace_all = [](std::string s, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
      s.replace(pos, from.size(), to);
      pos += to.size();
    }
    return s;
  };

  std::string body = replace_all(body_template, "{{prompt}}", escaped);
  body = replace_all(body, "{{max_tokens}}", std::to_string(max_new_tokens));
  char temp[32];
  std::snprintf(temp, sizeof temp, "%g", temperature);
  return replace_all(body, "{{temperature}}", temp);
}

std::string extract_response_text(const std::string& body, const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("backend response is not JSON: ") + e.what());
  }
  const nlohmann::json* node = &doc;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t slash = path.find('/', start);
    const std::string part = path.substr(
        start, slash == std::string::npos ? std::string::npos : slash - start);
    if (!part.empty()) {
      if (node->is_array()) {
        const std::size_t index = std::stoul(part);
        if (index >= node->size()) {
          throw ValidationError("response path index out of range: " + part);
        }
        node = &(*node)[index];
      } else if (node->is_object() && node->contains(part)) {
        node = &(*node)[part];
      } else {
        throw ValidationError("response path component not found: " + part);
      }
    }
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  if (!node->is_string()) {
    throw ValidationError("response path does not end at a string: " + path);
  }
  return node->get<std::string>();
}

RemoteHttpBackend::RemoteHttpBackend(RemoteBackendConfig config)
    : config_(std::move(config)) {
  const std::string& url = config_.endpoint;
  std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw ValidationError("remote backend endpoint must be a full URL: " + url);
  }
  const std::size_t host_start = scheme + 3;
  const std::size_t slash = url.find('/', host_start);
  host_ = url.substr(0, slash == std::string::npos ? std::string::npos : slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
}

void RemoteHttpBackend::throttle() {
  using namespace std::chrono;
  while (true) {
    steady_clock::duration wait{0};
    {
      std::lock_guard<std::mutex> lock(mutex_);
      const auto now = steady_clock::now();
      while (!request_times_.empty() && now - request_times_.front() > minutes(1)) {
        request_times_.pop_front();
      }
      if (static_cast<int>(request_times_.size()) < config_.requests_per_minute) {
        request_times_.push_back(now);
        return;
      }
      wait = request_times_.front() + minutes(1) - now;
    }
    std::this_thread::sleep_for(wait);
  }
}

std::string RemoteHttpBackend::complete(const std::string& prompt, int max_new_tokens,
                                        const CompletionParams& params) {
  const std::string body =
      fill_body_template(config_.body_template, prompt, max_new_tokens, params.temperature);

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str())) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(
          config_.backoff_initial_ms * (1 << (attempt - 1))));
    }
    throttle();
    httplib::Client client(host_);
    client.set_read_timeout(60, 0);
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendError(identity(), "HTTP " + std::to_string(res->status) + ": " +
                                         res->body.substr(0, 200));
    }
    return extract_response_text(res->body, config_.response_path);
  }
  throw BackendError(identity(), "gave up after " +
                                     std::to_string(config_.max_retries + 1) +
                                     " attempts (" + last_error + ")");
}

}  // namespace paraforge
