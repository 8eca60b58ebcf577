#ifndef PARAFORGE_BACKEND_HPP
#define PARAFORGE_BACKEND_HPP

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>

#include "paraforge/spin.hpp"

namespace paraforge {

struct CompletionParams {
  double temperature = 0.8;
  std::uint64_t seed = 0;
};

// A text-completion endpoint. Implementations must be safe to call from
// multiple threads.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const std::string& prompt, int max_new_tokens,
                               const CompletionParams& params) = 0;
  virtual std::string identity() const = 0;
};

// Returns a fixed string, or echoes the prompt's target when no fixed text is
// configured. Deterministic; used for tests and dry runs.
class MockBackend : public Backend {
 public:
  MockBackend() = default;
  explicit MockBackend(std::string fixed_text) : fixed_text_(std::move(fixed_text)) {}

  std::string complete(const std::string& prompt, int max_new_tokens,
                       const CompletionParams& params) override;
  std::string identity() const override { return "mock"; }

  int calls() const { return calls_; }
  int last_max_new_tokens() const { return last_max_new_tokens_; }

 private:
  std::string fixed_text_;
  std::atomic<int> calls_{0};
  std::atomic<int> last_max_new_tokens_{0};
};

// Applies synonym spinning to the prompt's target text.
class SpinnerBackend : public Backend {
 public:
  explicit SpinnerBackend(SpinPolicy policy) : policy_(std::move(policy)) {}

  std::string complete(const std::string& prompt, int max_new_tokens,
                       const CompletionParams& params) override;
  std::string identity() const override;

 private:
  SpinPolicy policy_;
};

struct RemoteBackendConfig {
  std::string endpoint;       // e.g. http://127.0.0.1:8080/v1/completions
  std::string body_template;  // placeholders {{prompt}}, {{max_tokens}}, {{temperature}}
  std::string response_path;  // slash-separated key/index path, e.g. choices/0/text
  std::string api_key_env = "PARAFORGE_API_KEY";
  int requests_per_minute = 60;
  int max_retries = 3;
  int backoff_initial_ms = 100;
};

// POSTs a filled body template and extracts the completion from the JSON
// response. Transient failures (connect errors, 429, 5xx) are retried with
// exponential backoff; a per-minute request cap is enforced across threads.
class RemoteHttpBackend : public Backend {
 public:
  explicit RemoteHttpBackend(RemoteBackendConfig config);

  std::string complete(const std::string& prompt, int max_new_tokens,
                       const CompletionParams& params) override;
  std::string identity() const override { return "remote:" + config_.endpoint; }

 private:
  void throttle();

  RemoteBackendConfig config_;
  std::string host_;
  std::string path_;
  std::mutex mutex_;
  std::deque<std::chrono::steady_clock::time_point> request_times_;
};

// Fills a body template: {{prompt}} is replaced with the JSON-string-escaped
// prompt (no surrounding quotes), {{max_tokens}} and {{temperature}} with
// bare numbers.
std::string fill_body_template(const std::string& body_template,
                               const std::string& prompt, int max_new_tokens,
                               double temperature);

// Walks a slash-separated key/index path through a JSON document and returns
// the string at the end.
std::string extract_response_text(const std::string& body, const std::string& path);

}  // namespace paraforge

#endif
