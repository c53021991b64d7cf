#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <utility>
#include <vector>

namespace tsw::llm {

inline constexpr std::size_t kDefaultMaxSamples = 20;

struct CompletionRequest {
	std::string model_name;
	std::string prompt;
	std::size_t max_tokens = 1;
	double temperature = 0.0;
	std::size_t num_samples = 1;
	std::vector<std::string> stop_sequences;
	bool want_logprobs = false;

	/// Throws InvalidArgument on an empty prompt, zero counts, negative
	/// temperature or more than `max_samples` samples.
	void validate(std::size_t max_samples = kDefaultMaxSamples) const;

	bool operator==(const CompletionRequest &) const = default;
};

struct CompletionBatch {
	std::vector<std::string> texts;
	/// Sum of token log-probabilities per text, when requested and available.
	std::optional<std::vector<double>> logprob_sums;
	std::string provider_id;
	bool cached = false;

	bool operator==(const CompletionBatch &) const = default;
};

/// Anything that turns a prompt into sampled continuations.
class CompletionProvider {
public:
	virtual ~CompletionProvider() = default;

	virtual CompletionBatch complete(const CompletionRequest &request) = 0;

	/// Sum of log-probabilities the model assigns to `continuation` after
	/// `prompt`, or nullopt when the provider cannot score text.
	virtual std::optional<double> continuation_logprob(const std::string &model_name, const std::string &prompt,
	                                                   const std::string &continuation);
};

/// 64 lowercase hex characters: SHA-256 over a canonical rendering of every request field.
std::string cache_key(const CompletionRequest &request);

/// Cuts `text` at the earliest occurrence of any stop sequence.
std::string apply_stop_sequences(std::string text, const std::vector<std::string> &stop_sequences);

// ---------------------------------------------------------------------------
// Mock

/// Deterministic in-process provider. Never touches the network.
class MockProvider : public CompletionProvider {
public:
	using Responder = std::function<std::vector<std::string>(const CompletionRequest &)>;

	explicit MockProvider(Responder responder, std::string id = "mock");

	/// Finds the shortest period k such that the last k comma-delimited values of
	/// the prompt equal the k before them (k = 1 when none exists) and keeps
	/// repeating that period until max_tokens whitespace tokens are emitted.
	static std::shared_ptr<MockProvider> repeat_last_period();
	/// Exact prompt lookup; unknown prompts get an empty completion.
	static std::shared_ptr<MockProvider> canned(std::map<std::string, std::vector<std::string>> table);
	/// Every sample is `text`.
	static std::shared_ptr<MockProvider> constant(std::string text);

	CompletionBatch complete(const CompletionRequest &request) override;

	std::size_t calls() const noexcept { return calls_.load(); }

private:
	Responder responder_;
	std::string id_;
	std::atomic<std::size_t> calls_{0};
};

/// Continuation text the repeat-last-period mock produces for `prompt`.
std::string repeat_last_period_continuation(const std::string &prompt, std::size_t max_tokens);

// ---------------------------------------------------------------------------
// HTTP

struct HttpResponse {
	int status = 0;
	std::string body;
	std::map<std::string, std::string> headers;
	/// Set when no HTTP response was received at all.
	std::optional<std::string> transport_error;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

class Transport {
public:
	virtual ~Transport() = default;
	virtual HttpResponse post(const std::string &url, const HttpHeaders &headers, const std::string &body) = 0;
};

/// cpp-httplib backed transport (HTTP and HTTPS).
std::shared_ptr<Transport> make_http_transport(std::chrono::seconds timeout = std::chrono::seconds(120));

struct HttpProviderConfig {
	std::string base_url = "https://api.openai.com/v1";
	/// Environment variable holding the bearer token. No Authorization header when unset.
	std::string api_key_env = "OPENAI_API_KEY";
	std::size_t max_attempts = 3;
	std::chrono::milliseconds initial_backoff{500};
	double backoff_multiplier = 2.0;
	std::chrono::milliseconds max_backoff{30'000};
	std::size_t max_concurrency = 4;
	std::size_t max_samples = kDefaultMaxSamples;
};

/// Client for a completions endpoint (`POST {base_url}/completions`).
///
/// Transport failures and 5xx responses are retried with exponential
/// backoff; 429 is retried after max(backoff, Retry-After) and the wait is
/// shared by all in-flight requests. The attempt count used for a batch is
/// appended to its provider_id as ";attempts=N".
class HttpCompletionProvider : public CompletionProvider {
public:
	using Sleeper = std::function<void(std::chrono::milliseconds)>;

	HttpCompletionProvider(HttpProviderConfig config, std::shared_ptr<Transport> transport, Sleeper sleeper = {});

	CompletionBatch complete(const CompletionRequest &request) override;
	std::optional<double> continuation_logprob(const std::string &model_name, const std::string &prompt,
	                                           const std::string &continuation) override;

	/// JSON body sent for `request`.
	static std::string request_body(const CompletionRequest &request);

private:
	struct Exchange {
		std::string body;
		std::size_t attempts;
	};
	Exchange post_with_retry(const std::string &body);
	HttpHeaders headers() const;

	HttpProviderConfig config_;
	std::shared_ptr<Transport> transport_;
	Sleeper sleeper_;
	std::counting_semaphore<> in_flight_;
	std::mutex backoff_mutex_;
	std::chrono::steady_clock::time_point not_before_{};
};

// ---------------------------------------------------------------------------
// Record / replay

/// Persists every batch under `cache_dir/<cache_key>.json`. A hit returns the
/// stored batch with cached = true and provider_id "replay". Without an
/// inner provider a miss is reported as provider-unavailable.
class CachingProvider : public CompletionProvider {
public:
	CachingProvider(std::shared_ptr<CompletionProvider> inner, std::filesystem::path cache_dir);

	CompletionBatch complete(const CompletionRequest &request) override;
	std::optional<double> continuation_logprob(const std::string &model_name, const std::string &prompt,
	                                           const std::string &continuation) override;

	std::filesystem::path path_for(const CompletionRequest &request) const;

private:
	std::shared_ptr<std::mutex> lock_for(const std::string &key);

	std::shared_ptr<CompletionProvider> inner_;
	std::filesystem::path cache_dir_;
	std::mutex table_mutex_;
	std::map<std::string, std::shared_ptr<std::mutex>> key_locks_;
};

} // namespace tsw::llm
