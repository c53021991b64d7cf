#include "tsw/llm.hpp"

#include "tsw/errors.hpp"

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

namespace tsw::llm {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void CompletionRequest::validate(std::size_t max_samples) const {
	if (prompt.empty()) {
		throw InvalidArgument("completion request: empty prompt");
	}
	if (max_tokens == 0) {
		throw InvalidArgument("completion request: max_tokens must be positive");
	}
	if (num_samples == 0 || num_samples > max_samples) {
		throw InvalidArgument("completion request: num_samples must be in [1, " + std::to_string(max_samples) + "]");
	}
	if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
		throw InvalidArgument("completion request: temperature must be a nonnegative number");
	}
}

std::optional<double> CompletionProvider::continuation_logprob(const std::string &, const std::string &,
                                                               const std::string &) {
	return std::nullopt;
}

namespace {

json request_fields(const CompletionRequest &request) {
	return {
	    {"model", request.model_name},
	    {"prompt", request.prompt},
	    {"max_tokens", request.max_tokens},
	    {"temperature", request.temperature},
	    {"n", request.num_samples},
	    {"stop", request.stop_sequences},
	    {"logprobs", request.want_logprobs},
	};
}

std::string to_hex(const unsigned char *bytes, std::size_t n) {
	static constexpr char kHex[] = "0123456789abcdef";
	std::string out;
	out.reserve(2 * n);
	for (std::size_t i = 0; i < n; ++i) {
		out += kHex[bytes[i] >> 4];
		out += kHex[bytes[i] & 0xF];
	}
	return out;
}

} // namespace

std::string cache_key(const CompletionRequest &request) {
	// json objects keep keys sorted, so dump() is canonical.
	const std::string canonical = "tsw-completion-v1\n" + request_fields(request).dump();
	unsigned char digest[EVP_MAX_MD_SIZE];
	unsigned int length = 0;
	if (EVP_Digest(canonical.data(), canonical.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
		throw Error("internal", "SHA-256 digest failed");
	}
	return to_hex(digest, length);
}

std::string apply_stop_sequences(std::string text, const std::vector<std::string> &stop_sequences) {
	std::size_t cut = text.size();
	for (const auto &stop : stop_sequences) {
		if (stop.empty()) {
			continue;
		}
		cut = std::min(cut, text.find(stop));
	}
	text.resize(cut);
	return text;
}

// ---------------------------------------------------------------------------
// Mock

MockProvider::MockProvider(Responder responder, std::string id) : responder_(std::move(responder)), id_(std::move(id)) {}

std::shared_ptr<MockProvider> MockProvider::repeat_last_period() {
	return std::make_shared<MockProvider>(
	    [](const CompletionRequest &request) {
		    return std::vector<std::string>(request.num_samples,
		                                    repeat_last_period_continuation(request.prompt, request.max_tokens));
	    },
	    "mock:repeat-last-period");
}

std::shared_ptr<MockProvider> MockProvider::canned(std::map<std::string, std::vector<std::string>> table) {
	return std::make_shared<MockProvider>(
	    [table = std::move(table)](const CompletionRequest &request) {
		    const auto it = table.find(request.prompt);
		    return it == table.end() ? std::vector<std::string>{""} : it->second;
	    },
	    "mock:canned");
}

std::shared_ptr<MockProvider> MockProvider::constant(std::string text) {
	return std::make_shared<MockProvider>(
	    [text = std::move(text)](const CompletionRequest &request) {
		    return std::vector<std::string>(request.num_samples, text);
	    },
	    "mock:constant");
}

CompletionBatch MockProvider::complete(const CompletionRequest &request) {
	request.validate();
	++calls_;
	CompletionBatch batch;
	batch.provider_id = id_;
	for (auto &text : responder_(request)) {
		batch.texts.push_back(apply_stop_sequences(std::move(text), request.stop_sequences));
	}
	return batch;
}

namespace {

std::string trim(std::string_view s) {
	const auto first = s.find_first_not_of(" \t\r\n");
	if (first == std::string_view::npos) {
		return {};
	}
	const auto last = s.find_last_not_of(" \t\r\n");
	return std::string(s.substr(first, last - first + 1));
}

} // namespace

std::string repeat_last_period_continuation(const std::string &prompt, std::size_t max_tokens) {
	std::vector<std::string> values;
	std::string_view rest = prompt;
	while (!rest.empty()) {
		const auto comma = rest.find(',');
		std::string value = trim(rest.substr(0, comma));
		if (!value.empty()) {
			values.push_back(std::move(value));
		}
		if (comma == std::string_view::npos) {
			break;
		}
		rest.remove_prefix(comma + 1);
	}
	if (values.empty()) {
		return {};
	}

	const std::size_t n = values.size();
	std::size_t period = 1;
	for (std::size_t k = 1; 2 * k <= n; ++k) {
		if (std::equal(values.end() - static_cast<std::ptrdiff_t>(k), values.end(),
		               values.end() - static_cast<std::ptrdiff_t>(2 * k))) {
			period = k;
			break;
		}
	}

	std::vector<std::string> cycle_tokens;
	for (std::size_t i = n - period; i < n; ++i) {
		std::istringstream digits(values[i]);
		for (std::string token; digits >> token;) {
			cycle_tokens.push_back(token);
		}
		cycle_tokens.emplace_back(",");
	}

	std::string out;
	for (std::size_t emitted = 0; emitted < max_tokens; ++emitted) {
		out += ' ';
		out += cycle_tokens[emitted % cycle_tokens.size()];
	}
	return out;
}

// ---------------------------------------------------------------------------
// HTTP

namespace {

class HttplibTransport : public Transport {
public:
	explicit HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

	HttpResponse post(const std::string &url, const HttpHeaders &headers, const std::string &body) override {
		const auto scheme_end = url.find("://");
		const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
		const std::string origin = url.substr(0, path_start);
		const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

		httplib::Client client(origin);
		client.set_connection_timeout(timeout_);
		client.set_read_timeout(timeout_);
		client.set_write_timeout(timeout_);
		httplib::Headers h;
		for (const auto &[k, v] : headers) {
			h.emplace(k, v);
		}
		HttpResponse out;
		auto result = client.Post(path, h, body, "application/json");
		if (!result) {
			out.transport_error = httplib::to_string(result.error());
			return out;
		}
		out.status = result->status;
		out.body = result->body;
		for (const auto &[k, v] : result->headers) {
			out.headers.emplace(k, v);
		}
		return out;
	}

private:
	std::chrono::seconds timeout_;
};

std::optional<std::chrono::milliseconds> retry_after(const HttpResponse &response) {
	for (const auto &[name, value] : response.headers) {
		std::string lower = name;
		std::ranges::transform(lower, lower.begin(), [](unsigned char c) { return std::tolower(c); });
		if (lower != "retry-after") {
			continue;
		}
		char *end = nullptr;
		const double seconds = std::strtod(value.c_str(), &end);
		if (end != value.c_str() && std::isfinite(seconds) && seconds >= 0.0) {
			return std::chrono::milliseconds(static_cast<long long>(seconds * 1000.0));
		}
	}
	return std::nullopt;
}

json parse_json(const std::string &body) {
	try {
		return json::parse(body);
	} catch (const json::exception &e) {
		throw ProtocolError(std::string("malformed provider response: ") + e.what());
	}
}

double sum_logprobs(const json &logprobs, std::optional<std::size_t> from_offset) {
	const auto &tokens = logprobs.at("token_logprobs");
	const json *offsets = logprobs.contains("text_offset") ? &logprobs.at("text_offset") : nullptr;
	double sum = 0.0;
	for (std::size_t i = 0; i < tokens.size(); ++i) {
		if (tokens[i].is_null()) {
			continue;
		}
		if (from_offset && offsets && offsets->at(i).get<std::size_t>() < *from_offset) {
			continue;
		}
		sum += tokens[i].get<double>();
	}
	return sum;
}

} // namespace

std::shared_ptr<Transport> make_http_transport(std::chrono::seconds timeout) {
	return std::make_shared<HttplibTransport>(timeout);
}

HttpCompletionProvider::HttpCompletionProvider(HttpProviderConfig config, std::shared_ptr<Transport> transport,
                                               Sleeper sleeper)
    : config_(std::move(config)), transport_(std::move(transport)), sleeper_(std::move(sleeper)),
      in_flight_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, config_.max_concurrency))) {
	if (!transport_) {
		throw InvalidArgument("HttpCompletionProvider: null transport");
	}
	if (config_.max_attempts == 0) {
		throw InvalidArgument("HttpCompletionProvider: max_attempts must be positive");
	}
	if (!sleeper_) {
		sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
	}
}

std::string HttpCompletionProvider::request_body(const CompletionRequest &request) {
	ordered_json body;
	body["model"] = request.model_name;
	body["prompt"] = request.prompt;
	body["max_tokens"] = request.max_tokens;
	body["temperature"] = request.temperature;
	body["n"] = request.num_samples;
	body["stop"] = request.stop_sequences.empty() ? ordered_json(nullptr) : ordered_json(request.stop_sequences);
	body["logprobs"] = request.want_logprobs ? ordered_json(0) : ordered_json(nullptr);
	return body.dump();
}

HttpHeaders HttpCompletionProvider::headers() const {
	HttpHeaders h;
	if (const char *key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
		h.emplace_back("Authorization", std::string("Bearer ") + key);
	}
	return h;
}

HttpCompletionProvider::Exchange HttpCompletionProvider::post_with_retry(const std::string &body) {
	struct Permit {
		std::counting_semaphore<> &sem;
		explicit Permit(std::counting_semaphore<> &s) : sem(s) { sem.acquire(); }
		~Permit() { sem.release(); }
	} permit(in_flight_);

	const std::string url = config_.base_url + "/completions";
	std::string last_failure = "no attempt made";
	std::optional<std::chrono::milliseconds> last_retry_after;
	bool rate_limited = false;
	auto delay = config_.initial_backoff;

	for (std::size_t attempt = 1; attempt <= config_.max_attempts; ++attempt) {
		{
			std::chrono::steady_clock::time_point wait_until;
			{
				std::lock_guard lock(backoff_mutex_);
				wait_until = not_before_;
			}
			const auto now = std::chrono::steady_clock::now();
			if (wait_until > now) {
				sleeper_(std::chrono::ceil<std::chrono::milliseconds>(wait_until - now));
			}
		}

		const HttpResponse response = transport_->post(url, headers(), body);
		bool retryable = false;
		if (response.transport_error) {
			last_failure = "transport failure: " + *response.transport_error;
			rate_limited = false;
			retryable = true;
		} else if (response.status >= 200 && response.status < 300) {
			return {response.body, attempt};
		} else if (response.status == 429) {
			last_failure = "HTTP 429";
			last_retry_after = retry_after(response);
			rate_limited = true;
			retryable = true;
		} else if (response.status == 403) {
			throw RateLimited("provider refused the request (HTTP 403): " + response.body, retry_after(response));
		} else if (response.status >= 500) {
			last_failure = "HTTP " + std::to_string(response.status);
			rate_limited = false;
			retryable = true;
		} else {
			throw ProtocolError("provider rejected the request (HTTP " + std::to_string(response.status) +
			                    "): " + response.body);
		}

		if (!retryable || attempt == config_.max_attempts) {
			break;
		}
		auto wait = delay;
		if (rate_limited && last_retry_after) {
			wait = std::max(wait, *last_retry_after);
		}
		if (rate_limited) {
			std::lock_guard lock(backoff_mutex_);
			not_before_ = std::max(not_before_, std::chrono::steady_clock::now() + wait);
		}
		sleeper_(wait);
		delay = std::min(config_.max_backoff, std::chrono::duration_cast<std::chrono::milliseconds>(
		                                          delay * config_.backoff_multiplier));
	}

	const std::string summary =
	    "completion request failed after " + std::to_string(config_.max_attempts) + " attempts: " + last_failure;
	if (rate_limited) {
		throw RateLimited(summary, last_retry_after);
	}
	throw ProviderUnavailable(summary);
}

CompletionBatch HttpCompletionProvider::complete(const CompletionRequest &request) {
	request.validate(config_.max_samples);
	const Exchange exchange = post_with_retry(request_body(request));
	const json doc = parse_json(exchange.body);

	CompletionBatch batch;
	batch.provider_id = "http:" + request.model_name + ";attempts=" + std::to_string(exchange.attempts);
	try {
		std::vector<std::pair<std::size_t, json>> choices;
		const auto &array = doc.at("choices");
		for (std::size_t i = 0; i < array.size(); ++i) {
			const std::size_t index = array[i].contains("index") ? array[i].at("index").get<std::size_t>() : i;
			choices.emplace_back(index, array[i]);
		}
		std::ranges::stable_sort(choices, {}, &std::pair<std::size_t, json>::first);

		std::vector<double> sums;
		bool all_logprobs = request.want_logprobs;
		for (const auto &[index, choice] : choices) {
			batch.texts.push_back(apply_stop_sequences(choice.at("text").get<std::string>(), request.stop_sequences));
			if (all_logprobs && choice.contains("logprobs") && choice.at("logprobs").is_object()) {
				sums.push_back(sum_logprobs(choice.at("logprobs"), std::nullopt));
			} else {
				all_logprobs = false;
			}
		}
		if (all_logprobs) {
			batch.logprob_sums = std::move(sums);
		}
	} catch (const json::exception &e) {
		throw ProtocolError(std::string("unexpected completion response shape: ") + e.what());
	}
	if (batch.texts.empty()) {
		throw ProtocolError("completion response has no choices");
	}
	return batch;
}

std::optional<double> HttpCompletionProvider::continuation_logprob(const std::string &model_name,
                                                                   const std::string &prompt,
                                                                   const std::string &continuation) {
	ordered_json body;
	body["model"] = model_name;
	body["prompt"] = prompt + continuation;
	body["max_tokens"] = 0;
	body["temperature"] = 0.0;
	body["echo"] = true;
	body["logprobs"] = 0;
	const Exchange exchange = post_with_retry(body.dump());
	const json doc = parse_json(exchange.body);
	try {
		const auto &choice = doc.at("choices").at(0);
		if (!choice.contains("logprobs") || !choice.at("logprobs").is_object()) {
			return std::nullopt;
		}
		return sum_logprobs(choice.at("logprobs"), prompt.size());
	} catch (const json::exception &e) {
		throw ProtocolError(std::string("unexpected scoring response shape: ") + e.what());
	}
}

// ---------------------------------------------------------------------------
// Record / replay

namespace {

std::string utc_timestamp() {
	const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
	std::tm tm{};
	gmtime_r(&now, &tm);
	char buffer[32];
	std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
	return buffer;
}

ordered_json cache_record(const std::string &key, const CompletionRequest &request, const CompletionBatch &batch) {
	ordered_json record;
	record["key"] = key;
	ordered_json req;
	req["model"] = request.model_name;
	req["prompt"] = request.prompt;
	req["max_tokens"] = request.max_tokens;
	req["temperature"] = request.temperature;
	req["n"] = request.num_samples;
	req["stop"] = request.stop_sequences;
	req["logprobs"] = request.want_logprobs;
	record["request"] = std::move(req);
	ordered_json response;
	response["texts"] = batch.texts;
	response["logprob_sums"] = batch.logprob_sums.value_or(std::vector<double>{});
	record["response"] = std::move(response);
	record["created_at"] = utc_timestamp();
	return record;
}

} // namespace

CachingProvider::CachingProvider(std::shared_ptr<CompletionProvider> inner, std::filesystem::path cache_dir)
    : inner_(std::move(inner)), cache_dir_(std::move(cache_dir)) {}

std::filesystem::path CachingProvider::path_for(const CompletionRequest &request) const {
	return cache_dir_ / (cache_key(request) + ".json");
}

std::shared_ptr<std::mutex> CachingProvider::lock_for(const std::string &key) {
	std::lock_guard lock(table_mutex_);
	auto &slot = key_locks_[key];
	if (!slot) {
		slot = std::make_shared<std::mutex>();
	}
	return slot;
}

CompletionBatch CachingProvider::complete(const CompletionRequest &request) {
	request.validate();
	const std::string key = cache_key(request);
	const auto path = cache_dir_ / (key + ".json");
	const auto key_lock = lock_for(key);
	std::lock_guard guard(*key_lock);

	if (std::filesystem::exists(path)) {
		std::ifstream in(path);
		json record;
		try {
			record = json::parse(in);
		} catch (const json::exception &e) {
			throw ProtocolError("unreadable cache file " + path.string() + ": " + e.what());
		}
		try {
			if (record.at("key").get<std::string>() != key ||
			    record.at("request").at("prompt").get<std::string>() != request.prompt) {
				throw ProtocolError("cache file " + path.string() + " does not match its request");
			}
			CompletionBatch batch;
			batch.texts = record.at("response").at("texts").get<std::vector<std::string>>();
			auto sums = record.at("response").at("logprob_sums").get<std::vector<double>>();
			if (!sums.empty()) {
				batch.logprob_sums = std::move(sums);
			}
			batch.provider_id = "replay";
			batch.cached = true;
			return batch;
		} catch (const json::exception &e) {
			throw ProtocolError("malformed cache file " + path.string() + ": " + e.what());
		}
	}

	if (!inner_) {
		throw ProviderUnavailable("replay cache miss for key " + key);
	}
	CompletionBatch batch = inner_->complete(request);
	batch.cached = false;

	std::error_code ec;
	std::filesystem::create_directories(cache_dir_, ec);
	const auto tmp = path.string() + ".tmp";
	{
		std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
		if (!out) {
			throw IoError("cannot write cache file " + tmp);
		}
		out << cache_record(key, request, batch).dump(2) << '\n';
		if (!out) {
			throw IoError("cannot write cache file " + tmp);
		}
	}
	std::filesystem::rename(tmp, path, ec);
	if (ec) {
		throw IoError("cannot move cache file into place: " + ec.message());
	}
	return batch;
}

std::optional<double> CachingProvider::continuation_logprob(const std::string &model_name, const std::string &prompt,
                                                            const std::string &continuation) {
	return inner_ ? inner_->continuation_logprob(model_name, prompt, continuation) : std::nullopt;
}

} // namespace tsw::llm
