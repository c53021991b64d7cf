#include "tsw/forecaster.hpp"

#include "tsw/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tsw::forecaster {

void LlmtimeConfig::validate() const {
	if (num_samples == 0) {
		throw InvalidArgument("llmtime: num_samples must be positive");
	}
	if (min_valid_samples == 0 || min_valid_samples > num_samples) {
		throw InvalidArgument("llmtime: min_valid_samples must lie in [1, num_samples]");
	}
	if (!(temperature >= 0.0)) {
		throw InvalidArgument("llmtime: temperature must be nonnegative");
	}
	if (tokens_per_value_estimate && !(*tokens_per_value_estimate > 0.0)) {
		throw InvalidArgument("llmtime: tokens_per_value_estimate must be positive");
	}
	if (!(safety_factor >= 1.0)) {
		throw InvalidArgument("llmtime: safety_factor must be >= 1");
	}
}

std::vector<double> pointwise_median(std::span<const std::vector<double>> rows) {
	if (rows.empty()) {
		throw InvalidArgument("pointwise_median: no rows");
	}
	const std::size_t width = rows.front().size();
	std::vector<double> out(width);
	std::vector<double> column(rows.size());
	for (std::size_t j = 0; j < width; ++j) {
		for (std::size_t i = 0; i < rows.size(); ++i) {
			if (rows[i].size() != width) {
				throw InvalidArgument("pointwise_median: ragged rows");
			}
			column[i] = rows[i][j];
		}
		std::ranges::sort(column);
		const std::size_t mid = column.size() / 2;
		out[j] = column.size() % 2 == 1 ? column[mid] : 0.5 * (column[mid - 1] + column[mid]);
	}
	return out;
}

std::string build_prompt(const codec::EncodedSeries &encoded) { return encoded.text + " ,"; }

std::size_t token_budget(std::size_t horizon, double tokens_per_value, double safety_factor) {
	return static_cast<std::size_t>(std::ceil(static_cast<double>(horizon) * tokens_per_value * safety_factor));
}

double default_tokens_per_value(const codec::EncodedSeries &encoded) {
	if (encoded.count == 0) {
		return 2.0;
	}
	// Every whitespace-separated token except the "," separators belongs to a value.
	std::size_t tokens = 0;
	std::size_t commas = 0;
	bool in_token = false;
	for (char ch : encoded.text) {
		if (ch == ' ') {
			in_token = false;
		} else if (!in_token) {
			in_token = true;
			++tokens;
			commas += ch == ',';
		}
	}
	const double digits = static_cast<double>(tokens - commas) / static_cast<double>(encoded.count);
	return 2.0 * digits + 2.0;
}

ForecastResult llmtime_forecast(const TimeSeries &train, std::size_t horizon, const LlmtimeConfig &config,
                                llm::CompletionProvider &provider) {
	config.validate();
	if (train.empty()) {
		throw InvalidArgument("llmtime_forecast: empty training series");
	}
	if (horizon == 0) {
		throw InvalidArgument("llmtime_forecast: horizon must be positive");
	}

	const auto state = codec::fit_scaling(train.values(), config.scaling);
	const auto encoded = codec::encode(train.values(), state);
	const double per_value = config.tokens_per_value_estimate.value_or(default_tokens_per_value(encoded));

	llm::CompletionRequest request;
	request.model_name = config.model_name;
	request.prompt = build_prompt(encoded);
	request.max_tokens = token_budget(horizon, per_value, config.safety_factor);
	request.temperature = config.temperature;
	request.num_samples = config.num_samples;
	request.stop_sequences = config.stop_sequences;

	const llm::CompletionBatch batch = provider.complete(request);

	ForecastResult result;
	result.model_label = "LLMTIME(" + config.model_name + ")";
	for (const auto &text : batch.texts) {
		std::vector<double> values;
		try {
			values = codec::decode(text, state, horizon);
		} catch (const DecodeFailure &) {
			++result.num_invalid;
			continue;
		}
		if (values.size() < horizon) {
			++result.num_invalid;
			continue;
		}
		result.samples.push_back(std::move(values));
	}
	// Samples the provider failed to return count as invalid too.
	if (batch.texts.size() < config.num_samples) {
		result.num_invalid += config.num_samples - batch.texts.size();
	}
	if (result.samples.size() < config.min_valid_samples) {
		throw ForecastFailure("llmtime_forecast: " + std::to_string(result.samples.size()) + " valid samples, need " +
		                          std::to_string(config.min_valid_samples),
		                      result.num_invalid);
	}
	result.point = pointwise_median(result.samples);
	return result;
}

ForecastResult arima_forecast(const TimeSeries &train, std::size_t horizon, const ArimaSettings &settings) {
	const arima::ArimaOrder order =
	    settings.order ? *settings.order
	                   : arima::select_order(train, settings.max_p, settings.max_d, settings.max_q, settings.fit);
	const auto model = arima::fit(train, order, settings.fit);
	ForecastResult result;
	result.point = arima::forecast(model, horizon);
	result.samples = {result.point};
	result.model_label = order.label();
	return result;
}

codec::ScalingScorer validation_mae_scorer(const LlmtimeConfig &base, llm::CompletionProvider &provider) {
	return [base, &provider](const codec::ScalingConfig &scaling, std::span<const double> train,
	                         std::span<const double> validation) {
		if (validation.empty()) {
			throw InvalidArgument("validation segment is empty");
		}
		LlmtimeConfig config = base;
		config.scaling = scaling;
		const auto result = llmtime_forecast(TimeSeries::from_values({train.begin(), train.end()}),
		                                     validation.size(), config, provider);
		return -mae(result.point, validation);
	};
}

codec::ScalingScorer log_likelihood_scorer(const LlmtimeConfig &base, llm::CompletionProvider &provider) {
	return [base, &provider](const codec::ScalingConfig &scaling, std::span<const double> train,
	                         std::span<const double> validation) {
		const auto state = codec::fit_scaling(train, scaling);
		const std::string prompt = build_prompt(codec::encode(train, state));
		const std::string continuation = " " + codec::encode(validation, state).text;
		const auto logprob = provider.continuation_logprob(base.model_name, prompt, continuation);
		if (!logprob) {
			throw TuningFailure("provider cannot score continuations");
		}
		const double bin_width = state.scale * std::pow(10.0, -static_cast<double>(scaling.precision));
		return *logprob - static_cast<double>(validation.size()) * std::log(bin_width);
	};
}

LlmtimeConfig tune_config(const TimeSeries &train, std::size_t horizon, const LlmtimeConfig &base,
                          std::span<const codec::ScalingConfig> grid, llm::CompletionProvider &provider) {
	const auto split = train_test_split(train, horizon);
	const auto fit_part = split.train.values();
	const auto validation = split.test.values();
	LlmtimeConfig tuned = base;
	try {
		tuned.scaling = codec::tune_scaling(fit_part, validation, grid, log_likelihood_scorer(base, provider));
	} catch (const TuningFailure &) {
		tuned.scaling = codec::tune_scaling(fit_part, validation, grid, validation_mae_scorer(base, provider));
	}
	return tuned;
}

} // namespace tsw::forecaster
