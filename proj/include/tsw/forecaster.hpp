#pragma once

#include "tsw/arima.hpp"
#include "tsw/codec.hpp"
#include "tsw/core.hpp"
#include "tsw/llm.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tsw::forecaster {

struct LlmtimeConfig {
	codec::ScalingConfig scaling;
	std::string model_name = "gpt-3.5-turbo-instruct";
	std::size_t num_samples = 10;
	double temperature = 0.7;
	/// Tokens budgeted per forecast value; when unset, 2 * (mean digit count of
	/// the encoded training values) + 2.
	std::optional<double> tokens_per_value_estimate;
	double safety_factor = 1.3;
	std::size_t min_valid_samples = 1;
	std::vector<std::string> stop_sequences;

	/// Throws InvalidArgument when the fields are inconsistent.
	void validate() const;
};

struct ForecastResult {
	/// Pointwise median of `samples`.
	std::vector<double> point;
	/// One row per valid sample, each exactly `horizon` long.
	std::vector<std::vector<double>> samples;
	std::size_t num_invalid = 0;
	std::string model_label;
};

/// Pointwise median; even counts average the two middle values.
std::vector<double> pointwise_median(std::span<const std::vector<double>> rows);

/// Prompt sent for a training window: encoded values followed by " ,".
std::string build_prompt(const codec::EncodedSeries &encoded);

/// ceil(horizon * tokens_per_value * safety_factor).
std::size_t token_budget(std::size_t horizon, double tokens_per_value, double safety_factor);

/// 2 * (mean digit tokens per value) + 2, counting the sign token.
double default_tokens_per_value(const codec::EncodedSeries &encoded);

/// Scale, encode, sample continuations, decode, keep samples with at least
/// `horizon` values, take the pointwise median.
ForecastResult llmtime_forecast(const TimeSeries &train, std::size_t horizon, const LlmtimeConfig &config,
                                llm::CompletionProvider &provider);

struct ArimaSettings {
	std::optional<arima::ArimaOrder> order;
	// AR-only, undifferenced by default; raise max_d for trending data.
	std::size_t max_p = 12;
	std::size_t max_d = 0;
	std::size_t max_q = 0;
	arima::FitOptions fit;
};

/// select_order (when no order is fixed), fit and forecast, shaped like an LLM forecast.
ForecastResult arima_forecast(const TimeSeries &train, std::size_t horizon, const ArimaSettings &settings = {});

/// Proxy scorer for codec::tune_scaling: negative MAE of the median forecast on
/// the validation segment.
codec::ScalingScorer validation_mae_scorer(const LlmtimeConfig &base, llm::CompletionProvider &provider);

/// Validation log-likelihood in value space: provider log-probability of the
/// encoded validation continuation minus n * log(scale * 10^-precision).
/// Throws TuningFailure when the provider cannot score text.
codec::ScalingScorer log_likelihood_scorer(const LlmtimeConfig &base, llm::CompletionProvider &provider);

/// Holds out the last `horizon` training points as validation, tunes the
/// scaling over `grid`, and returns `base` with the winning scaling. Uses the
/// log-likelihood scorer when the provider can score text, the MAE proxy otherwise.
LlmtimeConfig tune_config(const TimeSeries &train, std::size_t horizon, const LlmtimeConfig &base,
                          std::span<const codec::ScalingConfig> grid, llm::CompletionProvider &provider);

} // namespace tsw::forecaster
