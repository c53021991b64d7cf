#include "tsw/codec.hpp"

#include "tsw/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <optional>

namespace tsw::codec {

ScalingState ScalingState::identity(unsigned precision) {
	ScalingState state;
	state.config.alpha = 1.0;
	state.config.beta = 0.0;
	state.config.precision = precision;
	return state;
}

double quantile(std::span<const double> values, double q) {
	if (values.empty()) {
		throw InvalidArgument("quantile of an empty sample");
	}
	if (!(q >= 0.0 && q <= 1.0)) {
		throw InvalidArgument("quantile level must lie in [0, 1]");
	}
	std::vector<double> sorted(values.begin(), values.end());
	std::ranges::sort(sorted);
	const double pos = q * static_cast<double>(sorted.size() - 1);
	const auto lo = static_cast<std::size_t>(std::floor(pos));
	const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
	const double frac = pos - static_cast<double>(lo);
	if (frac == 0.0) {
		return sorted[lo];
	}
	return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ScalingState fit_scaling(std::span<const double> train_values, const ScalingConfig &config) {
	if (train_values.empty()) {
		throw InvalidArgument("fit_scaling: empty training values");
	}
	if (!(config.alpha > 0.0 && config.alpha <= 1.0) || !(config.beta >= 0.0 && config.beta < 1.0)) {
		throw InvalidArgument("fit_scaling: alpha must lie in (0, 1] and beta in [0, 1)");
	}
	for (double v : train_values) {
		if (!std::isfinite(v)) {
			throw InvalidArgument("fit_scaling: non-finite training value");
		}
	}
	ScalingState state;
	state.config = config;
	state.offset = quantile(train_values, config.beta);
	std::vector<double> shifted(train_values.begin(), train_values.end());
	for (double &v : shifted) {
		v -= state.offset;
	}
	const double scale = quantile(shifted, config.alpha);
	state.scale = scale > 1e-12 ? scale : 1.0;
	return state;
}

TruncatedValue truncate_decimal(double scaled, unsigned precision) {
	if (!std::isfinite(scaled)) {
		throw InvalidArgument("cannot encode a non-finite value");
	}
	// Fixed notation of the smallest subnormal needs ~1080 characters.
	std::array<char, 1200> buffer{};
	const auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), scaled, std::chars_format::fixed);
	if (ec != std::errc{}) {
		throw InvalidArgument("cannot format value for encoding");
	}
	std::string_view text(buffer.data(), static_cast<std::size_t>(end - buffer.data()));

	TruncatedValue out;
	if (!text.empty() && text.front() == '-') {
		out.negative = true;
		text.remove_prefix(1);
	}
	const auto dot = text.find('.');
	const std::string_view integer = text.substr(0, dot);
	const std::string_view fraction = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);

	std::string digits(integer);
	digits.append(fraction.substr(0, precision));
	digits.append(precision - std::min<std::size_t>(precision, fraction.size()), '0');

	const auto first_nonzero = digits.find_first_not_of('0');
	if (first_nonzero == std::string::npos) {
		out.negative = false;
		out.digits = "0";
	} else {
		out.digits = digits.substr(first_nonzero);
	}
	return out;
}

EncodedSeries encode(std::span<const double> values, const ScalingState &state) {
	EncodedSeries encoded;
	encoded.state = state;
	encoded.count = values.size();
	std::string &text = encoded.text;
	for (std::size_t i = 0; i < values.size(); ++i) {
		if (i > 0) {
			text += kValueSeparator;
		}
		const TruncatedValue value = truncate_decimal(state.apply(values[i]), state.config.precision);
		if (value.negative) {
			text += kSignToken;
			text += kDigitSeparator;
		}
		for (std::size_t k = 0; k < value.digits.size(); ++k) {
			if (k > 0) {
				text += kDigitSeparator;
			}
			text += value.digits[k];
		}
	}
	return encoded;
}

namespace {

// Whitespace-delimited tokens.
class Tokens {
public:
	explicit Tokens(std::string_view text) : text_(text) {}

	std::optional<std::string_view> next() {
		while (pos_ < text_.size() && is_space(text_[pos_])) {
			++pos_;
		}
		if (pos_ >= text_.size()) {
			return std::nullopt;
		}
		const std::size_t start = pos_;
		while (pos_ < text_.size() && !is_space(text_[pos_])) {
			++pos_;
		}
		return text_.substr(start, pos_ - start);
	}

private:
	static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

	std::string_view text_;
	std::size_t pos_ = 0;
};

bool is_digit_token(std::string_view token) { return token.size() == 1 && token[0] >= '0' && token[0] <= '9'; }

double digits_to_scaled(bool negative, const std::string &digits, unsigned precision) {
	const std::string literal = digits + "e-" + std::to_string(precision);
	double value = 0.0;
	const auto [ptr, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), value);
	if (ec == std::errc::result_out_of_range) {
		value = HUGE_VAL;
	} else if (ec != std::errc{}) {
		throw DecodeFailure("internal: cannot convert digit run");
	}
	return negative ? -value : value;
}

} // namespace

std::vector<double> decode(std::string_view text, const ScalingState &state, std::size_t max_values) {
	std::vector<double> out;
	Tokens tokens(text);
	bool negative = false;
	bool sign_pending = false;
	std::string digits;

	auto flush = [&] {
		if (!digits.empty()) {
			out.push_back(state.invert(digits_to_scaled(negative, digits, state.config.precision)));
		}
		digits.clear();
		negative = false;
		sign_pending = false;
	};

	while (out.size() < max_values) {
		const auto token = tokens.next();
		if (!token) {
			break;
		}
		if (is_digit_token(*token)) {
			digits += (*token)[0];
			sign_pending = false;
		} else if (*token == kSignToken && digits.empty() && !sign_pending && !negative) {
			negative = true;
			sign_pending = true;
		} else if (*token == "," && !digits.empty()) {
			flush();
		} else {
			break;
		}
	}
	if (out.size() < max_values && !sign_pending) {
		flush();
	}

	if (out.empty()) {
		throw DecodeFailure("no complete value in completion text");
	}
	return out;
}

std::vector<ScalingConfig> default_grid(unsigned precision) {
	std::vector<ScalingConfig> grid;
	for (double alpha : {0.5, 0.7, 0.9, 0.99}) {
		for (double beta : {0.0, 0.15, 0.3}) {
			grid.push_back({alpha, beta, precision});
		}
	}
	return grid;
}

ScalingConfig tune_scaling(std::span<const double> train, std::span<const double> validation,
                           std::span<const ScalingConfig> grid, const ScalingScorer &scorer) {
	if (grid.empty()) {
		throw InvalidArgument("tune_scaling: empty grid");
	}
	std::optional<ScalingConfig> best;
	double best_score = -HUGE_VAL;
	std::string last_error = "no finite score";
	for (const ScalingConfig &config : grid) {
		double score = 0.0;
		try {
			score = scorer(config, train, validation);
		} catch (const Error &e) {
			last_error = e.what();
			continue;
		}
		if (std::isnan(score)) {
			continue;
		}
		if (!best || score > best_score) {
			best = config;
			best_score = score;
		}
	}
	if (!best) {
		throw TuningFailure("tune_scaling: every grid point failed (" + last_error + ")");
	}
	return *best;
}

} // namespace tsw::codec
