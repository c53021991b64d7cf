#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsw::codec {

/// Token separators of the serialized form.
inline constexpr std::string_view kDigitSeparator = " ";
inline constexpr std::string_view kValueSeparator = " , ";
inline constexpr std::string_view kSignToken = "-";

struct ScalingConfig {
	double alpha = 0.99; ///< quantile mapped to 1
	double beta = 0.3;   ///< quantile used as offset
	unsigned precision = 3;

	bool operator==(const ScalingConfig &) const = default;
};

/// Affine map x -> (x - offset) / scale fitted on training values.
struct ScalingState {
	double offset = 0.0;
	double scale = 1.0;
	ScalingConfig config;

	double apply(double x) const noexcept { return (x - offset) / scale; }
	double invert(double y) const noexcept { return y * scale + offset; }

	/// offset 0, scale 1.
	static ScalingState identity(unsigned precision);
};

struct EncodedSeries {
	std::string text;
	ScalingState state;
	std::size_t count = 0;
};

/// Empirical quantile with linear interpolation between order statistics
/// (position q * (n - 1) in the sorted sample).
double quantile(std::span<const double> values, double q);

/// offset = beta-quantile of the values; scale = alpha-quantile of (values - offset),
/// replaced by 1 when it is not above 1e-12.
ScalingState fit_scaling(std::span<const double> train_values, const ScalingConfig &config);

/// Magnitude of `scaled` truncated toward zero at `precision` decimals, as an
/// integer count of 10^-precision units, plus the sign. Works on the shortest
/// round-trip decimal form of the double.
struct TruncatedValue {
	bool negative = false;
	std::string digits; ///< no leading zeros; "0" for zero
};
TruncatedValue truncate_decimal(double scaled, unsigned precision);

/// Space-separated digits per value, values joined by " , ", decimal point
/// dropped, leading zeros suppressed, negatives prefixed by a "-" token.
EncodedSeries encode(std::span<const double> values, const ScalingState &state);

/// Greedy left-to-right parse of the serialized grammar. Stops at the first
/// token that breaks the grammar or after `max_values` values. Throws
/// DecodeFailure when no complete value is found.
std::vector<double> decode(std::string_view text, const ScalingState &state, std::size_t max_values);

/// Scores a candidate scaling on (train, validation); higher is better.
/// Throwing marks the candidate as failed.
using ScalingScorer =
    std::function<double(const ScalingConfig &, std::span<const double> train, std::span<const double> validation)>;

/// Default tuning grid: alpha in {0.5, 0.7, 0.9, 0.99} x beta in {0, 0.15, 0.3}.
std::vector<ScalingConfig> default_grid(unsigned precision = 3);

/// Argmax of the scorer over the grid; the first config wins ties.
ScalingConfig tune_scaling(std::span<const double> train, std::span<const double> validation,
                           std::span<const ScalingConfig> grid, const ScalingScorer &scorer);

} // namespace tsw::codec
