#pragma once

// Independent reference for the codec's truncation rule, built on printf and
// strtod rather than the library's to_chars path.

#include "tsw/codec.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace tsw::testing {

// Shortest %.Ng rendering that reads back to the same double, expanded to
// plain decimal notation.
inline std::string shortest_plain_decimal(double v) {
	char buf[64];
	for (int digits = 1; digits <= 17; ++digits) {
		std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
		if (std::strtod(buf, nullptr) == v) {
			break;
		}
	}
	// buf is d.ddde[+-]XX
	std::string text(buf);
	const bool negative = text[0] == '-';
	if (negative) {
		text.erase(0, 1);
	}
	const auto e = text.find('e');
	const int exponent = std::atoi(text.c_str() + e + 1);
	std::string mantissa = text.substr(0, e);
	mantissa.erase(std::remove(mantissa.begin(), mantissa.end(), '.'), mantissa.end());
	// value = 0.mantissa * 10^(exponent + 1)
	const int point = exponent + 1;
	std::string integer_part;
	std::string fraction;
	if (point <= 0) {
		integer_part = "0";
		fraction = std::string(static_cast<std::size_t>(-point), '0') + mantissa;
	} else if (static_cast<std::size_t>(point) >= mantissa.size()) {
		integer_part = mantissa + std::string(static_cast<std::size_t>(point) - mantissa.size(), '0');
	} else {
		integer_part = mantissa.substr(0, static_cast<std::size_t>(point));
		fraction = mantissa.substr(static_cast<std::size_t>(point));
	}
	return (negative ? "-" : "") + integer_part + "." + fraction;
}

// Decimal string of v truncated toward zero at `precision` places, e.g. "-12.34".
inline std::string truncated_decimal(double v, unsigned precision) {
	std::string s = shortest_plain_decimal(v);
	const auto dot = s.find('.');
	std::string frac = s.substr(dot + 1);
	frac.resize(precision, '0');
	std::string out = s.substr(0, dot);
	if (precision > 0) {
		out += "." + frac;
	}
	return out;
}

// What decode(encode([v])) must produce: the truncated scaled value, unscaled.
inline double truncation_grain_value(double v, const codec::ScalingState &state) {
	const double scaled = std::strtod(truncated_decimal(state.apply(v), state.config.precision).c_str(), nullptr);
	return state.invert(scaled);
}

} // namespace tsw::testing
