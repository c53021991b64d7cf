#include "tsw/core.hpp"

#include "tsw/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace tsw {

TimeSeries::TimeSeries(std::vector<double> timestamps, std::vector<double> values, std::optional<std::string> name)
    : timestamps_(std::move(timestamps)), values_(std::move(values)), name_(std::move(name)) {
	if (timestamps_.size() != values_.size()) {
		throw InvalidArgument("TimeSeries: " + std::to_string(timestamps_.size()) + " timestamps but " +
		                      std::to_string(values_.size()) + " values");
	}
	for (std::size_t i = 0; i < values_.size(); ++i) {
		if (!std::isfinite(values_[i])) {
			throw InvalidArgument("TimeSeries: non-finite value at index " + std::to_string(i));
		}
		if (!std::isfinite(timestamps_[i])) {
			throw InvalidArgument("TimeSeries: non-finite timestamp at index " + std::to_string(i));
		}
		if (i > 0 && !(timestamps_[i] > timestamps_[i - 1])) {
			throw InvalidArgument("TimeSeries: timestamps not strictly increasing at index " + std::to_string(i));
		}
	}
}

TimeSeries TimeSeries::from_values(std::vector<double> values, std::optional<std::string> name) {
	std::vector<double> index(values.size());
	std::iota(index.begin(), index.end(), 0.0);
	return TimeSeries(std::move(index), std::move(values), std::move(name));
}

TimeSeries TimeSeries::slice(std::size_t first, std::size_t count) const {
	if (first > size() || count > size() - first) {
		throw InvalidArgument("TimeSeries::slice out of range");
	}
	const auto b = static_cast<std::ptrdiff_t>(first);
	const auto e = static_cast<std::ptrdiff_t>(first + count);
	return TimeSeries(std::vector<double>(timestamps_.begin() + b, timestamps_.begin() + e),
	                  std::vector<double>(values_.begin() + b, values_.begin() + e), name_);
}

SplitSeries train_test_split(const TimeSeries &series, std::size_t horizon) {
	if (horizon == 0 || horizon >= series.size()) {
		throw InvalidArgument("train_test_split: horizon must be in [1, " + std::to_string(series.size()) +
		                      "), got " + std::to_string(horizon));
	}
	const std::size_t n_train = series.size() - horizon;
	return {series.slice(0, n_train), series.slice(n_train, horizon)};
}

std::vector<double> difference(std::span<const double> values, std::size_t d) {
	if (values.size() <= d) {
		throw InvalidArgument("difference: need more than " + std::to_string(d) + " values, got " +
		                      std::to_string(values.size()));
	}
	std::vector<double> out(values.begin(), values.end());
	for (std::size_t level = 0; level < d; ++level) {
		for (std::size_t i = 0; i + 1 < out.size(); ++i) {
			out[i] = out[i + 1] - out[i];
		}
		out.pop_back();
	}
	return out;
}

std::vector<double> undifference(std::span<const double> diffs, std::span<const double> seeds, std::size_t d) {
	if (seeds.size() != d) {
		throw InvalidArgument("undifference: expected " + std::to_string(d) + " seeds, got " +
		                      std::to_string(seeds.size()));
	}
	std::vector<double> out(diffs.begin(), diffs.end());
	for (std::size_t level = d; level-- > 0;) {
		double running = seeds[level];
		for (double &v : out) {
			running += v;
			v = running;
		}
	}
	return out;
}

std::vector<double> integration_seeds(std::span<const double> history, std::size_t d) {
	if (history.size() < d) {
		throw InvalidArgument("integration_seeds: need at least " + std::to_string(d) + " values");
	}
	std::vector<double> seeds;
	seeds.reserve(d);
	std::vector<double> level(history.begin(), history.end());
	for (std::size_t k = 0; k < d; ++k) {
		seeds.push_back(level.back());
		for (std::size_t i = 0; i + 1 < level.size(); ++i) {
			level[i] = level[i + 1] - level[i];
		}
		level.pop_back();
	}
	return seeds;
}

namespace {

void check_metric_args(const char *name, std::span<const double> predicted, std::span<const double> actual) {
	if (predicted.empty() || predicted.size() != actual.size()) {
		throw InvalidArgument(std::string(name) + ": lengths must be equal and nonzero (got " +
		                      std::to_string(predicted.size()) + " and " + std::to_string(actual.size()) + ")");
	}
}

} // namespace

double mse(std::span<const double> predicted, std::span<const double> actual) {
	check_metric_args("mse", predicted, actual);
	double sum = 0.0;
	for (std::size_t i = 0; i < predicted.size(); ++i) {
		const double e = predicted[i] - actual[i];
		sum += e * e;
	}
	return sum / static_cast<double>(predicted.size());
}

double mae(std::span<const double> predicted, std::span<const double> actual) {
	check_metric_args("mae", predicted, actual);
	double sum = 0.0;
	for (std::size_t i = 0; i < predicted.size(); ++i) {
		sum += std::abs(predicted[i] - actual[i]);
	}
	return sum / static_cast<double>(predicted.size());
}

} // namespace tsw
