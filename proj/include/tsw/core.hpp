#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tsw {

/// Ordered (timestamp, value) sequence. Timestamps are strictly increasing,
/// values finite. Immutable once constructed.
///
/// Numerical code treats the series as equally spaced and ignores the
/// timestamps; they are carried along for reporting.
class TimeSeries {
public:
	TimeSeries() = default;
	TimeSeries(std::vector<double> timestamps, std::vector<double> values, std::optional<std::string> name = std::nullopt);

	/// Series indexed 0..n-1.
	static TimeSeries from_values(std::vector<double> values, std::optional<std::string> name = std::nullopt);

	std::size_t size() const noexcept { return values_.size(); }
	bool empty() const noexcept { return values_.empty(); }

	std::span<const double> timestamps() const noexcept { return timestamps_; }
	std::span<const double> values() const noexcept { return values_; }
	const std::optional<std::string> &name() const noexcept { return name_; }

	/// Contiguous sub-series [first, first + count).
	TimeSeries slice(std::size_t first, std::size_t count) const;

	bool operator==(const TimeSeries &other) const = default;

private:
	std::vector<double> timestamps_;
	std::vector<double> values_;
	std::optional<std::string> name_;
};

struct SplitSeries {
	TimeSeries train;
	TimeSeries test;
};

/// Holds out the last `horizon` points as the test segment.
SplitSeries train_test_split(const TimeSeries &series, std::size_t horizon);

/// d-th order difference. Output length is values.size() - d.
std::vector<double> difference(std::span<const double> values, std::size_t d);

/// Inverse of difference(). `seeds[k]` is the last value of the k-th order
/// difference preceding the first element of `diffs` (seeds[0] is a raw
/// observation). Integration runs from level d-1 down to level 0.
std::vector<double> undifference(std::span<const double> diffs, std::span<const double> seeds, std::size_t d);

/// Seeds for undifference() taken from the end of `history`: element k is the
/// last value of difference(history, k).
std::vector<double> integration_seeds(std::span<const double> history, std::size_t d);

double mse(std::span<const double> predicted, std::span<const double> actual);
double mae(std::span<const double> predicted, std::span<const double> actual);

} // namespace tsw
