#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsw {

/// Base of every error thrown by the workbench. `kind()` is a stable
/// machine-readable tag used in reports.
class Error : public std::runtime_error {
public:
	Error(std::string kind, const std::string &message)
	    : std::runtime_error(message), kind_(std::move(kind)) {}

	const std::string &kind() const noexcept { return kind_; }

private:
	std::string kind_;
};

class InvalidArgument : public Error {
public:
	explicit InvalidArgument(const std::string &message) : Error("invalid-argument", message) {}
};

/// Optimizer did not improve on its starting point. Carries the best point seen.
class ConvergenceFailure : public Error {
public:
	ConvergenceFailure(const std::string &message, std::vector<double> best_point, double best_value)
	    : Error("convergence-failure", message), best_point_(std::move(best_point)), best_value_(best_value) {}

	const std::vector<double> &best_point() const noexcept { return best_point_; }
	double best_value() const noexcept { return best_value_; }

private:
	std::vector<double> best_point_;
	double best_value_;
};

class DecodeFailure : public Error {
public:
	explicit DecodeFailure(const std::string &message) : Error("decode-failure", message) {}
};

class TuningFailure : public Error {
public:
	explicit TuningFailure(const std::string &message) : Error("tuning-failure", message) {}
};

class ProviderUnavailable : public Error {
public:
	explicit ProviderUnavailable(const std::string &message) : Error("provider-unavailable", message) {}
};

class RateLimited : public Error {
public:
	RateLimited(const std::string &message, std::optional<std::chrono::milliseconds> retry_after)
	    : Error("rate-limited", message), retry_after_(retry_after) {}

	std::optional<std::chrono::milliseconds> retry_after() const noexcept { return retry_after_; }

private:
	std::optional<std::chrono::milliseconds> retry_after_;
};

class ProtocolError : public Error {
public:
	explicit ProtocolError(const std::string &message) : Error("protocol-error", message) {}
};

class ForecastFailure : public Error {
public:
	ForecastFailure(const std::string &message, std::size_t num_invalid)
	    : Error("forecast-failure", message), num_invalid_(num_invalid) {}

	std::size_t num_invalid() const noexcept { return num_invalid_; }

private:
	std::size_t num_invalid_;
};

class IoError : public Error {
public:
	explicit IoError(const std::string &message) : Error("io-error", message) {}
};

class SchemaError : public Error {
public:
	explicit SchemaError(const std::string &message) : Error("schema-error", message) {}
};

/// Bad cell content in an input file. `row()` is the 1-based data row (header excluded).
class DataError : public Error {
public:
	DataError(const std::string &message, std::size_t row) : Error("data-error", message), row_(row) {}

	std::size_t row() const noexcept { return row_; }

private:
	std::size_t row_;
};

class ConfigError : public Error {
public:
	explicit ConfigError(const std::string &message) : Error("config-error", message) {}
};

class ExperimentFailure : public Error {
public:
	explicit ExperimentFailure(const std::string &message) : Error("experiment-failure", message) {}
};

} // namespace tsw
