#pragma once

#include "tsw/core.hpp"

#include <json.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tsw::arima {

inline constexpr std::size_t kMaxOrder = 12;

/// (p, d, q). An order with p == q == 0 is an intercept-only model on the
/// d-times differenced series.
struct ArimaOrder {
	std::size_t p = 0;
	std::size_t d = 0;
	std::size_t q = 0;

	/// Throws InvalidArgument when any component exceeds `max_component`.
	void validate(std::size_t max_component = kMaxOrder) const;
	bool intercept_only() const noexcept { return p == 0 && q == 0; }
	std::string label() const;

	bool operator==(const ArimaOrder &) const = default;
};

enum class InterceptMode {
	automatic, ///< estimate c only when d == 0
	always,
	never,
};

struct FitOptions {
	/// Reject parameter points whose AR or MA polynomial has a root in the closed unit disk.
	bool enforce_stationarity = true;
	InterceptMode intercept = InterceptMode::automatic;
	std::size_t max_iterations = 2000;
	double tolerance = 1e-8;
};

/// Fitted model x_t = c + sum phi_i x_{t-i} + sum theta_j e_{t-j} + e_t on the
/// d-times differenced series.
struct FittedArima {
	ArimaOrder order;
	double c = 0.0;
	std::vector<double> phi;
	std::vector<double> theta;
	bool has_intercept = false;
	double sigma2 = 0.0;
	/// In-sample innovations on the differenced scale, one per conditioned step.
	std::vector<double> residuals;
	/// Last p + d raw observations; enough to seed the forecast recursion and the integration.
	std::vector<double> train_tail;
	double sse = 0.0;
	/// Objective at the Hannan-Rissanen starting point.
	double initial_sse = 0.0;
	double aic = 0.0;
};

/// CSS innovations: e_t for t >= max(p, q) with pre-sample innovations at zero.
std::vector<double> css_residuals(std::span<const double> values, double c, std::span<const double> phi,
                                  std::span<const double> theta);

/// n * ln(SSE / n) + 2 * num_params. SSE / n is floored at the smallest normal double.
double css_aic(double sse, std::size_t n, std::size_t num_params);

/// True when every root of 1 - phi_1 z - ... - phi_p z^p lies strictly outside the unit circle.
bool is_stationary(std::span<const double> phi);
/// True when every root of 1 + theta_1 z + ... + theta_q z^q lies strictly outside the unit circle.
bool is_invertible(std::span<const double> theta);

/// Starting point for the optimizer: long-AR residuals, then least squares on
/// lagged values and lagged residuals. Returns [c?, phi..., theta...].
std::vector<double> hannan_rissanen(std::span<const double> differenced, std::size_t p, std::size_t q,
                                    bool with_intercept);

/// Conditional-sum-of-squares fit. Requires train.size() >= p + q + d + 10.
FittedArima fit(const TimeSeries &train, const ArimaOrder &order, const FitOptions &options = {});

/// Model with known coefficients conditioned on `history` (raw scale). Residuals
/// are filled when the differenced history is longer than max(p, q).
FittedArima make_fitted(const ArimaOrder &order, double c, std::vector<double> phi, std::vector<double> theta,
                        std::span<const double> history);

/// Smallest d <= max_d after which differencing once more fails to cut the
/// sample variance by at least 10%.
std::size_t select_differencing(std::span<const double> values, std::size_t max_d);

/// Minimum-AIC (p, q) over the grid at the selected d. Ties go to smaller p + q, then smaller p.
ArimaOrder select_order(const TimeSeries &train, std::size_t max_p, std::size_t max_d, std::size_t max_q,
                        const FitOptions &options = {});

/// h-step forecasts on the original scale with future innovations at zero.
std::vector<double> forecast(const FittedArima &model, std::size_t horizon);

/// {order: {p,d,q}, c, phi, theta, sigma2, aic}
nlohmann::json to_record(const FittedArima &model);

} // namespace tsw::arima
