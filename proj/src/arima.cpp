#include "tsw/arima.hpp"

#include "tsw/errors.hpp"
#include "tsw/simplex.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <tuple>

namespace tsw::arima {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Companion-matrix check that the monic polynomial
// z^k + a_1 z^{k-1} + ... + a_k has all roots strictly inside the unit circle.
bool roots_inside_unit_circle(std::span<const double> a) {
	const auto k = static_cast<Eigen::Index>(a.size());
	if (k == 0) {
		return true;
	}
	if (k == 1) {
		return std::abs(a[0]) < 1.0;
	}
	Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k, k);
	for (Eigen::Index j = 0; j < k; ++j) {
		companion(0, j) = -a[static_cast<std::size_t>(j)];
	}
	for (Eigen::Index i = 1; i < k; ++i) {
		companion(i, i - 1) = 1.0;
	}
	Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
	if (solver.info() != Eigen::Success) {
		return false;
	}
	return solver.eigenvalues().cwiseAbs().maxCoeff() < 1.0;
}

double sample_variance(std::span<const double> x) {
	if (x.size() < 2) {
		return 0.0;
	}
	const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
	double ss = 0.0;
	for (double v : x) {
		ss += (v - mean) * (v - mean);
	}
	return ss / static_cast<double>(x.size() - 1);
}

double sum_of_squares(std::span<const double> x) {
	return std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
}

// Least squares solution of design * beta = target. Empty optional when underdetermined.
std::optional<Eigen::VectorXd> least_squares(const Eigen::MatrixXd &design, const Eigen::VectorXd &target) {
	if (design.rows() <= design.cols()) {
		return std::nullopt;
	}
	Eigen::VectorXd beta = design.colPivHouseholderQr().solve(target);
	if (!beta.allFinite()) {
		return std::nullopt;
	}
	return beta;
}

bool uses_intercept(const ArimaOrder &order, InterceptMode mode) {
	switch (mode) {
	case InterceptMode::always:
		return true;
	case InterceptMode::never:
		return false;
	case InterceptMode::automatic:
		break;
	}
	return order.d == 0;
}

struct Unpacked {
	double c;
	std::span<const double> phi;
	std::span<const double> theta;
};

Unpacked unpack(std::span<const double> params, bool with_intercept, std::size_t p, std::size_t q) {
	const std::size_t offset = with_intercept ? 1 : 0;
	return {with_intercept ? params[0] : 0.0, params.subspan(offset, p), params.subspan(offset + p, q)};
}

std::vector<double> tail(std::span<const double> x, std::size_t count) {
	count = std::min(count, x.size());
	return {x.end() - static_cast<std::ptrdiff_t>(count), x.end()};
}

} // namespace

void ArimaOrder::validate(std::size_t max_component) const {
	if (p > max_component || d > max_component || q > max_component) {
		throw InvalidArgument("ARIMA order " + label() + " exceeds the maximum component " +
		                      std::to_string(max_component));
	}
}

std::string ArimaOrder::label() const {
	return "ARIMA(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")";
}

std::vector<double> css_residuals(std::span<const double> values, double c, std::span<const double> phi,
                                  std::span<const double> theta) {
	const std::size_t p = phi.size();
	const std::size_t q = theta.size();
	const std::size_t start = std::max(p, q);
	if (values.size() <= start) {
		throw InvalidArgument("css_residuals: need more than " + std::to_string(start) + " values, got " +
		                      std::to_string(values.size()));
	}
	std::vector<double> eps(values.size() - start);
	for (std::size_t t = start; t < values.size(); ++t) {
		double e = values[t] - c;
		for (std::size_t i = 0; i < p; ++i) {
			e -= phi[i] * values[t - i - 1];
		}
		for (std::size_t j = 0; j < q; ++j) {
			// Innovations before `start` are the pre-sample zeros.
			if (t - j - 1 >= start) {
				e -= theta[j] * eps[t - j - 1 - start];
			}
		}
		eps[t - start] = e;
	}
	return eps;
}

double css_aic(double sse, std::size_t n, std::size_t num_params) {
	const double nd = static_cast<double>(n);
	const double s2 = std::max(sse / nd, std::numeric_limits<double>::min());
	return nd * std::log(s2) + 2.0 * static_cast<double>(num_params);
}

bool is_stationary(std::span<const double> phi) {
	// Roots of 1 - sum phi_i z^i outside the circle <=> roots of z^p - sum phi_i z^{p-i} inside.
	std::vector<double> a(phi.size());
	std::ranges::transform(phi, a.begin(), [](double v) { return -v; });
	return roots_inside_unit_circle(a);
}

bool is_invertible(std::span<const double> theta) { return roots_inside_unit_circle(theta); }

std::vector<double> hannan_rissanen(std::span<const double> w, std::size_t p, std::size_t q, bool with_intercept) {
	const std::size_t n = w.size();
	const std::size_t offset = with_intercept ? 1 : 0;
	std::vector<double> params(offset + p + q, 0.0);
	const double mean = n > 0 ? std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(n) : 0.0;
	if (with_intercept) {
		params[0] = mean;
	}
	if (p == 0 && q == 0) {
		return params;
	}

	// Stage 1: innovations from a long autoregression (only needed for MA terms).
	std::vector<double> innovations(n, 0.0);
	std::size_t first_innovation = 0;
	if (q > 0) {
		const std::size_t m = std::max<std::size_t>(1, std::min<std::size_t>(20, n / 10));
		const auto rows = static_cast<Eigen::Index>(n > m ? n - m : 0);
		Eigen::MatrixXd design(rows, static_cast<Eigen::Index>(m + 1));
		Eigen::VectorXd target(rows);
		for (Eigen::Index r = 0; r < rows; ++r) {
			const std::size_t t = m + static_cast<std::size_t>(r);
			design(r, 0) = 1.0;
			for (std::size_t i = 0; i < m; ++i) {
				design(r, static_cast<Eigen::Index>(i + 1)) = w[t - i - 1];
			}
			target(r) = w[t];
		}
		const auto beta = least_squares(design, target);
		if (!beta) {
			return params;
		}
		const Eigen::VectorXd fitted_innov = target - design * *beta;
		for (Eigen::Index r = 0; r < rows; ++r) {
			innovations[m + static_cast<std::size_t>(r)] = fitted_innov(r);
		}
		first_innovation = m;
	}

	// Stage 2: regress on lagged values and lagged innovations.
	const std::size_t start = first_innovation + std::max(p, q);
	if (n <= start) {
		return params;
	}
	const auto rows = static_cast<Eigen::Index>(n - start);
	const auto cols = static_cast<Eigen::Index>(offset + p + q);
	Eigen::MatrixXd design(rows, cols);
	Eigen::VectorXd target(rows);
	for (Eigen::Index r = 0; r < rows; ++r) {
		const std::size_t t = start + static_cast<std::size_t>(r);
		Eigen::Index col = 0;
		if (with_intercept) {
			design(r, col++) = 1.0;
		}
		for (std::size_t i = 0; i < p; ++i) {
			design(r, col++) = w[t - i - 1];
		}
		for (std::size_t j = 0; j < q; ++j) {
			design(r, col++) = innovations[t - j - 1];
		}
		target(r) = w[t];
	}
	const auto beta = least_squares(design, target);
	if (!beta) {
		return params;
	}
	for (Eigen::Index k = 0; k < cols; ++k) {
		params[static_cast<std::size_t>(k)] = (*beta)(k);
	}
	return params;
}

FittedArima fit(const TimeSeries &train, const ArimaOrder &order, const FitOptions &options) {
	order.validate();
	const auto [p, d, q] = std::tuple{order.p, order.d, order.q};
	const std::size_t min_len = p + q + d + 10;
	if (train.size() < min_len) {
		throw InvalidArgument("arima::fit: " + order.label() + " needs at least " + std::to_string(min_len) +
		                      " observations, got " + std::to_string(train.size()));
	}

	const bool with_intercept = uses_intercept(order, options.intercept);
	const std::vector<double> w = difference(train.values(), d);

	auto admissible = [&](const Unpacked &u) {
		return !options.enforce_stationarity || (is_stationary(u.phi) && is_invertible(u.theta));
	};
	auto objective = [&](std::span<const double> params) {
		const Unpacked u = unpack(params, with_intercept, p, q);
		if (!admissible(u)) {
			return kInf;
		}
		const double sse = sum_of_squares(css_residuals(w, u.c, u.phi, u.theta));
		return std::isfinite(sse) ? sse : kInf;
	};

	std::vector<double> start = hannan_rissanen(w, p, q, with_intercept);
	// Pull an inadmissible start back toward zero until the polynomials qualify.
	const std::size_t offset = with_intercept ? 1 : 0;
	for (int attempt = 0; attempt < 200 && !admissible(unpack(start, with_intercept, p, q)); ++attempt) {
		for (std::size_t k = offset; k < start.size(); ++k) {
			start[k] *= 0.9;
		}
	}
	if (!admissible(unpack(start, with_intercept, p, q))) {
		std::fill(start.begin() + static_cast<std::ptrdiff_t>(offset), start.end(), 0.0);
	}
	const double initial_sse = objective(start);

	const double scale = std::sqrt(sample_variance(w));
	std::vector<double> steps(start.size(), 0.1);
	if (with_intercept) {
		steps[0] = std::max({0.1 * std::abs(start[0]), 0.1 * scale, 1e-3});
	}

	optim::SimplexOptions simplex_options;
	simplex_options.max_iterations = options.max_iterations;
	simplex_options.tolerance = options.tolerance;
	const auto result = optim::nelder_mead(objective, start, steps, simplex_options);
	if (!result.converged && !(result.value < initial_sse)) {
		throw ConvergenceFailure("arima::fit: " + order.label() + " made no progress in " +
		                             std::to_string(result.iterations) + " iterations",
		                         result.x, result.value);
	}

	FittedArima model;
	model.order = order;
	model.has_intercept = with_intercept;
	const Unpacked u = unpack(result.x, with_intercept, p, q);
	model.c = u.c;
	model.phi.assign(u.phi.begin(), u.phi.end());
	model.theta.assign(u.theta.begin(), u.theta.end());
	model.residuals = css_residuals(w, model.c, model.phi, model.theta);
	model.sse = sum_of_squares(model.residuals);
	model.initial_sse = initial_sse;
	model.sigma2 = model.sse / static_cast<double>(model.residuals.size());
	model.aic = css_aic(model.sse, model.residuals.size(), p + q + 1);
	model.train_tail = tail(train.values(), p + d);
	return model;
}

FittedArima make_fitted(const ArimaOrder &order, double c, std::vector<double> phi, std::vector<double> theta,
                        std::span<const double> history) {
	order.validate();
	if (phi.size() != order.p || theta.size() != order.q) {
		throw InvalidArgument("make_fitted: coefficient counts do not match " + order.label());
	}
	if (history.size() < order.p + order.d) {
		throw InvalidArgument("make_fitted: history shorter than p + d");
	}
	FittedArima model;
	model.order = order;
	model.c = c;
	model.has_intercept = c != 0.0;
	model.phi = std::move(phi);
	model.theta = std::move(theta);
	model.train_tail = tail(history, order.p + order.d);
	if (history.size() > order.d) {
		const auto w = difference(history, order.d);
		if (w.size() > std::max(order.p, order.q)) {
			model.residuals = css_residuals(w, c, model.phi, model.theta);
			model.sse = sum_of_squares(model.residuals);
			model.initial_sse = model.sse;
			model.sigma2 = model.sse / static_cast<double>(model.residuals.size());
			model.aic = css_aic(model.sse, model.residuals.size(), order.p + order.q + 1);
		}
	}
	return model;
}

std::size_t select_differencing(std::span<const double> values, std::size_t max_d) {
	std::size_t d = 0;
	double current = sample_variance(values);
	while (d < max_d && values.size() > d + 2) {
		const double next = sample_variance(difference(values, d + 1));
		if (!(next <= 0.9 * current)) {
			break;
		}
		current = next;
		++d;
	}
	return d;
}

ArimaOrder select_order(const TimeSeries &train, std::size_t max_p, std::size_t max_d, std::size_t max_q,
                        const FitOptions &options) {
	ArimaOrder{max_p, max_d, max_q}.validate();
	const std::size_t d = select_differencing(train.values(), max_d);

	std::optional<ArimaOrder> best;
	double best_aic = kInf;
	for (std::size_t p = 0; p <= max_p; ++p) {
		for (std::size_t q = 0; q <= max_q; ++q) {
			const ArimaOrder candidate{p, d, q};
			if (train.size() < p + q + d + 10) {
				continue;
			}
			double aic = kInf;
			try {
				aic = fit(train, candidate, options).aic;
			} catch (const Error &) {
				continue;
			}
			if (!std::isfinite(aic)) {
				continue;
			}
			const bool better = !best || aic < best_aic ||
			                    (aic == best_aic && std::pair{p + q, p} < std::pair{best->p + best->q, best->p});
			if (better) {
				best = candidate;
				best_aic = aic;
			}
		}
	}
	if (!best) {
		throw ConvergenceFailure("select_order: no candidate order could be fitted", {}, kInf);
	}
	return *best;
}

std::vector<double> forecast(const FittedArima &model, std::size_t horizon) {
	const auto [p, d, q] = std::tuple{model.order.p, model.order.d, model.order.q};
	if (horizon == 0) {
		throw InvalidArgument("forecast: horizon must be positive");
	}
	if (model.train_tail.size() < p + d) {
		throw InvalidArgument("forecast: model keeps fewer than p + d observations");
	}

	// Lagged values on the differenced scale, oldest first, followed by the forecasts.
	std::vector<double> w;
	if (p > 0) {
		w = tail(d > 0 ? difference(model.train_tail, d) : model.train_tail, p);
	}
	std::vector<double> eps(q, 0.0);
	for (std::size_t j = 0; j < q && j < model.residuals.size(); ++j) {
		eps[q - 1 - j] = model.residuals[model.residuals.size() - 1 - j];
	}

	std::vector<double> out;
	out.reserve(horizon);
	for (std::size_t h = 0; h < horizon; ++h) {
		double next = model.c;
		for (std::size_t i = 0; i < p; ++i) {
			next += model.phi[i] * w[w.size() - 1 - i];
		}
		for (std::size_t j = 0; j < q; ++j) {
			const std::size_t back = j + 1;
			// Innovations beyond the last observation are zero.
			if (back > h && back - h <= eps.size()) {
				next += model.theta[j] * eps[eps.size() - (back - h)];
			}
		}
		w.push_back(next);
		out.push_back(next);
	}
	if (d == 0) {
		return out;
	}
	return undifference(out, integration_seeds(model.train_tail, d), d);
}

nlohmann::json to_record(const FittedArima &model) {
	return {
	    {"order", {{"p", model.order.p}, {"d", model.order.d}, {"q", model.order.q}}},
	    {"c", model.c},
	    {"phi", model.phi},
	    {"theta", model.theta},
	    {"sigma2", model.sigma2},
	    {"aic", model.aic},
	};
}

} // namespace tsw::arima
