#include "tsw/simplex.hpp"

#include "tsw/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tsw::optim {

namespace {

struct Vertex {
	std::vector<double> x;
	double f;
};

bool spread_converged(const std::vector<Vertex> &simplex, double tolerance) {
	const double lo = simplex.front().f;
	const double hi = simplex.back().f;
	if (!std::isfinite(hi)) {
		return false;
	}
	return hi - lo <= tolerance * (1.0 + std::abs(lo));
}

// One Nelder-Mead run from `start`. Iterations are charged against `budget`.
SimplexResult run(const Objective &f, const std::vector<double> &start, double start_value,
                  std::span<const double> steps, double tolerance, std::size_t &budget) {
	const std::size_t dim = start.size();
	std::vector<Vertex> simplex;
	simplex.reserve(dim + 1);
	simplex.push_back({start, start_value});
	for (std::size_t i = 0; i < dim; ++i) {
		auto x = start;
		x[i] += steps[i];
		const double fx = f(x);
		simplex.push_back({std::move(x), fx});
	}

	auto by_value = [](const Vertex &a, const Vertex &b) { return a.f < b.f; };
	auto evaluate = [&](std::vector<double> x) {
		const double fx = f(x);
		return Vertex{std::move(x), std::isnan(fx) ? HUGE_VAL : fx};
	};

	std::size_t iterations = 0;
	std::ranges::stable_sort(simplex, by_value);
	bool converged = spread_converged(simplex, tolerance);

	std::vector<double> centroid(dim);
	while (!converged && budget > 0) {
		--budget;
		++iterations;

		std::ranges::fill(centroid, 0.0);
		for (std::size_t v = 0; v < dim; ++v) {
			for (std::size_t i = 0; i < dim; ++i) {
				centroid[i] += simplex[v].x[i];
			}
		}
		for (double &c : centroid) {
			c /= static_cast<double>(dim);
		}

		const Vertex &worst = simplex.back();
		auto along = [&](double coef) {
			std::vector<double> x(dim);
			for (std::size_t i = 0; i < dim; ++i) {
				x[i] = centroid[i] + coef * (worst.x[i] - centroid[i]);
			}
			return x;
		};

		Vertex reflected = evaluate(along(-1.0));
		if (reflected.f < simplex.front().f) {
			Vertex expanded = evaluate(along(-2.0));
			simplex.back() = expanded.f < reflected.f ? std::move(expanded) : std::move(reflected);
		} else if (reflected.f < simplex[dim - 1].f) {
			simplex.back() = std::move(reflected);
		} else {
			const bool outside = reflected.f < worst.f;
			Vertex contracted = evaluate(along(outside ? -0.5 : 0.5));
			if (contracted.f < (outside ? reflected.f : worst.f)) {
				simplex.back() = std::move(contracted);
			} else {
				const auto best = simplex.front().x;
				for (std::size_t v = 1; v <= dim; ++v) {
					for (std::size_t i = 0; i < dim; ++i) {
						simplex[v].x[i] = best[i] + 0.5 * (simplex[v].x[i] - best[i]);
					}
					simplex[v] = evaluate(std::move(simplex[v].x));
				}
			}
		}
		std::ranges::stable_sort(simplex, by_value);
		converged = spread_converged(simplex, tolerance);
	}

	return {simplex.front().x, simplex.front().f, iterations, converged};
}

} // namespace

SimplexResult nelder_mead(const Objective &f, std::vector<double> start, std::span<const double> steps,
                          const SimplexOptions &options) {
	if (steps.size() != start.size()) {
		throw InvalidArgument("nelder_mead: steps and start differ in size");
	}
	const double start_value = f(start);
	if (!std::isfinite(start_value)) {
		throw InvalidArgument("nelder_mead: objective is not finite at the start point");
	}
	if (start.empty()) {
		return {std::move(start), start_value, 0, true};
	}

	std::size_t budget = options.max_iterations;
	SimplexResult result = run(f, start, start_value, steps, options.tolerance, budget);
	for (std::size_t r = 0; r < options.restarts && result.converged && budget > 0; ++r) {
		SimplexResult again = run(f, result.x, result.value, steps, options.tolerance, budget);
		again.iterations += result.iterations;
		const bool improved = again.value < result.value;
		const bool negligible = result.value - again.value <= options.tolerance * (1.0 + std::abs(result.value));
		if (improved) {
			result = std::move(again);
		} else {
			result.iterations = again.iterations;
		}
		if (negligible) {
			break;
		}
	}
	return result;
}

} // namespace tsw::optim
