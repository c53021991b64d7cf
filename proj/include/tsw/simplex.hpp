#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace tsw::optim {

struct SimplexOptions {
	std::size_t max_iterations = 2000;
	/// Converged when max(f) - min(f) over the simplex <= tolerance * (1 + |min(f)|).
	double tolerance = 1e-8;
	/// Number of times the simplex is rebuilt around the best vertex after converging.
	std::size_t restarts = 1;
};

struct SimplexResult {
	std::vector<double> x;
	double value = 0.0;
	std::size_t iterations = 0;
	bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Nelder-Mead downhill simplex. The objective may return +inf to reject a
/// point; the start point must be finite. `steps[i]` is the initial edge
/// length along coordinate i.
SimplexResult nelder_mead(const Objective &f, std::vector<double> start, std::span<const double> steps,
                          const SimplexOptions &options = {});

} // namespace tsw::optim
