#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include "tsw/synth.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <unistd.h>
#include <span>
#include <string>
#include <vector>

namespace tsw::testing {

// x_t = c + sum phi_i x_{t-i} + sum theta_j e_{t-j} + e_t, zero pre-sample,
// first `burn_in` points dropped.
struct Simulated {
	std::vector<double> values;
	std::vector<double> innovations;
};

inline Simulated simulate_arma(double c, const std::vector<double> &phi, const std::vector<double> &theta,
                               std::size_t n, std::uint64_t seed, double sigma = 1.0, std::size_t burn_in = 200) {
	synth::GaussianSampler gauss(seed);
	const std::size_t total = n + burn_in;
	std::vector<double> x(total, 0.0);
	std::vector<double> e(total, 0.0);
	for (std::size_t t = 0; t < total; ++t) {
		e[t] = sigma * gauss();
		double v = c + e[t];
		for (std::size_t i = 0; i < phi.size() && i < t; ++i) {
			v += phi[i] * x[t - 1 - i];
		}
		for (std::size_t j = 0; j < theta.size() && j < t; ++j) {
			v += theta[j] * e[t - 1 - j];
		}
		x[t] = v;
	}
	return {{x.begin() + static_cast<std::ptrdiff_t>(burn_in), x.end()},
	        {e.begin() + static_cast<std::ptrdiff_t>(burn_in), e.end()}};
}

inline double naive_mse(const std::vector<double> &a, const std::vector<double> &b) {
	long double sum = 0;
	for (std::size_t i = 0; i < a.size(); ++i) {
		sum += (long double)(a[i] - b[i]) * (a[i] - b[i]);
	}
	return static_cast<double>(sum / a.size());
}

inline double naive_mae(const std::vector<double> &a, const std::vector<double> &b) {
	long double sum = 0;
	for (std::size_t i = 0; i < a.size(); ++i) {
		sum += std::fabs(a[i] - b[i]);
	}
	return static_cast<double>(sum / a.size());
}

inline std::vector<double> random_vector(std::mt19937_64 &rng, std::size_t n, double lo = -100.0, double hi = 100.0) {
	std::uniform_real_distribution<double> dist(lo, hi);
	std::vector<double> out(n);
	for (auto &v : out) {
		v = dist(rng);
	}
	return out;
}

inline std::string slurp(const std::filesystem::path &path) {
	std::ifstream in(path, std::ios::binary);
	return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path &path, const std::string &text) {
	std::ofstream out(path, std::ios::binary | std::ios::trunc);
	out << text;
}

// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
public:
	explicit ScratchDir(const std::string &tag) {
		static std::uint64_t counter = 0;
		path_ = std::filesystem::temp_directory_path() /
		        ("tsw-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
		std::filesystem::remove_all(path_);
		std::filesystem::create_directories(path_);
	}
	~ScratchDir() {
		std::error_code ec;
		std::filesystem::remove_all(path_, ec);
	}
	ScratchDir(const ScratchDir &) = delete;
	ScratchDir &operator=(const ScratchDir &) = delete;
	const std::filesystem::path &path() const { return path_; }

private:
	std::filesystem::path path_;
};

} // namespace tsw::testing
