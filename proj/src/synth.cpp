#include "tsw/synth.hpp"

#include "tsw/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace tsw::synth {

namespace {

std::uint64_t splitmix64(std::uint64_t &state) noexcept {
	std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
	z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
	z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
	return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

} // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) noexcept {
	std::uint64_t sm = seed;
	for (auto &word : s_) {
		word = splitmix64(sm);
	}
}

Xoshiro256::result_type Xoshiro256::operator()() noexcept {
	const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
	const std::uint64_t t = s_[1] << 17;
	s_[2] ^= s_[0];
	s_[3] ^= s_[1];
	s_[1] ^= s_[2];
	s_[0] ^= s_[3];
	s_[2] ^= t;
	s_[3] = rotl(s_[3], 45);
	return result;
}

double Xoshiro256::uniform_open0() noexcept {
	return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
}

double GaussianSampler::operator()() noexcept {
	if (spare_) {
		const double z = *spare_;
		spare_.reset();
		return z;
	}
	const double u1 = rng_.uniform_open0();
	const double u2 = rng_.uniform_open0();
	const double radius = std::sqrt(-2.0 * std::log(u1));
	const double angle = 2.0 * std::numbers::pi * u2;
	spare_ = radius * std::sin(angle);
	return radius * std::cos(angle);
}

std::string_view to_string(SignalKind kind) {
	switch (kind) {
	case SignalKind::almost_periodic:
		return "almost_periodic";
	case SignalKind::sine:
		return "sine";
	case SignalKind::sine_plus_trend:
		return "sine_plus_trend";
	}
	return "unknown";
}

SignalKind signal_kind_from_string(std::string_view name) {
	if (name == "almost_periodic") {
		return SignalKind::almost_periodic;
	}
	if (name == "sine") {
		return SignalKind::sine;
	}
	if (name == "sine_plus_trend") {
		return SignalKind::sine_plus_trend;
	}
	throw InvalidArgument("unknown signal kind '" + std::string(name) + "'");
}

double base_signal(SignalKind kind, double t) {
	switch (kind) {
	case SignalKind::almost_periodic:
		return std::cos(2.0 * std::numbers::pi * t) + std::cos(2.0 * t);
	case SignalKind::sine:
		return std::sin(t);
	case SignalKind::sine_plus_trend:
		return std::sin(t) + 0.2 * t;
	}
	return 0.0;
}

TimeSeries generate(const SynthSpec &spec) {
	if (spec.n_points < 2) {
		throw InvalidArgument("synth: n_points must be >= 2");
	}
	if (!(spec.t_end > spec.t_start) || !std::isfinite(spec.t_start) || !std::isfinite(spec.t_end)) {
		throw InvalidArgument("synth: t_end must exceed t_start");
	}
	if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) {
		throw InvalidArgument("synth: sigma must be a nonnegative finite number");
	}

	const double step = (spec.t_end - spec.t_start) / static_cast<double>(spec.n_points - 1);
	std::vector<double> t(spec.n_points);
	std::vector<double> v(spec.n_points);
	GaussianSampler noise(spec.seed);
	for (std::size_t i = 0; i < spec.n_points; ++i) {
		t[i] = (i + 1 == spec.n_points) ? spec.t_end : spec.t_start + static_cast<double>(i) * step;
		// Always draw so that the grid of variates does not depend on sigma.
		const double z = noise();
		v[i] = base_signal(spec.kind, t[i]) + (spec.sigma > 0.0 ? spec.sigma * z : 0.0);
	}
	return TimeSeries(std::move(t), std::move(v), std::string(to_string(spec.kind)));
}

SynthSpec standard_grid(SignalKind kind, double sigma, std::uint64_t seed) {
	return SynthSpec{kind, sigma, 500, 0.0, 8.0 * std::numbers::pi, seed};
}

} // namespace tsw::synth
