#pragma once

// Inputs of the replay-cached tuning fixture. Changing anything here
// invalidates tests/fixtures/tuning_cache; rerun tsw_make_fixtures.

#include "tsw/codec.hpp"
#include "tsw/forecaster.hpp"

#include <vector>

namespace tsw::fixture {

inline std::vector<double> tuning_period() { return {0.123, 4.567, 2.5, 9.99, -1.25}; }

inline std::vector<double> tuning_train() {
	std::vector<double> out;
	for (int rep = 0; rep < 8; ++rep) {
		for (double v : tuning_period()) {
			out.push_back(v);
		}
	}
	return out;
}

inline std::vector<double> tuning_validation() { return tuning_period(); }

inline std::vector<codec::ScalingConfig> tuning_grid() {
	return {{0.9, 0.0, 2}, {0.9, 0.3, 2}, {0.99, 0.0, 2}, {0.99, 0.3, 2}};
}

inline forecaster::LlmtimeConfig tuning_base_config() {
	forecaster::LlmtimeConfig config;
	config.model_name = "fixture-model";
	config.num_samples = 3;
	config.temperature = 0.0;
	return config;
}

} // namespace tsw::fixture
