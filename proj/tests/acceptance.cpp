// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: tsw_acceptance [criterion...]   (no arguments runs all)

#include "decimal_oracle.hpp"
#include "support.hpp"
#include "tsw/arima.hpp"
#include "tsw/bench.hpp"
#include "tsw/codec.hpp"
#include "tsw/core.hpp"
#include "tsw/data.hpp"
#include "tsw/forecaster.hpp"
#include "tsw/synth.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace tsw;
using Clock = std::chrono::steady_clock;

namespace {

const std::filesystem::path kFixtures = TSW_FIXTURES;
const std::filesystem::path kConfigs = TSW_CONFIGS;

struct Outcome {
	bool pass = false;
	std::string detail;
};

struct Criterion {
	int id;
	std::string title;
	double budget_s;
	std::function<Outcome()> check;
};

std::string fmt(const char *format, double v) {
	char buffer[64];
	std::snprintf(buffer, sizeof buffer, format, v);
	return buffer;
}

Outcome codec_golden() {
	const std::vector<double> values{0.789, 7.89, 78.9, 789.0};
	const auto text = codec::encode(values, codec::ScalingState::identity(2)).text;
	const std::string expected = "7 8 , 7 8 9 , 7 8 9 0 , 7 8 9 0 0";
	return {text == expected, "\"" + text + "\""};
}

Outcome codec_round_trip() {
	std::mt19937_64 rng(2024);
	std::uniform_real_distribution<double> mantissa(-1.0, 1.0);
	std::uniform_int_distribution<int> exponent(-6, 8);
	std::size_t mismatches = 0;
	std::size_t checked = 0;
	for (int i = 0; i < 1000; ++i) {
		const double v = mantissa(rng) * std::pow(10.0, exponent(rng));
		for (unsigned p = 0; p <= 4; ++p) {
			const auto state = codec::ScalingState::identity(p);
			const auto back = codec::decode(codec::encode(std::vector<double>{v}, state).text, state, 1);
			mismatches += back.size() != 1 || back[0] != testing::truncation_grain_value(v, state);
			++checked;
		}
	}
	return {mismatches == 0, std::to_string(checked) + " cases, " + std::to_string(mismatches) + " mismatches"};
}

Outcome scaling_property() {
	std::mt19937_64 rng(77);
	double worst_quantile = 0.0;
	double worst_inverse = 0.0;
	const auto grid = codec::default_grid();
	for (int s = 0; s < 100; ++s) {
		std::vector<double> values;
		do {
			values = testing::random_vector(rng, 10 + rng() % 300, -1e3, 1e4);
		} while (std::ranges::all_of(values, [&](double v) { return v == values.front(); }));
		for (const auto &config : grid) {
			const auto state = codec::fit_scaling(values, config);
			std::vector<double> scaled;
			for (double v : values) {
				scaled.push_back(state.apply(v));
				worst_inverse =
				    std::max(worst_inverse, std::fabs(state.invert(state.apply(v)) - v) / std::max(1.0, std::fabs(v)));
			}
			worst_quantile = std::max(worst_quantile, std::fabs(codec::quantile(scaled, config.alpha) - 1.0));
		}
	}
	return {worst_quantile <= 1e-9 && worst_inverse <= 1e-9,
	        "max |q_alpha - 1| = " + fmt("%.2e", worst_quantile) + ", max inverse error = " + fmt("%.2e", worst_inverse)};
}

Outcome parameter_recovery() {
	const auto ar1 = testing::simulate_arma(0.0, {0.6}, {}, 2000, 11);
	const auto ar2 = testing::simulate_arma(0.0, {0.5, -0.3}, {}, 3000, 12);
	const auto ma1 = testing::simulate_arma(0.0, {}, {0.4}, 5000, 13);
	const auto f1 = arima::fit(TimeSeries::from_values(ar1.values), {1, 0, 0});
	const auto f2 = arima::fit(TimeSeries::from_values(ar2.values), {2, 0, 0});
	const auto f3 = arima::fit(TimeSeries::from_values(ma1.values), {0, 0, 1});
	const double e1 = std::fabs(f1.phi[0] - 0.6);
	const double e2 = std::max(std::fabs(f2.phi[0] - 0.5), std::fabs(f2.phi[1] + 0.3));
	const double e3 = std::fabs(f3.theta[0] - 0.4);
	std::ostringstream detail;
	detail << "AR(1) phi=" << f1.phi[0] << ", AR(2) phi=(" << f2.phi[0] << ", " << f2.phi[1]
	       << "), MA(1) theta=" << f3.theta[0];
	return {e1 <= 0.05 && e2 <= 0.05 && e3 <= 0.05, detail.str()};
}

double synthetic_arima_mse(double sigma, std::uint64_t seed) {
	const auto series = synth::generate(synth::standard_grid(synth::SignalKind::almost_periodic, sigma, seed));
	const auto split = train_test_split(series, 100);
	const auto result = forecaster::arima_forecast(split.train, 100, {});
	return mse(result.point, split.test.values());
}

Outcome synthetic_benchmark() {
	// same path the bench takes for the preset rows
	nlohmann::json doc = {{"datasets", {{{"preset", "almost_periodic_sigma_sweep"}}}}, {"models", {"arima"}}};
	auto config = bench::parse_config(doc, ".");
	bench::restrict_to(config, std::nullopt, "arima");
	std::erase_if(config.datasets, [](const bench::DatasetSpec &d) {
		const double s = std::get<synth::SynthSpec>(d.source).sigma;
		return s != 0.0 && s != 0.1;
	});
	const auto report = bench::execute(config);
	bool pass = report.rows.size() == 2;
	std::ostringstream detail;
	for (const auto &row : report.rows) {
		const bool ok = row.ok() && *row.mse <= 0.3;
		pass = pass && ok;
		detail << row.dataset << ": " << (row.ok() ? fmt("%.4f", *row.mse) : row.error->kind) << " "
		       << row.model_label << (ok ? "" : " (> 0.3)") << "; ";
	}
	return {pass, detail.str()};
}

Outcome sigma_sweep() {
	nlohmann::json doc = {{"datasets", {{{"preset", "almost_periodic_sigma_sweep"}}}}, {"models", {"arima", "llmtime"}}};
	const auto config = bench::parse_config(doc, ".");
	const auto report = bench::execute(config);
	std::map<std::pair<std::string, std::string>, int> seen;
	bool finite = true;
	for (const auto &row : report.rows) {
		++seen[{row.dataset, row.model}];
		finite = finite && row.ok() && std::isfinite(*row.mse) && std::isfinite(*row.mae);
	}
	const bool skeleton = report.rows.size() == 10 && seen.size() == 10 && finite;

	int monotone = 0;
	for (std::uint64_t seed = 0; seed < 10; ++seed) {
		double previous = -1.0;
		bool ok = true;
		for (double sigma : {0.1, 0.2, 0.3, 0.4}) {
			const double m = synthetic_arima_mse(sigma, seed);
			ok = ok && m >= previous;
			previous = m;
		}
		monotone += ok;
	}
	return {skeleton && monotone >= 8, std::to_string(report.rows.size()) + " rows" + (finite ? "" : " (non-finite)") +
	                                       ", ARIMA MSE nondecreasing in " + std::to_string(monotone) + "/10 seeds"};
}

Outcome mock_end_to_end() {
	testing::ScratchDir dir("acceptance7");
	auto config = bench::load_config(kFixtures / "periodic_mock.json");
	config.output_dir = dir.path();
	const auto report = bench::run(config);
	bench::write_outputs(report, config.output_dir);

	std::vector<std::string> problems;
	if (report.rows.size() != 1 || !report.rows[0].ok() || *report.rows[0].mse != 0.0) {
		problems.push_back("row mse != 0");
	}
	const auto doc = nlohmann::json::parse(testing::slurp(dir.path() / "report.json"));
	const auto &row = doc.at("rows").at(0);
	for (const auto *key : {"dataset", "model", "horizon", "model_label", "mse", "mae", "num_invalid", "error"}) {
		if (!row.contains(key)) {
			problems.push_back(std::string("row lacks ") + key);
		}
	}
	if (doc.at("schema_version") != bench::kReportSchemaVersion || !doc.at("rows").at(0).at("error").is_null()) {
		problems.push_back("report header");
	}
	const auto trace_file = dir.path() / doc.at("traces").at(0).at("file").get<std::string>();
	std::istringstream csv(testing::slurp(trace_file));
	std::string line;
	std::getline(csv, line);
	if (line != "t,actual,predicted") {
		problems.push_back("trace header '" + line + "'");
	}
	std::size_t lines = 0;
	std::size_t blank_predictions = 0;
	while (std::getline(csv, line)) {
		const auto fields = data::split_csv_line(line);
		if (fields.size() != 3) {
			problems.push_back("trace row width");
			break;
		}
		blank_predictions += fields[2].empty();
		++lines;
	}
	if (lines != 144 || blank_predictions != 120) {
		problems.push_back("trace rows " + std::to_string(lines) + "/" + std::to_string(blank_predictions));
	}
	std::string detail = "mse=" + (report.rows.empty() || !report.rows[0].mse ? std::string("n/a")
	                                                                         : fmt("%g", *report.rows[0].mse));
	for (const auto &p : problems) {
		detail += "; " + p;
	}
	return {problems.empty(), detail};
}

std::map<std::string, std::string> snapshot(const std::filesystem::path &dir) {
	std::map<std::string, std::string> files;
	for (const auto &entry : std::filesystem::directory_iterator(dir)) {
		const auto name = entry.path().filename().string();
		if (name == "timings.json") {
			continue;
		}
		files[name] = testing::slurp(entry.path());
	}
	return files;
}

Outcome replay_determinism() {
	testing::ScratchDir dir("acceptance8");
	auto config = bench::load_config(kConfigs / "synthetic.json");
	config.output_dir = dir.path() / "out";
	config.cache_dir = dir.path() / "cache";
	// warm the cache
	bench::write_outputs(bench::run(config), config.output_dir);
	bench::write_outputs(bench::run(config), config.output_dir);
	const auto first = snapshot(config.output_dir);
	bench::write_outputs(bench::run(config), config.output_dir);
	const auto second = snapshot(config.output_dir);
	std::size_t differing = 0;
	std::size_t traces = 0;
	for (const auto &[name, bytes] : first) {
		differing += !second.contains(name) || second.at(name) != bytes;
		traces += name.ends_with(".csv") && name != "table.csv";
	}
	const bool has_all = first.contains("report.json") && first.contains("table.txt") && traces > 0;
	return {has_all && differing == 0 && first.size() == second.size(),
	        std::to_string(first.size()) + " files (" + std::to_string(traces) + " trace CSVs), " +
	            std::to_string(differing) + " differ"};
}

Outcome metric_oracles() {
	std::mt19937_64 rng(50);
	double worst = 0.0;
	for (int i = 0; i < 50; ++i) {
		const std::size_t n = 1 + rng() % 500;
		const auto a = testing::random_vector(rng, n, -1e3, 1e3);
		const auto b = testing::random_vector(rng, n, -1e3, 1e3);
		const double m1 = testing::naive_mse(a, b);
		const double m2 = testing::naive_mae(a, b);
		worst = std::max({worst, std::fabs(mse(a, b) - m1) / std::max(1.0, m1), std::fabs(mae(a, b) - m2) / std::max(1.0, m2)});
	}
	return {worst <= 1e-12, "max relative deviation " + fmt("%.2e", worst)};
}

Outcome desk_scale_statement() {
	// The hosted-model column is not reproduced. Its stand-ins are the replay
	// fixtures and the mock-provider criteria above.
	const bool fixtures = std::filesystem::exists(kFixtures / "tuning_cache") &&
	                      std::filesystem::exists(kFixtures / "tuning_expected.json") &&
	                      std::filesystem::exists(kFixtures / "periodic_mock.json");
	return {fixtures, "live LLM table values are out of reach without the hosted model; covered by replay "
	                  "fixtures (criteria 7-8) and ARIMA checks (criteria 4-6)"};
}

} // namespace

int main(int argc, char **argv) {
	const std::vector<Criterion> criteria{
	    {1, "codec golden encoding", 0.001, codec_golden},
	    {2, "codec round trip at the truncation grain", 1.0, codec_round_trip},
	    {3, "alpha-quantile scaling maps to 1 and inverts", 1.0, scaling_property},
	    {4, "ARIMA parameter recovery within 0.05", 30.0, parameter_recovery},
	    {5, "synthetic benchmark ARIMA MSE <= 0.3 (sigma 0, 0.1)", 60.0, synthetic_benchmark},
	    {6, "sigma sweep skeleton and monotone ARIMA MSE", 300.0, sigma_sweep},
	    {7, "LLMTIME end to end with the mock provider", 5.0, mock_end_to_end},
	    {8, "replay determinism of the synthetic suite", 120.0, replay_determinism},
	    {9, "metric oracles", 1.0, metric_oracles},
	    {10, "hosted-model results stated as not reproducible", 1.0, desk_scale_statement},
	};

	std::vector<int> selected;
	for (int i = 1; i < argc; ++i) {
		selected.push_back(std::atoi(argv[i]));
	}

	int failures = 0;
	for (const auto &c : criteria) {
		if (!selected.empty() && std::ranges::find(selected, c.id) == selected.end()) {
			continue;
		}
		Outcome outcome;
		const auto start = Clock::now();
		try {
			outcome = c.check();
		} catch (const std::exception &e) {
			outcome = {false, std::string("exception: ") + e.what()};
		}
		const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
		const bool in_time = seconds <= c.budget_s;
		const bool pass = outcome.pass && in_time;
		failures += !pass;
		std::printf("%s  %2d  %s  [%s; %.3f s of %.3g s%s]\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
		            outcome.detail.c_str(), seconds, c.budget_s, in_time ? "" : ", over budget");
		std::fflush(stdout);
	}
	return failures == 0 ? 0 : 1;
}
