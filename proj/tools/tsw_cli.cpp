// Command-line front end: run experiments, poke at the codec, generate fixtures.

#include "tsw/bench.hpp"
#include "tsw/codec.hpp"
#include "tsw/data.hpp"
#include "tsw/errors.hpp"
#include "tsw/synth.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <iterator>
#include <numbers>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitExperimentFailure = 1;
constexpr int kExitConfigError = 2;

std::vector<double> parse_value_list(const std::string &text) {
	std::vector<double> values;
	std::stringstream stream(text);
	for (std::string item; std::getline(stream, item, ',');) {
		if (item.find_first_not_of(" \t") == std::string::npos) {
			continue;
		}
		std::size_t used = 0;
		const double v = std::stod(item, &used);
		values.push_back(v);
	}
	return values;
}

std::string read_stdin() {
	return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
}

} // namespace

int main(int argc, char **argv) {
	CLI::App app{"Forecasting workbench: ARIMA and LLM-serialization forecasters on shared benchmarks"};
	app.require_subcommand(1);

	// run
	auto *run = app.add_subcommand("run", "Run an experiment config and write report, table and traces");
	std::string config_path;
	std::optional<std::string> only_dataset;
	std::optional<std::string> only_model;
	std::optional<std::string> out_dir;
	std::optional<std::string> cache_dir;
	run->add_option("--config", config_path, "Experiment JSON config")->required();
	run->add_option("--only-dataset", only_dataset, "Run a single dataset");
	run->add_option("--only-model", only_model, "Run a single model (arima or llmtime)");
	run->add_option("--out", out_dir, "Output directory (overrides config)");
	run->add_option("--cache", cache_dir, "Completion cache directory (overrides config)");

	// encode
	auto *encode = app.add_subcommand("encode", "Serialize values as digit tokens");
	std::string values_text;
	double alpha = 0.99;
	double beta = 0.3;
	unsigned precision = 3;
	bool identity = false;
	encode->add_option("--values", values_text, "Comma-separated values (default: read stdin)");
	encode->add_option("--alpha", alpha, "Quantile mapped to 1");
	encode->add_option("--beta", beta, "Quantile used as offset");
	encode->add_option("--precision", precision, "Decimal digits kept");
	encode->add_flag("--identity", identity, "Skip scaling (offset 0, scale 1)");

	// decode
	auto *decode = app.add_subcommand("decode", "Parse digit tokens back to values");
	std::string text;
	double offset = 0.0;
	double scale = 1.0;
	unsigned decode_precision = 3;
	std::size_t max_values = 1'000'000;
	decode->add_option("--text", text, "Serialized text (default: read stdin)");
	decode->add_option("--offset", offset, "Scaling offset");
	decode->add_option("--scale", scale, "Scaling factor");
	decode->add_option("--precision", decode_precision, "Decimal digits kept");
	decode->add_option("--max-values", max_values, "Stop after this many values");

	// gen-synth
	auto *gen = app.add_subcommand("gen-synth", "Write a synthetic series as CSV (t,v)");
	std::string kind = "almost_periodic";
	double sigma = 0.0;
	std::size_t n_points = 500;
	std::uint64_t seed = 0;
	double t_start = 0.0;
	double t_end = 8.0 * std::numbers::pi;
	std::string out_path;
	gen->add_option("--kind", kind, "almost_periodic | sine | sine_plus_trend");
	gen->add_option("--sigma", sigma, "Gaussian noise standard deviation");
	gen->add_option("--n", n_points, "Number of grid points");
	gen->add_option("--seed", seed, "PRNG seed");
	gen->add_option("--t-start", t_start, "First grid point");
	gen->add_option("--t-end", t_end, "Last grid point");
	gen->add_option("--out", out_path, "Output CSV path")->required();

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		const int code = app.exit(e);
		return code == 0 ? kExitOk : kExitConfigError;
	}

	try {
		if (*run) {
			auto config = tsw::bench::load_config(config_path);
			tsw::bench::restrict_to(config, only_dataset, only_model);
			if (out_dir) {
				config.output_dir = *out_dir;
			}
			if (cache_dir) {
				config.cache_dir = *cache_dir;
			}
			config.validate();
			const auto report = tsw::bench::execute(config);
			tsw::bench::write_outputs(report, config.output_dir);
			std::cout << tsw::bench::emit_table(report).text;
			for (const auto &row : report.rows) {
				if (row.error) {
					std::cerr << row.dataset << " / " << row.model << ": " << row.error->kind << ": "
					          << row.error->message << '\n';
				}
			}
			if (report.succeeded() == 0) {
				std::cerr << "experiment failed: no run succeeded\n";
				return kExitExperimentFailure;
			}
			return kExitOk;
		}

		if (*encode) {
			const auto values = parse_value_list(values_text.empty() ? read_stdin() : values_text);
			if (values.empty()) {
				throw tsw::InvalidArgument("no values to encode");
			}
			tsw::codec::ScalingState state = tsw::codec::ScalingState::identity(precision);
			if (!identity) {
				state = tsw::codec::fit_scaling(values, {alpha, beta, precision});
			}
			const auto encoded = tsw::codec::encode(values, state);
			std::cerr << "offset=" << state.offset << " scale=" << state.scale << " precision=" << precision << '\n';
			std::cout << encoded.text << '\n';
			return kExitOk;
		}

		if (*decode) {
			tsw::codec::ScalingState state;
			state.offset = offset;
			state.scale = scale;
			state.config.precision = decode_precision;
			const auto values = tsw::codec::decode(text.empty() ? read_stdin() : text, state, max_values);
			std::cout.precision(17);
			for (std::size_t i = 0; i < values.size(); ++i) {
				std::cout << (i ? "," : "") << values[i];
			}
			std::cout << '\n';
			return kExitOk;
		}

		if (*gen) {
			tsw::synth::SynthSpec spec{tsw::synth::signal_kind_from_string(kind), sigma, n_points, t_start, t_end, seed};
			tsw::data::write_csv(tsw::synth::generate(spec), out_path);
			return kExitOk;
		}
	} catch (const tsw::ConfigError &e) {
		std::cerr << "config error: " << e.what() << '\n';
		return kExitConfigError;
	} catch (const tsw::InvalidArgument &e) {
		std::cerr << "invalid argument: " << e.what() << '\n';
		return kExitConfigError;
	} catch (const tsw::Error &e) {
		std::cerr << e.kind() << ": " << e.what() << '\n';
		return kExitExperimentFailure;
	} catch (const std::exception &e) {
		std::cerr << "error: " << e.what() << '\n';
		return kExitExperimentFailure;
	}
	return kExitOk;
}
