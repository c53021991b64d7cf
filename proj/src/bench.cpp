#include "tsw/bench.hpp"

#include "tsw/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#ifndef TSW_VERSION
#define TSW_VERSION "0.0.0"
#endif

namespace tsw::bench {

using json = nlohmann::json;

std::string version() { return std::string("tsw ") + TSW_VERSION; }

namespace {

constexpr std::size_t kSynthHorizon = 100;

std::string sigma_label(double sigma) {
	char buffer[32];
	std::snprintf(buffer, sizeof buffer, "%g", sigma);
	return buffer;
}

std::vector<DatasetSpec> sweep(synth::SignalKind kind, std::initializer_list<double> sigmas, std::uint64_t seed) {
	std::vector<DatasetSpec> out;
	for (double sigma : sigmas) {
		DatasetSpec spec;
		spec.name = std::string(synth::to_string(kind)) + "_sigma" + sigma_label(sigma);
		spec.source = synth::standard_grid(kind, sigma, seed);
		spec.horizon = kSynthHorizon;
		out.push_back(std::move(spec));
	}
	return out;
}

template <typename T> T get_or(const json &object, const char *key, T fallback) {
	if (!object.contains(key) || object.at(key).is_null()) {
		return fallback;
	}
	return object.at(key).get<T>();
}

std::size_t positive(const json &object, const char *key, std::size_t fallback) {
	const auto v = get_or<long long>(object, key, static_cast<long long>(fallback));
	if (v <= 0) {
		throw ConfigError(std::string("config: '") + key + "' must be positive");
	}
	return static_cast<std::size_t>(v);
}

std::size_t nonneg(const json &object, const char *key, std::size_t fallback) {
	const auto v = get_or<long long>(object, key, static_cast<long long>(fallback));
	if (v < 0) {
		throw ConfigError(std::string("config: '") + key + "' must be nonnegative");
	}
	return static_cast<std::size_t>(v);
}

synth::SynthSpec parse_synth(const json &object, std::uint64_t default_seed) {
	synth::SynthSpec spec;
	spec.kind = synth::signal_kind_from_string(get_or<std::string>(object, "kind", "almost_periodic"));
	spec.sigma = get_or<double>(object, "sigma", 0.0);
	spec.n_points = positive(object, "n_points", 500);
	spec.t_start = get_or<double>(object, "t_start", 0.0);
	spec.t_end = get_or<double>(object, "t_end", 8.0 * std::numbers::pi);
	spec.seed = get_or<std::uint64_t>(object, "seed", default_seed);
	if (spec.n_points < 2 || !(spec.t_end > spec.t_start) || !(spec.sigma >= 0.0)) {
		throw ConfigError("config: invalid synthetic dataset parameters");
	}
	return spec;
}

json synth_to_json(const synth::SynthSpec &spec) {
	return {{"kind", std::string(synth::to_string(spec.kind))},
	        {"sigma", spec.sigma},
	        {"n_points", spec.n_points},
	        {"t_start", spec.t_start},
	        {"t_end", spec.t_end},
	        {"seed", spec.seed}};
}

std::string intercept_name(arima::InterceptMode mode) {
	switch (mode) {
	case arima::InterceptMode::always:
		return "always";
	case arima::InterceptMode::never:
		return "never";
	case arima::InterceptMode::automatic:
		break;
	}
	return "auto";
}

arima::InterceptMode intercept_from_name(const std::string &name) {
	if (name == "auto") {
		return arima::InterceptMode::automatic;
	}
	if (name == "always") {
		return arima::InterceptMode::always;
	}
	if (name == "never") {
		return arima::InterceptMode::never;
	}
	throw ConfigError("config: arima.intercept must be auto, always or never");
}

} // namespace

std::vector<DatasetSpec> expand_preset(const std::string &preset, std::uint64_t seed) {
	using synth::SignalKind;
	if (preset == "almost_periodic_sigma_sweep") {
		return sweep(SignalKind::almost_periodic, {0.0, 0.1, 0.2, 0.3, 0.4}, seed);
	}
	if (preset == "sine_sigma_sweep") {
		return sweep(SignalKind::sine, {0.0, 0.05, 0.1, 0.2}, seed);
	}
	if (preset == "sine_plus_trend") {
		return sweep(SignalKind::sine_plus_trend, {0.02}, seed);
	}
	throw ConfigError("config: unknown preset '" + preset + "'");
}

void ExperimentConfig::validate() const {
	if (datasets.empty()) {
		throw ConfigError("config: no datasets");
	}
	if (models.empty()) {
		throw ConfigError("config: no models");
	}
	std::set<std::string> names;
	for (const auto &d : datasets) {
		if (!names.insert(d.name).second) {
			throw ConfigError("config: duplicate dataset name '" + d.name + "'");
		}
		if (d.horizon && *d.horizon == 0) {
			throw ConfigError("config: dataset '" + d.name + "' has a zero horizon");
		}
	}
	std::set<std::string> seen_models;
	for (const auto &m : models) {
		if (m != "arima" && m != "llmtime") {
			throw ConfigError("config: unknown model '" + m + "' (expected arima or llmtime)");
		}
		if (!seen_models.insert(m).second) {
			throw ConfigError("config: model '" + m + "' listed twice");
		}
	}
	if (provider.kind != "mock" && provider.kind != "http" && provider.kind != "replay") {
		throw ConfigError("config: provider.kind must be mock, http or replay");
	}
	if (provider.kind == "replay" && cache_dir.empty()) {
		throw ConfigError("config: replay provider needs a cache_dir");
	}
	if (parallelism == 0) {
		throw ConfigError("config: parallelism must be positive");
	}
	try {
		llmtime.validate();
	} catch (const InvalidArgument &e) {
		throw ConfigError(e.what());
	}
}

ExperimentConfig parse_config(const json &doc, const std::filesystem::path &base_dir) {
	if (!doc.is_object()) {
		throw ConfigError("config: top level must be an object");
	}
	ExperimentConfig config;
	try {
		config.seed = get_or<std::uint64_t>(doc, "seed", 0);

		for (const auto &item : get_or<json>(doc, "datasets", json::array())) {
			if (item.contains("preset")) {
				for (auto &spec : expand_preset(item.at("preset").get<std::string>(), config.seed)) {
					config.datasets.push_back(std::move(spec));
				}
				continue;
			}
			DatasetSpec spec;
			spec.name = item.at("name").get<std::string>();
			if (item.contains("synth")) {
				spec.source = parse_synth(item.at("synth"), config.seed);
				spec.horizon = positive(item, "horizon", kSynthHorizon);
			} else {
				auto entry = data::dataset_entry_from_json(item, base_dir);
				spec.horizon = entry.horizon;
				spec.source = std::move(entry);
			}
			config.datasets.push_back(std::move(spec));
		}

		config.models = get_or<std::vector<std::string>>(doc, "models", {});

		const json arima = get_or<json>(doc, "arima", json::object());
		if (arima.contains("order") && !arima.at("order").is_null()) {
			const auto order = arima.at("order").get<std::vector<long long>>();
			if (order.size() != 3 || std::ranges::any_of(order, [](long long v) { return v < 0; })) {
				throw ConfigError("config: arima.order must be [p, d, q] with nonnegative entries");
			}
			config.arima.order = arima::ArimaOrder{static_cast<std::size_t>(order[0]),
			                                       static_cast<std::size_t>(order[1]),
			                                       static_cast<std::size_t>(order[2])};
		}
		config.arima.max_p = nonneg(arima, "max_p", config.arima.max_p);
		config.arima.max_d = nonneg(arima, "max_d", config.arima.max_d);
		config.arima.max_q = nonneg(arima, "max_q", config.arima.max_q);
		config.arima.fit.enforce_stationarity = get_or<bool>(arima, "enforce_stationarity", true);
		config.arima.fit.intercept = intercept_from_name(get_or<std::string>(arima, "intercept", "auto"));
		config.arima.fit.max_iterations = positive(arima, "max_iterations", config.arima.fit.max_iterations);
		try {
			arima::ArimaOrder{config.arima.max_p, config.arima.max_d, config.arima.max_q}.validate();
			if (config.arima.order) {
				config.arima.order->validate();
			}
		} catch (const InvalidArgument &e) {
			throw ConfigError(e.what());
		}

		const json llm = get_or<json>(doc, "llmtime", json::object());
		auto &lt = config.llmtime;
		lt.scaling.alpha = get_or<double>(llm, "alpha", lt.scaling.alpha);
		lt.scaling.beta = get_or<double>(llm, "beta", lt.scaling.beta);
		lt.scaling.precision = static_cast<unsigned>(nonneg(llm, "precision", lt.scaling.precision));
		lt.model_name = get_or<std::string>(llm, "model", lt.model_name);
		lt.num_samples = positive(llm, "num_samples", lt.num_samples);
		lt.temperature = get_or<double>(llm, "temperature", lt.temperature);
		if (llm.contains("tokens_per_value") && !llm.at("tokens_per_value").is_null()) {
			lt.tokens_per_value_estimate = llm.at("tokens_per_value").get<double>();
		}
		lt.safety_factor = get_or<double>(llm, "safety_factor", lt.safety_factor);
		lt.min_valid_samples = positive(llm, "min_valid_samples", lt.min_valid_samples);
		lt.stop_sequences = get_or<std::vector<std::string>>(llm, "stop", {});
		config.tune_scaling = get_or<bool>(llm, "tune", false);
		if (!(lt.scaling.alpha > 0.0 && lt.scaling.alpha <= 1.0) ||
		    !(lt.scaling.beta >= 0.0 && lt.scaling.beta < 1.0)) {
			throw ConfigError("config: llmtime.alpha must lie in (0, 1] and beta in [0, 1)");
		}

		const json provider = get_or<json>(doc, "provider", json::object());
		auto &ps = config.provider;
		ps.kind = get_or<std::string>(provider, "kind", ps.kind);
		ps.mock_rule = get_or<std::string>(provider, "mock_rule", ps.mock_rule);
		ps.mock_text = get_or<std::string>(provider, "mock_text", ps.mock_text);
		ps.http.base_url = get_or<std::string>(provider, "base_url", ps.http.base_url);
		ps.http.api_key_env = get_or<std::string>(provider, "api_key_env", ps.http.api_key_env);
		ps.http.max_attempts = positive(provider, "max_attempts", ps.http.max_attempts);
		ps.http.max_concurrency = positive(provider, "max_concurrency", ps.http.max_concurrency);
		if (ps.mock_rule != "repeat_last_period" && ps.mock_rule != "constant") {
			throw ConfigError("config: provider.mock_rule must be repeat_last_period or constant");
		}

		config.output_dir = get_or<std::string>(doc, "output_dir", "out");
		config.cache_dir = get_or<std::string>(doc, "cache_dir", "");
		config.parallelism = positive(doc, "parallelism", 1);
	} catch (const json::exception &e) {
		throw ConfigError(std::string("config: ") + e.what());
	} catch (const InvalidArgument &e) {
		throw ConfigError(e.what());
	}
	config.validate();
	return config;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
	std::ifstream in(path);
	if (!in) {
		throw ConfigError("cannot open config " + path.string());
	}
	json doc;
	try {
		doc = json::parse(in);
	} catch (const json::exception &e) {
		throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
	}
	return parse_config(doc, path.parent_path());
}

json config_to_json(const ExperimentConfig &config) {
	json datasets = json::array();
	for (const auto &d : config.datasets) {
		json item;
		item["name"] = d.name;
		item["horizon"] = d.horizon ? json(*d.horizon) : json(nullptr);
		if (const auto *s = std::get_if<synth::SynthSpec>(&d.source)) {
			item["synth"] = synth_to_json(*s);
		} else {
			const auto &e = std::get<data::DatasetEntry>(d.source);
			item["path"] = e.path.generic_string();
			item["value_column"] = e.value_column;
			item["time_column"] = e.time_column ? json(*e.time_column) : json(nullptr);
			item["missing_policy"] = std::string(data::to_string(e.missing_policy));
		}
		datasets.push_back(std::move(item));
	}

	json arima;
	arima["order"] = config.arima.order
	                     ? json::array({config.arima.order->p, config.arima.order->d, config.arima.order->q})
	                     : json(nullptr);
	arima["max_p"] = config.arima.max_p;
	arima["max_d"] = config.arima.max_d;
	arima["max_q"] = config.arima.max_q;
	arima["enforce_stationarity"] = config.arima.fit.enforce_stationarity;
	arima["intercept"] = intercept_name(config.arima.fit.intercept);
	arima["max_iterations"] = config.arima.fit.max_iterations;

	const auto &lt = config.llmtime;
	json llm;
	llm["alpha"] = lt.scaling.alpha;
	llm["beta"] = lt.scaling.beta;
	llm["precision"] = lt.scaling.precision;
	llm["model"] = lt.model_name;
	llm["num_samples"] = lt.num_samples;
	llm["temperature"] = lt.temperature;
	llm["tokens_per_value"] = lt.tokens_per_value_estimate ? json(*lt.tokens_per_value_estimate) : json(nullptr);
	llm["safety_factor"] = lt.safety_factor;
	llm["min_valid_samples"] = lt.min_valid_samples;
	llm["stop"] = lt.stop_sequences;
	llm["tune"] = config.tune_scaling;

	json provider;
	provider["kind"] = config.provider.kind;
	provider["mock_rule"] = config.provider.mock_rule;
	provider["mock_text"] = config.provider.mock_text;
	provider["base_url"] = config.provider.http.base_url;
	provider["api_key_env"] = config.provider.http.api_key_env;
	provider["max_attempts"] = config.provider.http.max_attempts;
	provider["max_concurrency"] = config.provider.http.max_concurrency;

	return {{"datasets", std::move(datasets)},
	        {"models", config.models},
	        {"arima", std::move(arima)},
	        {"llmtime", std::move(llm)},
	        {"provider", std::move(provider)},
	        {"output_dir", config.output_dir.generic_string()},
	        {"cache_dir", config.cache_dir.generic_string()},
	        {"seed", config.seed},
	        {"parallelism", config.parallelism}};
}

void restrict_to(ExperimentConfig &config, const std::optional<std::string> &dataset,
                 const std::optional<std::string> &model) {
	if (dataset) {
		std::erase_if(config.datasets, [&](const DatasetSpec &d) { return d.name != *dataset; });
		if (config.datasets.empty()) {
			throw ConfigError("no dataset named '" + *dataset + "' in config");
		}
	}
	if (model) {
		std::erase_if(config.models, [&](const std::string &m) { return m != *model; });
		if (config.models.empty()) {
			throw ConfigError("model '" + *model + "' is not enabled in config");
		}
	}
}

std::size_t ExperimentReport::succeeded() const {
	return static_cast<std::size_t>(std::ranges::count_if(rows, &ReportRow::ok));
}

std::shared_ptr<llm::CompletionProvider> make_provider(const ExperimentConfig &config) {
	std::shared_ptr<llm::CompletionProvider> inner;
	const auto &ps = config.provider;
	if (ps.kind == "mock") {
		inner = ps.mock_rule == "constant" ? std::shared_ptr<llm::CompletionProvider>(llm::MockProvider::constant(ps.mock_text))
		                                   : llm::MockProvider::repeat_last_period();
	} else if (ps.kind == "http") {
		inner = std::make_shared<llm::HttpCompletionProvider>(ps.http, llm::make_http_transport());
	}
	if (config.cache_dir.empty()) {
		if (!inner) {
			throw ConfigError("replay provider needs a cache_dir");
		}
		return inner;
	}
	return std::make_shared<llm::CachingProvider>(inner, config.cache_dir);
}

namespace {

struct Cell {
	std::size_t dataset;
	std::size_t model;
};

struct CellOutcome {
	ReportRow row;
	std::optional<Trace> trace;
};

struct LoadedDataset {
	std::optional<TimeSeries> series;
	std::size_t horizon = 0;
	std::optional<RowError> error;
};

LoadedDataset load_dataset(const DatasetSpec &spec) {
	LoadedDataset out;
	try {
		if (const auto *s = std::get_if<synth::SynthSpec>(&spec.source)) {
			out.series = synth::generate(*s);
		} else {
			out.series = data::load_csv(std::get<data::DatasetEntry>(spec.source));
		}
		out.horizon = spec.horizon.value_or(data::default_horizon(out.series->size()));
		if (out.horizon >= out.series->size()) {
			throw InvalidArgument("horizon " + std::to_string(out.horizon) + " leaves no training data");
		}
	} catch (const Error &e) {
		out.error = RowError{e.kind(), e.what()};
	} catch (const std::exception &e) {
		out.error = RowError{"internal", e.what()};
	}
	return out;
}

CellOutcome run_cell(const ExperimentConfig &config, const DatasetSpec &spec, const LoadedDataset &loaded,
                     const std::string &model, llm::CompletionProvider *provider) {
	CellOutcome outcome;
	ReportRow &row = outcome.row;
	row.dataset = spec.name;
	row.model = model;
	row.horizon = loaded.horizon;
	if (loaded.error) {
		row.error = loaded.error;
		return outcome;
	}

	const auto start = std::chrono::steady_clock::now();
	try {
		const auto split = train_test_split(*loaded.series, loaded.horizon);
		forecaster::ForecastResult result;
		if (model == "arima") {
			result = forecaster::arima_forecast(split.train, loaded.horizon, config.arima);
		} else {
			forecaster::LlmtimeConfig llm_config = config.llmtime;
			if (config.tune_scaling) {
				const auto grid = codec::default_grid(llm_config.scaling.precision);
				llm_config = forecaster::tune_config(split.train, loaded.horizon, llm_config, grid, *provider);
			}
			result = forecaster::llmtime_forecast(split.train, loaded.horizon, llm_config, *provider);
		}
		row.model_label = result.model_label;
		row.num_invalid = result.num_invalid;
		row.mse = mse(result.point, split.test.values());
		row.mae = mae(result.point, split.test.values());

		Trace trace;
		trace.dataset = spec.name;
		trace.model = model;
		const auto &series = *loaded.series;
		trace.t.assign(series.timestamps().begin(), series.timestamps().end());
		trace.actual.assign(series.values().begin(), series.values().end());
		trace.split_index = split.train.size();
		trace.predicted = std::move(result.point);
		trace.samples = std::move(result.samples);
		outcome.trace = std::move(trace);
	} catch (const ForecastFailure &e) {
		row.num_invalid = e.num_invalid();
		row.error = RowError{e.kind(), e.what()};
	} catch (const Error &e) {
		row.error = RowError{e.kind(), e.what()};
	} catch (const std::exception &e) {
		row.error = RowError{"internal", e.what()};
	}
	row.runtime_ms =
	    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
	return outcome;
}

} // namespace

ExperimentReport execute(const ExperimentConfig &config, std::shared_ptr<llm::CompletionProvider> provider) {
	config.validate();
	const bool wants_llm = std::ranges::find(config.models, "llmtime") != config.models.end();
	if (wants_llm && !provider) {
		provider = make_provider(config);
	}

	std::vector<LoadedDataset> loaded;
	loaded.reserve(config.datasets.size());
	for (const auto &spec : config.datasets) {
		loaded.push_back(load_dataset(spec));
	}

	std::vector<Cell> cells;
	for (std::size_t d = 0; d < config.datasets.size(); ++d) {
		for (std::size_t m = 0; m < config.models.size(); ++m) {
			cells.push_back({d, m});
		}
	}
	std::vector<CellOutcome> outcomes(cells.size());
	std::atomic<std::size_t> next{0};
	auto worker = [&] {
		for (std::size_t i = next++; i < cells.size(); i = next++) {
			const auto [d, m] = cells[i];
			outcomes[i] = run_cell(config, config.datasets[d], loaded[d], config.models[m], provider.get());
		}
	};
	{
		const std::size_t threads = std::min(config.parallelism, cells.size());
		std::vector<std::jthread> pool;
		for (std::size_t i = 1; i < threads; ++i) {
			pool.emplace_back(worker);
		}
		worker();
	}

	ExperimentReport report;
	report.version = version();
	report.config_echo = config_to_json(config);
	for (auto &outcome : outcomes) {
		report.rows.push_back(std::move(outcome.row));
		if (outcome.trace) {
			report.traces.push_back(std::move(*outcome.trace));
		}
	}
	return report;
}

ExperimentReport run(const ExperimentConfig &config, std::shared_ptr<llm::CompletionProvider> provider) {
	auto report = execute(config, std::move(provider));
	if (report.succeeded() == 0) {
		throw ExperimentFailure("every dataset x model run failed");
	}
	return report;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string g17(double v) {
	char buffer[40];
	std::snprintf(buffer, sizeof buffer, "%.17g", v);
	return buffer;
}

std::string g6(double v) {
	char buffer[40];
	std::snprintf(buffer, sizeof buffer, "%.6g", v);
	return buffer;
}

json optional_number(const std::optional<double> &v) {
	return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

void write_file(const std::filesystem::path &path, const std::string &content) {
	std::ofstream out(path, std::ios::binary | std::ios::trunc);
	if (!out) {
		throw IoError("cannot write " + path.string());
	}
	out << content;
	if (!out) {
		throw IoError("write failed for " + path.string());
	}
}

std::vector<std::string> ordered_unique(const std::vector<ReportRow> &rows, std::string ReportRow::*field) {
	std::vector<std::string> out;
	for (const auto &row : rows) {
		if (std::ranges::find(out, row.*field) == out.end()) {
			out.push_back(row.*field);
		}
	}
	return out;
}

} // namespace

std::string file_stem(const std::string &name) {
	std::string out;
	for (unsigned char c : name) {
		out += (std::isalnum(c) || c == '-' || c == '_' || c == '.') ? static_cast<char>(c) : '_';
	}
	return out.empty() ? "unnamed" : out;
}

RenderedTable emit_table(const ExperimentReport &report) {
	const auto datasets = ordered_unique(report.rows, &ReportRow::dataset);
	const auto models = ordered_unique(report.rows, &ReportRow::model);
	std::map<std::pair<std::string, std::string>, const ReportRow *> lookup;
	for (const auto &row : report.rows) {
		lookup[{row.dataset, row.model}] = &row;
	}

	std::vector<std::string> header{"dataset"};
	for (const auto &m : models) {
		header.push_back(m + "_mse");
		header.push_back(m + "_mae");
	}

	std::vector<std::vector<std::string>> text_rows;
	std::string csv;
	for (std::size_t i = 0; i < header.size(); ++i) {
		csv += (i ? "," : "") + header[i];
	}
	csv += '\n';

	for (const auto &dataset : datasets) {
		// Best (smallest) metric per row among successful cells.
		std::optional<double> best_mse;
		std::optional<double> best_mae;
		for (const auto &m : models) {
			const auto it = lookup.find({dataset, m});
			if (it == lookup.end() || !it->second->ok()) {
				continue;
			}
			best_mse = std::min(best_mse.value_or(HUGE_VAL), *it->second->mse);
			best_mae = std::min(best_mae.value_or(HUGE_VAL), *it->second->mae);
		}

		std::vector<std::string> cells{dataset};
		std::string csv_line = dataset;
		for (const auto &m : models) {
			const auto it = lookup.find({dataset, m});
			if (it == lookup.end() || !it->second->ok()) {
				cells.insert(cells.end(), {"ERR", "ERR"});
				csv_line += ",ERR,ERR";
				continue;
			}
			const ReportRow &row = *it->second;
			const bool flag_mse = models.size() > 1 && *row.mse == *best_mse;
			const bool flag_mae = models.size() > 1 && *row.mae == *best_mae;
			cells.push_back(g6(*row.mse) + (flag_mse ? "*" : ""));
			cells.push_back(g6(*row.mae) + (flag_mae ? "*" : ""));
			csv_line += "," + g17(*row.mse) + "," + g17(*row.mae);
		}
		text_rows.push_back(std::move(cells));
		csv += csv_line + '\n';
	}

	std::vector<std::size_t> widths(header.size());
	for (std::size_t i = 0; i < header.size(); ++i) {
		widths[i] = header[i].size();
		for (const auto &r : text_rows) {
			widths[i] = std::max(widths[i], r[i].size());
		}
	}
	auto render = [&](const std::vector<std::string> &cells) {
		std::string line;
		for (std::size_t i = 0; i < cells.size(); ++i) {
			std::string cell = cells[i];
			if (i + 1 < cells.size()) {
				cell.resize(widths[i], ' ');
				cell += "  ";
			}
			line += cell;
		}
		return line + '\n';
	};

	RenderedTable table;
	table.text = render(header);
	for (const auto &r : text_rows) {
		table.text += render(r);
	}
	table.csv = std::move(csv);
	return table;
}

json report_to_json(const ExperimentReport &report) {
	json rows = json::array();
	for (const auto &row : report.rows) {
		json item;
		item["dataset"] = row.dataset;
		item["model"] = row.model;
		item["horizon"] = row.horizon;
		item["model_label"] = row.model_label;
		item["mse"] = optional_number(row.mse);
		item["mae"] = optional_number(row.mae);
		item["num_invalid"] = row.num_invalid;
		item["error"] = row.error ? json{{"kind", row.error->kind}, {"message", row.error->message}} : json(nullptr);
		rows.push_back(std::move(item));
	}
	json traces = json::array();
	for (const auto &trace : report.traces) {
		json item;
		item["dataset"] = trace.dataset;
		item["model"] = trace.model;
		item["file"] = file_stem(trace.dataset) + "__" + file_stem(trace.model) + ".csv";
		item["split_index"] = trace.split_index;
		item["point"] = trace.predicted;
		item["samples"] = trace.samples;
		traces.push_back(std::move(item));
	}
	return {{"schema_version", kReportSchemaVersion},
	        {"version", report.version},
	        {"config", report.config_echo},
	        {"rows", std::move(rows)},
	        {"traces", std::move(traces)}};
}

namespace {

std::string trace_csv(const Trace &trace) {
	std::string out = "t,actual,predicted\n";
	for (std::size_t i = 0; i < trace.t.size(); ++i) {
		out += g17(trace.t[i]) + "," + g17(trace.actual[i]) + ",";
		if (i >= trace.split_index && i - trace.split_index < trace.predicted.size()) {
			out += g17(trace.predicted[i - trace.split_index]);
		}
		out += '\n';
	}
	return out;
}

std::string xml_escape(const std::string &text) {
	std::string out;
	for (char c : text) {
		switch (c) {
		case '&': out += "&amp;"; break;
		case '<': out += "&lt;"; break;
		case '>': out += "&gt;"; break;
		case '"': out += "&quot;"; break;
		default: out += c;
		}
	}
	return out;
}

std::string svg_chart(const std::string &dataset, const std::vector<const Trace *> &traces) {
	constexpr double kWidth = 800.0;
	constexpr double kHeight = 400.0;
	constexpr double kMargin = 40.0;
	static constexpr const char *kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};

	const Trace &base = *traces.front();
	double t_min = base.t.front();
	double t_max = base.t.back();
	double v_min = HUGE_VAL;
	double v_max = -HUGE_VAL;
	for (const auto *trace : traces) {
		for (double v : trace->actual) {
			v_min = std::min(v_min, v);
			v_max = std::max(v_max, v);
		}
		for (double v : trace->predicted) {
			if (std::isfinite(v)) {
				v_min = std::min(v_min, v);
				v_max = std::max(v_max, v);
			}
		}
	}
	if (!(t_max > t_min)) {
		t_max = t_min + 1.0;
	}
	if (!(v_max > v_min)) {
		v_max = v_min + 1.0;
	}
	auto x = [&](double t) { return kMargin + (t - t_min) / (t_max - t_min) * (kWidth - 2 * kMargin); };
	auto y = [&](double v) { return kHeight - kMargin - (v - v_min) / (v_max - v_min) * (kHeight - 2 * kMargin); };
	auto point = [](double px, double py) {
		char buffer[64];
		std::snprintf(buffer, sizeof buffer, "%.2f,%.2f ", px, py);
		return std::string(buffer);
	};

	std::ostringstream svg;
	svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
	    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
	svg << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
	svg << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin << "\" height=\""
	    << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"#888\"/>\n";
	svg << "<text x=\"" << kMargin << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << xml_escape(dataset)
	    << "</text>\n";

	std::string actual;
	for (std::size_t i = 0; i < base.t.size(); ++i) {
		actual += point(x(base.t[i]), y(base.actual[i]));
	}
	svg << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"" << actual << "\"/>\n";

	char split_line[160];
	const double split_x = x(base.t[std::min(base.split_index, base.t.size() - 1)]);
	std::snprintf(split_line, sizeof split_line,
	              "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#bbb\" stroke-dasharray=\"4 4\"/>\n",
	              split_x, kMargin, split_x, kHeight - kMargin);
	svg << split_line;

	for (std::size_t k = 0; k < traces.size(); ++k) {
		const Trace &trace = *traces[k];
		const char *color = kColors[k % std::size(kColors)];
		std::string pts;
		for (std::size_t i = 0; i < trace.predicted.size(); ++i) {
			const std::size_t idx = trace.split_index + i;
			if (idx < trace.t.size() && std::isfinite(trace.predicted[i])) {
				pts += point(x(trace.t[idx]), y(trace.predicted[i]));
			}
		}
		svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
		svg << "<text x=\"" << kWidth - kMargin - 120 << "\" y=\"" << kMargin + 16 + 16 * static_cast<double>(k)
		    << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">" << xml_escape(trace.model)
		    << "</text>\n";
	}
	svg << "</svg>\n";
	return svg.str();
}

} // namespace

std::vector<std::filesystem::path> emit_traces(const ExperimentReport &report, const std::filesystem::path &output_dir) {
	std::error_code ec;
	std::filesystem::create_directories(output_dir, ec);
	if (ec) {
		throw IoError("cannot create " + output_dir.string() + ": " + ec.message());
	}
	std::vector<std::filesystem::path> written;
	std::vector<std::string> datasets;
	for (const auto &trace : report.traces) {
		const auto path = output_dir / (file_stem(trace.dataset) + "__" + file_stem(trace.model) + ".csv");
		write_file(path, trace_csv(trace));
		written.push_back(path);
		if (std::ranges::find(datasets, trace.dataset) == datasets.end()) {
			datasets.push_back(trace.dataset);
		}
	}
	for (const auto &dataset : datasets) {
		std::vector<const Trace *> group;
		for (const auto &trace : report.traces) {
			if (trace.dataset == dataset) {
				group.push_back(&trace);
			}
		}
		const auto path = output_dir / (file_stem(dataset) + ".svg");
		write_file(path, svg_chart(dataset, group));
		written.push_back(path);
	}
	return written;
}

std::vector<std::filesystem::path> write_outputs(const ExperimentReport &report, const std::filesystem::path &output_dir) {
	std::error_code ec;
	std::filesystem::create_directories(output_dir, ec);
	if (ec) {
		throw IoError("cannot create " + output_dir.string() + ": " + ec.message());
	}
	std::vector<std::filesystem::path> written;
	const auto table = emit_table(report);
	write_file(output_dir / "report.json", report_to_json(report).dump(2) + "\n");
	write_file(output_dir / "table.txt", table.text);
	write_file(output_dir / "table.csv", table.csv);

	json timings = json::array();
	for (const auto &row : report.rows) {
		timings.push_back({{"dataset", row.dataset}, {"model", row.model}, {"runtime_ms", row.runtime_ms}});
	}
	write_file(output_dir / "timings.json", timings.dump(2) + "\n");
	written.insert(written.end(), {output_dir / "report.json", output_dir / "table.txt", output_dir / "table.csv",
	                               output_dir / "timings.json"});
	const auto traces = emit_traces(report, output_dir);
	written.insert(written.end(), traces.begin(), traces.end());
	return written;
}

} // namespace tsw::bench
