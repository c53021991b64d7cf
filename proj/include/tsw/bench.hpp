#pragma once

#include "tsw/data.hpp"
#include "tsw/forecaster.hpp"
#include "tsw/llm.hpp"
#include "tsw/synth.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tsw::bench {

inline constexpr int kReportSchemaVersion = 1;

/// Artifact version stamped into reports.
std::string version();

struct DatasetSpec {
	std::string name;
	std::variant<data::DatasetEntry, synth::SynthSpec> source;
	/// Overrides the entry's horizon; synthetic sets default to 100.
	std::optional<std::size_t> horizon;
};

/// Named synthetic sweeps: 500 points on [0, 8*pi], horizon 100, noise seed = `seed`.
///   almost_periodic_sigma_sweep  sigma in {0, 0.1, 0.2, 0.3, 0.4}
///   sine_sigma_sweep             sigma in {0, 0.05, 0.1, 0.2}
///   sine_plus_trend              sigma = 0.02
/// Throws ConfigError on unknown names.
std::vector<DatasetSpec> expand_preset(const std::string &preset, std::uint64_t seed);

struct ProviderSettings {
	/// "mock", "http" or "replay" (cache only, misses fail).
	std::string kind = "mock";
	/// Mock behaviour: "repeat_last_period" or "constant".
	std::string mock_rule = "repeat_last_period";
	std::string mock_text;
	llm::HttpProviderConfig http;
};

struct ExperimentConfig {
	std::vector<DatasetSpec> datasets;
	std::vector<std::string> models;
	forecaster::LlmtimeConfig llmtime;
	bool tune_scaling = false;
	ProviderSettings provider;
	forecaster::ArimaSettings arima;
	std::filesystem::path output_dir = "out";
	/// Empty: no record/replay cache.
	std::filesystem::path cache_dir;
	std::uint64_t seed = 0;
	std::size_t parallelism = 1;

	/// Throws ConfigError.
	void validate() const;
};

/// Parses a config document. Dataset paths resolve against `base_dir`.
ExperimentConfig parse_config(const nlohmann::json &doc, const std::filesystem::path &base_dir);
ExperimentConfig load_config(const std::filesystem::path &path);
/// Fully resolved config, as echoed into reports.
nlohmann::json config_to_json(const ExperimentConfig &config);

/// Keeps only the named dataset/model. Throws ConfigError when nothing matches.
void restrict_to(ExperimentConfig &config, const std::optional<std::string> &dataset,
                 const std::optional<std::string> &model);

struct RowError {
	std::string kind;
	std::string message;
};

struct ReportRow {
	std::string dataset;
	std::string model;
	std::size_t horizon = 0;
	std::string model_label;
	std::optional<double> mse;
	std::optional<double> mae;
	double runtime_ms = 0.0;
	std::size_t num_invalid = 0;
	std::optional<RowError> error;

	bool ok() const noexcept { return !error.has_value(); }
};

struct Trace {
	std::string dataset;
	std::string model;
	std::vector<double> t;
	std::vector<double> actual;
	/// Forecast for indices >= split_index.
	std::vector<double> predicted;
	std::size_t split_index = 0;
	std::vector<std::vector<double>> samples;
};

struct ExperimentReport {
	std::vector<ReportRow> rows;
	std::vector<Trace> traces;
	nlohmann::json config_echo;
	std::string version;

	std::size_t succeeded() const;
};

/// Provider described by the config, wrapped in the record/replay cache when a cache_dir is set.
std::shared_ptr<llm::CompletionProvider> make_provider(const ExperimentConfig &config);

/// Runs every dataset x model cell. Per-cell failures are recorded in rows.
/// Uses `provider` when given, otherwise make_provider(config) (only built if
/// an llmtime model is requested).
ExperimentReport execute(const ExperimentConfig &config, std::shared_ptr<llm::CompletionProvider> provider = nullptr);

/// execute() that throws ExperimentFailure when no cell succeeded.
ExperimentReport run(const ExperimentConfig &config, std::shared_ptr<llm::CompletionProvider> provider = nullptr);

struct RenderedTable {
	std::string text;
	std::string csv;
};

/// Datasets as rows, <model>_mse / <model>_mae columns. The smallest MSE and
/// MAE of each row carry a trailing '*' in the text form; failed cells read ERR.
RenderedTable emit_table(const ExperimentReport &report);

nlohmann::json report_to_json(const ExperimentReport &report);

/// One <dataset>__<model>.csv per trace (t,actual,predicted) and one
/// <dataset>.svg per dataset. Returns the written paths.
std::vector<std::filesystem::path> emit_traces(const ExperimentReport &report, const std::filesystem::path &output_dir);

/// report.json, table.txt, table.csv, timings.json and the traces.
std::vector<std::filesystem::path> write_outputs(const ExperimentReport &report, const std::filesystem::path &output_dir);

/// File-name-safe rendering of a dataset or model name.
std::string file_stem(const std::string &name);

} // namespace tsw::bench
