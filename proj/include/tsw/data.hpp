#pragma once

#include "tsw/core.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tsw::data {

enum class MissingPolicy { error, forward_fill, drop };

std::string_view to_string(MissingPolicy policy);
/// Throws ConfigError on unknown names.
MissingPolicy missing_policy_from_string(std::string_view name);

struct DatasetEntry {
	std::string name;
	std::filesystem::path path;
	/// Unset means "derive from the series length" (see default_horizon).
	std::optional<std::size_t> horizon;
	std::string value_column;
	std::optional<std::string> time_column;
	MissingPolicy missing_policy = MissingPolicy::error;
};

/// clamp(round(0.2 * length), 1, 60).
std::size_t default_horizon(std::size_t length);

/// Reads a header-first, comma-delimited CSV. The time column may hold
/// numbers or ISO-8601 dates (YYYY-MM-DD, YYYY-MM, optionally followed by a
/// time which is ignored), which become days since 1970-01-01. Blank, NA,
/// NaN and null cells count as missing.
TimeSeries load_csv(const DatasetEntry &entry);

/// Columns t,v; 17 significant digits.
void write_csv(const TimeSeries &series, const std::filesystem::path &path);

/// Dataset entries with a "path" from the "datasets" array of a bench JSON
/// config. Relative paths resolve against the config's directory.
std::vector<DatasetEntry> registry_from_config(const std::filesystem::path &config_path);

/// One file-backed entry from its JSON object. Throws ConfigError.
DatasetEntry dataset_entry_from_json(const nlohmann::json &object, const std::filesystem::path &base_dir);

/// Split one CSV line into fields (double-quoted fields may contain commas and "").
std::vector<std::string> split_csv_line(std::string_view line);

} // namespace tsw::data
