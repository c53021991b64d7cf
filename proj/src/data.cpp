#include "tsw/data.hpp"

#include "tsw/errors.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace tsw::data {

std::string_view to_string(MissingPolicy policy) {
	switch (policy) {
	case MissingPolicy::error:
		return "error";
	case MissingPolicy::forward_fill:
		return "forward_fill";
	case MissingPolicy::drop:
		return "drop";
	}
	return "error";
}

MissingPolicy missing_policy_from_string(std::string_view name) {
	if (name == "error") {
		return MissingPolicy::error;
	}
	if (name == "forward_fill") {
		return MissingPolicy::forward_fill;
	}
	if (name == "drop") {
		return MissingPolicy::drop;
	}
	throw ConfigError("unknown missing_policy '" + std::string(name) + "'");
}

std::size_t default_horizon(std::size_t length) {
	const auto h = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(length)));
	return std::clamp<std::size_t>(h, 1, 60);
}

std::vector<std::string> split_csv_line(std::string_view line) {
	std::vector<std::string> fields;
	std::string field;
	bool quoted = false;
	for (std::size_t i = 0; i < line.size(); ++i) {
		const char c = line[i];
		if (quoted) {
			if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
				field += '"';
				++i;
			} else if (c == '"') {
				quoted = false;
			} else {
				field += c;
			}
		} else if (c == '"') {
			quoted = true;
		} else if (c == ',') {
			fields.push_back(std::move(field));
			field.clear();
		} else {
			field += c;
		}
	}
	fields.push_back(std::move(field));
	return fields;
}

namespace {

std::string_view trim(std::string_view s) {
	const auto first = s.find_first_not_of(" \t\r");
	if (first == std::string_view::npos) {
		return {};
	}
	const auto last = s.find_last_not_of(" \t\r");
	return s.substr(first, last - first + 1);
}

bool is_missing(std::string_view cell) {
	cell = trim(cell);
	return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "null" || cell == "N/A";
}

std::optional<double> parse_real(std::string_view cell) {
	cell = trim(cell);
	if (!cell.empty() && cell.front() == '+') {
		cell.remove_prefix(1);
	}
	double value = 0.0;
	const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
	if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
		return std::nullopt;
	}
	return value;
}

template <typename Int> std::optional<Int> parse_int(std::string_view s) {
	Int value{};
	const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
	if (ec != std::errc{} || ptr != s.data() + s.size()) {
		return std::nullopt;
	}
	return value;
}

// YYYY-MM-DD or YYYY-MM, optionally followed by 'T' or ' ' and a time of day.
std::optional<double> parse_iso_date(std::string_view cell) {
	cell = trim(cell);
	if (const auto cut = cell.find_first_of("T "); cut != std::string_view::npos) {
		cell = cell.substr(0, cut);
	}
	if (cell.size() != 7 && cell.size() != 10) {
		return std::nullopt;
	}
	if (cell[4] != '-' || (cell.size() == 10 && cell[7] != '-')) {
		return std::nullopt;
	}
	const auto year = parse_int<int>(cell.substr(0, 4));
	const auto month = parse_int<unsigned>(cell.substr(5, 2));
	const auto day = cell.size() == 10 ? parse_int<unsigned>(cell.substr(8, 2)) : std::optional<unsigned>(1);
	if (!year || !month || !day) {
		return std::nullopt;
	}
	const std::chrono::year_month_day ymd{std::chrono::year{*year}, std::chrono::month{*month},
	                                      std::chrono::day{*day}};
	if (!ymd.ok()) {
		return std::nullopt;
	}
	return static_cast<double>(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

std::size_t column_index(const std::vector<std::string> &header, const std::string &name, const DatasetEntry &entry) {
	for (std::size_t i = 0; i < header.size(); ++i) {
		if (trim(header[i]) == name) {
			return i;
		}
	}
	throw SchemaError("dataset '" + entry.name + "': column '" + name + "' not found in " + entry.path.string());
}

} // namespace

TimeSeries load_csv(const DatasetEntry &entry) {
	std::ifstream in(entry.path, std::ios::binary);
	if (!in) {
		throw IoError("cannot open dataset file " + entry.path.string());
	}
	std::string line;
	if (!std::getline(in, line)) {
		throw SchemaError("dataset file " + entry.path.string() + " has no header row");
	}
	if (line.starts_with("\xEF\xBB\xBF")) {
		line.erase(0, 3);
	}
	const auto header = split_csv_line(line);
	const std::size_t value_col = column_index(header, entry.value_column, entry);
	const std::optional<std::size_t> time_col =
	    entry.time_column ? std::optional(column_index(header, *entry.time_column, entry)) : std::nullopt;

	std::vector<double> timestamps;
	std::vector<double> values;
	std::size_t row = 0;
	while (std::getline(in, line)) {
		if (trim(line).empty()) {
			continue;
		}
		++row;
		const auto fields = split_csv_line(line);
		const auto cell = [&](std::size_t col) -> std::string_view {
			return col < fields.size() ? std::string_view(fields[col]) : std::string_view{};
		};

		double t = static_cast<double>(row - 1);
		if (time_col) {
			const auto raw = cell(*time_col);
			auto parsed = parse_iso_date(raw);
			if (!parsed) {
				parsed = parse_real(raw);
			}
			if (!parsed || !std::isfinite(*parsed)) {
				throw DataError("dataset '" + entry.name + "': unparseable time '" + std::string(raw) + "' at row " +
				                    std::to_string(row),
				                row);
			}
			t = *parsed;
		}

		const auto raw_value = cell(value_col);
		std::optional<double> value;
		if (!is_missing(raw_value)) {
			value = parse_real(raw_value);
			if (!value) {
				throw DataError("dataset '" + entry.name + "': unparseable value '" + std::string(raw_value) +
				                    "' at row " + std::to_string(row),
				                row);
			}
		}
		if (!value || !std::isfinite(*value)) {
			switch (entry.missing_policy) {
			case MissingPolicy::error:
				throw DataError("dataset '" + entry.name + "': missing value at row " + std::to_string(row), row);
			case MissingPolicy::forward_fill:
				if (values.empty()) {
					throw DataError("dataset '" + entry.name + "': cannot forward-fill row " + std::to_string(row) +
					                    " (no earlier value)",
					                row);
				}
				value = values.back();
				break;
			case MissingPolicy::drop:
				continue;
			}
		}
		if (!timestamps.empty() && !(t > timestamps.back())) {
			throw DataError("dataset '" + entry.name + "': time not increasing at row " + std::to_string(row), row);
		}
		timestamps.push_back(t);
		values.push_back(*value);
	}
	return TimeSeries(std::move(timestamps), std::move(values), entry.name);
}

void write_csv(const TimeSeries &series, const std::filesystem::path &path) {
	std::ofstream out(path, std::ios::binary | std::ios::trunc);
	if (!out) {
		throw IoError("cannot write " + path.string());
	}
	out << "t,v\n";
	char buffer[64];
	for (std::size_t i = 0; i < series.size(); ++i) {
		std::snprintf(buffer, sizeof buffer, "%.17g,", series.timestamps()[i]);
		out << buffer;
		std::snprintf(buffer, sizeof buffer, "%.17g\n", series.values()[i]);
		out << buffer;
	}
	if (!out) {
		throw IoError("write failed for " + path.string());
	}
}

DatasetEntry dataset_entry_from_json(const nlohmann::json &object, const std::filesystem::path &base_dir) {
	try {
		DatasetEntry entry;
		entry.name = object.at("name").get<std::string>();
		if (entry.name.empty()) {
			throw ConfigError("dataset with an empty name");
		}
		std::filesystem::path path = object.at("path").get<std::string>();
		entry.path = path.is_relative() ? base_dir / path : path;
		if (object.contains("horizon") && !object.at("horizon").is_null()) {
			const auto horizon = object.at("horizon").get<long long>();
			if (horizon <= 0) {
				throw ConfigError("dataset '" + entry.name + "': horizon must be positive");
			}
			entry.horizon = static_cast<std::size_t>(horizon);
		}
		entry.value_column = object.value("value_column", std::string("value"));
		if (object.contains("time_column") && !object.at("time_column").is_null()) {
			entry.time_column = object.at("time_column").get<std::string>();
		}
		entry.missing_policy = missing_policy_from_string(object.value("missing_policy", std::string("error")));
		return entry;
	} catch (const nlohmann::json::exception &e) {
		throw ConfigError(std::string("malformed dataset entry: ") + e.what());
	}
}

std::vector<DatasetEntry> registry_from_config(const std::filesystem::path &config_path) {
	std::ifstream in(config_path);
	if (!in) {
		throw IoError("cannot open config " + config_path.string());
	}
	nlohmann::json doc;
	try {
		doc = nlohmann::json::parse(in);
	} catch (const nlohmann::json::exception &e) {
		throw ConfigError("config " + config_path.string() + " is not valid JSON: " + e.what());
	}
	std::vector<DatasetEntry> entries;
	if (!doc.contains("datasets")) {
		return entries;
	}
	if (!doc.at("datasets").is_array()) {
		throw ConfigError("config: 'datasets' must be an array");
	}
	std::set<std::string> names;
	const auto base_dir = config_path.parent_path();
	for (const auto &object : doc.at("datasets")) {
		if (!object.is_object()) {
			throw ConfigError("config: dataset entries must be objects");
		}
		const std::string name = object.value("name", std::string{});
		if (!names.insert(name).second) {
			throw ConfigError("config: duplicate dataset name '" + name + "'");
		}
		if (!object.contains("path")) {
			continue;
		}
		entries.push_back(dataset_entry_from_json(object, base_dir));
	}
	return entries;
}

} // namespace tsw::data
