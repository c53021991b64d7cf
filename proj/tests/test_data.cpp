#include "support.hpp"
#include "tsw/data.hpp"
#include "tsw/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace tsw;
using namespace tsw::data;

namespace {

DatasetEntry entry_for(const std::filesystem::path &path, MissingPolicy policy = MissingPolicy::error) {
	DatasetEntry e;
	e.name = "fixture";
	e.path = path;
	e.value_column = "v";
	e.time_column = "t";
	e.missing_policy = policy;
	return e;
}

} // namespace

TEST_SUITE("data") {

TEST_CASE("load a simple csv") {
	testing::ScratchDir dir("csv");
	testing::spit(dir.path() / "a.csv", "t,v\n0,1.5\n1,2.5\n");
	const auto s = load_csv(entry_for(dir.path() / "a.csv"));
	CHECK(s == TimeSeries({0, 1}, {1.5, 2.5}, "fixture"));
	CHECK(load_csv(entry_for(dir.path() / "a.csv")) == s);
}

TEST_CASE("row index without a time column, quoted headers, CRLF") {
	testing::ScratchDir dir("csv");
	testing::spit(dir.path() / "b.csv", "\"Month\",\"v\"\r\n\"x\",3\r\n\"y\",4\r\n");
	auto e = entry_for(dir.path() / "b.csv");
	e.time_column.reset();
	const auto s = load_csv(e);
	CHECK(std::vector(s.timestamps().begin(), s.timestamps().end()) == std::vector<double>{0, 1});
	CHECK(std::vector(s.values().begin(), s.values().end()) == std::vector<double>{3, 4});
}

TEST_CASE("ISO dates become epoch days") {
	testing::ScratchDir dir("csv");
	testing::spit(dir.path() / "d.csv", "t,v\n1970-01-02,1\n1949-02,2\n");
	CHECK_THROWS_AS(load_csv(entry_for(dir.path() / "d.csv")), DataError); // not increasing
	testing::spit(dir.path() / "d.csv", "t,v\n1949-01,1\n1949-02,2\n2000-03-01T12:00:00,3\n");
	const auto s = load_csv(entry_for(dir.path() / "d.csv"));
	CHECK(s.timestamps()[0] == -7670.0);
	CHECK(s.timestamps()[1] == -7639.0);
	CHECK(s.timestamps()[2] == 11017.0);
}

TEST_CASE("missing values") {
	testing::ScratchDir dir("csv");
	testing::spit(dir.path() / "m.csv", "t,v\n0,1\n1,2\n2,\n3,NA\n4,5\n");
	SUBCASE("forward fill") {
		const auto s = load_csv(entry_for(dir.path() / "m.csv", MissingPolicy::forward_fill));
		CHECK(std::vector(s.values().begin(), s.values().end()) == std::vector<double>{1, 2, 2, 2, 5});
	}
	SUBCASE("drop") {
		const auto s = load_csv(entry_for(dir.path() / "m.csv", MissingPolicy::drop));
		CHECK(std::vector(s.values().begin(), s.values().end()) == std::vector<double>{1, 2, 5});
		CHECK(std::vector(s.timestamps().begin(), s.timestamps().end()) == std::vector<double>{0, 1, 4});
	}
	SUBCASE("error names the row") {
		try {
			load_csv(entry_for(dir.path() / "m.csv"));
			FAIL("expected DataError");
		} catch (const DataError &e) {
			CHECK(e.row() == 3);
			CHECK(std::string(e.what()).find("row 3") != std::string::npos);
		}
	}
}

TEST_CASE("load errors") {
	testing::ScratchDir dir("csv");
	CHECK_THROWS_AS(load_csv(entry_for(dir.path() / "absent.csv")), IoError);
	testing::spit(dir.path() / "c.csv", "t,w\n0,1\n");
	CHECK_THROWS_AS(load_csv(entry_for(dir.path() / "c.csv")), SchemaError);
	testing::spit(dir.path() / "e.csv", "t,v\n0,abc\n");
	CHECK_THROWS_AS(load_csv(entry_for(dir.path() / "e.csv")), DataError);
	testing::spit(dir.path() / "f.csv", "");
	CHECK_THROWS_AS(load_csv(entry_for(dir.path() / "f.csv")), SchemaError);
}

TEST_CASE("csv writer round trip") {
	testing::ScratchDir dir("csv");
	const TimeSeries s({0.1, 1.0 / 3.0, 7.25}, {std::acos(-1.0), -1e-17, 12345.678901234567}, "fixture");
	write_csv(s, dir.path() / "out.csv");
	const auto back = load_csv(entry_for(dir.path() / "out.csv"));
	for (std::size_t i = 0; i < s.size(); ++i) {
		CHECK(back.values()[i] == doctest::Approx(s.values()[i]).epsilon(1e-9));
		CHECK(back.timestamps()[i] == doctest::Approx(s.timestamps()[i]).epsilon(1e-9));
	}
	CHECK(testing::slurp(dir.path() / "out.csv").starts_with("t,v\n"));
}

TEST_CASE("default horizon") {
	CHECK(default_horizon(144) == 29);
	CHECK(default_horizon(2) == 1);
	CHECK(default_horizon(1000) == 60);
}

TEST_CASE("registry") {
	const std::filesystem::path fixtures = TSW_FIXTURES;
	const auto entries = registry_from_config(fixtures / "registry.json");
	REQUIRE(entries.size() == 1);
	CHECK(entries[0].name == "AirPassengers");
	CHECK(entries[0].horizon == 29u);
	CHECK(entries[0].value_column == "#Passengers");
	CHECK(entries[0].time_column == "Month");

	testing::ScratchDir dir("registry");
	testing::spit(dir.path() / "empty.json", R"({"datasets": []})");
	CHECK(registry_from_config(dir.path() / "empty.json").empty());
	testing::spit(dir.path() / "dup.json",
	              R"({"datasets": [{"name": "a", "path": "x.csv"}, {"name": "a", "path": "y.csv"}]})");
	CHECK_THROWS_AS(registry_from_config(dir.path() / "dup.json"), ConfigError);
	testing::spit(dir.path() / "zero.json", R"({"datasets": [{"name": "a", "path": "x.csv", "horizon": 0}]})");
	CHECK_THROWS_AS(registry_from_config(dir.path() / "zero.json"), ConfigError);
	testing::spit(dir.path() / "policy.json",
	              R"({"datasets": [{"name": "a", "path": "x.csv", "missing_policy": "guess"}]})");
	CHECK_THROWS_AS(registry_from_config(dir.path() / "policy.json"), ConfigError);
	testing::spit(dir.path() / "rel.json", R"({"datasets": [{"name": "a", "path": "sub/x.csv"}]})");
	CHECK(registry_from_config(dir.path() / "rel.json")[0].path == dir.path() / "sub/x.csv");
}

TEST_CASE("csv line splitting") {
	CHECK(split_csv_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
	CHECK(split_csv_line(R"("x,y","say ""hi""")") == std::vector<std::string>{"x,y", "say \"hi\""});
}

}
