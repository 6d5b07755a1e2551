#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "sfront/config.hpp"
#include "sfront/error.hpp"
#include "sfront/io.hpp"

using namespace sfront;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sfront_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json minimal() {
  return json{{"schema_version", 1}, {"well", {{"kind", "quartic"}}}, {"forcing", {{"kind", "constant"}, {"g", 0.1}}}};
}

std::string code_of(const json& j) {
  try {
    ExperimentConfig::from_json(j);
  } catch (const ConfigError& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("numbers round-trip through text") {
  for (double x : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 6 * std::sqrt(2.0) * 0.1, 1e-300, 123456789.125}) {
    const std::string s = io::format_number(x);
    CHECK(std::stod(s) == x);
  }
  CHECK(io::format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(io::format_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("CSV round trip") {
  io::CsvTable t({"eps", "c", "label"});
  t.add_row({io::format_number(0.1), io::format_number(0.848744), "a"});
  t.add_row({io::format_number(0.05), "nan", "b"});
  const io::CsvTable back = io::CsvTable::parse(t.str());
  CHECK(back.header() == t.header());
  CHECK(back.rows() == t.rows());
  const auto c = back.numeric_column("c");
  CHECK(c[0] == 0.848744);
  CHECK(std::isnan(c[1]));
  CHECK_THROWS_AS(back.column("missing"), ConfigError);
  CHECK_THROWS_AS(back.numeric_column("label"), ConfigError);
  CHECK_THROWS_AS(t.add_row({"1"}), ConfigError);
}

TEST_CASE("sha256 of known strings") {
  CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("atomic writes replace whole files") {
  const fs::path dir = scratch_dir("atomic");
  const fs::path f = dir / "sub" / "out.txt";
  io::write_atomic(f, "first version, longer text\n");
  io::write_atomic(f, "second\n");
  CHECK(io::read_file(f) == "second\n");
  fs::path partial = f;
  partial += ".partial";
  CHECK_FALSE(fs::exists(partial));
  fs::remove_all(dir);
}

TEST_CASE("JSON-lines log") {
  io::JsonLog log;
  log.write({{"t", 0.0}, {"R", 1.5}});
  log.write({{"t", 0.5}, {"R", 1.9}});
  CHECK(log.size() == 2);
  const std::string text = log.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(json::parse(text.substr(0, text.find('\n')))["R"] == 1.5);
}

TEST_CASE("plots come with the plotted numbers") {
  io::Plot p;
  p.title = "speed error";
  p.logx = p.logy = true;
  p.series.push_back({"error", {0.1, 0.05}, {2e-4, 5e-5}});
  const std::string svg = io::render_svg(p);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("speed error") != std::string::npos);
  const io::CsvTable t = io::plot_table(p);
  CHECK(t.rows().size() == 2);
  const fs::path dir = scratch_dir("plot");
  const auto files = io::write_plot(dir / "chart", p);
  REQUIRE(files.size() == 2);
  CHECK(fs::exists(files[0]));
  CHECK(io::CsvTable::parse(io::read_file(files[1])).numeric_column("y")[1] == 5e-5);
  fs::remove_all(dir);
}

TEST_CASE("configuration parsing") {
  const ExperimentConfig c = ExperimentConfig::from_json(minimal());
  CHECK(c.g == 0.1);
  CHECK(c.make_well().c_W() == doctest::Approx(1.0 / (6 * std::sqrt(2.0))));

  const ExperimentConfig again = ExperimentConfig::from_json(c.to_json());
  CHECK(again.to_json() == c.to_json());

  json unknown = minimal();
  unknown["tolerances"] = {{"tol_cc", 1e-6}};
  CHECK(code_of(unknown) == "schema");

  json no_forcing = minimal();
  no_forcing.erase("forcing");
  CHECK(code_of(no_forcing) == "schema");

  json version = minimal();
  version["schema_version"] = 2;
  CHECK(code_of(version) == "schema");
  version.erase("schema_version");
  CHECK(code_of(version) == "schema");

  json wrong_type = minimal();
  wrong_type["forcing"]["g"] = "large";
  CHECK(code_of(wrong_type) == "schema");
}

TEST_CASE("configuration files") {
  const fs::path dir = scratch_dir("config");
  io::write_atomic(dir / "c.json", minimal().dump());
  CHECK(ExperimentConfig::from_file(dir / "c.json").forcing == "constant");
  io::write_atomic(dir / "bad.json", "{ not json");
  CHECK_THROWS_AS(ExperimentConfig::from_file(dir / "bad.json"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_file(dir / "absent.json"), ConfigError);
  fs::remove_all(dir);
}
