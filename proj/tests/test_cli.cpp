#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "freqbin/errors.hpp"
#include "freqbin/manifest.hpp"
#include "freqbin/runner.hpp"

using namespace freqbin;

namespace {

std::string error_pointer(const std::string& text) {
  try {
    parse_manifest(text);
  } catch (const ParseError& e) {
    return e.pointer();
  }
  return "<no error>";
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

Json load_schema() {
  std::ifstream f(std::string(FREQBIN_SOURCE_DIR) + "/schema/csv_columns.json");
  return Json::parse(f);
}

}  // namespace

TEST(Manifest, MinimalHomUsesDefaults) {
  const auto m = parse_manifest(R"({"schema_version": 1, "experiment": "hom"})");
  EXPECT_EQ(m.sweep.size(), 101u);
  EXPECT_EQ(m.seed, 1u);
  EXPECT_EQ(m.config, ChipConfig::measured_device());
  EXPECT_EQ(m.imperfections, Imperfections::device());
}

TEST(Manifest, CzOffOperatingPointNamesTheField) {
  const std::string text =
      R"({"schema_version": 1, "experiment": "cz", "config": {"dr2": {"transmissivity_T": 0.5}}})";
  EXPECT_EQ(error_pointer(text), "/config/dr2/transmissivity_T");
  EXPECT_NO_THROW(parse_manifest(text, true));
  EXPECT_TRUE(parse_manifest(text, true).allow_nonstandard);
}

TEST(Manifest, StrictParsing) {
  EXPECT_EQ(error_pointer("{not json"), "");
  EXPECT_EQ(error_pointer(R"({"schema_version": 1, "experiment": "hom", "seeed": 3})"), "/seeed");
  EXPECT_EQ(error_pointer(R"({"schema_version": 1, "experiment": "hom", "config": {"dr1": {"T": 0.5}}})"),
            "/config/dr1/T");
  EXPECT_EQ(error_pointer(R"({"schema_version": 2, "experiment": "hom"})"), "/schema_version");
  EXPECT_EQ(error_pointer(R"({"schema_version": 1})"), "/experiment");
  EXPECT_EQ(error_pointer(R"({"schema_version": 1, "experiment": "teleport"})"), "/experiment");
  EXPECT_EQ(error_pointer(R"({"schema_version": 1, "experiment": "hom", "sweep": {"values": [0.2, 1.5]}})"),
            "/sweep/values/1");
  EXPECT_EQ(error_pointer(R"({"schema_version": 1, "experiment": "cz", "sweep": {"values": [1]}})"), "/sweep");
  EXPECT_EQ(error_pointer(R"({"schema_version": 1, "experiment": "hom", "seed": -1})"), "/seed");
  EXPECT_EQ(error_pointer(R"({"schema_version": 1, "experiment": "hom", "imperfections": {"car": 0.5}})"),
            "/imperfections");
  EXPECT_EQ(error_pointer(R"({"schema_version": 1, "experiment": "fmzi", "options": {"mode": "both"}})"),
            "/options/mode");
}

TEST(Manifest, SweepForms) {
  const auto m = parse_manifest(
      R"({"schema_version": 1, "experiment": "fmzi", "sweep": {"start": 0, "stop": 1, "points": 5}})");
  EXPECT_EQ(m.sweep, (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(error_pointer(R"({"schema_version": 1, "experiment": "fmzi", "sweep": {"start": 0, "points": 5}})"),
            "/sweep");
}

TEST(Manifest, InfinityAsString) {
  const auto m = parse_manifest(R"({"schema_version": 1, "experiment": "bell", "imperfections": {"car": "inf"}})");
  EXPECT_TRUE(std::isinf(m.imperfections.car));
  EXPECT_EQ(m.config.dr2.transmissivity, 0.5);
}

TEST(Manifest, RoundTrip) {
  for (const auto& name : experiment_names()) {
    const auto m = parse_manifest(R"({"schema_version": 1, "experiment": ")" + name +
                                  R"(", "seed": 12, "imperfections": {"car": 31, "dark_rate_hz": 1000}})");
    EXPECT_EQ(parse_manifest(to_json(m).dump()), m) << name;
  }
}

TEST(Runner, SameSeedSameBytes) {
  const std::string text = R"({"schema_version": 1, "experiment": "bell", "seed": 5,
      "sweep": {"start": 0, "stop": 6.283185307179586, "points": 9},
      "imperfections": {"car": 31, "dark_rate_hz": 1000}})";
  const auto a = execute(parse_manifest(text));
  const auto b = execute(parse_manifest(text));
  EXPECT_EQ(a.result_json, b.result_json);
  EXPECT_EQ(a.sweep_csv, b.sweep_csv);
}

TEST(Runner, HomCsvHeader) {
  const auto a = execute(parse_manifest(R"({"schema_version": 1, "experiment": "hom"})"));
  const auto header = split(a.sweep_csv.substr(0, a.sweep_csv.find('\n')));
  ASSERT_GE(header.size(), 3u);
  EXPECT_EQ(header[0], "reflectivity");
  EXPECT_EQ(header[1], "p_cc");
  EXPECT_EQ(header[2], "visibility");
  EXPECT_NE(a.report.find("visibility_hom"), std::string::npos);
}

TEST(Runner, CsvColumnsMatchSchemaAndAreFinite) {
  const Json schema = load_schema();
  const std::vector<std::pair<std::string, std::string>> runs{
      {"hom", R"({"schema_version": 1, "experiment": "hom"})"},
      {"fmzi", R"({"schema_version": 1, "experiment": "fmzi"})"},
      {"fmzi_quantum", R"({"schema_version": 1, "experiment": "fmzi", "options": {"mode": "quantum"}})"},
      {"bell", R"({"schema_version": 1, "experiment": "bell"})"},
      {"cz", R"({"schema_version": 1, "experiment": "cz"})"},
      {"spectroscopy", R"({"schema_version": 1, "experiment": "spectroscopy"})"},
      {"spectroscopy_filters", R"({"schema_version": 1, "experiment": "spectroscopy", "options": {"target": "filters"}})"},
  };
  for (const auto& [key, text] : runs) {
    const auto a = execute(parse_manifest(text));
    ASSERT_TRUE(schema.contains(key)) << key;
    EXPECT_EQ(csv_columns(a.result), schema.at(key).at("columns").get<std::vector<std::string>>()) << key;
    std::stringstream lines(a.sweep_csv);
    std::string line;
    std::getline(lines, line);
    const std::size_t width = split(line).size();
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
      const auto cells = split(line);
      ASSERT_EQ(cells.size(), width);
      for (const auto& c : cells) {
        std::size_t used = 0;
        const double v = std::stod(c, &used);
        EXPECT_EQ(used, c.size());
        EXPECT_TRUE(std::isfinite(v));
      }
      ++rows;
    }
    EXPECT_EQ(rows, a.result.points.size()) << key;
  }
}

TEST(Runner, CzReportHasBound) {
  const auto a = execute(parse_manifest(R"({"schema_version": 1, "experiment": "cz", "imperfections": {"car": 31, "dark_rate_hz": 1000, "efficiency": false, "sideband_leakage": false, "filter_crosstalk": false}})"));
  EXPECT_NE(a.report.find("hofmann_bound"), std::string::npos);
  EXPECT_EQ(a.result.points.size(), 8u);
}

TEST(Runner, OutputDirPriority) {
  RunManifest m;
  m.output_dir = "from-manifest";
  EXPECT_EQ(resolve_output_dir(m, "from-cli"), "from-cli");
  EXPECT_EQ(resolve_output_dir(m), "from-manifest");
  m.output_dir.clear();
  ::setenv(kOutputDirEnv, "from-env", 1);
  EXPECT_EQ(resolve_output_dir(m), "from-env");
  ::unsetenv(kOutputDirEnv);
  EXPECT_EQ(resolve_output_dir(m), kDefaultOutputDir);
}

TEST(Runner, WritesArtifacts) {
  const auto dir = std::filesystem::temp_directory_path() / "freqbin-test-artifacts";
  std::filesystem::remove_all(dir);
  const auto a = execute(parse_manifest(R"({"schema_version": 1, "experiment": "hom", "sweep": {"values": [0.5]}})"));
  write_artifacts(a, dir);
  for (const char* f : {"result.json", "sweep.csv", "report.txt"}) EXPECT_TRUE(std::filesystem::exists(dir / f));
  std::ifstream in(dir / "result.json");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), a.result_json);
  std::filesystem::remove_all(dir);
}

TEST(Runner, ListsExperiments) {
  const std::string text = list_experiments();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  EXPECT_NE(text.find("hom"), std::string::npos);
  EXPECT_NE(text.find("cz"), std::string::npos);
}
