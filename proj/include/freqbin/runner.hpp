#pragma once

// Manifest execution and the three output artifacts of a run.

#include <filesystem>
#include <string>
#include <vector>

#include "freqbin/manifest.hpp"

namespace freqbin {

/// Environment variable consulted for the output directory when neither the
/// command line nor the manifest names one.
inline constexpr const char* kOutputDirEnv = "FREQBIN_OUTPUT_DIR";
inline constexpr const char* kDefaultOutputDir = "freqbin-out";

struct RunArtifacts {
  ExperimentResult result;
  /// result.json: the result plus the resolved manifest under "manifest".
  std::string result_json;
  std::string sweep_csv;
  std::string report;
};

/// Runs the manifest's experiment. No file IO.
RunArtifacts execute(const RunManifest& m);

/// CSV header then one row per sweep point. Throws std::runtime_error if a
/// value is not finite.
std::string sweep_csv(const ExperimentResult& r);
std::vector<std::string> csv_columns(const ExperimentResult& r);

/// Metrics against the reference targets for the experiment.
std::string report_text(const ExperimentResult& r, const RunManifest& m);

/// `cli_out` if non-empty, else the manifest's output_dir, else the
/// environment variable, else kDefaultOutputDir.
std::filesystem::path resolve_output_dir(const RunManifest& m, const std::string& cli_out = {});

/// Creates `dir` and writes result.json, sweep.csv and report.txt.
void write_artifacts(const RunArtifacts& a, const std::filesystem::path& dir);

/// One line per experiment: name, description, figure anchor.
std::string list_experiments();

}  // namespace freqbin
