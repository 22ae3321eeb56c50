#pragma once

// Run manifests: the JSON documents the command-line tool executes.

#include <cstdint>
#include <string>
#include <vector>

#include "freqbin/experiments.hpp"
#include "freqbin/serialize.hpp"

namespace freqbin {

inline constexpr int kManifestSchemaVersion = 1;

enum class CzBasisChoice { xz, zx, both };

struct RunOptions {
  FmziMode mode = FmziMode::classical;
  CzBasisChoice basis = CzBasisChoice::both;
  SpectroscopyTarget target = SpectroscopyTarget::dr1;
  double noise_sigma = 0.0;
  std::vector<double> eo_voltages{-10.0, -5.0, 0.0, 5.0, 10.0};

  friend bool operator==(const RunOptions&, const RunOptions&) = default;
};

struct RunManifest {
  int schema_version = kManifestSchemaVersion;
  std::string experiment;
  ChipConfig config = ChipConfig::measured_device();
  Imperfections imperfections = Imperfections::device();
  /// Resolved sweep values (phases, reflectivities or detunings).
  std::vector<double> sweep;
  RunOptions options;
  std::uint64_t seed = 1;
  std::string output_dir;
  bool allow_nonstandard = false;

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

/// Names accepted in the "experiment" field, in listing order.
const std::vector<std::string>& experiment_names();

/// Default sweep for an experiment (empty for cz).
std::vector<double> default_sweep(const std::string& experiment, const RunOptions& opts);

/// Strict parse. `allow_nonstandard` (or the manifest key of the same name)
/// permits CZ runs off the 1:2 / 1:3 operating point. Throws ParseError.
RunManifest parse_manifest(const std::string& text, bool allow_nonstandard = false);

/// Fully resolved manifest; parse_manifest(to_json(m).dump()) == m.
Json to_json(const RunManifest& m);

}  // namespace freqbin
