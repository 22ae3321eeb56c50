// freqbin: run experiment manifests, list experiments, fit measured spectra.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "freqbin/errors.hpp"
#include "freqbin/resonator.hpp"
#include "freqbin/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, const std::string& out,
            bool allow_nonstandard) {
  freqbin::RunManifest m = freqbin::parse_manifest(read_file(path), allow_nonstandard);
  if (seed) m.seed = *seed;
  const auto dir = freqbin::resolve_output_dir(m, out);
  const auto artifacts = freqbin::execute(m);
  freqbin::write_artifacts(artifacts, dir);
  std::cout << artifacts.report;
  std::cout << "\nwrote " << (dir / "result.json").string() << ", sweep.csv, report.txt\n";
  return 0;
}

// Two-column CSV with header detuning_ghz,transmission.
int cmd_fit(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "detuning_ghz,transmission") {
    throw std::runtime_error(path + ": expected header detuning_ghz,transmission");
  }
  std::vector<double> x, y;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error(path + ":" + std::to_string(row) + ": expected two columns");
    try {
      x.push_back(std::stod(line.substr(0, comma)));
      y.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(row) + ": not a number");
    }
  }
  const freqbin::DoubletFit fit = freqbin::fit_doublet(x, y);
  freqbin::Json j = {{"two_g_ghz", fit.two_g_ghz},
                     {"center_ghz", fit.center_ghz},
                     {"linewidths_ghz", fit.linewidths_ghz},
                     {"dip_depths", fit.dip_depths},
                     {"rms_residual", fit.rms_residual},
                     {"iterations", fit.iterations},
                     {"model", freqbin::to_json(fit.model)}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-bin photonic processor simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment manifest");
  std::string manifest_path, out_dir;
  std::optional<std::uint64_t> seed;
  bool allow_nonstandard = false;
  run->add_option("manifest", manifest_path, "manifest JSON file")->required();
  run->add_option("--seed", seed, "override the manifest seed");
  run->add_option("--out", out_dir, "output directory (default: manifest, then $FREQBIN_OUTPUT_DIR)");
  run->add_flag("--allow-nonstandard", allow_nonstandard, "permit CZ runs off the standard operating point");

  auto* list = app.add_subcommand("list", "list the available experiments");

  auto* fit = app.add_subcommand("fit", "fit a double-resonator doublet to a measured spectrum");
  std::string spectrum_path;
  fit->add_option("spectrum", spectrum_path, "CSV with header detuning_ghz,transmission")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(manifest_path, seed, out_dir, allow_nonstandard);
    if (*list) {
      std::cout << freqbin::list_experiments();
      return 0;
    }
    if (*fit) return cmd_fit(spectrum_path);
  } catch (const freqbin::ParseError& e) {
    std::cerr << "manifest error: " << e.what() << "\n";
    return 2;
  } catch (const freqbin::FitError& e) {
    std::cerr << "fit failed: " << e.what() << " (best residual " << e.best_residual() << ")\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
