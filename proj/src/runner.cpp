#include "freqbin/runner.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace freqbin {

namespace {

struct ExperimentInfo {
  const char* name;
  const char* anchor;
  const char* description;
};

constexpr ExperimentInfo kExperiments[] = {
    {"spectroscopy", "Fig. 2b-g", "laser scan of a double resonator (doublet fit, EO slope) or the filter comb"},
    {"fmzi", "Fig. 3a-b", "frequency-bin Mach-Zehnder fringes, classical light or heralded single photons"},
    {"hom", "Fig. 3c-d", "two-photon interference at DR3 versus reflectivity"},
    {"cz", "Fig. 4a-b", "post-selected CZ truth tables in the XZ and ZX bases and the two-basis bound"},
    {"bell", "Fig. 4c-d", "Bell-state projection fringes N++, N+-, N-+, N-- versus phase"},
};

// Columns that lead the CSV, in order; remaining values follow sorted.
std::vector<std::string> leading_columns(const std::string& experiment) {
  if (experiment == "hom") return {"p_cc", "visibility"};
  if (experiment == "fmzi") return {"in1_port1", "in1_port2", "in2_port1", "in2_port2"};
  if (experiment == "bell") return {"p_pp", "p_pm", "p_mp", "p_mm"};
  if (experiment == "cz") return {"p_out0", "p_out1", "p_out2", "p_out3", "success_probability"};
  return {"transmission"};
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Target {
  std::string metric;
  double reference;
  std::string note;
};

std::vector<Target> targets_for(const ExperimentResult& r, const RunManifest& m) {
  const std::string& e = r.experiment;
  if (e == "fmzi") {
    if (m.options.mode == FmziMode::classical) {
      return {{"visibility_ave", 0.972, "classical average visibility of four curves"}};
    }
    return {{"visibility_ave", 0.971, "quantum average visibility (expected counts)"},
            {"visibility_ave_counts", 0.971, "quantum average visibility (sampled counts)"}};
  }
  if (e == "hom") {
    return {{"visibility_hom", 0.949, "(Nmax - Nmin) / Nmax, no background subtraction"},
            {"visibility_hom_counts", 0.949, "same, from sampled counts"}};
  }
  if (e == "cz") {
    std::vector<Target> t{{"success_probability_max", 1.0 / 9.0, "ideal post-selection probability"}};
    if (r.metrics.count("hofmann_bound")) {
      const double ref = std::isinf(r.imperfections.car) ? 0.989 : 0.914;
      const std::string note = std::isinf(r.imperfections.car) ? "bound with an ideal source"
                                                               : "bound with the measured source";
      t.push_back({"hofmann_bound", ref, note + " (expected counts)"});
      t.push_back({"hofmann_bound_counts", ref, note + " (sampled counts)"});
    } else {
      t.push_back({"fidelity", 1.0, "single-basis truth-table fidelity"});
    }
    return t;
  }
  if (e == "bell") {
    return {{"visibility_ave", 0.969, "average fringe visibility (expected counts)"},
            {"visibility_ave_counts", 0.969, "average fringe visibility (sampled counts)"}};
  }
  if (m.options.target == SpectroscopyTarget::filters) {
    return {{"r3_crosstalk_adjacent", 0.03, "upper limit on nearest-bin crosstalk"},
            {"r4_crosstalk_adjacent", 0.03, "upper limit on nearest-bin crosstalk"},
            {"r5_crosstalk_adjacent", 0.03, "upper limit on nearest-bin crosstalk"},
            {"r6_crosstalk_adjacent", 0.03, "upper limit on nearest-bin crosstalk"}};
  }
  const double slope = m.options.target == SpectroscopyTarget::dr1   ? 0.226
                       : m.options.target == SpectroscopyTarget::dr2 ? 0.255
                                                                     : 0.222;
  return {{"two_g_ghz", 13.49, "minimum mode splitting"},
          {"eo_slope_ghz_per_v", slope, "EO response"}};
}

}  // namespace

RunArtifacts execute(const RunManifest& m) {
  RunArtifacts a;
  const std::string& e = m.experiment;
  if (e == "fmzi") {
    a.result = run_fmzi(m.config, m.sweep, m.options.mode, m.imperfections, m.seed);
  } else if (e == "hom") {
    a.result = run_hom(m.config, m.sweep, m.imperfections, m.seed);
  } else if (e == "cz") {
    switch (m.options.basis) {
      case CzBasisChoice::xz:
        a.result = run_cz(m.config, CzBasis::xz, m.imperfections, m.seed, m.allow_nonstandard);
        break;
      case CzBasisChoice::zx:
        a.result = run_cz(m.config, CzBasis::zx, m.imperfections, m.seed, m.allow_nonstandard);
        break;
      case CzBasisChoice::both:
        a.result = run_cz_characterization(m.config, m.imperfections, m.seed, m.allow_nonstandard);
        break;
    }
  } else if (e == "bell") {
    a.result = run_bell(m.config, m.sweep, m.imperfections, m.seed);
  } else if (e == "spectroscopy") {
    SpectroscopyOptions opts;
    opts.noise_sigma = m.options.noise_sigma;
    opts.eo_voltages = m.options.eo_voltages;
    a.result = run_spectroscopy(m.config, m.sweep, m.options.target, m.seed, opts);
    a.result.imperfections = m.imperfections;
  } else {
    throw std::invalid_argument("unknown experiment " + e);
  }
  Json j = to_json(a.result);
  j["manifest"] = to_json(m);
  a.result_json = j.dump(2) + "\n";
  a.sweep_csv = sweep_csv(a.result);
  a.report = report_text(a.result, m);
  return a;
}

std::vector<std::string> csv_columns(const ExperimentResult& r) {
  std::vector<std::string> cols{r.sweep_variable};
  std::set<std::string> values, counts;
  for (const auto& pt : r.points) {
    for (const auto& [k, v] : pt.values) values.insert(k);
    for (const auto& [k, c] : pt.counts) counts.insert(k);
  }
  for (const auto& c : leading_columns(r.experiment)) {
    if (values.erase(c)) cols.push_back(c);
  }
  cols.insert(cols.end(), values.begin(), values.end());
  for (const auto& c : counts) cols.push_back("n_" + c);
  return cols;
}

std::string sweep_csv(const ExperimentResult& r) {
  const auto cols = csv_columns(r);
  std::ostringstream out;
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << "\n";
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const auto& pt = r.points[i];
    for (std::size_t k = 0; k < cols.size(); ++k) {
      double v = 0.0;
      const std::string& c = cols[k];
      if (k == 0) {
        v = pt.x;
      } else if (c.rfind("n_", 0) == 0 && pt.counts.count(c.substr(2))) {
        v = static_cast<double>(pt.counts.at(c.substr(2)).total_coincidences());
      } else if (pt.values.count(c)) {
        v = pt.values.at(c);
      } else {
        throw std::runtime_error("sweep point " + std::to_string(i) + " has no column " + c);
      }
      if (!std::isfinite(v)) {
        throw std::runtime_error("non-finite value in column " + c + " at point " + std::to_string(i));
      }
      out << (k ? "," : "") << format_number(v);
    }
    out << "\n";
  }
  return out.str();
}

std::string report_text(const ExperimentResult& r, const RunManifest& m) {
  std::ostringstream out;
  char line[256];
  out << "experiment: " << r.experiment << "\n";
  out << "seed: " << r.seed << "\n";
  out << "points: " << r.points.size() << "\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  out << "\n";
  std::snprintf(line, sizeof line, "%-28s %12s %10s %10s  %s\n", "metric", "value", "sigma", "target", "note");
  out << line;
  for (const auto& t : targets_for(r, m)) {
    auto it = r.metrics.find(t.metric);
    if (it == r.metrics.end()) {
      std::snprintf(line, sizeof line, "%-28s %12s %10s %10.4f  %s\n", t.metric.c_str(), "n/a", "",
                    t.reference, t.note.c_str());
    } else {
      std::snprintf(line, sizeof line, "%-28s %12.6f %10.6f %10.4f  %s\n", t.metric.c_str(),
                    it->second.value, it->second.sigma, t.reference, t.note.c_str());
    }
    out << line;
  }
  out << "\nall metrics\n";
  for (const auto& [name, mr] : r.metrics) {
    std::snprintf(line, sizeof line, "%-28s %12.6f %10.6f  %s\n", name.c_str(), mr.value, mr.sigma,
                  mr.method.c_str());
    out << line;
  }
  return out.str();
}

std::filesystem::path resolve_output_dir(const RunManifest& m, const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  if (!m.output_dir.empty()) return m.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return kDefaultOutputDir;
}

void write_artifacts(const RunArtifacts& a, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  const std::pair<const char*, const std::string*> files[] = {
      {"result.json", &a.result_json}, {"sweep.csv", &a.sweep_csv}, {"report.txt", &a.report}};
  for (const auto& [name, text] : files) {
    const auto path = dir / name;
    std::ofstream f(path, std::ios::binary);
    f << *text;
    f.close();
    if (!f) throw std::runtime_error("cannot write " + path.string());
  }
}

std::string list_experiments() {
  std::ostringstream out;
  char line[256];
  for (const auto& e : kExperiments) {
    std::snprintf(line, sizeof line, "%-13s %-10s %s\n", e.name, e.anchor, e.description);
    out << line;
  }
  return out.str();
}

}  // namespace freqbin
