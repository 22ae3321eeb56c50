#include "freqbin/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "freqbin/errors.hpp"

namespace freqbin {

namespace {

std::vector<double> linspace(double start, double stop, int points) {
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    out[static_cast<std::size_t>(k)] =
        points == 1 ? start : start + (stop - start) * k / static_cast<double>(points - 1);
  }
  return out;
}

std::vector<double> read_number_array(const Json& j, const std::string& ptr) {
  if (!j.is_array()) throw ParseError(ptr, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const double v = number_from_json(j[k], child(ptr, std::to_string(k)));
    if (!std::isfinite(v)) throw ParseError(child(ptr, std::to_string(k)), "expected a finite number");
    out.push_back(v);
  }
  return out;
}

template <typename E>
E pick(const std::string& text, const std::string& ptr,
       std::initializer_list<std::pair<const char*, E>> choices) {
  std::string allowed;
  for (const auto& [name, value] : choices) {
    if (text == name) return value;
    allowed += allowed.empty() ? name : std::string(", ") + name;
  }
  throw ParseError(ptr, "unknown value \"" + text + "\" (expected one of " + allowed + ")");
}

void read_options(const Json& j, RunOptions& o) {
  JsonObjectReader r(j, "/options");
  std::string text;
  if (r.find("mode")) {
    r.text("mode", text);
    o.mode = pick<FmziMode>(text, "/options/mode",
                            {{"classical", FmziMode::classical}, {"quantum", FmziMode::quantum}});
  }
  if (r.find("basis")) {
    r.text("basis", text);
    o.basis = pick<CzBasisChoice>(
        text, "/options/basis",
        {{"xz", CzBasisChoice::xz}, {"zx", CzBasisChoice::zx}, {"both", CzBasisChoice::both}});
  }
  if (r.find("target")) {
    r.text("target", text);
    o.target = pick<SpectroscopyTarget>(text, "/options/target",
                                        {{"dr1", SpectroscopyTarget::dr1},
                                         {"dr2", SpectroscopyTarget::dr2},
                                         {"dr3", SpectroscopyTarget::dr3},
                                         {"filters", SpectroscopyTarget::filters}});
  }
  r.number("noise_sigma", o.noise_sigma);
  if (!(o.noise_sigma >= 0.0 && std::isfinite(o.noise_sigma))) {
    throw ParseError("/options/noise_sigma", "must be a finite non-negative number");
  }
  if (const Json* v = r.find("eo_voltages")) o.eo_voltages = read_number_array(*v, "/options/eo_voltages");
  r.finish();
}

std::vector<double> read_sweep(const Json& j) {
  JsonObjectReader r(j, "/sweep");
  const Json* values = r.find("values");
  const Json* start = r.find("start");
  const Json* stop = r.find("stop");
  const Json* points = r.find("points");
  r.finish();
  if (values) {
    if (start || stop || points) throw ParseError("/sweep", "give either values or start/stop/points");
    auto out = read_number_array(*values, "/sweep/values");
    if (out.empty()) throw ParseError("/sweep/values", "sweep is empty");
    return out;
  }
  if (!start || !stop || !points) throw ParseError("/sweep", "needs values or all of start, stop, points");
  const double a = number_from_json(*start, "/sweep/start");
  const double b = number_from_json(*stop, "/sweep/stop");
  if (!std::isfinite(a)) throw ParseError("/sweep/start", "expected a finite number");
  if (!std::isfinite(b)) throw ParseError("/sweep/stop", "expected a finite number");
  if (!points->is_number_integer() || points->get<long long>() < 1 || points->get<long long>() > 1000000) {
    throw ParseError("/sweep/points", "expected an integer in [1, 1000000]");
  }
  return linspace(a, b, points->get<int>());
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-9; }

void check_cz_operating_point(const ChipConfig& cfg) {
  auto fail = [](const std::string& ptr, const std::string& what) {
    throw ParseError(ptr, what + " (pass --allow-nonstandard to run anyway)");
  };
  if (!near(cfg.dr2.effective_transmissivity(), 1.0 / 3.0)) {
    fail("/config/dr2/transmissivity_T", "CZ requires DR2 at T = 1/3");
  }
  if (!near(cfg.r1, 1.0 / 3.0)) fail("/config/r1", "CZ requires R1 power transmission 1/3");
  if (!near(cfg.r2, 1.0 / 3.0)) fail("/config/r2", "CZ requires R2 power transmission 1/3");
  if (!near(cfg.dr1.effective_transmissivity(), 0.5)) {
    fail("/config/dr1/transmissivity_T", "CZ requires a balanced DR1");
  }
  if (!near(cfg.dr3.effective_transmissivity(), 0.5)) {
    fail("/config/dr3/transmissivity_T", "CZ requires a balanced DR3");
  }
}

const char* basis_name(CzBasisChoice b) {
  switch (b) {
    case CzBasisChoice::xz:
      return "xz";
    case CzBasisChoice::zx:
      return "zx";
    case CzBasisChoice::both:
      return "both";
  }
  return "both";
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"spectroscopy", "fmzi", "hom", "cz", "bell"};
  return names;
}

std::vector<double> default_sweep(const std::string& experiment, const RunOptions& opts) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (experiment == "fmzi" || experiment == "bell") return linspace(0.0, two_pi, 41);
  if (experiment == "hom") return linspace(0.0, 1.0, 101);
  if (experiment == "spectroscopy") {
    return opts.target == SpectroscopyTarget::filters ? linspace(-50.0, 50.0, 1001)
                                                       : linspace(-40.0, 40.0, 1601);
  }
  return {};
}

RunManifest parse_manifest(const std::string& text, bool allow_nonstandard) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("", std::string("malformed JSON: ") + e.what());
  }
  JsonObjectReader r(doc, "");
  RunManifest m;

  r.integer("schema_version", m.schema_version);
  if (m.schema_version != kManifestSchemaVersion) {
    throw ParseError("/schema_version", "unsupported schema version " + std::to_string(m.schema_version));
  }
  if (!r.find("experiment")) throw ParseError("/experiment", "missing experiment name");
  r.text("experiment", m.experiment);
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), m.experiment) == names.end()) {
    throw ParseError("/experiment", "unknown experiment \"" + m.experiment + "\"");
  }

  // The Bell run retunes DR2 to a balanced splitter.
  if (m.experiment == "bell") m.config.dr2.transmissivity = 0.5;
  if (const Json* v = r.find("config")) read_json(*v, "/config", m.config);
  if (const Json* v = r.find("imperfections")) read_json(*v, "/imperfections", m.imperfections);
  if (const Json* v = r.find("options")) read_options(*v, m.options);
  if (const Json* v = r.find("sweep")) {
    if (m.experiment == "cz") throw ParseError("/sweep", "cz runs a fixed set of inputs and takes no sweep");
    m.sweep = read_sweep(*v);
  } else {
    m.sweep = default_sweep(m.experiment, m.options);
  }
  if (const Json* v = r.find("seed")) {
    if (!v->is_number_unsigned()) throw ParseError("/seed", "expected a non-negative integer");
    m.seed = v->get<std::uint64_t>();
  }
  r.text("output_dir", m.output_dir);
  r.boolean("allow_nonstandard", m.allow_nonstandard);
  m.allow_nonstandard = m.allow_nonstandard || allow_nonstandard;
  r.finish();

  try {
    validate(m.config);
  } catch (const std::invalid_argument& e) {
    throw ParseError("/config", e.what());
  }
  try {
    validate(m.imperfections);
  } catch (const std::invalid_argument& e) {
    throw ParseError("/imperfections", e.what());
  }
  if (m.experiment == "hom") {
    for (std::size_t k = 0; k < m.sweep.size(); ++k) {
      if (!(m.sweep[k] >= 0.0 && m.sweep[k] <= 1.0)) {
        throw ParseError("/sweep/values/" + std::to_string(k), "reflectivity must lie in [0, 1]");
      }
    }
  }
  if ((m.experiment == "fmzi" || m.experiment == "bell" || m.experiment == "spectroscopy") &&
      m.sweep.size() < 2) {
    throw ParseError("/sweep", "needs at least two points");
  }
  if (m.experiment == "cz" && !m.allow_nonstandard) check_cz_operating_point(m.config);
  return m;
}

Json to_json(const RunManifest& m) {
  Json j = {{"schema_version", m.schema_version},
          {"experiment", m.experiment},
          {"config", to_json(m.config)},
          {"imperfections", to_json(m.imperfections)},
          {"options",
           {{"mode", to_string(m.options.mode)},
            {"basis", basis_name(m.options.basis)},
            {"target", to_string(m.options.target)},
            {"noise_sigma", m.options.noise_sigma},
            {"eo_voltages", m.options.eo_voltages}}},
          {"seed", m.seed},
          {"output_dir", m.output_dir},
          {"allow_nonstandard", m.allow_nonstandard}};
  if (m.experiment != "cz") j["sweep"] = {{"values", m.sweep}};
  return j;
}

}  // namespace freqbin
