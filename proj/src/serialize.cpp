#include "freqbin/serialize.hpp"

#include <cmath>
#include <limits>

#include "freqbin/errors.hpp"

namespace freqbin {

Json number_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const Json& j, const std::string& pointer) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ParseError(pointer, "expected a number");
}

namespace {

void read_filter(const Json& j, const std::string& ptr, FilterParams& f) {
  JsonObjectReader r(j, ptr);
  r.number("resonance_offset_ghz", f.resonance_offset_ghz);
  r.number("linewidth_fwhm_ghz", f.linewidth_fwhm_ghz);
  r.number("fsr_ghz", f.fsr_ghz);
  r.number("drop_efficiency", f.drop_efficiency);
  r.finish();
}

void read_physics(const Json& j, const std::string& ptr, DRParams& p) {
  JsonObjectReader r(j, ptr);
  r.number("omega0_thz", p.omega0_thz);
  r.number("g_ghz", p.g_ghz);
  r.number("kappa1_ghz", p.kappa1_ghz);
  r.number("kappa_ex_ghz", p.kappa_ex_ghz);
  r.number("kappa2_ghz", p.kappa2_ghz);
  r.number("eo_coeff_ghz_per_v", p.eo_coeff_ghz_per_v);
  r.number("thermal_detune_ghz", p.thermal_detune_ghz);
  r.finish();
}

void read_drive(const Json& j, const std::string& ptr, DriveSpec& d) {
  JsonObjectReader r(j, ptr);
  r.number("drive_freq_ghz", d.drive_freq_ghz);
  r.number("drive_voltage_v", d.drive_voltage_v);
  r.number("drive_phase_rad", d.drive_phase_rad);
  r.number("beta_per_v", d.calib.beta_per_v);
  r.number("r_peak", d.calib.r_peak);
  r.finish();
}

void read_stage(const Json& j, const std::string& ptr, DrStage& s) {
  JsonObjectReader r(j, ptr);
  r.number("transmissivity_T", s.transmissivity);
  r.number("theta", s.theta);
  r.boolean("use_drive", s.use_drive);
  if (const Json* v = r.find("drive")) read_drive(*v, child(ptr, "drive"), s.drive);
  if (const Json* v = r.find("physics")) read_physics(*v, child(ptr, "physics"), s.physics);
  r.finish();
}

void read_detector(const Json& j, const std::string& ptr, DetectorSpec& d) {
  JsonObjectReader r(j, ptr);
  r.number("efficiency", d.efficiency);
  r.number("dark_rate_hz", d.dark_rate_hz);
  r.number("coincidence_window_ps", d.coincidence_window_ps);
  r.number("integration_s", d.integration_s);
  r.number("insertion_loss", d.insertion_loss);
  r.finish();
}

BinGrid read_grid(const Json& j, const std::string& ptr, const BinGrid& base) {
  JsonObjectReader r(j, ptr);
  double spacing = base.spacing_ghz();
  double anchor = base.anchor_thz();
  bool check = base.checks_coupler_window();
  r.number("bin_spacing_ghz", spacing);
  r.number("anchor_thz", anchor);
  r.boolean("check_coupler_window", check);
  std::vector<Bin> bins = base.bins();
  if (const Json* v = r.find("bins")) {
    const std::string bptr = child(ptr, "bins");
    if (!v->is_array()) throw ParseError(bptr, "expected an array");
    bins.clear();
    for (std::size_t k = 0; k < v->size(); ++k) {
      const std::string eptr = child(bptr, std::to_string(k));
      JsonObjectReader br((*v)[k], eptr);
      Bin b;
      std::string role = "computational";
      br.integer("index", b.index);
      br.text("role", role);
      br.text("label", b.label);
      br.finish();
      try {
        b.role = bin_role_from_string(role);
      } catch (const ValidationError& e) {
        throw ParseError(child(eptr, "role"), e.what());
      }
      bins.push_back(b);
    }
  }
  r.finish();
  try {
    return BinGrid(bins, spacing, anchor, check);
  } catch (const std::invalid_argument& e) {
    throw ParseError(ptr, e.what());
  }
}

}  // namespace

Json to_json(const BinGrid& grid) {
  Json bins = Json::array();
  for (const auto& b : grid.bins()) {
    bins.push_back({{"index", b.index}, {"role", to_string(b.role)}, {"label", b.label}});
  }
  return {{"bin_spacing_ghz", grid.spacing_ghz()},
          {"anchor_thz", grid.anchor_thz()},
          {"check_coupler_window", grid.checks_coupler_window()},
          {"bins", bins}};
}

Json to_json(const FilterParams& f) {
  return {{"resonance_offset_ghz", f.resonance_offset_ghz},
          {"linewidth_fwhm_ghz", f.linewidth_fwhm_ghz},
          {"fsr_ghz", f.fsr_ghz},
          {"drop_efficiency", f.drop_efficiency}};
}

Json to_json(const DRParams& p) {
  return {{"omega0_thz", p.omega0_thz},       {"g_ghz", p.g_ghz},
          {"kappa1_ghz", p.kappa1_ghz},       {"kappa_ex_ghz", p.kappa_ex_ghz},
          {"kappa2_ghz", p.kappa2_ghz},       {"eo_coeff_ghz_per_v", p.eo_coeff_ghz_per_v},
          {"thermal_detune_ghz", p.thermal_detune_ghz}};
}

Json to_json(const DriveSpec& d) {
  return {{"drive_freq_ghz", d.drive_freq_ghz},
          {"drive_voltage_v", d.drive_voltage_v},
          {"drive_phase_rad", d.drive_phase_rad},
          {"beta_per_v", d.calib.beta_per_v},
          {"r_peak", d.calib.r_peak}};
}

Json to_json(const DrStage& s) {
  return {{"transmissivity_T", s.transmissivity},
          {"theta", s.theta},
          {"use_drive", s.use_drive},
          {"drive", to_json(s.drive)},
          {"physics", to_json(s.physics)}};
}

Json to_json(const DetectorSpec& d) {
  return {{"efficiency", d.efficiency},
          {"dark_rate_hz", d.dark_rate_hz},
          {"coincidence_window_ps", d.coincidence_window_ps},
          {"integration_s", d.integration_s},
          {"insertion_loss", d.insertion_loss}};
}

Json to_json(const ChipConfig& cfg) {
  Json filters = Json::array();
  for (const auto& f : cfg.filters) filters.push_back(to_json(f));
  return {{"grid", to_json(*cfg.grid)},
          {"logical_indices", cfg.logical_indices},
          {"dr1", to_json(cfg.dr1)},
          {"dr2", to_json(cfg.dr2)},
          {"dr3", to_json(cfg.dr3)},
          {"r1", cfg.r1},
          {"r2", cfg.r2},
          {"filters", filters},
          {"global_efficiency", cfg.global_efficiency},
          {"sideband_suppression_db", number_to_json(cfg.sideband_suppression_db)},
          {"pair_rate_hz", cfg.pair_rate_hz},
          {"photon_linewidth_mhz", cfg.photon_linewidth_mhz},
          {"detector", to_json(cfg.detector)}};
}

Json to_json(const Imperfections& imp) {
  return {{"efficiency", imp.efficiency},
          {"sideband_leakage", imp.sideband_leakage},
          {"filter_crosstalk", imp.filter_crosstalk},
          {"indistinguishability", imp.indistinguishability},
          {"car", number_to_json(imp.car)},
          {"dark_rate_hz", imp.dark_rate_hz}};
}

Json to_json(const CountRecord& rec) {
  return {{"true_coincidences", rec.true_coincidences},
          {"accidental_coincidences", rec.accidental_coincidences},
          {"singles", rec.singles},
          {"expected_true", rec.expected_true},
          {"expected_accidental", rec.expected_accidental},
          {"p_true", rec.p_true},
          {"singles_weights", rec.singles_weights},
          {"seed", rec.seed}};
}

Json to_json(const MetricResult& m) {
  return {{"value", number_to_json(m.value)}, {"sigma", number_to_json(m.sigma)}, {"method", m.method}};
}

Json to_json(const TruthTable& t) {
  Json rows = Json::array();
  for (const auto& row : t) rows.push_back(row);
  return rows;
}

Json to_json(const ExperimentResult& r) {
  Json points = Json::array();
  for (const auto& pt : r.points) {
    Json values = Json::object();
    for (const auto& [k, v] : pt.values) values[k] = number_to_json(v);
    Json counts = Json::object();
    for (const auto& [k, c] : pt.counts) counts[k] = to_json(c);
    Json p = {{"x", pt.x}, {"values", values}, {"counts", counts}};
    if (!pt.label.empty()) p["label"] = pt.label;
    points.push_back(std::move(p));
  }
  Json metrics = Json::object();
  for (const auto& [k, m] : r.metrics) metrics[k] = to_json(m);
  Json tables = Json::object();
  for (const auto& [k, t] : r.tables) tables[k] = to_json(t);
  return {{"experiment", r.experiment},
          {"sweep_variable", r.sweep_variable},
          {"points", points},
          {"metrics", metrics},
          {"tables", tables},
          {"warnings", r.warnings},
          {"config", to_json(r.config)},
          {"imperfections", to_json(r.imperfections)},
          {"seed", r.seed}};
}

std::string dump_result(const ExperimentResult& r) { return to_json(r).dump(2) + "\n"; }

void read_json(const Json& j, const std::string& pointer, ChipConfig& cfg) {
  JsonObjectReader r(j, pointer);
  if (const Json* v = r.find("grid")) {
    cfg.grid = std::make_shared<const BinGrid>(read_grid(*v, child(pointer, "grid"), *cfg.grid));
  }
  if (const Json* v = r.find("logical_indices")) {
    const std::string ptr = child(pointer, "logical_indices");
    if (!v->is_array() || v->size() != 4) throw ParseError(ptr, "expected four integers");
    for (std::size_t k = 0; k < 4; ++k) {
      if (!(*v)[k].is_number_integer()) throw ParseError(child(ptr, std::to_string(k)), "expected an integer");
      cfg.logical_indices[k] = (*v)[k].get<int>();
    }
  }
  if (const Json* v = r.find("dr1")) read_stage(*v, child(pointer, "dr1"), cfg.dr1);
  if (const Json* v = r.find("dr2")) read_stage(*v, child(pointer, "dr2"), cfg.dr2);
  if (const Json* v = r.find("dr3")) read_stage(*v, child(pointer, "dr3"), cfg.dr3);
  r.number("r1", cfg.r1);
  r.number("r2", cfg.r2);
  if (const Json* v = r.find("filters")) {
    const std::string ptr = child(pointer, "filters");
    if (!v->is_array() || v->size() != 4) throw ParseError(ptr, "expected four filter objects");
    for (std::size_t k = 0; k < 4; ++k) read_filter((*v)[k], child(ptr, std::to_string(k)), cfg.filters[k]);
  }
  r.number("global_efficiency", cfg.global_efficiency);
  r.number("sideband_suppression_db", cfg.sideband_suppression_db);
  r.number("pair_rate_hz", cfg.pair_rate_hz);
  r.number("photon_linewidth_mhz", cfg.photon_linewidth_mhz);
  if (const Json* v = r.find("detector")) read_detector(*v, child(pointer, "detector"), cfg.detector);
  r.finish();
}

void read_json(const Json& j, const std::string& pointer, Imperfections& imp) {
  JsonObjectReader r(j, pointer);
  r.boolean("efficiency", imp.efficiency);
  r.boolean("sideband_leakage", imp.sideband_leakage);
  r.boolean("filter_crosstalk", imp.filter_crosstalk);
  r.number("indistinguishability", imp.indistinguishability);
  r.number("car", imp.car);
  r.number("dark_rate_hz", imp.dark_rate_hz);
  r.finish();
}

}  // namespace freqbin
