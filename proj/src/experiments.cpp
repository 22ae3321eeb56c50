#include "freqbin/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "freqbin/errors.hpp"

namespace freqbin {

double DrStage::effective_transmissivity() const {
  return use_drive ? drive_to_splitting(drive).transmissivity : transmissivity;
}

ChipConfig ChipConfig::measured_device() {
  ChipConfig cfg;
  cfg.dr1.transmissivity = 0.5;
  cfg.dr2.transmissivity = 1.0 / 3.0;
  cfg.dr3.transmissivity = 0.5;
  const std::array<double, 3> eo{0.226, 0.255, 0.222};
  DrStage* stages[3] = {&cfg.dr1, &cfg.dr2, &cfg.dr3};
  for (int k = 0; k < 3; ++k) {
    stages[k]->physics.g_ghz = 13.49 / 2.0;
    stages[k]->physics.eo_coeff_ghz_per_v = eo[k];
  }
  return cfg;
}

bool operator==(const ChipConfig& a, const ChipConfig& b) {
  const bool grids = a.grid && b.grid ? *a.grid == *b.grid : a.grid == b.grid;
  return grids && a.logical_indices == b.logical_indices && a.dr1 == b.dr1 && a.dr2 == b.dr2 &&
         a.dr3 == b.dr3 && a.r1 == b.r1 && a.r2 == b.r2 && a.filters == b.filters &&
         a.global_efficiency == b.global_efficiency &&
         a.sideband_suppression_db == b.sideband_suppression_db &&
         a.pair_rate_hz == b.pair_rate_hz && a.photon_linewidth_mhz == b.photon_linewidth_mhz &&
         a.detector == b.detector;
}

Imperfections Imperfections::device() {
  Imperfections imp;
  imp.efficiency = true;
  imp.sideband_leakage = true;
  imp.filter_crosstalk = true;
  return imp;
}

Imperfections Imperfections::calibrated_source() {
  Imperfections imp;
  imp.car = kCalibratedCar;
  imp.dark_rate_hz = kCalibratedDarkRateHz;
  return imp;
}

Imperfections Imperfections::device_with_source() {
  Imperfections imp = device();
  imp.car = kCalibratedCar;
  imp.dark_rate_hz = kCalibratedDarkRateHz;
  return imp;
}

void validate(const Imperfections& imp) {
  if (!(imp.indistinguishability >= 0.0 && imp.indistinguishability <= 1.0)) {
    throw ValidationError("indistinguishability must lie in [0, 1]");
  }
  if (!(imp.car > 1.0)) throw ValidationError("CAR must exceed 1");
  if (!(imp.dark_rate_hz >= 0.0)) throw ValidationError("dark rate must be non-negative");
}

void validate(const ChipConfig& cfg) {
  if (!cfg.grid) throw ConfigurationError("chip config has no grid");
  const auto& li = cfg.logical_indices;
  for (int idx : li) cfg.grid->mode_of_index(idx);
  for (int idx : li) {
    if (cfg.grid->bin(cfg.grid->mode_of_index(idx)).role != BinRole::computational) {
      throw ConfigurationError("logical bin " + std::to_string(idx) + " is not computational");
    }
  }
  if (!(li[1] == li[0] + 1 && li[2] == li[1] + 1 && li[3] == li[2] + 1)) {
    throw ConfigurationError("logical bins must be four consecutive grid indices |0>_C, |1>_C, |0>_T, |1>_T");
  }
  // Sidebands of every DR placement must exist.
  cfg.grid->mode_of_index(li[0] - 1);
  cfg.grid->mode_of_index(li[3] + 1);
  for (const DrStage* st : {&cfg.dr1, &cfg.dr2, &cfg.dr3}) {
    const double t = st->effective_transmissivity();
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("DR transmissivity must lie in [0, 1]");
    validate(st->physics);
    if (st->use_drive) validate(st->drive);
  }
  if (!(cfg.r1 >= 0.0 && cfg.r1 <= 1.0) || !(cfg.r2 >= 0.0 && cfg.r2 <= 1.0)) {
    throw ValidationError("attenuator transmissions must lie in [0, 1]");
  }
  for (const auto& f : cfg.filters) validate(f);
  if (!(cfg.global_efficiency > 0.0 && cfg.global_efficiency <= 1.0)) {
    throw ValidationError("global efficiency must lie in (0, 1]");
  }
  if (!(cfg.sideband_suppression_db >= 0.0)) {
    throw ValidationError("sideband suppression must be non-negative");
  }
  if (!(cfg.pair_rate_hz >= 0.0)) throw ValidationError("pair rate must be non-negative");
  if (!(cfg.photon_linewidth_mhz > 0.0)) throw ValidationError("photon linewidth must be positive");
  validate(cfg.detector);
}

std::string to_string(FmziMode mode) { return mode == FmziMode::classical ? "classical" : "quantum"; }
std::string to_string(CzBasis basis) { return basis == CzBasis::xz ? "XZ" : "ZX"; }

std::string to_string(SpectroscopyTarget target) {
  switch (target) {
    case SpectroscopyTarget::dr1:
      return "dr1";
    case SpectroscopyTarget::dr2:
      return "dr2";
    case SpectroscopyTarget::dr3:
      return "dr3";
    case SpectroscopyTarget::filters:
      return "filters";
  }
  return "unknown";
}

TruthTable ideal_cz_table(CzBasis basis) {
  TruthTable t{};
  const std::array<int, 4> perm = basis == CzBasis::xz ? std::array<int, 4>{2, 1, 0, 3}
                                                       : std::array<int, 4>{0, 1, 3, 2};
  for (int i = 0; i < 4; ++i) t[i][perm[i]] = 1.0;
  return t;
}

namespace {

using Circuit = std::vector<ModeTransform>;

struct LogicalModes {
  std::size_t c0, c1, t0, t1;
};

LogicalModes logical_modes(const ChipConfig& cfg) {
  const auto& g = *cfg.grid;
  return {g.mode_of_index(cfg.logical_indices[0]), g.mode_of_index(cfg.logical_indices[1]),
          g.mode_of_index(cfg.logical_indices[2]), g.mode_of_index(cfg.logical_indices[3])};
}

// DR acting on bins (lo, lo + 1). With the efficiency imperfection the same
// loss is applied to every other computational bin so the stage is a
// uniform attenuation plus the ideal coupling.
Circuit dr_stage(const ChipConfig& cfg, const DrStage& st, std::size_t lo_mode, double transmissivity,
                 const Imperfections& imp, double theta_extra = 0.0) {
  const auto& g = *cfg.grid;
  const double eta = imp.efficiency ? cfg.global_efficiency : 1.0;
  const double supp = imp.sideband_leakage ? cfg.sideband_suppression_db
                                           : std::numeric_limits<double>::infinity();
  const FbsSpec spec =
      FbsSpec::on_grid(g, g.bin(lo_mode).index, transmissivity, st.theta + theta_extra, eta, supp);
  Circuit c{fbs_transform(spec)};
  if (eta < 1.0) {
    for (std::size_t m : g.modes_with_role(BinRole::computational)) {
      if (m == spec.sideband_lo || m == spec.bin_lo || m == spec.bin_hi || m == spec.sideband_hi) {
        continue;
      }
      c.push_back(attenuator_transform(m, eta));
    }
  }
  return c;
}

PureState evolve(PureState state, const Circuit& circuit) {
  for (const auto& t : circuit) {
    state = apply_transform(state, t);
    if (state.empty()) break;
  }
  return state;
}

void append(Circuit& to, const Circuit& from) { to.insert(to.end(), from.begin(), from.end()); }

Eigen::MatrixXd routing_for(const ChipConfig& cfg, const std::vector<std::size_t>& targets,
                            const std::vector<std::size_t>& filter_slots, const Imperfections& imp) {
  std::vector<DetectorChannel> channels;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    DetectorChannel ch{targets[k], cfg.filters[filter_slots[k]]};
    if (!imp.efficiency) ch.filter.drop_efficiency = 1.0;
    channels.push_back(ch);
  }
  return detector_routing(*cfg.grid, channels, imp.filter_crosstalk);
}

ClickDistribution clicks(const PureState& s, const Eigen::MatrixXd& routing) {
  if (s.empty()) return {{std::vector<int>(static_cast<std::size_t>(routing.rows()) + 1, 0), 0.0}};
  return click_distribution(s, routing);
}

ClickDistribution mix(const ClickDistribution& a, double wa, const ClickDistribution& b, double wb) {
  ClickDistribution out;
  for (const auto& [k, p] : a) out[k] += wa * p;
  for (const auto& [k, p] : b) out[k] += wb * p;
  return out;
}

PureState single_photon(const ChipConfig& cfg, std::size_t mode) {
  auto occ = OccupationVector::vacuum(cfg.grid->mode_count());
  occ[mode] = 1;
  return PureState::basis(cfg.grid, occ);
}

PureState photon_pair(const ChipConfig& cfg, std::size_t a, std::size_t b) {
  auto occ = OccupationVector::vacuum(cfg.grid->mode_count());
  occ[a] += 1;
  occ[b] += 1;
  return PureState::basis(cfg.grid, occ);
}

SourceSpec source_for(const ChipConfig& cfg, const Imperfections& imp, SourceKind kind) {
  SourceSpec s;
  s.kind = kind;
  s.pair_rate_hz = cfg.pair_rate_hz;
  s.photon_linewidth_mhz = cfg.photon_linewidth_mhz;
  s.car = imp.car;
  s.indistinguishability = imp.indistinguishability;
  return s;
}

DetectorSpec detector_for(const ChipConfig& cfg, const Imperfections& imp) {
  DetectorSpec d = cfg.detector;
  d.dark_rate_hz = imp.dark_rate_hz;
  return d;
}

template <typename F>
void parallel_for(std::size_t n, F&& body) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) body(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-9; }

MetricResult average(const std::vector<MetricResult>& v, const std::string& method) {
  MetricResult r;
  double var = 0.0;
  for (const auto& m : v) {
    r.value += m.value / static_cast<double>(v.size());
    var += m.sigma * m.sigma;
  }
  r.sigma = std::sqrt(var) / static_cast<double>(v.size());
  r.method = method;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentResult run_fmzi(const ChipConfig& cfg, const std::vector<double>& phases, FmziMode mode,
                          const Imperfections& imp, std::uint64_t seed) {
  validate(cfg);
  validate(imp);
  if (phases.size() < 2) throw DomainError("f-MZI sweep needs at least two phases");
  const LogicalModes lm = logical_modes(cfg);

  ExperimentResult res;
  res.experiment = "fmzi";
  res.sweep_variable = "phase";
  res.config = cfg;
  res.imperfections = imp;
  res.seed = seed;
  const double t1 = cfg.dr1.effective_transmissivity();
  const double t3 = cfg.dr3.effective_transmissivity();
  if (!near(t1, 0.5) || !near(t3, 0.5)) {
    res.warnings.push_back("DR1/DR3 are not balanced (T = " + std::to_string(t1) + ", " +
                           std::to_string(t3) + "); fringes will not reach full visibility");
  }

  const auto routing = routing_for(cfg, {lm.c0, lm.c1}, {0, 1}, imp);
  const SourceSpec src = source_for(cfg, imp, SourceKind::heralded_single);
  const DetectorSpec det = detector_for(cfg, imp);
  const std::array<std::string, 4> curves{"in1_port1", "in1_port2", "in2_port1", "in2_port2"};

  res.points.resize(phases.size());
  parallel_for(phases.size(), [&](std::size_t i) {
    SweepPoint& pt = res.points[i];
    pt.x = phases[i];
    Circuit circuit = dr_stage(cfg, cfg.dr1, lm.c0, t1, imp);
    circuit.push_back(phase_transform(lm.c1, phases[i]));
    append(circuit, dr_stage(cfg, cfg.dr3, lm.c0, t3, imp));
    const std::array<std::size_t, 2> inputs{lm.c0, lm.c1};
    for (int in = 0; in < 2; ++in) {
      const auto dist = clicks(evolve(single_photon(cfg, inputs[in]), circuit), routing);
      const auto mean = mean_detector_photons(dist);
      for (int port = 0; port < 2; ++port) {
        const std::string& name = curves[in * 2 + port];
        pt.values[name] = mean[port];
        if (mode == FmziMode::quantum) {
          pt.counts[name] = sample_counts(std::clamp(mean[port], 0.0, 1.0), det, src,
                                          derive_seed(seed, i * 4 + in * 2 + port),
                                          {1.0, mean[port]});
        }
      }
    }
  });

  std::vector<MetricResult> vis, vis_counts;
  for (const auto& name : curves) {
    std::vector<double> series, sampled;
    for (const auto& pt : res.points) {
      if (mode == FmziMode::quantum) {
        series.push_back(pt.counts.at(name).expected_total());
        sampled.push_back(static_cast<double>(pt.counts.at(name).total_coincidences()));
      } else {
        series.push_back(pt.values.at(name));
      }
    }
    vis.push_back(visibility_minmax(series));
    res.metrics["visibility_" + name] = vis.back();
    if (mode == FmziMode::quantum) {
      vis_counts.push_back(visibility_minmax(sampled, true));
      res.metrics["visibility_counts_" + name] = vis_counts.back();
    }
  }
  res.metrics["visibility_ave"] = average(vis, "mean-of-four-curves");
  if (mode == FmziMode::quantum) {
    res.metrics["visibility_ave_counts"] = average(vis_counts, "mean-of-four-curves-poisson");
  }
  return res;
}

ExperimentResult run_hom(const ChipConfig& cfg, const std::vector<double>& reflectivities,
                         const Imperfections& imp, std::uint64_t seed) {
  validate(cfg);
  validate(imp);
  if (reflectivities.empty()) throw DomainError("HOM sweep needs at least one reflectivity");
  for (double r : reflectivities) {
    if (!(r >= 0.0 && r <= 1.0)) throw DomainError("reflectivities must lie in [0, 1]");
  }
  const LogicalModes lm = logical_modes(cfg);
  ExperimentResult res;
  res.experiment = "hom";
  res.sweep_variable = "reflectivity";
  res.config = cfg;
  res.imperfections = imp;
  res.seed = seed;

  const auto routing = routing_for(cfg, {lm.c0, lm.c1}, {0, 1}, imp);
  const SourceSpec src = source_for(cfg, imp, SourceKind::pair);
  const DetectorSpec det = detector_for(cfg, imp);
  const double v = imp.indistinguishability;

  res.points.resize(reflectivities.size());
  parallel_for(reflectivities.size(), [&](std::size_t i) {
    const double r = reflectivities[i];
    SweepPoint& pt = res.points[i];
    pt.x = r;
    const Circuit circuit = dr_stage(cfg, cfg.dr3, lm.c0, 1.0 - r, imp);
    const auto coherent = clicks(evolve(photon_pair(cfg, lm.c0, lm.c1), circuit), routing);
    const auto distinguishable =
        convolve(clicks(evolve(single_photon(cfg, lm.c0), circuit), routing),
                 clicks(evolve(single_photon(cfg, lm.c1), circuit), routing));
    const double p_indist = joint_click_probability(coherent, 0, 1);
    const double p_dist = joint_click_probability(distinguishable, 0, 1);
    const double p = indistinguishability_mix(p_indist, p_dist, v);
    const auto mean = mean_detector_photons(mix(coherent, v, distinguishable, 1.0 - v));
    const auto mean_dist = mean_detector_photons(distinguishable);

    pt.values["p_cc"] = p;
    pt.values["p_cc_indist"] = p_indist;
    pt.values["p_cc_dist"] = p_dist;
    pt.values["p_cc_analytic"] = (1.0 - 2.0 * r) * (1.0 - 2.0 * r);
    pt.values["p_cc_dist_analytic"] = r * r + (1.0 - r) * (1.0 - r);
    pt.values["visibility_analytic"] = 2.0 * r * (1.0 - r) / (r * r + (1.0 - r) * (1.0 - r));

    pt.counts["coincidences"] =
        sample_counts(p, det, src, derive_seed(seed, 2 * i), {mean[0], mean[1]});
    pt.counts["reference"] = sample_counts(p_dist, det, src, derive_seed(seed, 2 * i + 1),
                                           {mean_dist[0], mean_dist[1]});
    const auto& n = pt.counts["coincidences"];
    const auto& ref = pt.counts["reference"];
    pt.values["visibility"] =
        ref.expected_total() > 0.0 ? visibility_hom(ref.expected_total(), n.expected_total()).value
                                   : 0.0;
  });

  auto best = std::min_element(res.points.begin(), res.points.end(), [](const auto& a, const auto& b) {
    return std::abs(a.x - 0.5) < std::abs(b.x - 0.5);
  });
  const auto& n = best->counts.at("coincidences");
  const auto& ref = best->counts.at("reference");
  if (ref.expected_total() > 0.0) {
    res.metrics["visibility_hom"] = visibility_hom(ref.expected_total(), n.expected_total());
    res.metrics["visibility_hom"].method = "hom-expected-counts";
  }
  if (ref.total_coincidences() > 0) {
    res.metrics["visibility_hom_counts"] = visibility_hom(
        static_cast<double>(ref.total_coincidences()), static_cast<double>(n.total_coincidences()));
  }
  res.metrics["reflectivity_at_metric"] = {best->x, 0.0, "sweep-point-nearest-balanced"};
  return res;
}

ExperimentResult run_cz(const ChipConfig& cfg, CzBasis basis, const Imperfections& imp,
                        std::uint64_t seed, bool allow_nonstandard) {
  validate(cfg);
  validate(imp);
  const LogicalModes lm = logical_modes(cfg);
  const double t1 = cfg.dr1.effective_transmissivity();
  const double t2 = cfg.dr2.effective_transmissivity();
  const double t3 = cfg.dr3.effective_transmissivity();

  ExperimentResult res;
  res.experiment = "cz";
  res.sweep_variable = "input";
  res.config = cfg;
  res.imperfections = imp;
  res.seed = seed;

  const bool standard = near(t2, 1.0 / 3.0) && near(cfg.r1, 1.0 / 3.0) &&
                        near(cfg.r2, 1.0 / 3.0) && near(t1, 0.5) && near(t3, 0.5);
  if (!standard) {
    std::ostringstream msg;
    msg << "CZ needs DR2 at T = 1/3, R1 = R2 = 1/3 and balanced DR1/DR3 (got T2 = " << t2
        << ", R1 = " << cfg.r1 << ", R2 = " << cfg.r2 << ", T1 = " << t1 << ", T3 = " << t3 << ")";
    if (!allow_nonstandard) throw ValidationError(msg.str());
    res.warnings.push_back(msg.str());
  }

  // DR1 and DR3 act on the qubit measured in the X basis.
  const std::size_t h_lo = basis == CzBasis::xz ? lm.c0 : lm.t0;
  Circuit circuit = dr_stage(cfg, cfg.dr1, h_lo, t1, imp);
  circuit.push_back(attenuator_transform(lm.c0, cfg.r1));
  circuit.push_back(attenuator_transform(lm.t1, cfg.r2));
  append(circuit, dr_stage(cfg, cfg.dr2, lm.c1, t2, imp));
  append(circuit, dr_stage(cfg, cfg.dr3, h_lo, t3, imp));

  // Detectors in bus order: |0>_C, |1>_C, |0>_T, |1>_T bins.
  const auto routing = routing_for(cfg, {lm.c0, lm.c1, lm.t0, lm.t1}, {0, 1, 2, 3}, imp);

  struct Input {
    std::string label;
    std::size_t control, target;
  };
  std::array<Input, 4> inputs;
  // Output column k is the detector pair out_det[k].
  std::array<std::array<std::size_t, 2>, 4> out_det;
  if (basis == CzBasis::xz) {
    inputs = {{{"+0", lm.c1, lm.t0}, {"+1", lm.c1, lm.t1}, {"-0", lm.c0, lm.t0}, {"-1", lm.c0, lm.t1}}};
    out_det = {{{0, 2}, {0, 3}, {1, 2}, {1, 3}}};
  } else {
    inputs = {{{"0+", lm.c0, lm.t1}, {"0-", lm.c0, lm.t0}, {"1+", lm.c1, lm.t1}, {"1-", lm.c1, lm.t0}}};
    out_det = {{{0, 2}, {0, 3}, {1, 2}, {1, 3}}};
  }

  const SourceSpec src = source_for(cfg, imp, SourceKind::pair);
  const DetectorSpec det = detector_for(cfg, imp);
  const double v = imp.indistinguishability;

  TruthTable probs{}, expected{}, sampled{};
  res.points.resize(4);
  parallel_for(4, [&](std::size_t i) {
    const Input& in = inputs[i];
    SweepPoint& pt = res.points[i];
    pt.x = static_cast<double>(i);
    pt.label = in.label;
    const auto coherent = clicks(evolve(photon_pair(cfg, in.control, in.target), circuit), routing);
    ClickDistribution dist = coherent;
    if (v < 1.0) {
      const auto separate = convolve(clicks(evolve(single_photon(cfg, in.control), circuit), routing),
                                     clicks(evolve(single_photon(cfg, in.target), circuit), routing));
      dist = mix(coherent, v, separate, 1.0 - v);
    }
    const auto mean = mean_detector_photons(dist);
    double success = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto [a, b] = out_det[k];
      const double p = joint_click_probability(dist, a, b);
      success += p;
      probs[i][k] = p;
      const std::string key = "out" + std::to_string(k);
      pt.values["p_" + key] = p;
      pt.counts[key] = sample_counts(std::clamp(p, 0.0, 1.0), det, src, derive_seed(seed, 4 * i + k),
                                     {mean[a], mean[b]});
      expected[i][k] = pt.counts[key].expected_total();
      sampled[i][k] = static_cast<double>(pt.counts[key].total_coincidences());
    }
    pt.values["success_probability"] = success;
  });

  const TruthTable ideal = ideal_cz_table(basis);
  res.tables["probabilities"] = probs;
  res.tables["expected_counts"] = expected;
  res.tables["sampled_counts"] = sampled;
  res.tables["ideal"] = ideal;
  res.tables["normalized"] = normalize_rows(expected);
  res.metrics["fidelity"] = truth_table_fidelity(normalize_rows(expected), ideal);
  res.metrics["fidelity"].method = "mean-correct-probability-expected";

  std::array<double, 4> row_totals{};
  bool all_rows = true;
  for (std::size_t i = 0; i < 4; ++i) {
    for (double c : sampled[i]) row_totals[i] += c;
    all_rows = all_rows && row_totals[i] > 0.0;
  }
  if (all_rows) {
    res.metrics["fidelity_counts"] =
        truth_table_fidelity(normalize_rows(sampled), ideal, row_totals);
  }
  double smin = 1.0, smax = 0.0;
  for (const auto& pt : res.points) {
    smin = std::min(smin, pt.values.at("success_probability"));
    smax = std::max(smax, pt.values.at("success_probability"));
  }
  res.metrics["success_probability_min"] = {smin, 0.0, "min-over-inputs"};
  res.metrics["success_probability_max"] = {smax, 0.0, "max-over-inputs"};
  return res;
}

ExperimentResult run_cz_characterization(const ChipConfig& cfg, const Imperfections& imp,
                                         std::uint64_t seed, bool allow_nonstandard) {
  const ExperimentResult xz = run_cz(cfg, CzBasis::xz, imp, seed, allow_nonstandard);
  const ExperimentResult zx = run_cz(cfg, CzBasis::zx, imp, derive_seed(seed, 1), allow_nonstandard);
  ExperimentResult res;
  res.experiment = "cz";
  res.sweep_variable = "input";
  res.config = cfg;
  res.imperfections = imp;
  res.seed = seed;
  res.warnings = xz.warnings;
  for (const auto* part : {&xz, &zx}) {
    const std::string prefix = part == &xz ? "xz_" : "zx_";
    for (SweepPoint pt : part->points) {
      pt.x = static_cast<double>(res.points.size());
      pt.label = prefix + pt.label;
      res.points.push_back(std::move(pt));
    }
    for (const auto& [k, t] : part->tables) res.tables[prefix + k] = t;
    for (const auto& [k, m] : part->metrics) res.metrics[prefix + k] = m;
  }
  const BoundResult bound = hofmann_bound(xz.metrics.at("fidelity").value, zx.metrics.at("fidelity").value);
  res.metrics["hofmann_bound"] = {bound.value, 0.0, bound.clamped ? "fxz+fzx-1 (clamped)" : "fxz+fzx-1"};
  if (xz.metrics.count("fidelity_counts") && zx.metrics.count("fidelity_counts")) {
    const auto& a = xz.metrics.at("fidelity_counts");
    const auto& b = zx.metrics.at("fidelity_counts");
    const BoundResult bc = hofmann_bound(a.value, b.value);
    res.metrics["hofmann_bound_counts"] = {bc.value, std::hypot(a.sigma, b.sigma),
                                           bc.clamped ? "fxz+fzx-1 counts (clamped)" : "fxz+fzx-1 counts"};
  }
  res.metrics["success_probability_min"] = {
      std::min(xz.metrics.at("success_probability_min").value, zx.metrics.at("success_probability_min").value),
      0.0, "min-over-inputs"};
  res.metrics["success_probability_max"] = {
      std::max(xz.metrics.at("success_probability_max").value, zx.metrics.at("success_probability_max").value),
      0.0, "max-over-inputs"};
  return res;
}

ExperimentResult run_bell(const ChipConfig& cfg, const std::vector<double>& phases,
                          const Imperfections& imp, std::uint64_t seed) {
  validate(cfg);
  validate(imp);
  if (phases.size() < 2) throw DomainError("Bell sweep needs at least two phases");
  const LogicalModes lm = logical_modes(cfg);
  ExperimentResult res;
  res.experiment = "bell";
  res.sweep_variable = "phase";
  res.config = cfg;
  res.imperfections = imp;
  res.seed = seed;
  const double t1 = cfg.dr1.effective_transmissivity();
  const double t2 = cfg.dr2.effective_transmissivity();
  if (!near(t1, 0.5) || !near(t2, 0.5)) {
    res.warnings.push_back("DR1/DR2 are not balanced; projections are not onto |+/->");
  }

  // Qubit A on the control pair, qubit B on the target pair with
  // |0>_B the upper bin so |00> and |11> are energy matched.
  SourceSpec src = source_for(cfg, imp, SourceKind::bell);
  src.logical_modes = {lm.c0, lm.c1, lm.t1, lm.t0};
  const PureState bell = make_source_state(src, cfg.grid);
  const PureState branch00 = photon_pair(cfg, lm.c0, lm.t1);
  const PureState branch11 = photon_pair(cfg, lm.c1, lm.t0);

  const auto routing = routing_for(cfg, {lm.c0, lm.c1, lm.t0, lm.t1}, {0, 1, 2, 3}, imp);
  const DetectorSpec det = detector_for(cfg, imp);
  const double v = imp.indistinguishability;
  // A+ = |0>_C detector, A- = |1>_C, B+ = |0>_T, B- = |1>_T.
  const std::array<std::pair<std::string, std::array<std::size_t, 2>>, 4> curves{
      {{"p_pp", {0, 2}}, {"p_pm", {0, 3}}, {"p_mp", {1, 2}}, {"p_mm", {1, 3}}}};

  res.points.resize(phases.size());
  parallel_for(phases.size(), [&](std::size_t i) {
    SweepPoint& pt = res.points[i];
    pt.x = phases[i];
    Circuit circuit = dr_stage(cfg, cfg.dr1, lm.c0, t1, imp);
    circuit.push_back(phase_transform(lm.t0, phases[i]));
    append(circuit, dr_stage(cfg, cfg.dr2, lm.t0, t2, imp));
    ClickDistribution dist = clicks(evolve(bell, circuit), routing);
    if (v < 1.0) {
      const auto incoherent = mix(clicks(evolve(branch00, circuit), routing), 0.5,
                                  clicks(evolve(branch11, circuit), routing), 0.5);
      dist = mix(dist, v, incoherent, 1.0 - v);
    }
    const auto mean = mean_detector_photons(dist);
    for (std::size_t k = 0; k < curves.size(); ++k) {
      const auto& [name, dets] = curves[k];
      const double p = joint_click_probability(dist, dets[0], dets[1]);
      pt.values[name] = p;
      pt.counts[name.substr(2)] = sample_counts(std::clamp(p, 0.0, 1.0), det, src,
                                                derive_seed(seed, 4 * i + k),
                                                {mean[dets[0]], mean[dets[1]]});
    }
  });

  std::vector<MetricResult> vis, vis_counts;
  for (const auto& [name, dets] : curves) {
    std::vector<double> series, sampled;
    for (const auto& pt : res.points) {
      const auto& rec = pt.counts.at(name.substr(2));
      series.push_back(rec.expected_total());
      sampled.push_back(static_cast<double>(rec.total_coincidences()));
    }
    vis.push_back(visibility_minmax(series));
    res.metrics["visibility_" + name.substr(2)] = vis.back();
    vis_counts.push_back(visibility_minmax(sampled, true));
    res.metrics["visibility_counts_" + name.substr(2)] = vis_counts.back();
  }
  res.metrics["visibility_ave"] = average(vis, "mean-of-four-curves");
  res.metrics["visibility_ave_counts"] = average(vis_counts, "mean-of-four-curves-poisson");
  return res;
}

ExperimentResult run_spectroscopy(const ChipConfig& cfg, const std::vector<double>& scan_ghz,
                                  SpectroscopyTarget target, std::uint64_t seed,
                                  const SpectroscopyOptions& opts) {
  validate(cfg);
  if (scan_ghz.size() < 2) throw DomainError("spectroscopy scan needs at least two points");
  if (!(opts.noise_sigma >= 0.0)) throw DomainError("noise sigma must be non-negative");
  ExperimentResult res;
  res.experiment = "spectroscopy";
  res.sweep_variable = "detuning_ghz";
  res.config = cfg;
  res.seed = seed;

  std::mt19937_64 rng(derive_seed(seed, 0));
  std::normal_distribution<double> noise(0.0, 1.0);

  if (target == SpectroscopyTarget::filters) {
    const std::array<std::string, 4> names{"r3", "r4", "r5", "r6"};
    for (double x : scan_ghz) {
      SweepPoint pt;
      pt.x = x;
      for (std::size_t k = 0; k < 4; ++k) {
        const FilterResponse fr = filter_response(cfg.filters[k], x);
        pt.values[names[k] + "_drop"] = std::norm(fr.drop);
        pt.values[names[k] + "_through"] = std::norm(fr.through);
      }
      res.points.push_back(std::move(pt));
    }
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& f = cfg.filters[k];
      const double peak = std::norm(filter_response(f, f.resonance_offset_ghz).drop);
      const double adj =
          std::norm(filter_response(f, f.resonance_offset_ghz + cfg.grid->spacing_ghz()).drop);
      res.metrics[names[k] + "_crosstalk_adjacent"] = {adj / peak, 0.0, "lorentzian-relative-drop"};
      res.metrics[names[k] + "_drop_efficiency"] = {peak, 0.0, "drop-at-resonance"};
    }
    return res;
  }

  const DrStage& st = target == SpectroscopyTarget::dr1   ? cfg.dr1
                      : target == SpectroscopyTarget::dr2 ? cfg.dr2
                                                          : cfg.dr3;
  const DRParams& p = st.physics;
  std::vector<double> measured;
  measured.reserve(scan_ghz.size());
  for (double x : scan_ghz) {
    measured.push_back(dr_through_transmission(p, x) + opts.noise_sigma * noise(rng));
  }
  const DoubletFit fit = fit_doublet(scan_ghz, measured);
  for (std::size_t k = 0; k < scan_ghz.size(); ++k) {
    SweepPoint pt;
    pt.x = scan_ghz[k];
    pt.values["transmission"] = measured[k];
    pt.values["model"] = dr_through_transmission(p, scan_ghz[k]);
    pt.values["fit"] = dr_through_transmission(fit.model, scan_ghz[k] - fit.center_ghz);
    res.points.push_back(std::move(pt));
  }
  res.metrics["two_g_ghz"] = {fit.two_g_ghz, 0.0, "levenberg-marquardt"};
  res.metrics["linewidth_lower_ghz"] = {fit.linewidths_ghz[0], 0.0, "fitted-model-fwhm"};
  res.metrics["linewidth_upper_ghz"] = {fit.linewidths_ghz[1], 0.0, "fitted-model-fwhm"};
  res.metrics["dip_depth_lower"] = {fit.dip_depths[0], 0.0, "fitted-model"};
  res.metrics["dip_depth_upper"] = {fit.dip_depths[1], 0.0, "fitted-model"};
  res.metrics["rms_residual"] = {fit.rms_residual, 0.0, "fit"};

  // EO slope: the doublet moves by the DC shift; fit each shifted scan and
  // regress the fitted centers against voltage.
  if (opts.eo_voltages.size() >= 2) {
    std::vector<double> centers;
    for (std::size_t k = 0; k < opts.eo_voltages.size(); ++k) {
      const double shift = eo_resonance_shift(opts.eo_voltages[k], p.eo_coeff_ghz_per_v);
      std::vector<double> y;
      y.reserve(scan_ghz.size());
      for (double x : scan_ghz) {
        y.push_back(dr_through_transmission(p, x - shift) + opts.noise_sigma * noise(rng));
      }
      centers.push_back(fit_doublet(scan_ghz, y).center_ghz);
    }
    const auto [slope, intercept] = fit_line(opts.eo_voltages, centers);
    res.metrics["eo_slope_ghz_per_v"] = {slope, 0.0, "linear-fit-of-fitted-centers"};
  }
  return res;
}

}  // namespace freqbin
