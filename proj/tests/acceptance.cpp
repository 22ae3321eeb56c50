// Acceptance checks. Prints one PASS/FAIL line per criterion.
//
// Usage: freqbin_acceptance [--expect-red N[,M...]]
// Exit status is 0 when the failing criteria are exactly the expected-red set.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "freqbin/counting.hpp"
#include "freqbin/elements.hpp"
#include "freqbin/experiments.hpp"
#include "freqbin/fock.hpp"
#include "freqbin/resonator.hpp"
#include "freqbin/serialize.hpp"
#include "test_support.hpp"

using namespace freqbin;

namespace {

constexpr double kPi = std::numbers::pi;

// Collects sub-check outcomes for one criterion.
struct Checks {
  bool ok = true;
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      failures.push_back(what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> phases(int n) {
  std::vector<double> p;
  for (int k = 0; k < n; ++k) p.push_back(2.0 * kPi * k / (n - 1));
  return p;
}

ChipConfig bell_config() {
  ChipConfig cfg = ChipConfig::measured_device();
  cfg.dr2.transmissivity = 0.5;
  return cfg;
}

void criterion1(Checks& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const ChipConfig cfg = ChipConfig::measured_device();
  double worst = 0.0;
  for (CzBasis basis : {CzBasis::xz, CzBasis::zx}) {
    const auto res = run_cz(cfg, basis, Imperfections::ideal(), 1);
    const auto& probs = res.tables.at("probabilities");
    const TruthTable ideal = ideal_cz_table(basis);
    for (int i = 0; i < 4; ++i) {
      for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(probs[i][k] - ideal[i][k] / 9.0));
      worst = std::max(worst, std::abs(res.points[i].values.at("success_probability") - 1.0 / 9.0));
    }
  }
  const double dt = seconds_since(t0);
  c.expect(worst < 1e-10, fmt("max |p - 1/9| = %.3g", worst));
  c.expect(dt < 1.0, fmt("runtime %.3f s", dt));
  c.note(fmt("max error %.2e, runtime %.3f s", worst, dt));
}

void criterion2(Checks& c) {
  const ChipConfig cfg = ChipConfig::measured_device();
  for (CzBasis basis : {CzBasis::xz, CzBasis::zx}) {
    const TruthTable t = ideal_cz_table(basis);
    for (int i = 0; i < 4; ++i) {
      int ones = 0;
      double row = 0.0, col = 0.0;
      for (int k = 0; k < 4; ++k) {
        ones += t[i][k] == 1.0;
        row += t[i][k];
        col += t[k][i];
      }
      c.expect(ones == 1 && row == 1.0 && col == 1.0, "ideal table is not a permutation");
    }
  }
  const auto ideal = run_cz_characterization(cfg, Imperfections::ideal(), 1);
  const double fxz = ideal.metrics.at("xz_fidelity").value;
  const double fzx = ideal.metrics.at("zx_fidelity").value;
  const double b_ideal = ideal.metrics.at("hofmann_bound").value;
  c.expect(std::abs(fxz - 1.0) < 1e-12 && std::abs(fzx - 1.0) < 1e-12, "ideal fidelities differ from 1");
  c.expect(std::abs(b_ideal - 1.0) < 1e-12, "ideal bound differs from 1");

  const double b_dev = run_cz_characterization(cfg, Imperfections::device(), 1).metrics.at("hofmann_bound").value;
  c.expect(b_dev >= 0.984, fmt("device imperfections, CAR=inf: bound %.4f < 0.984", b_dev));

  const double b_cal =
      run_cz_characterization(cfg, Imperfections::calibrated_source(), 1).metrics.at("hofmann_bound").value;
  c.expect(b_cal >= 0.90 && b_cal <= 0.93, fmt("calibrated source: bound %.4f outside [0.90, 0.93]", b_cal));
  c.note(fmt("ideal bound %.6f; device (CAR=inf) %.4f", b_ideal, b_dev));
  c.note(fmt("calibrated source (CAR=%g, dark 1 kHz) bound %.4f", kCalibratedCar, b_cal));
}

void criterion3(Checks& c) {
  const ChipConfig cfg = ChipConfig::measured_device();
  std::vector<double> r;
  for (int k = 0; k <= 100; ++k) r.push_back(k / 100.0);
  const auto res = run_hom(cfg, r, Imperfections::ideal(), 1);
  auto g = freqbin::testing::plain_grid(2);
  auto occ = [&](int a, int b) { return OccupationVector(std::vector<int>{a, b}); };
  double worst_law = 0.0, worst_oracle = 0.0;
  for (const auto& pt : res.points) {
    const double x = pt.x;
    Eigen::MatrixXcd bs(2, 2);
    bs << std::sqrt(1 - x), std::sqrt(x), -std::sqrt(x), std::sqrt(1 - x);
    const ModeTransform t({0, 1}, bs);
    const double p_cc = std::norm(transition_amplitude(t, occ(1, 1), occ(1, 1)));
    const double p_dist = x * x + (1 - x) * (1 - x);
    const double v_oracle = (p_dist - p_cc) / p_dist;
    const double v_law = 2 * x * (1 - x) / (x * x + (1 - x) * (1 - x));
    worst_oracle = std::max(worst_oracle, std::abs(pt.values.at("p_cc") - p_cc));
    worst_law = std::max(worst_law, std::abs(v_law - v_oracle));
    worst_law = std::max(worst_law, std::abs(pt.values.at("visibility") - v_law));
  }
  c.expect(worst_law < 1e-10, fmt("law vs oracle %.3g", worst_law));
  c.expect(worst_oracle < 1e-10, fmt("p_cc vs oracle %.3g", worst_oracle));
  c.expect(std::abs(res.points[50].values.at("visibility") - 1.0) < 1e-12, "V(0.5) != 1");
  Imperfections imp;
  imp.indistinguishability = kMeasuredIndistinguishability;
  const double v = run_hom(cfg, {0.5}, imp, 1).metrics.at("visibility_hom").value;
  c.expect(std::abs(v - 0.949) <= 0.002, fmt("v=0.949 gives %.4f", v));
  c.note(fmt("max law/oracle error %.2e; partial distinguishability V = %.4f", std::max(worst_law, worst_oracle), v));
}

void criterion4(Checks& c) {
  const ChipConfig cfg = ChipConfig::measured_device();
  const auto ph = phases(41);
  const auto ideal = run_fmzi(cfg, ph, FmziMode::classical, Imperfections::ideal(), 1);
  for (const char* port : {"in1_port1", "in1_port2", "in2_port1", "in2_port2"}) {
    const double v = ideal.metrics.at(std::string("visibility_") + port).value;
    c.expect(std::abs(v - 1.0) <= 1e-9, fmt("ideal visibility %.12f", v));
  }
  const double vc = run_fmzi(cfg, ph, FmziMode::classical, Imperfections::device(), 1).metrics.at("visibility_ave").value;
  const double vq =
      run_fmzi(cfg, ph, FmziMode::quantum, Imperfections::device_with_source(), 1).metrics.at("visibility_ave").value;
  c.expect(vc >= 0.965 && vc <= 0.98, fmt("classical V %.4f outside [0.965, 0.98]", vc));
  c.expect(vq >= 0.965 && vq <= 0.977, fmt("quantum V %.4f outside [0.965, 0.977]", vq));
  c.note(fmt("classical (device) V = %.4f, quantum (device + source) V = %.4f", vc, vq));
}

void criterion5(Checks& c) {
  const ChipConfig cfg = bell_config();
  const auto ph = phases(41);
  const auto ideal = run_bell(cfg, ph, Imperfections::ideal(), 1);
  double worst = 0.0, worst_sum = 0.0;
  for (const auto& pt : ideal.points) {
    const double cs = std::cos(pt.x);
    const auto& v = pt.values;
    worst = std::max({worst, std::abs(v.at("p_pp") - (1 + cs) / 4), std::abs(v.at("p_mm") - (1 + cs) / 4),
                      std::abs(v.at("p_pm") - (1 - cs) / 4), std::abs(v.at("p_mp") - (1 - cs) / 4)});
    worst_sum = std::max(worst_sum, std::abs(v.at("p_pp") + v.at("p_pm") + v.at("p_mp") + v.at("p_mm") - 1.0));
  }
  c.expect(worst < 1e-10, fmt("fringe error %.3g", worst));
  c.expect(worst_sum < 1e-10, fmt("sum error %.3g", worst_sum));
  const double v = run_bell(cfg, ph, Imperfections::calibrated_source(), 1).metrics.at("visibility_ave").value;
  c.expect(v >= 0.963 && v <= 0.975, fmt("calibrated V %.4f outside [0.963, 0.975]", v));
  c.note(fmt("ideal max error %.2e; calibrated V = %.4f", std::max(worst, worst_sum), v));
}

void criterion6(Checks& c) {
  DRParams p;
  p.g_ghz = 13.49 / 2.0;
  std::vector<double> d;
  for (int k = 0; k <= 1600; ++k) d.push_back(-40.0 + 0.05 * k);
  const auto clean = dr_through_spectrum(p, d);
  const double g0 = fit_doublet(d, clean).two_g_ghz;
  c.expect(std::abs(g0 - 13.49) <= 0.07, fmt("noiseless 2g = %.4f", g0));
  double worst = 0.0;
  int failures = 0;
  for (int s = 0; s < 100; ++s) {
    std::mt19937_64 rng(derive_seed(2024, static_cast<std::uint64_t>(s)));
    std::normal_distribution<double> noise(0.0, 0.01);
    auto y = clean;
    for (auto& v : y) v += noise(rng);
    try {
      worst = std::max(worst, std::abs(fit_doublet(d, y).two_g_ghz - 13.49));
    } catch (const std::exception&) {
      ++failures;
    }
  }
  c.expect(failures == 0, fmt("%g noisy fits failed", failures));
  c.expect(worst <= 0.2, fmt("noisy worst |2g - 13.49| = %.4f", worst));
  const double shift = eo_resonance_shift(10.0, 0.226);
  c.expect(std::abs(shift - 2.26) < 1e-12, fmt("EO shift %.15f", shift));
  c.note(fmt("noiseless 2g = %.4f GHz, noisy worst error %.4f GHz", g0, worst));
}

void criterion7(Checks& c) {
  FilterParams f;
  f.linewidth_fwhm_ghz = 4.0;
  const double rel = std::norm(filter_response(f, 12.95).drop) / std::norm(filter_response(f, 0.0).drop);
  c.expect(std::abs(rel - 0.0233) <= 0.0005, fmt("relative drop %.5f", rel));
  c.expect(rel < 0.03, "crosstalk above 3%");
  c.note(fmt("relative drop power %.5f", rel));
}

void enumerate(std::size_t modes, int photons, std::vector<int>& cur, std::vector<OccupationVector>& out) {
  if (cur.size() + 1 == modes) {
    cur.push_back(photons);
    out.emplace_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = 0; k <= photons; ++k) {
    cur.push_back(k);
    enumerate(modes, photons - k, cur, out);
    cur.pop_back();
  }
}

void criterion8(Checks& c) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(8);
  double worst = 0.0;
  for (int n = 0; n < 200; ++n) {
    const int modes = std::uniform_int_distribution<int>(2, 8)(rng);
    const int photons = std::uniform_int_distribution<int>(1, 3)(rng);
    const int sub = std::uniform_int_distribution<int>(1, modes)(rng);
    std::vector<std::size_t> all(static_cast<std::size_t>(modes));
    for (int k = 0; k < modes; ++k) all[static_cast<std::size_t>(k)] = static_cast<std::size_t>(k);
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<std::size_t> acted(all.begin(), all.begin() + sub);
    const ModeTransform t(acted, freqbin::testing::random_subunitary(sub, rng));
    // Oracle over the full mode set: identity on untouched modes.
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Identity(modes, modes);
    for (int i = 0; i < sub; ++i)
      for (int j = 0; j < sub; ++j) full(static_cast<Eigen::Index>(acted[i]), static_cast<Eigen::Index>(acted[j])) = t.matrix()(i, j);
    std::vector<std::size_t> ordered(static_cast<std::size_t>(modes));
    for (int k = 0; k < modes; ++k) ordered[static_cast<std::size_t>(k)] = static_cast<std::size_t>(k);
    const ModeTransform oracle(ordered, full);

    auto grid = freqbin::testing::plain_grid(modes);
    const PureState in = freqbin::testing::random_state(grid, photons, 3, rng);
    const PureState out = apply_transform(in, t);
    std::vector<OccupationVector> patterns;
    std::vector<int> cur;
    enumerate(static_cast<std::size_t>(modes), photons, cur, patterns);
    for (const auto& o : patterns) {
      Complex expect{0.0, 0.0};
      for (const auto& [occ, amp] : in.amplitudes()) expect += amp * transition_amplitude(oracle, occ, o);
      worst = std::max(worst, std::abs(out.amplitude(o) - expect));
    }
  }
  const double dt = seconds_since(t0);
  c.expect(worst < 1e-9, fmt("max amplitude error %.3g", worst));
  c.expect(dt < 60.0, fmt("runtime %.2f s", dt));
  c.note(fmt("200 circuits, max error %.2e, runtime %.3f s", worst, dt));
}

void criterion9(Checks& c) {
  DetectorSpec d;
  d.insertion_loss = 1.0;
  d.integration_s = 1e6 / 1e5;
  SourceSpec s;
  double sum = 0.0;
  for (int k = 0; k < 50; ++k) sum += static_cast<double>(sample_counts(1.0, d, s, derive_seed(9, k)).true_coincidences);
  const double mean = sum / 50.0;
  c.expect(std::abs(mean / 1e6 - 1.0) < 0.005, fmt("mean %.1f", mean));
  const ChipConfig cfg = bell_config();
  const auto a = dump_result(run_bell(cfg, phases(21), Imperfections::calibrated_source(), 99));
  const auto b = dump_result(run_bell(cfg, phases(21), Imperfections::calibrated_source(), 99));
  const auto h1 = dump_result(run_hom(cfg, {0.1, 0.5}, Imperfections::calibrated_source(), 99));
  const auto h2 = dump_result(run_hom(cfg, {0.1, 0.5}, Imperfections::calibrated_source(), 99));
  c.expect(a == b && h1 == h2, "serialized results differ for identical seeds");
  c.note(fmt("Poisson mean %.1f (relative error %.2e)", mean, std::abs(mean / 1e6 - 1.0)));
}

std::set<int> parse_expected(int argc, char** argv) {
  std::set<int> out;
  for (int k = 1; k < argc; ++k) {
    if (std::string(argv[k]) == "--expect-red" && k + 1 < argc) {
      std::stringstream ss(argv[++k]);
      std::string item;
      while (std::getline(ss, item, ',')) out.insert(std::stoi(item));
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::set<int> expected_red = parse_expected(argc, argv);
  const std::vector<std::pair<const char*, std::function<void(Checks&)>>> criteria{
      {"CZ success probability", criterion1}, {"CZ truth tables and bound", criterion2},
      {"HOM visibility", criterion3},         {"f-MZI visibility", criterion4},
      {"Bell fringes", criterion5},           {"spectroscopy fit and EO shift", criterion6},
      {"filter crosstalk", criterion7},       {"oracle equivalence", criterion8},
      {"statistical layer", criterion9}};
  bool consistent = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    Checks c;
    try {
      criteria[k].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    std::printf("%s criterion %d: %s\n", c.ok ? "PASS" : "FAIL", id, criteria[k].first);
    for (const auto& n : c.notes) std::printf("    %s\n", n.c_str());
    for (const auto& f : c.failures) std::printf("    failed: %s\n", f.c_str());
    const bool red_expected = expected_red.count(id) > 0;
    if (c.ok == red_expected) {
      consistent = false;
      std::printf("    %s\n", c.ok ? "unexpected pass: remove from the expected-red list"
                                   : "unexpected failure");
    } else if (red_expected) {
      std::printf("    known red: see README, \"Known gaps\"\n");
    }
  }
  return consistent ? 0 : 1;
}
