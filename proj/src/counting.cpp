#include "freqbin/counting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "freqbin/errors.hpp"

namespace freqbin {

std::string to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::pair:
      return "pair";
    case SourceKind::heralded_single:
      return "heralded_single";
    case SourceKind::bell:
      return "bell";
  }
  return "unknown";
}

SourceKind source_kind_from_string(const std::string& text) {
  if (text == "pair") return SourceKind::pair;
  if (text == "heralded_single") return SourceKind::heralded_single;
  if (text == "bell") return SourceKind::bell;
  throw ValidationError("unknown source kind '" + text + "'");
}

void validate(const SourceSpec& s) {
  if (!(s.car > 1.0)) throw ValidationError("CAR must exceed 1");
  if (!(s.pair_rate_hz >= 0.0) || !std::isfinite(s.pair_rate_hz)) {
    throw ValidationError("pair rate must be finite and non-negative");
  }
  if (!(s.photon_linewidth_mhz > 0.0)) throw ValidationError("photon linewidth must be positive");
  if (!(s.indistinguishability >= 0.0 && s.indistinguishability <= 1.0)) {
    throw ValidationError("indistinguishability must lie in [0, 1]");
  }
}

void validate(const DetectorSpec& d) {
  if (!(d.efficiency > 0.0 && d.efficiency <= 1.0)) {
    throw ValidationError("detector efficiency must lie in (0, 1]");
  }
  if (!(d.dark_rate_hz >= 0.0)) throw ValidationError("dark rate must be non-negative");
  if (!(d.coincidence_window_ps > 0.0)) throw ValidationError("coincidence window must be positive");
  if (!(d.integration_s > 0.0)) throw ValidationError("integration time must be positive");
  if (!(d.insertion_loss > 0.0 && d.insertion_loss <= 1.0)) {
    throw ValidationError("insertion loss must lie in (0, 1]");
  }
}

PureState make_source_state(const SourceSpec& s, std::shared_ptr<const BinGrid> grid) {
  validate(s);
  const std::size_t n = grid->mode_count();
  auto check = [&](std::size_t m) {
    if (m >= n) throw ValidationError("source mode " + std::to_string(m) + " is not in the grid");
  };
  switch (s.kind) {
    case SourceKind::pair: {
      check(s.signal_mode);
      check(s.idler_mode);
      if (s.signal_mode == s.idler_mode) throw ValidationError("signal and idler modes coincide");
      auto occ = OccupationVector::vacuum(n);
      occ[s.signal_mode] = 1;
      occ[s.idler_mode] = 1;
      return PureState::basis(grid, occ);
    }
    case SourceKind::heralded_single: {
      check(s.signal_mode);
      auto occ = OccupationVector::vacuum(n);
      occ[s.signal_mode] = 1;
      return PureState::basis(grid, occ);
    }
    case SourceKind::bell: {
      const auto& b = s.logical_modes;
      for (std::size_t m : b) check(m);
      if (std::set<std::size_t>(b.begin(), b.end()).size() != 4) {
        throw ValidationError("Bell logical modes must be distinct");
      }
      const int a0 = grid->bin(b[0]).index, a1 = grid->bin(b[1]).index;
      const int b0 = grid->bin(b[2]).index, b1 = grid->bin(b[3]).index;
      if (a0 + b0 != a1 + b1) {
        throw ValidationError("Bell bin map is not energy matched: |00> and |11> pairs differ in sum frequency");
      }
      auto occ00 = OccupationVector::vacuum(n);
      occ00[b[0]] = 1;
      occ00[b[2]] = 1;
      auto occ11 = OccupationVector::vacuum(n);
      occ11[b[1]] = 1;
      occ11[b[3]] = 1;
      const double h = 1.0 / std::numbers::sqrt2;
      return PureState(grid, {{occ00, h}, {occ11, h}});
    }
  }
  throw ValidationError("unknown source kind");
}

double coincidence_probability(const PureState& state, const std::set<std::size_t>& pattern_a,
                               const std::set<std::size_t>& pattern_b) {
  for (std::size_t m : pattern_a) {
    if (pattern_b.count(m)) throw DomainError("coincidence patterns overlap");
  }
  double p = 0.0;
  for (const auto& [occ, amp] : state.amplitudes()) {
    int in_a = 0, in_b = 0;
    for (std::size_t m : pattern_a) in_a += m < occ.size() ? occ[m] : 0;
    for (std::size_t m : pattern_b) in_b += m < occ.size() ? occ[m] : 0;
    if (in_a == 1 && in_b == 1) p += std::norm(amp);
  }
  return std::clamp(p, 0.0, 1.0);
}

double indistinguishability_mix(double p_indist, double p_dist, double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError("indistinguishability must lie in [0, 1]");
  return v * p_indist + (1.0 - v) * p_dist;
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  // splitmix64 finalizer over a combination of both inputs.
  std::uint64_t z = base_seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::uint64_t draw_poisson(std::mt19937_64& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(rng);
}

}  // namespace

CountRecord sample_counts(double p_true, const DetectorSpec& d, const SourceSpec& s,
                          std::uint64_t seed, std::array<double, 2> singles_weights) {
  if (!(p_true >= 0.0 && p_true <= 1.0)) throw DomainError("p_true must lie in [0, 1]");
  for (double w : singles_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("singles weights must be non-negative");
  }
  validate(d);
  validate(s);

  const double eta = d.efficiency * d.insertion_loss;
  const double window_s = d.coincidence_window_ps * 1e-12;
  const double pair_detect_rate = s.pair_rate_hz * eta * eta;
  const double s_ref = std::isinf(s.car) ? 0.0 : std::sqrt(pair_detect_rate / (s.car * window_s));

  CountRecord rec;
  rec.p_true = p_true;
  rec.singles_weights = singles_weights;
  rec.seed = seed;
  rec.expected_true = pair_detect_rate * d.integration_s * p_true;
  const double bg_a = s_ref * singles_weights[0] + d.dark_rate_hz;
  const double bg_b = s_ref * singles_weights[1] + d.dark_rate_hz;
  rec.expected_accidental = bg_a * bg_b * window_s * d.integration_s;

  std::mt19937_64 rng(seed);
  rec.true_coincidences = draw_poisson(rng, rec.expected_true);
  rec.accidental_coincidences = draw_poisson(rng, rec.expected_accidental);
  for (int k = 0; k < 2; ++k) {
    const double signal = s.pair_rate_hz * eta * singles_weights[k];
    const double bg = k == 0 ? bg_a : bg_b;
    rec.singles[k] = draw_poisson(rng, (signal + bg) * d.integration_s);
  }
  return rec;
}

double coherence_time_ps(double linewidth_mhz) {
  return 1.0 / (2.0 * std::numbers::pi * linewidth_mhz * 1e6) * 1e12;
}

double g2_density(double tau_ps, double linewidth_mhz, double window_ps) {
  const double tc = coherence_time_ps(linewidth_mhz);
  const double a = std::abs(tau_ps);
  if (window_ps <= 0.0) return std::exp(-a / tc);
  const double h = window_ps / 2.0;
  double v;
  if (a <= h) {
    v = tc * (2.0 - std::exp(-(h - a) / tc) - std::exp(-(h + a) / tc));
  } else {
    v = tc * (std::exp(-(a - h) / tc) - std::exp(-(a + h) / tc));
  }
  return v / window_ps;
}

std::vector<double> g2_histogram(std::span<const double> tau_grid_ps, double linewidth_mhz,
                                 double window_ps) {
  if (!(linewidth_mhz > 0.0)) throw DomainError("linewidth must be positive");
  if (window_ps < 0.0) throw DomainError("window must be non-negative");
  const std::size_t n = tau_grid_ps.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double a = tau_grid_ps[k], b = tau_grid_ps[n - 1 - k];
    if (std::abs(a + b) > 1e-9 * std::max(1.0, std::abs(a))) {
      throw DomainError("time grid must be symmetric about zero");
    }
  }
  const double peak = g2_density(0.0, linewidth_mhz, window_ps);
  std::vector<double> out;
  out.reserve(n);
  for (double t : tau_grid_ps) out.push_back(g2_density(t, linewidth_mhz, window_ps) / peak);
  return out;
}

MetricResult visibility_minmax(std::span<const double> values, bool poisson) {
  if (values.size() < 2) throw DomainError("visibility needs at least two values");
  for (double v : values) {
    if (!(v >= 0.0)) throw DomainError("visibility inputs must be non-negative");
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double a = *hi, b = *lo;
  if (a + b == 0.0) throw DomainError("visibility of an all-zero series");
  MetricResult r;
  r.value = (a - b) / (a + b);
  r.method = "minmax";
  if (poisson) {
    r.sigma = 2.0 * std::sqrt(a * b * (a + b)) / ((a + b) * (a + b));
    r.method = "minmax-poisson";
  }
  return r;
}

MetricResult visibility_hom(double n_max, double n_min) {
  if (!(n_max > 0.0)) throw DomainError("HOM visibility needs N_max > 0");
  if (!(n_min >= 0.0)) throw DomainError("counts must be non-negative");
  MetricResult r;
  r.value = (n_max - n_min) / n_max;
  r.sigma = std::sqrt(n_min * n_min / (n_max * n_max * n_max) + n_min / (n_max * n_max));
  r.method = "hom-raw-poisson";
  return r;
}

TruthTable normalize_rows(const TruthTable& t) {
  TruthTable out = t;
  for (auto& row : out) {
    double s = 0.0;
    for (double v : row) s += v;
    if (s > 0.0) {
      for (double& v : row) v /= s;
    }
  }
  return out;
}

MetricResult truth_table_fidelity(const TruthTable& measured, const TruthTable& ideal,
                                  std::span<const double> row_counts) {
  if (!row_counts.empty() && row_counts.size() != 4) {
    throw ValidationError("row counts must have four entries");
  }
  MetricResult r;
  r.method = "mean-correct-probability";
  double var = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double row_sum = 0.0, correct = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      if (measured[i][j] < 0.0) throw DomainError("truth table has a negative entry");
      row_sum += measured[i][j];
      correct += measured[i][j] * ideal[i][j];
    }
    if (std::abs(row_sum - 1.0) > 1e-9) throw DomainError("truth table rows must be normalized");
    r.value += correct / 4.0;
    if (!row_counts.empty() && row_counts[i] > 0.0) {
      var += correct * (1.0 - correct) / row_counts[i];
    }
  }
  r.sigma = std::sqrt(var) / 4.0;
  if (!row_counts.empty()) r.method = "mean-correct-probability-binomial";
  return r;
}

MetricResult truth_table_fidelity(const std::vector<std::vector<double>>& measured,
                                  const std::vector<std::vector<double>>& ideal) {
  auto to_table = [](const std::vector<std::vector<double>>& v) {
    if (v.size() != 4) throw ValidationError("truth table must be 4x4");
    TruthTable t{};
    for (std::size_t i = 0; i < 4; ++i) {
      if (v[i].size() != 4) throw ValidationError("truth table must be 4x4");
      for (std::size_t j = 0; j < 4; ++j) t[i][j] = v[i][j];
    }
    return t;
  };
  return truth_table_fidelity(to_table(measured), to_table(ideal));
}

BoundResult hofmann_bound(double f_xz, double f_zx) {
  const double v = f_xz + f_zx - 1.0;
  if (v < 0.0) return {0.0, true};
  return {v, false};
}

Eigen::MatrixXd detector_routing(const BinGrid& grid, std::span<const DetectorChannel> channels,
                                 bool crosstalk) {
  const auto n_det = static_cast<Eigen::Index>(channels.size());
  const auto n_modes = static_cast<Eigen::Index>(grid.mode_count());
  Eigen::MatrixXd routing = Eigen::MatrixXd::Zero(n_det, n_modes);
  for (const auto& ch : channels) {
    grid.bin(ch.target_mode);
    validate(ch.filter);
  }
  for (Eigen::Index m = 0; m < n_modes; ++m) {
    double survive = 1.0;
    for (Eigen::Index d = 0; d < n_det; ++d) {
      const auto& ch = channels[static_cast<std::size_t>(d)];
      if (!crosstalk) {
        if (static_cast<std::size_t>(m) == ch.target_mode) {
          routing(d, m) = ch.filter.drop_efficiency;
        }
        continue;
      }
      const double detuning = (grid.bin(static_cast<std::size_t>(m)).index -
                               grid.bin(ch.target_mode).index) *
                              grid.spacing_ghz();
      const FilterResponse resp = filter_response(ch.filter, detuning);
      routing(d, m) = survive * std::norm(resp.drop);
      survive *= std::norm(resp.through);
    }
  }
  return routing;
}

ClickDistribution click_distribution(const PureState& state, const Eigen::MatrixXd& routing) {
  const auto n_det = static_cast<std::size_t>(routing.rows());
  if (static_cast<std::size_t>(routing.cols()) != state.grid().mode_count()) {
    throw DomainError("routing matrix does not match the grid");
  }
  ClickDistribution total;
  for (const auto& [occ, amp] : state.amplitudes()) {
    const double weight = std::norm(amp);
    ClickDistribution dist{{std::vector<int>(n_det + 1, 0), weight}};
    for (std::size_t m = 0; m < occ.size(); ++m) {
      for (int photon = 0; photon < occ[m]; ++photon) {
        ClickDistribution next;
        double lost = 1.0;
        for (std::size_t d = 0; d < n_det; ++d) lost -= routing(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m));
        for (const auto& [counts, p] : dist) {
          for (std::size_t d = 0; d <= n_det; ++d) {
            const double q = d < n_det ? routing(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m)) : std::max(lost, 0.0);
            if (q <= 0.0) continue;
            auto c = counts;
            ++c[d];
            next[c] += p * q;
          }
        }
        dist = std::move(next);
      }
    }
    for (const auto& [counts, p] : dist) total[counts] += p;
  }
  return total;
}

ClickDistribution convolve(const ClickDistribution& a, const ClickDistribution& b) {
  ClickDistribution out;
  for (const auto& [ca, pa] : a) {
    for (const auto& [cb, pb] : b) {
      if (ca.size() != cb.size()) throw DomainError("click distributions differ in detector count");
      std::vector<int> c(ca.size());
      for (std::size_t k = 0; k < c.size(); ++k) c[k] = ca[k] + cb[k];
      out[c] += pa * pb;
    }
  }
  return out;
}

double joint_click_probability(const ClickDistribution& dist, std::size_t a, std::size_t b) {
  double p = 0.0;
  for (const auto& [counts, q] : dist) {
    if (a >= counts.size() - 1 || b >= counts.size() - 1) throw DomainError("detector index out of range");
    if (counts[a] > 0 && counts[b] > 0) p += q;
  }
  return p;
}

std::vector<double> mean_detector_photons(const ClickDistribution& dist) {
  std::vector<double> out;
  for (const auto& [counts, q] : dist) {
    if (out.empty()) out.assign(counts.size() - 1, 0.0);
    for (std::size_t d = 0; d + 1 < counts.size(); ++d) out[d] += q * counts[d];
  }
  return out;
}

}  // namespace freqbin
