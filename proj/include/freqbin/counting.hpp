#pragma once

// Photon sources, detection, counting statistics and figures of merit.

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "freqbin/elements.hpp"
#include "freqbin/fock.hpp"

namespace freqbin {

inline constexpr double kDefaultPhotonLinewidthMhz = 202.0;
inline constexpr double kDefaultCoincidenceWindowPs = 512.0;
inline constexpr double kDefaultCouplerEfficiency = 0.25;

enum class SourceKind { pair, heralded_single, bell };

std::string to_string(SourceKind kind);
SourceKind source_kind_from_string(const std::string& text);

struct SourceSpec {
  SourceKind kind = SourceKind::pair;
  std::size_t signal_mode = 1;
  std::size_t idler_mode = 2;
  /// Bell-state modes {|0>_A, |1>_A, |0>_B, |1>_B}.
  std::array<std::size_t, 4> logical_modes{1, 2, 4, 3};
  double photon_linewidth_mhz = kDefaultPhotonLinewidthMhz;
  double pair_rate_hz = 1e5;
  /// Coincidence-to-accidental ratio; infinity disables accidentals.
  double car = std::numeric_limits<double>::infinity();
  double indistinguishability = 1.0;
};

void validate(const SourceSpec& s);

struct DetectorSpec {
  double efficiency = 1.0;
  double dark_rate_hz = 0.0;
  double coincidence_window_ps = kDefaultCoincidenceWindowPs;
  double integration_s = 1.0;
  /// Per-photon facet transmission.
  double insertion_loss = kDefaultCouplerEfficiency;

  friend bool operator==(const DetectorSpec&, const DetectorSpec&) = default;
};

void validate(const DetectorSpec& d);

struct CountRecord {
  std::uint64_t true_coincidences = 0;
  std::uint64_t accidental_coincidences = 0;
  std::array<std::uint64_t, 2> singles{};
  double expected_true = 0.0;
  double expected_accidental = 0.0;
  /// Inputs echoed for reproducibility.
  double p_true = 0.0;
  std::array<double, 2> singles_weights{1.0, 1.0};
  std::uint64_t seed = 0;

  std::uint64_t total_coincidences() const { return true_coincidences + accidental_coincidences; }
  double expected_total() const { return expected_true + expected_accidental; }

  friend bool operator==(const CountRecord&, const CountRecord&) = default;
};

struct MetricResult {
  double value = 0.0;
  double sigma = 0.0;
  std::string method;
};

/// |1_s 1_i>, |1_s>, or (|0_A 0_B> + |1_A 1_B>)/sqrt(2). The Bell map must be
/// energy matched: index(0_A) + index(0_B) == index(1_A) + index(1_B).
PureState make_source_state(const SourceSpec& s, std::shared_ptr<const BinGrid> grid);

/// Probability of exactly one photon in `pattern_a` and one in `pattern_b`,
/// with every other mode summed over.
double coincidence_probability(const PureState& state, const std::set<std::size_t>& pattern_a,
                               const std::set<std::size_t>& pattern_b);

/// v p_indist + (1 - v) p_dist.
double indistinguishability_mix(double p_indist, double p_dist, double v);

/// Derives a per-point seed from a base seed and a point index.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

/// Draws true and accidental coincidences for one detector pair.
///
/// The expected true count is pair_rate * integration * p_true * (eff * IL)^2.
/// The source's CAR fixes an uncorrelated singles level S_ref such that
/// S_ref^2 * window * integration equals the reference true count over CAR;
/// detector x sees S_ref * w_x + dark, and accidentals are the product of
/// the two singles rates times window and integration time.
CountRecord sample_counts(double p_true, const DetectorSpec& d, const SourceSpec& s,
                          std::uint64_t seed, std::array<double, 2> singles_weights = {1.0, 1.0});

/// Coherence time 1 / (2 pi linewidth) in ps.
double coherence_time_ps(double linewidth_mhz);

/// Two-sided exponential exp(-|tau| / tau_c) convolved with a unit-area
/// rectangular window. The integral over tau is 2 tau_c for any window.
double g2_density(double tau_ps, double linewidth_mhz, double window_ps);

/// g2_density on a symmetric grid, normalized so the value at tau = 0 is 1.
std::vector<double> g2_histogram(std::span<const double> tau_grid_ps, double linewidth_mhz,
                                 double window_ps);

/// (max - min) / (max + min). With `poisson` the inputs are counts and the
/// uncertainty is propagated from Poisson errors on the two extremes.
MetricResult visibility_minmax(std::span<const double> values, bool poisson = false);

/// (N_max - N_min) / N_max with Poisson uncertainty; no background subtraction.
MetricResult visibility_hom(double n_max, double n_min);

using TruthTable = std::array<std::array<double, 4>, 4>;

/// Scales each row to unit sum. Rows summing to zero are left untouched.
TruthTable normalize_rows(const TruthTable& t);

/// Mean over inputs of the probability mass on the ideal outputs. Each
/// measured row must sum to one within 1e-9. With `row_counts`, the sigma
/// is the binomial error of each row's correct fraction.
MetricResult truth_table_fidelity(const TruthTable& measured, const TruthTable& ideal,
                                  std::span<const double> row_counts = {});

/// Overload for dynamically shaped input; throws ValidationError unless 4x4.
MetricResult truth_table_fidelity(const std::vector<std::vector<double>>& measured,
                                  const std::vector<std::vector<double>>& ideal);

struct BoundResult {
  double value = 0.0;
  bool clamped = false;
};

/// Process-fidelity lower bound F_XZ + F_ZX - 1, clamped at zero.
BoundResult hofmann_bound(double f_xz, double f_zx);

// ---------------------------------------------------------------------------
// Detection through cascaded drop filters.

/// One detector behind an add-drop filter tuned to `target_mode`.
struct DetectorChannel {
  std::size_t target_mode = 0;
  FilterParams filter;
};

/// routing(d, m): probability that a photon in mode m is delivered to
/// detector d. Channels are ordered along the bus; a photon passes each
/// earlier filter's through port before reaching a later one.
/// With `crosstalk` false each filter only drops its own bin.
Eigen::MatrixXd detector_routing(const BinGrid& grid, std::span<const DetectorChannel> channels,
                                 bool crosstalk);

/// Distribution of photon counts per detector (last entry: undetected),
/// for photons that route independently according to `routing`.
using ClickDistribution = std::map<std::vector<int>, double>;

ClickDistribution click_distribution(const PureState& state, const Eigen::MatrixXd& routing);

/// Distribution for independent (mutually distinguishable) sources.
ClickDistribution convolve(const ClickDistribution& a, const ClickDistribution& b);

/// Probability that detectors a and b both register at least one photon.
double joint_click_probability(const ClickDistribution& dist, std::size_t a, std::size_t b);

/// Mean photon number delivered to each detector.
std::vector<double> mean_detector_photons(const ClickDistribution& dist);

}  // namespace freqbin
