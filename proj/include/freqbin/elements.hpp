#pragma once

// Constructors turning physical element settings into mode transforms.

#include <cstddef>
#include <limits>

#include "freqbin/fock.hpp"

namespace freqbin {

inline constexpr double kDefaultSidebandSuppressionDb = 24.0;
inline constexpr double kDefaultFilterLinewidthGhz = 4.0;
inline constexpr double kDefaultFilterFsrGhz = 100.0;
inline constexpr double kDefaultFilterDropEfficiency = 0.946;

/// Electro-optic frequency-bin beam splitter between two adjacent bins.
/// Sideband leakage goes from `bin_lo` into `sideband_lo` and from `bin_hi`
/// into `sideband_hi`; an infinite suppression disables it.
struct FbsSpec {
  std::size_t bin_lo = 0;
  std::size_t bin_hi = 1;
  std::size_t sideband_lo = 0;
  std::size_t sideband_hi = 0;
  double transmissivity = 0.5;
  double theta = 0.0;
  double efficiency = 1.0;
  double sideband_suppression_db = kDefaultSidebandSuppressionDb;

  double reflectivity() const { return 1.0 - transmissivity; }
  /// Squared leakage amplitude R * 10^(-S/10).
  double leakage_power() const;

  /// Spec for bins `lo` and `lo + 1` of `grid` with sidebands at `lo - 1` and
  /// `lo + 2` (by grid index). Throws ConfigurationError if any is missing.
  static FbsSpec on_grid(const BinGrid& grid, int lo_index, double transmissivity,
                         double theta = 0.0, double efficiency = 1.0,
                         double suppression_db = std::numeric_limits<double>::infinity());
};

/// Validates ranges and mode distinctness; throws ValidationError.
void validate(const FbsSpec& spec);

/// Four-mode transform over {sideband_lo, bin_lo, bin_hi, sideband_hi}.
///
/// The bin columns are the two-bin beam splitter
///   [[sqrt(T), e^{i theta} sqrt(R)], [-e^{-i theta} sqrt(R), sqrt(T)]]
/// extended by a leakage amplitude eps (eps^2 = R 10^(-S/10)) into the
/// adjacent sideband and renormalized. The sideband columns complete the
/// matrix to a unitary, so a photon already in a sideband bin couples back
/// by the reciprocal amplitude. Everything is finally scaled by sqrt(eta).
ModeTransform fbs_transform(const FbsSpec& spec);

struct FilterParams {
  double resonance_offset_ghz = 0.0;
  double linewidth_fwhm_ghz = kDefaultFilterLinewidthGhz;
  double fsr_ghz = kDefaultFilterFsrGhz;
  double drop_efficiency = kDefaultFilterDropEfficiency;

  friend bool operator==(const FilterParams&, const FilterParams&) = default;
};

void validate(const FilterParams& p);

struct FilterResponse {
  Complex drop;
  Complex through;
};

/// Wraps a detuning into (-fsr/2, fsr/2].
double wrap_detuning(double detuning_ghz, double fsr_ghz);

/// Single-pole add-drop ring: with L = (G/2) / (G/2 + i d) at the wrapped
/// detuning d from the resonance, drop = sqrt(eta_d) L and through = 1 - L.
/// |drop|^2 + |through|^2 = 1 - (1 - eta_d)|L|^2.
FilterResponse filter_response(const FilterParams& p, double detuning_ghz);

/// Single-mode amplitude sqrt(power_transmission).
ModeTransform attenuator_transform(std::size_t mode, double power_transmission);

/// Single-mode phase e^{i phi}.
ModeTransform phase_transform(std::size_t mode, double phi);

}  // namespace freqbin
