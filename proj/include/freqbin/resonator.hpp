#pragma once

// Classical spectroscopy of the coupled double resonators (DRs): through-port
// spectra, electro-optic tuning, drive calibration and doublet fitting.

#include <array>
#include <span>
#include <vector>

namespace freqbin {

/// Coupled double-resonator parameters. Rates are in GHz of linear frequency
/// and share units with the detuning axis.
struct DRParams {
  double omega0_thz = 192.026995;
  /// Field coupling g; the mode splitting is 2g.
  double g_ghz = 6.475;
  /// Total linewidth of the bus-coupled resonator.
  double kappa1_ghz = 2.0;
  /// Bus coupling rate, at most kappa1.
  double kappa_ex_ghz = 2.0;
  /// Linewidth of the inner resonator.
  double kappa2_ghz = 2.0;
  double eo_coeff_ghz_per_v = 0.226;
  /// Inner-resonator detuning relative to the bus-coupled one.
  double thermal_detune_ghz = 0.0;

  friend bool operator==(const DRParams&, const DRParams&) = default;
};

void validate(const DRParams& p);

/// |t(d)|^2 with t(d) = 1 - kex / (i d + k1/2 + g^2 / (i (d - dth) + k2/2)).
double dr_through_transmission(const DRParams& p, double detuning_ghz);
std::vector<double> dr_through_spectrum(const DRParams& p, std::span<const double> detunings_ghz);

/// Linear electro-optic shift coeff * V.
double eo_resonance_shift(double voltage_v, double coeff_ghz_per_v);

/// Cooperativity-shaped conversion curve.
struct CalibCurve {
  /// Conversion slope per volt; cooperativity is (beta V)^2.
  double beta_per_v = 0.1;
  double r_peak = 1.0;

  friend bool operator==(const CalibCurve&, const CalibCurve&) = default;
};

struct DriveSpec {
  double drive_freq_ghz = 12.95;
  double drive_voltage_v = 0.0;
  double drive_phase_rad = 0.0;
  CalibCurve calib;

  friend bool operator==(const DriveSpec&, const DriveSpec&) = default;
};

void validate(const DriveSpec& d);

struct SplittingRatio {
  double transmissivity;
  double reflectivity;
};

/// R = r_peak 4C / (1 + C)^2 with C = (beta V)^2, and T = 1 - R.
SplittingRatio drive_to_splitting(const DriveSpec& d);

struct DoubletFit {
  double two_g_ghz = 0.0;
  /// FWHM of the lower and upper dip of the fitted model.
  std::array<double, 2> linewidths_ghz{};
  /// 1 - minimum transmission of the lower and upper dip.
  std::array<double, 2> dip_depths{};
  double rms_residual = 0.0;
  /// Fitted detuning origin of the doublet.
  double center_ghz = 0.0;
  /// Full fitted model (omega0 and eo coefficient are left at defaults).
  DRParams model;
  int iterations = 0;
};

struct FitOptions {
  int max_iterations = 5000;
  double relative_tolerance = 1e-10;
  /// Minimum dip depth accepted during initialization.
  double min_dip_depth = 0.05;
};

/// Levenberg-Marquardt fit of the DR through-port model to a measured
/// spectrum. Needs at least 50 samples and two resolvable dips; throws
/// FitError (carrying the best residual) otherwise or on non-convergence.
DoubletFit fit_doublet(std::span<const double> detunings_ghz,
                       std::span<const double> transmission, const FitOptions& opts = {});

/// Ordinary least-squares line. Returns {slope, intercept}.
std::array<double, 2> fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace freqbin
