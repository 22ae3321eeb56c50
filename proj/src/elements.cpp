#include "freqbin/elements.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include "freqbin/errors.hpp"

namespace freqbin {

double FbsSpec::leakage_power() const {
  if (std::isinf(sideband_suppression_db)) return 0.0;
  return reflectivity() * std::pow(10.0, -sideband_suppression_db / 10.0);
}

FbsSpec FbsSpec::on_grid(const BinGrid& grid, int lo_index, double transmissivity, double theta,
                         double efficiency, double suppression_db) {
  FbsSpec s;
  s.sideband_lo = grid.mode_of_index(lo_index - 1);
  s.bin_lo = grid.mode_of_index(lo_index);
  s.bin_hi = grid.mode_of_index(lo_index + 1);
  s.sideband_hi = grid.mode_of_index(lo_index + 2);
  s.transmissivity = transmissivity;
  s.theta = theta;
  s.efficiency = efficiency;
  s.sideband_suppression_db = suppression_db;
  return s;
}

void validate(const FbsSpec& spec) {
  if (!(spec.transmissivity >= 0.0 && spec.transmissivity <= 1.0)) {
    throw ValidationError("f-BS transmissivity must lie in [0, 1]");
  }
  if (!(spec.efficiency > 0.0 && spec.efficiency <= 1.0)) {
    throw ValidationError("f-BS efficiency must lie in (0, 1]");
  }
  if (!(spec.sideband_suppression_db >= 0.0)) {
    throw ValidationError("sideband suppression must be non-negative");
  }
  if (!std::isfinite(spec.theta)) throw ValidationError("f-BS phase must be finite");
  const std::set<std::size_t> modes{spec.sideband_lo, spec.bin_lo, spec.bin_hi, spec.sideband_hi};
  if (modes.size() != 4) throw ValidationError("f-BS bins and sidebands must be distinct modes");
}

ModeTransform fbs_transform(const FbsSpec& spec) {
  validate(spec);
  const double t = std::sqrt(spec.transmissivity);
  const double r = std::sqrt(spec.reflectivity());
  const double eps = std::sqrt(spec.leakage_power());
  const double c = 1.0 / std::sqrt(1.0 + eps * eps);
  const Complex e_pos = std::polar(1.0, spec.theta);
  const Complex e_neg = std::polar(1.0, -spec.theta);

  // Order: sideband_lo, bin_lo, bin_hi, sideband_hi.
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 1) = eps;
  m(1, 1) = t;
  m(2, 1) = -e_neg * r;

  m(1, 2) = e_pos * r;
  m(2, 2) = t;
  m(3, 2) = eps;

  m(0, 0) = 1.0;
  m(1, 0) = -eps * t;
  m(2, 0) = eps * e_neg * r;

  m(3, 3) = 1.0;
  m(1, 3) = -eps * e_pos * r;
  m(2, 3) = -eps * t;

  m *= c * std::sqrt(spec.efficiency);
  return ModeTransform({spec.sideband_lo, spec.bin_lo, spec.bin_hi, spec.sideband_hi}, m);
}

void validate(const FilterParams& p) {
  if (!(p.linewidth_fwhm_ghz > 0.0)) throw ValidationError("filter linewidth must be positive");
  if (!(p.fsr_ghz > p.linewidth_fwhm_ghz)) {
    throw ValidationError("filter FSR must exceed its linewidth");
  }
  if (!(p.drop_efficiency > 0.0 && p.drop_efficiency <= 1.0)) {
    throw ValidationError("filter drop efficiency must lie in (0, 1]");
  }
  if (!std::isfinite(p.resonance_offset_ghz)) {
    throw ValidationError("filter resonance offset must be finite");
  }
}

double wrap_detuning(double detuning_ghz, double fsr_ghz) {
  double w = std::remainder(detuning_ghz, fsr_ghz);
  if (w <= -fsr_ghz / 2.0) w += fsr_ghz;
  return w;
}

FilterResponse filter_response(const FilterParams& p, double detuning_ghz) {
  const double d = wrap_detuning(detuning_ghz - p.resonance_offset_ghz, p.fsr_ghz);
  const double half = p.linewidth_fwhm_ghz / 2.0;
  const Complex lorentz = half / Complex{half, d};
  return {std::sqrt(p.drop_efficiency) * lorentz, 1.0 - lorentz};
}

ModeTransform attenuator_transform(std::size_t mode, double power_transmission) {
  if (!(power_transmission >= 0.0 && power_transmission <= 1.0)) {
    throw ValidationError("attenuator power transmission must lie in [0, 1]");
  }
  Eigen::MatrixXcd m(1, 1);
  m(0, 0) = std::sqrt(power_transmission);
  return ModeTransform({mode}, m);
}

ModeTransform phase_transform(std::size_t mode, double phi) {
  Eigen::MatrixXcd m(1, 1);
  m(0, 0) = std::polar(1.0, phi);
  return ModeTransform({mode}, m);
}

}  // namespace freqbin
