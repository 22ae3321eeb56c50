#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "freqbin/errors.hpp"
#include "freqbin/resonator.hpp"

using namespace freqbin;

namespace {

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) x[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (n - 1);
  return x;
}

DRParams doublet(double two_g) {
  DRParams p;
  p.g_ghz = two_g / 2.0;
  p.kappa1_ghz = 2.0;
  p.kappa2_ghz = 2.0;
  p.kappa_ex_ghz = 2.0;
  return p;
}

// Positions of local minima of a sampled curve.
std::vector<double> minima(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> out;
  for (std::size_t k = 1; k + 1 < y.size(); ++k) {
    if (y[k] < y[k - 1] && y[k] <= y[k + 1]) out.push_back(x[k]);
  }
  return out;
}

}  // namespace

TEST(DoubleResonator, DipSeparationTracksSplitting) {
  const auto x = grid(-20.0, 20.0, 40001);
  const DRParams p = doublet(13.49);
  const auto y = dr_through_spectrum(p, x);
  const auto m = minima(x, y);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_NEAR((m[1] - m[0]) / 13.49, 1.0, 0.02);
}

TEST(DoubleResonator, SingleRingCriticalCoupling) {
  // Without the inner ring the bus ring is critically coupled at kex = k1 / 2.
  DRParams p;
  p.g_ghz = 0.0;
  p.kappa1_ghz = 2.0;
  p.kappa_ex_ghz = 1.0;
  EXPECT_NEAR(dr_through_transmission(p, 0.0), 0.0, 1e-15);
  // kex = k1 is the over-coupled limit: the field flips sign but |t| = 1.
  p.kappa_ex_ghz = 2.0;
  EXPECT_NEAR(dr_through_transmission(p, 0.0), 1.0, 1e-12);
}

TEST(DoubleResonator, DoubletCriticalCouplingAtEqualLinewidths) {
  const DRParams p = doublet(13.49);
  const auto x = grid(-10.0, 10.0, 20001);
  const auto y = dr_through_spectrum(p, x);
  EXPECT_LT(*std::min_element(y.begin(), y.end()), 1e-3);
}

TEST(DoubleResonator, DetunedInnerRingGivesDeepAndShallowDip) {
  DRParams p = doublet(2.0);
  p.thermal_detune_ghz = 30.0;
  p.kappa_ex_ghz = 1.0;
  const auto x = grid(-10.0, 40.0, 50001);
  const auto y = dr_through_spectrum(p, x);
  const auto m = minima(x, y);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_NEAR(m[0], 0.0, 0.2);
  EXPECT_NEAR(m[1], 30.0, 0.5);
  EXPECT_LT(dr_through_transmission(p, m[0]), 0.05);
  EXPECT_GT(dr_through_transmission(p, m[1]), 0.8);
}

TEST(DoubleResonator, PassivityAndSymmetry) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    DRParams p;
    p.kappa1_ghz = u(rng);
    p.kappa_ex_ghz = p.kappa1_ghz * u(rng) / 5.0;
    p.kappa2_ghz = u(rng);
    p.g_ghz = u(rng);
    for (double d = -30.0; d <= 30.0; d += 0.7) {
      const double t = dr_through_transmission(p, d);
      EXPECT_GE(t, 0.0);
      EXPECT_LE(t, 1.0 + 1e-12);
    }
  }
  const DRParams s = doublet(10.0);
  for (double d = 0.0; d <= 20.0; d += 0.3) {
    EXPECT_NEAR(dr_through_transmission(s, d), dr_through_transmission(s, -d), 1e-9);
  }
}

TEST(DoubleResonator, Validation) {
  DRParams p;
  p.kappa_ex_ghz = 3.0;
  EXPECT_THROW(validate(p), ValidationError);
}

TEST(EoTuning, LinearShift) {
  EXPECT_EQ(eo_resonance_shift(0.0, 0.226), 0.0);
  EXPECT_NEAR(eo_resonance_shift(10.0, 0.226), 2.26, 1e-15);
  EXPECT_NEAR(eo_resonance_shift(-5.0, 0.222), -1.11, 1e-15);
}

TEST(DriveCalibration, Examples) {
  DriveSpec d;
  d.calib.beta_per_v = 1.0;
  d.drive_voltage_v = 0.0;
  EXPECT_EQ(drive_to_splitting(d).reflectivity, 0.0);
  EXPECT_EQ(drive_to_splitting(d).transmissivity, 1.0);
  d.drive_voltage_v = 0.5;
  EXPECT_NEAR(drive_to_splitting(d).reflectivity, 0.64, 1e-15);
  d.drive_voltage_v = 1.0;
  d.calib.r_peak = 0.9;
  EXPECT_NEAR(drive_to_splitting(d).reflectivity, 0.9, 1e-15);
  for (double v = 0.0; v < 5.0; v += 0.1) {
    d.drive_voltage_v = v;
    const auto s = drive_to_splitting(d);
    EXPECT_EQ(s.reflectivity + s.transmissivity, 1.0);
    EXPECT_LE(s.reflectivity, 0.9 + 1e-15);
  }
  d.drive_voltage_v = -1.0;
  EXPECT_THROW(drive_to_splitting(d), ValidationError);
}

TEST(DoubletFit, NoiselessRoundTrip) {
  const auto x = grid(-40.0, 40.0, 1601);
  for (double two_g : {10.0, 12.95, 13.49, 16.0}) {
    const DRParams p = doublet(two_g);
    const auto y = dr_through_spectrum(p, x);
    const DoubletFit f = fit_doublet(x, y);
    EXPECT_NEAR(f.two_g_ghz, two_g, 0.07) << two_g;
    EXPECT_NEAR(f.model.kappa1_ghz, 2.0, 0.01);
    EXPECT_NEAR(f.model.kappa2_ghz, 2.0, 0.01);
    EXPECT_LT(f.rms_residual, 1e-6);
  }
}

TEST(DoubletFit, RecoversShiftedCenter) {
  const auto x = grid(-40.0, 40.0, 1601);
  DRParams p = doublet(13.49);
  std::vector<double> y;
  for (double d : x) y.push_back(dr_through_transmission(p, d - 2.26));
  EXPECT_NEAR(fit_doublet(x, y).center_ghz, 2.26, 1e-3);
}

TEST(DoubletFit, NoisyRoundTrip) {
  const auto x = grid(-40.0, 40.0, 1601);
  const DRParams p = doublet(13.49);
  const auto clean = dr_through_spectrum(p, x);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    auto y = clean;
    for (double& v : y) v += noise(rng);
    EXPECT_NEAR(fit_doublet(x, y).two_g_ghz, 13.49, 0.2);
  }
}

TEST(DoubletFit, FlatSpectrumFails) {
  const auto x = grid(-40.0, 40.0, 200);
  const std::vector<double> y(x.size(), 1.0);
  EXPECT_THROW(fit_doublet(x, y), FitError);
  const auto few = grid(-40.0, 40.0, 20);
  EXPECT_THROW(fit_doublet(few, dr_through_spectrum(doublet(13.49), few)), FitError);
}

TEST(LineFit, ExactLine) {
  const std::vector<double> x{-10, -5, 0, 5, 10};
  std::vector<double> y;
  for (double v : x) y.push_back(0.255 * v + 1.0);
  const auto [slope, intercept] = fit_line(x, y);
  EXPECT_NEAR(slope, 0.255, 1e-14);
  EXPECT_NEAR(intercept, 1.0, 1e-14);
}
