#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "freqbin/elements.hpp"
#include "freqbin/errors.hpp"

using namespace freqbin;

namespace {

const auto kGrid = std::make_shared<const BinGrid>(BinGrid::chip_default());

FbsSpec spec(double t, double theta = 0.0, double eta = 1.0,
             double s = std::numeric_limits<double>::infinity()) {
  return FbsSpec::on_grid(*kGrid, 0, t, theta, eta, s);
}

// Column image of a single photon in `mode` through `t`.
double column_power(const ModeTransform& t, std::size_t col) { return t.matrix().col(col).squaredNorm(); }

}  // namespace

TEST(Fbs, FullTransmissionIsIdentity) {
  for (double theta : {0.0, 0.7, -2.0}) {
    const auto m = fbs_transform(spec(1.0, theta)).matrix();
    EXPECT_LT((m - Eigen::MatrixXcd::Identity(4, 4)).norm(), 1e-15);
  }
}

TEST(Fbs, BalancedSplitterCore) {
  const auto t = fbs_transform(spec(0.5));
  EXPECT_TRUE(t.is_unitary());
  const double h = 1.0 / std::sqrt(2.0);
  const auto& m = t.matrix();
  EXPECT_NEAR(m(1, 1).real(), h, 1e-15);
  EXPECT_NEAR(m(1, 2).real(), h, 1e-15);
  EXPECT_NEAR(m(2, 1).real(), -h, 1e-15);
  EXPECT_NEAR(m(2, 2).real(), h, 1e-15);
}

TEST(Fbs, UnitaryForAllSettingsWithoutLeakage) {
  for (double t : {0.0, 0.1, 1.0 / 3.0, 0.5, 0.9}) {
    for (double theta : {0.0, 1.0, 3.0}) {
      const auto tr = fbs_transform(spec(t, theta));
      EXPECT_TRUE(tr.is_unitary());
      EXPECT_NEAR(std::abs(tr.matrix().determinant()), 1.0, 1e-12);
    }
  }
}

TEST(Fbs, SidebandLeakageFraction) {
  const FbsSpec s = spec(0.5, 0.0, 1.0, 24.0);
  EXPECT_NEAR(s.leakage_power() / s.reflectivity(), std::pow(10.0, -2.4), 1e-15);
  EXPECT_NEAR(std::pow(10.0, -2.4), 3.98e-3, 1e-5);
  const auto m = fbs_transform(s).matrix();
  // Sideband over converted power for a photon entering the lower bin.
  EXPECT_NEAR(std::norm(m(0, 1)) / std::norm(m(2, 1)), std::pow(10.0, -2.4), 1e-12);
  EXPECT_TRUE(fbs_transform(s).is_unitary());
}

TEST(Fbs, EfficiencyScalesEveryColumn) {
  const double eta = 0.69;
  const auto t = fbs_transform(spec(0.4, 0.3, eta, 24.0));
  for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(column_power(t, c), eta, 1e-12);
  EXPECT_LE(t.spectral_norm(), std::sqrt(eta) + 1e-12);
}

TEST(Fbs, Validation) {
  EXPECT_THROW(fbs_transform(spec(1.2)), ValidationError);
  EXPECT_THROW(fbs_transform(spec(0.5, 0.0, 0.0)), ValidationError);
  EXPECT_THROW(fbs_transform(spec(0.5, 0.0, 1.0, -3.0)), ValidationError);
  // Bin 3 has no upper neighbour two steps away.
  EXPECT_THROW(FbsSpec::on_grid(*kGrid, 3, 0.5), ConfigurationError);
}

TEST(Filter, DropOnResonanceEqualsEfficiency) {
  FilterParams p;
  EXPECT_NEAR(std::norm(filter_response(p, 0.0).drop), 0.946, 1e-12);
  EXPECT_NEAR(std::norm(filter_response(p, 0.0).through), 0.0, 1e-15);
}

TEST(Filter, AdjacentBinCrosstalk) {
  FilterParams p;
  p.drop_efficiency = 1.0;
  const double rel = std::norm(filter_response(p, 12.95).drop);
  EXPECT_NEAR(rel, 1.0 / (1.0 + std::pow(2.0 * 12.95 / 4.0, 2)), 1e-12);
  EXPECT_NEAR(rel, 0.0233, 5e-4);
  EXPECT_LT(rel, 0.03);
}

TEST(Filter, CombPeriodicityAndSymmetry) {
  FilterParams p;
  EXPECT_NEAR(std::norm(filter_response(p, 100.0).drop), std::norm(filter_response(p, 0.0).drop), 1e-12);
  for (double d : {0.5, 3.0, 12.95, 40.0}) {
    const auto a = filter_response(p, d), b = filter_response(p, -d);
    EXPECT_NEAR(std::abs(a.drop), std::abs(b.drop), 1e-14);
    EXPECT_NEAR(std::arg(a.drop), -std::arg(b.drop), 1e-14);
  }
}

TEST(Filter, Passivity) {
  FilterParams p;
  for (double d = -60.0; d <= 60.0; d += 0.37) {
    const auto r = filter_response(p, d);
    EXPECT_LE(std::norm(r.drop) + std::norm(r.through), 1.0 + 1e-12);
  }
  p.drop_efficiency = 1.0;
  for (double d : {0.0, 2.0, 12.95}) {
    const auto r = filter_response(p, d);
    EXPECT_NEAR(std::norm(r.drop) + std::norm(r.through), 1.0, 1e-12);
  }
}

TEST(Filter, Validation) {
  FilterParams p;
  p.linewidth_fwhm_ghz = 200.0;
  EXPECT_THROW(validate(p), ValidationError);
}

TEST(Attenuator, Values) {
  EXPECT_NEAR(attenuator_transform(0, 1.0).matrix()(0, 0).real(), 1.0, 0.0);
  EXPECT_NEAR(attenuator_transform(0, 1.0 / 3.0).matrix()(0, 0).real(), 0.5774, 1e-4);
  const auto twice = compose(attenuator_transform(0, 1.0 / 3.0), attenuator_transform(0, 1.0 / 3.0));
  EXPECT_NEAR(std::norm(twice.matrix()(0, 0)), 1.0 / 9.0, 1e-15);
  EXPECT_THROW(attenuator_transform(0, 1.5), ValidationError);
}

TEST(Phase, Values) {
  EXPECT_NEAR(std::abs(phase_transform(0, 0.0).matrix()(0, 0) - Complex(1.0)), 0.0, 1e-15);
  const auto pi2 = compose(phase_transform(0, std::numbers::pi), phase_transform(0, std::numbers::pi));
  EXPECT_NEAR(std::abs(pi2.matrix()(0, 0) - Complex(1.0)), 0.0, 1e-15);
}

TEST(Phase, QuarterPhaseBeforeBalancedSplitterGivesEvenSplit) {
  const double h = 1.0 / std::sqrt(2.0);
  PureState in(kGrid, {{OccupationVector{0, 1, 0, 0, 0, 0}, h}, {OccupationVector{0, 0, 1, 0, 0, 0}, h}});
  in = apply_transform(in, phase_transform(2, std::numbers::pi / 2.0));
  const auto out = apply_transform(in, fbs_transform(spec(0.5)));
  EXPECT_NEAR(project_probability(out, {{1, 1}}), 0.5, 1e-12);
  EXPECT_NEAR(project_probability(out, {{2, 1}}), 0.5, 1e-12);
}

TEST(Elements, SinglePhotonEnergyAccounting) {
  for (double eta : {1.0, 0.69}) {
    const auto t = fbs_transform(spec(0.3, 0.4, eta, 24.0));
    for (std::size_t in : {1u, 2u}) {
      auto occ = OccupationVector::vacuum(kGrid->mode_count());
      occ[in] = 1;
      const auto out = apply_transform(PureState::basis(kGrid, occ), t);
      EXPECT_NEAR(out.norm_squared(), eta, 1e-12);
    }
  }
}
