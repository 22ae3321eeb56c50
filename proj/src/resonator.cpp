#include "freqbin/resonator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <Eigen/Dense>

#include "freqbin/errors.hpp"

namespace freqbin {

namespace {

using Complex = std::complex<double>;

constexpr int kParamCount = 6;
// kappa1 = kappa_ex + q^2 keeps kappa_ex <= kappa1 without a hard bound, so
// critically coupled devices do not stall the fit against a clamp.
enum Param { kCenter = 0, kG, kLossRoot, kKappaEx, kKappa2, kDetune };

struct ModelEval {
  double value;
  Eigen::Matrix<double, kParamCount, 1> grad;
};

// |t|^2 and its gradient with respect to the fit parameters.
ModelEval eval_model(const Eigen::Matrix<double, kParamCount, 1>& p, double x) {
  const Complex i{0.0, 1.0};
  const double u = x - p[kCenter];
  const double g = p[kG];
  const Complex e = i * (u - p[kDetune]) + p[kKappa2] / 2.0;
  const double q = p[kLossRoot];
  const Complex d = i * u + (p[kKappaEx] + q * q) / 2.0 + g * g / e;
  const Complex t = 1.0 - p[kKappaEx] / d;

  const Complex dt_dd = p[kKappaEx] / (d * d);
  const Complex de_coef = -g * g / (e * e);

  Eigen::Matrix<Complex, kParamCount, 1> dt;
  dt[kCenter] = dt_dd * (-(i + de_coef * i));
  dt[kG] = dt_dd * (2.0 * g / e);
  dt[kLossRoot] = dt_dd * q;
  dt[kKappaEx] = -1.0 / d + dt_dd * 0.5;
  dt[kKappa2] = dt_dd * de_coef * 0.5;
  dt[kDetune] = dt_dd * de_coef * (-i);

  ModelEval out;
  out.value = std::norm(t);
  for (int k = 0; k < kParamCount; ++k) out.grad[k] = 2.0 * std::real(std::conj(t) * dt[k]);
  return out;
}

DRParams to_params(const Eigen::Matrix<double, kParamCount, 1>& p) {
  DRParams dr;
  dr.g_ghz = p[kG];
  dr.kappa1_ghz = p[kKappaEx] + p[kLossRoot] * p[kLossRoot];
  dr.kappa_ex_ghz = p[kKappaEx];
  dr.kappa2_ghz = p[kKappa2];
  dr.thermal_detune_ghz = p[kDetune];
  return dr;
}

void project_feasible(Eigen::Matrix<double, kParamCount, 1>& p) {
  p[kG] = std::abs(p[kG]);
  p[kKappa2] = std::max(p[kKappa2], 1e-6);
  p[kKappaEx] = std::max(p[kKappaEx], 1e-6);
}

// Contiguous run of samples around `idx` lying below `level`.
std::pair<std::size_t, std::size_t> run_below(std::span<const double> y, std::size_t idx,
                                              double level) {
  std::size_t lo = idx, hi = idx;
  while (lo > 0 && y[lo - 1] < level) --lo;
  while (hi + 1 < y.size() && y[hi + 1] < level) ++hi;
  return {lo, hi};
}

double golden_min(const DRParams& p, double a, double b) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = dr_through_transmission(p, c), fd = dr_through_transmission(p, d);
  for (int k = 0; k < 200 && (b - a) > 1e-10; ++k) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = dr_through_transmission(p, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = dr_through_transmission(p, d);
    }
  }
  return (a + b) / 2.0;
}

// Crossing of `level` walking from `from` in direction `dir`.
double half_point(const DRParams& p, double from, double dir, double level, double max_span) {
  const double step = 0.01;
  double inside = from;
  double outside = from;
  for (double s = step; s <= max_span; s += step) {
    outside = from + dir * s;
    if (dr_through_transmission(p, outside) >= level) break;
    inside = outside;
  }
  for (int k = 0; k < 100; ++k) {
    const double mid = (inside + outside) / 2.0;
    (dr_through_transmission(p, mid) < level ? inside : outside) = mid;
  }
  return (inside + outside) / 2.0;
}

}  // namespace

void validate(const DRParams& p) {
  if (!(p.g_ghz >= 0.0) || !(p.kappa1_ghz > 0.0) || !(p.kappa2_ghz > 0.0) ||
      !(p.kappa_ex_ghz > 0.0)) {
    throw ValidationError("resonator rates must be positive");
  }
  if (p.kappa_ex_ghz > p.kappa1_ghz) {
    throw ValidationError("bus coupling rate cannot exceed the total linewidth");
  }
}

double dr_through_transmission(const DRParams& p, double detuning_ghz) {
  const Complex i{0.0, 1.0};
  const Complex inner = i * (detuning_ghz - p.thermal_detune_ghz) + p.kappa2_ghz / 2.0;
  const Complex denom = i * detuning_ghz + p.kappa1_ghz / 2.0 + p.g_ghz * p.g_ghz / inner;
  return std::norm(1.0 - p.kappa_ex_ghz / denom);
}

std::vector<double> dr_through_spectrum(const DRParams& p, std::span<const double> detunings_ghz) {
  std::vector<double> out;
  out.reserve(detunings_ghz.size());
  for (double d : detunings_ghz) out.push_back(dr_through_transmission(p, d));
  return out;
}

double eo_resonance_shift(double voltage_v, double coeff_ghz_per_v) {
  return coeff_ghz_per_v * voltage_v;
}

void validate(const DriveSpec& d) {
  if (!(d.drive_voltage_v >= 0.0)) throw ValidationError("drive voltage must be non-negative");
  if (!(d.calib.r_peak > 0.0 && d.calib.r_peak <= 1.0)) {
    throw ValidationError("peak reflectivity must lie in (0, 1]");
  }
  if (!std::isfinite(d.calib.beta_per_v)) throw ValidationError("conversion slope must be finite");
}

SplittingRatio drive_to_splitting(const DriveSpec& d) {
  validate(d);
  const double bv = d.calib.beta_per_v * d.drive_voltage_v;
  const double c = bv * bv;
  const double r = d.calib.r_peak * 4.0 * c / ((1.0 + c) * (1.0 + c));
  return {1.0 - r, r};
}

std::array<double, 2> fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("line fit needs two or more points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx == 0.0) throw DomainError("line fit needs distinct abscissae");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

DoubletFit fit_doublet(std::span<const double> x, std::span<const double> y,
                       const FitOptions& opts) {
  if (x.size() != y.size()) throw DomainError("spectrum axes differ in length");
  if (x.size() < 50) throw FitError("doublet fit needs at least 50 samples", 0.0);
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (!(x[k] > x[k - 1])) throw DomainError("detuning axis must be strictly increasing");
  }
  const std::size_t n = x.size();

  auto rms_of = [&](const Eigen::Matrix<double, kParamCount, 1>& p) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = eval_model(p, x[k]).value - y[k];
      s += r * r;
    }
    return std::sqrt(s / static_cast<double>(n));
  };

  // Initial guess from the two deepest separated minima.
  const auto first = static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
  const double depth1 = 1.0 - y[first];
  const double flat_rms = [&] {
    double s = 0.0;
    for (double v : y) s += (v - 1.0) * (v - 1.0);
    return std::sqrt(s / static_cast<double>(n));
  }();
  if (depth1 < opts.min_dip_depth) throw FitError("spectrum shows no resonance dip", flat_rms);
  auto [lo1, hi1] = run_below(y, first, 1.0 - depth1 / 2.0);
  const std::size_t margin = std::max<std::size_t>(2, (hi1 - lo1 + 1) / 2);
  std::size_t second = n;
  for (std::size_t k = 0; k < n; ++k) {
    if (k + margin >= lo1 && k <= hi1 + margin) continue;
    if (second == n || y[k] < y[second]) second = k;
  }
  if (second == n || 1.0 - y[second] < opts.min_dip_depth) {
    throw FitError("spectrum does not show two resolvable dips", flat_rms);
  }
  const double width = std::max(x[std::min(hi1 + 1, n - 1)] - x[lo1 > 0 ? lo1 - 1 : 0],
                                2.0 * (x[1] - x[0]));
  const double depth = std::min(1.0, (depth1 + 1.0 - y[second]) / 2.0);

  Eigen::Matrix<double, kParamCount, 1> p;
  p[kCenter] = (x[first] + x[second]) / 2.0;
  p[kG] = std::abs(x[second] - x[first]) / 2.0;
  p[kKappa2] = width;
  p[kKappaEx] = width * (1.0 - std::sqrt(std::max(0.0, 1.0 - depth)));
  p[kLossRoot] = std::sqrt(std::max(width - p[kKappaEx], 1e-2 * width));
  p[kDetune] = 0.0;
  project_feasible(p);

  // Levenberg-Marquardt with Marquardt diagonal scaling.
  double lambda = 1e-3;
  double cost = std::pow(rms_of(p), 2) * static_cast<double>(n);
  bool converged = false;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    Eigen::Matrix<double, kParamCount, kParamCount> jtj =
        Eigen::Matrix<double, kParamCount, kParamCount>::Zero();
    Eigen::Matrix<double, kParamCount, 1> jtr = Eigen::Matrix<double, kParamCount, 1>::Zero();
    for (std::size_t k = 0; k < n; ++k) {
      const ModelEval m = eval_model(p, x[k]);
      const double r = m.value - y[k];
      jtj.noalias() += m.grad * m.grad.transpose();
      jtr.noalias() += m.grad * r;
    }

    bool improved = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::Matrix<double, kParamCount, kParamCount> a = jtj;
      for (int k = 0; k < kParamCount; ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      const Eigen::Matrix<double, kParamCount, 1> step = a.ldlt().solve(-jtr);
      Eigen::Matrix<double, kParamCount, 1> trial = p + step;
      project_feasible(trial);
      const double trial_cost = std::pow(rms_of(trial), 2) * static_cast<double>(n);
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double rel = (cost - trial_cost) / std::max(cost, 1e-300);
        const double step_rel = (trial - p).norm() / std::max(p.norm(), 1e-300);
        p = trial;
        cost = trial_cost;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (rel < opts.relative_tolerance || step_rel < opts.relative_tolerance ||
            cost < 1e-28) {
          converged = true;
        }
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) {
      // No descent direction left: a stationary point of the cost.
      converged = true;
    }
    if (converged) break;
  }

  const double rms = std::sqrt(cost / static_cast<double>(n));
  if (!converged) throw FitError("doublet fit did not converge", rms);

  DoubletFit fit;
  fit.model = to_params(p);
  fit.center_ghz = p[kCenter];
  fit.two_g_ghz = 2.0 * p[kG];
  fit.rms_residual = rms;
  fit.iterations = iter + 1;

  const double g = fit.model.g_ghz;
  const double reach = std::max({fit.model.kappa1_ghz, fit.model.kappa2_ghz, 1.0}) * 4.0;
  const double span = std::max(g, 1e-3) + reach;
  const std::array<std::array<double, 2>, 2> brackets{
      {{-span + fit.model.thermal_detune_ghz / 2.0 - reach, fit.model.thermal_detune_ghz / 2.0},
       {fit.model.thermal_detune_ghz / 2.0, span + fit.model.thermal_detune_ghz / 2.0 + reach}}};
  for (int k = 0; k < 2; ++k) {
    const double dip = golden_min(fit.model, brackets[k][0], brackets[k][1]);
    const double tmin = dr_through_transmission(fit.model, dip);
    const double level = 1.0 - (1.0 - tmin) / 2.0;
    const double left = half_point(fit.model, dip, -1.0, level, 4.0 * span);
    const double right = half_point(fit.model, dip, 1.0, level, 4.0 * span);
    fit.dip_depths[k] = 1.0 - tmin;
    fit.linewidths_ghz[k] = right - left;
  }
  return fit;
}

}  // namespace freqbin
