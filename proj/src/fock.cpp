#include "freqbin/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "freqbin/errors.hpp"

namespace freqbin {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

std::string to_string(BinRole role) {
  switch (role) {
    case BinRole::computational:
      return "computational";
    case BinRole::sideband:
      return "sideband";
    case BinRole::loss:
      return "loss";
  }
  return "unknown";
}

BinRole bin_role_from_string(const std::string& text) {
  if (text == "computational") return BinRole::computational;
  if (text == "sideband") return BinRole::sideband;
  if (text == "loss") return BinRole::loss;
  throw ValidationError("unknown bin role '" + text + "'");
}

// ---------------------------------------------------------------------------
// BinGrid

BinGrid::BinGrid(std::vector<Bin> bins, double spacing_ghz, double anchor_thz,
                 bool check_coupler_window)
    : bins_(std::move(bins)),
      spacing_ghz_(spacing_ghz),
      anchor_thz_(anchor_thz),
      check_window_(check_coupler_window) {
  if (!(spacing_ghz_ > 0.0) || !std::isfinite(spacing_ghz_)) {
    throw ValidationError("bin spacing must be positive");
  }
  std::sort(bins_.begin(), bins_.end(),
            [](const Bin& a, const Bin& b) { return a.index < b.index; });
  for (std::size_t i = 1; i < bins_.size(); ++i) {
    if (bins_[i].index == bins_[i - 1].index) {
      throw ValidationError("duplicate bin index " + std::to_string(bins_[i].index));
    }
  }
  if (modes_with_role(BinRole::computational).size() < 2) {
    throw ValidationError("a bin grid needs at least two computational bins");
  }
  if (check_window_) {
    for (std::size_t m = 0; m < bins_.size(); ++m) {
      if (bins_[m].role != BinRole::computational) continue;
      const double f = frequency_thz(m);
      if (f < kCouplerWindowLowThz || f > kCouplerWindowHighThz) {
        std::ostringstream msg;
        msg << "computational bin " << bins_[m].index << " at " << f
            << " THz is outside the grating-coupler window";
        throw ValidationError(msg.str());
      }
    }
  }
}

BinGrid BinGrid::chip_default() {
  return BinGrid({{-1, BinRole::sideband, "s-"},
                  {0, BinRole::computational, "f1"},
                  {1, BinRole::computational, "f2"},
                  {2, BinRole::computational, "f3"},
                  {3, BinRole::computational, "f4"},
                  {4, BinRole::sideband, "s+"}});
}

const Bin& BinGrid::bin(std::size_t mode) const {
  if (mode >= bins_.size()) {
    throw ConfigurationError("mode " + std::to_string(mode) + " is not in the grid");
  }
  return bins_[mode];
}

double BinGrid::frequency_thz(std::size_t mode) const {
  return anchor_thz_ + bin(mode).index * spacing_ghz_ * 1e-3;
}

std::size_t BinGrid::mode_of_index(int index) const {
  for (std::size_t m = 0; m < bins_.size(); ++m) {
    if (bins_[m].index == index) return m;
  }
  throw ConfigurationError("no bin with grid index " + std::to_string(index));
}

std::size_t BinGrid::mode_of_label(const std::string& label) const {
  for (std::size_t m = 0; m < bins_.size(); ++m) {
    if (bins_[m].label == label) return m;
  }
  throw ConfigurationError("no bin labelled '" + label + "'");
}

std::vector<std::size_t> BinGrid::modes_with_role(BinRole role) const {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < bins_.size(); ++m) {
    if (bins_[m].role == role) out.push_back(m);
  }
  return out;
}

// ---------------------------------------------------------------------------
// OccupationVector

int OccupationVector::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

std::string to_string(const OccupationVector& occ) {
  std::string s = "|";
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(occ[i]);
  }
  return s + ">";
}

// ---------------------------------------------------------------------------
// PureState

PureState::PureState(std::shared_ptr<const BinGrid> grid, Amplitudes amplitudes)
    : grid_(std::move(grid)) {
  if (!grid_) throw ValidationError("state needs a grid");
  bool first = true;
  for (auto& [occ, amp] : amplitudes) {
    if (occ.size() != grid_->mode_count()) {
      throw ValidationError("occupation vector length does not match the grid");
    }
    for (int c : occ.counts) {
      if (c < 0) throw ValidationError("negative photon count");
    }
    const int n = occ.total();
    if (first) {
      photon_number_ = n;
      first = false;
    } else if (n != photon_number_) {
      throw ValidationError("state mixes photon-number sectors");
    }
    if (std::abs(amp) >= kAmplitudePruneThreshold) amplitudes_.emplace(occ, amp);
  }
  if (photon_number_ > kMaxPhotons) {
    throw ValidationError("photon number above " + std::to_string(kMaxPhotons));
  }
  if (amplitudes_.empty()) throw ValidationError("state has no nonzero amplitude");
  if (norm_squared() > 1.0 + 1e-9) throw ValidationError("state norm exceeds one");
}

PureState::PureState(Unchecked, std::shared_ptr<const BinGrid> grid, Amplitudes amplitudes,
                     int photon_number)
    : grid_(std::move(grid)), amplitudes_(std::move(amplitudes)), photon_number_(photon_number) {}

PureState PureState::basis(std::shared_ptr<const BinGrid> grid, OccupationVector occ) {
  Amplitudes a;
  a.emplace(std::move(occ), Complex{1.0, 0.0});
  return PureState(std::move(grid), std::move(a));
}

Complex PureState::amplitude(const OccupationVector& occ) const {
  auto it = amplitudes_.find(occ);
  return it == amplitudes_.end() ? Complex{} : it->second;
}

double PureState::norm_squared() const {
  double s = 0.0;
  for (const auto& [occ, amp] : amplitudes_) s += std::norm(amp);
  return s;
}

PureState PureState::normalized() const {
  const double n = std::sqrt(norm_squared());
  if (n == 0.0) throw DomainError("cannot normalize an empty state");
  Amplitudes a;
  for (const auto& [occ, amp] : amplitudes_) a.emplace(occ, amp / n);
  return PureState(Unchecked{}, grid_, std::move(a), photon_number_);
}

// ---------------------------------------------------------------------------
// ModeTransform

ModeTransform::ModeTransform(std::vector<std::size_t> modes, Eigen::MatrixXcd matrix)
    : modes_(std::move(modes)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw ValidationError("transform matrix is not square");
  if (static_cast<std::size_t>(matrix_.rows()) != modes_.size()) {
    throw ValidationError("transform matrix size does not match its mode subset");
  }
  std::vector<std::size_t> sorted = modes_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ValidationError("transform mode subset has repeated modes");
  }
  if (!matrix_.allFinite()) throw ValidationError("transform matrix is not finite");
  if (spectral_norm() > 1.0 + 1e-9) {
    throw ValidationError("transform is not physical: spectral norm exceeds one");
  }
  const Eigen::MatrixXcd gram = matrix_.adjoint() * matrix_;
  const auto n = gram.rows();
  unitary_ = (gram - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-9;
  if (n == 0) unitary_ = true;
}

ModeTransform ModeTransform::identity(std::vector<std::size_t> modes) {
  const auto n = static_cast<Eigen::Index>(modes.size());
  return ModeTransform(std::move(modes), Eigen::MatrixXcd::Identity(n, n));
}

double ModeTransform::spectral_norm() const {
  if (matrix_.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(matrix_);
  return svd.singularValues()(0);
}

Eigen::MatrixXcd ModeTransform::embedded(std::size_t mode_count) const {
  const auto n = static_cast<Eigen::Index>(mode_count);
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Identity(n, n);
  for (std::size_t c = 0; c < modes_.size(); ++c) {
    if (modes_[c] >= mode_count) {
      throw ConfigurationError("mode " + std::to_string(modes_[c]) + " is not in the grid");
    }
  }
  for (std::size_t c = 0; c < modes_.size(); ++c) {
    for (std::size_t r = 0; r < modes_.size(); ++r) {
      full(static_cast<Eigen::Index>(modes_[r]), static_cast<Eigen::Index>(modes_[c])) =
          matrix_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  return full;
}

ModeTransform compose(const ModeTransform& first, const ModeTransform& second) {
  std::vector<std::size_t> modes = first.modes();
  modes.insert(modes.end(), second.modes().begin(), second.modes().end());
  std::sort(modes.begin(), modes.end());
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());

  auto local = [&](const ModeTransform& t) {
    const auto n = static_cast<Eigen::Index>(modes.size());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(n, n);
    std::vector<Eigen::Index> pos(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      pos[i] = std::lower_bound(modes.begin(), modes.end(), t.modes()[i]) - modes.begin();
    }
    for (std::size_t c = 0; c < t.size(); ++c) {
      for (std::size_t r = 0; r < t.size(); ++r) {
        m(pos[r], pos[c]) = t.matrix()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
    }
    return m;
  };
  return ModeTransform(modes, local(second) * local(first));
}

// ---------------------------------------------------------------------------
// Evolution

PureState apply_transform(const PureState& state, const ModeTransform& t) {
  if (state.empty()) throw DomainError("cannot evolve an empty state");
  const std::size_t n_modes = state.grid().mode_count();
  for (std::size_t m : t.modes()) {
    if (m >= n_modes) {
      throw ConfigurationError("transform mode " + std::to_string(m) + " is not in the grid");
    }
  }
  const auto& mat = t.matrix();
  const std::size_t k = t.size();

  PureState::Amplitudes out;
  for (const auto& [occ, amp] : state.amplitudes()) {
    // Polynomial in creation operators, keyed by monomial exponents.
    OccupationVector start = occ;
    double in_norm = 1.0;
    for (std::size_t m : t.modes()) {
      in_norm *= factorial(occ[m]);
      start[m] = 0;
    }
    std::map<OccupationVector, Complex> poly{{start, amp / std::sqrt(in_norm)}};

    for (std::size_t c = 0; c < k; ++c) {
      for (int photon = 0; photon < occ[t.modes()[c]]; ++photon) {
        std::map<OccupationVector, Complex> next;
        for (const auto& [mono, coeff] : poly) {
          for (std::size_t r = 0; r < k; ++r) {
            const Complex m_rc =
                mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            if (m_rc == Complex{}) continue;
            OccupationVector grown = mono;
            ++grown[t.modes()[r]];
            next[grown] += coeff * m_rc;
          }
        }
        poly = std::move(next);
      }
    }

    for (const auto& [mono, coeff] : poly) {
      double out_norm = 1.0;
      for (std::size_t m : t.modes()) out_norm *= factorial(mono[m]);
      out[mono] += coeff * std::sqrt(out_norm);
    }
  }

  for (auto it = out.begin(); it != out.end();) {
    it = std::abs(it->second) < kAmplitudePruneThreshold ? out.erase(it) : std::next(it);
  }
  return PureState(PureState::Unchecked{}, state.grid_ptr(), std::move(out),
                   state.photon_number());
}

Complex permanent(const Eigen::MatrixXcd& a) {
  const auto n = a.rows();
  if (a.cols() != n) throw DomainError("permanent of a non-square matrix");
  if (n == 0) return {1.0, 0.0};
  if (n > 30) throw DomainError("permanent size too large for Ryser enumeration");

  Eigen::VectorXcd row_sums = Eigen::VectorXcd::Zero(n);
  Complex total{};
  std::uint64_t prev_gray = 0;
  const std::uint64_t subsets = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < subsets; ++k) {
    const std::uint64_t gray = k ^ (k >> 1);
    const std::uint64_t flipped = gray ^ prev_gray;
    const int col = __builtin_ctzll(flipped);
    if (gray & flipped) {
      row_sums += a.col(col);
    } else {
      row_sums -= a.col(col);
    }
    prev_gray = gray;
    Complex prod = row_sums.prod();
    const int size = __builtin_popcountll(gray);
    total += ((n - size) % 2 == 0) ? prod : -prod;
  }
  return total;
}

Complex transition_amplitude(const ModeTransform& t, const OccupationVector& n_in,
                             const OccupationVector& n_out) {
  if (n_in.size() != t.size() || n_out.size() != t.size()) {
    throw DomainError("occupation vectors must span the transform's mode subset");
  }
  if (n_in.total() != n_out.total()) {
    throw DomainError("photon numbers of input and output patterns differ");
  }
  std::vector<Eigen::Index> cols, rows;
  double norm = 1.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (n_in[i] < 0 || n_out[i] < 0) throw DomainError("negative photon count");
    for (int p = 0; p < n_in[i]; ++p) cols.push_back(static_cast<Eigen::Index>(i));
    for (int p = 0; p < n_out[i]; ++p) rows.push_back(static_cast<Eigen::Index>(i));
    norm *= factorial(n_in[i]) * factorial(n_out[i]);
  }
  const auto n = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXcd sub(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) sub(r, c) = t.matrix()(rows[r], cols[c]);
  }
  return permanent(sub) / std::sqrt(norm);
}

double project_probability(const PureState& state, const std::map<std::size_t, int>& pattern,
                           const std::set<std::size_t>& marginal_modes) {
  const std::size_t n_modes = state.grid().mode_count();
  for (const auto& [m, c] : pattern) {
    if (m >= n_modes) throw ConfigurationError("pattern mode " + std::to_string(m) + " is not in the grid");
    if (marginal_modes.count(m)) throw DomainError("pattern and marginal modes overlap");
    if (c < 0) throw DomainError("negative count in pattern");
  }
  for (std::size_t m : marginal_modes) {
    if (m >= n_modes) throw ConfigurationError("marginal mode " + std::to_string(m) + " is not in the grid");
  }
  double p = 0.0;
  for (const auto& [occ, amp] : state.amplitudes()) {
    bool match = true;
    for (std::size_t m = 0; m < n_modes && match; ++m) {
      if (marginal_modes.count(m)) continue;
      auto it = pattern.find(m);
      match = occ[m] == (it == pattern.end() ? 0 : it->second);
    }
    if (match) p += std::norm(amp);
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace freqbin
