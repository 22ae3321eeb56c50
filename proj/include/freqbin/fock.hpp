#pragma once

// Fixed-photon-number Fock-space states over a grid of frequency bins and
// their evolution under linear (possibly lossy) mode transforms.

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace freqbin {

using Complex = std::complex<double>;

/// Amplitudes with magnitude below this are dropped from sparse states.
inline constexpr double kAmplitudePruneThreshold = 1e-15;
/// Largest supported photon number per state.
inline constexpr int kMaxPhotons = 4;

inline constexpr double kDefaultBinSpacingGhz = 12.95;
/// Absolute frequency of bin index 0 (the lower of the two f-BS
/// characterization frequencies).
inline constexpr double kDefaultAnchorThz = 192.02052;
/// Grating-coupler pass window for computational bins.
inline constexpr double kCouplerWindowLowThz = 190.1734;
inline constexpr double kCouplerWindowHighThz = 192.6459;

enum class BinRole { computational, sideband, loss };

std::string to_string(BinRole role);
BinRole bin_role_from_string(const std::string& text);

struct Bin {
  int index = 0;
  BinRole role = BinRole::computational;
  std::string label;

  friend bool operator==(const Bin&, const Bin&) = default;
};

/// Registry of frequency modes on a uniform grid. Mode ordinals (positions
/// in `bins()`) are the indices used by transforms and occupation vectors.
class BinGrid {
 public:
  /// Bins are sorted by grid index on construction. When
  /// `check_coupler_window` is set, computational bins must fall inside the
  /// grating-coupler window.
  explicit BinGrid(std::vector<Bin> bins, double spacing_ghz = kDefaultBinSpacingGhz,
                   double anchor_thz = kDefaultAnchorThz, bool check_coupler_window = true);

  /// Four computational bins f1..f4 (indices 0..3) flanked by one sideband
  /// bin on each side (indices -1 and 4).
  static BinGrid chip_default();

  std::size_t mode_count() const { return bins_.size(); }
  const std::vector<Bin>& bins() const { return bins_; }
  const Bin& bin(std::size_t mode) const;
  double spacing_ghz() const { return spacing_ghz_; }
  double anchor_thz() const { return anchor_thz_; }
  bool checks_coupler_window() const { return check_window_; }

  double frequency_thz(std::size_t mode) const;
  /// Throws ConfigurationError when no bin carries `index`.
  std::size_t mode_of_index(int index) const;
  /// Throws ConfigurationError when no bin carries `label`.
  std::size_t mode_of_label(const std::string& label) const;
  std::vector<std::size_t> modes_with_role(BinRole role) const;

  friend bool operator==(const BinGrid&, const BinGrid&) = default;

 private:
  std::vector<Bin> bins_;
  double spacing_ghz_;
  double anchor_thz_;
  bool check_window_;
};

/// Photon counts per mode, in grid mode order.
struct OccupationVector {
  std::vector<int> counts;

  OccupationVector() = default;
  explicit OccupationVector(std::vector<int> c) : counts(std::move(c)) {}
  OccupationVector(std::initializer_list<int> c) : counts(c) {}

  /// All-vacuum vector with `modes` entries.
  static OccupationVector vacuum(std::size_t modes) {
    return OccupationVector(std::vector<int>(modes, 0));
  }

  std::size_t size() const { return counts.size(); }
  int operator[](std::size_t i) const { return counts[i]; }
  int& operator[](std::size_t i) { return counts[i]; }
  int total() const;

  friend auto operator<=>(const OccupationVector&, const OccupationVector&) = default;
};

std::string to_string(const OccupationVector& occ);

/// Sparse superposition over occupation vectors with a common photon number.
/// The squared norm may be below one after lossy evolution; the missing
/// weight is the probability that a photon left the modelled modes.
class PureState {
 public:
  using Amplitudes = std::map<OccupationVector, Complex>;

  /// Validates: nonempty, common photon number <= kMaxPhotons, vectors sized
  /// to the grid, squared norm in (0, 1]. Amplitudes below the prune
  /// threshold are dropped.
  PureState(std::shared_ptr<const BinGrid> grid, Amplitudes amplitudes);

  static PureState basis(std::shared_ptr<const BinGrid> grid, OccupationVector occ);

  const BinGrid& grid() const { return *grid_; }
  const std::shared_ptr<const BinGrid>& grid_ptr() const { return grid_; }
  const Amplitudes& amplitudes() const { return amplitudes_; }
  int photon_number() const { return photon_number_; }
  bool empty() const { return amplitudes_.empty(); }

  Complex amplitude(const OccupationVector& occ) const;
  double norm_squared() const;
  PureState normalized() const;

 private:
  struct Unchecked {};
  PureState(Unchecked, std::shared_ptr<const BinGrid> grid, Amplitudes amplitudes,
            int photon_number);

  friend PureState apply_transform(const PureState&, const class ModeTransform&);

  std::shared_ptr<const BinGrid> grid_;
  Amplitudes amplitudes_;
  int photon_number_ = 0;
};

/// Complex coupling matrix over an ordered subset of modes. Column i is the
/// image of a photon created in `modes()[i]`; modes outside the subset are
/// untouched.
class ModeTransform {
 public:
  /// Throws ValidationError for a non-square or size-mismatched matrix,
  /// repeated modes, or spectral norm above 1 + 1e-9.
  ModeTransform(std::vector<std::size_t> modes, Eigen::MatrixXcd matrix);

  static ModeTransform identity(std::vector<std::size_t> modes);

  const std::vector<std::size_t>& modes() const { return modes_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  std::size_t size() const { return modes_.size(); }
  bool is_unitary() const { return unitary_; }
  double spectral_norm() const;

  /// Matrix over `mode_count` modes with identity outside the subset.
  Eigen::MatrixXcd embedded(std::size_t mode_count) const;

 private:
  std::vector<std::size_t> modes_;
  Eigen::MatrixXcd matrix_;
  bool unitary_ = false;
};

/// Transform equal to applying `first` and then `second`, over the union of
/// their mode subsets (sorted).
ModeTransform compose(const ModeTransform& first, const ModeTransform& second);

/// Evolves every creation operator a_i^dagger into sum_j M_ji a_j^dagger.
/// The photon number is preserved; a subunitary transform lowers the norm.
/// The result may be empty if every branch was absorbed.
PureState apply_transform(const PureState& state, const ModeTransform& t);

/// Permanent by Ryser's inclusion-exclusion formula in Gray-code order.
Complex permanent(const Eigen::MatrixXcd& a);

/// <n_out| U(t) |n_in> from the permanent of the photon-indexed submatrix.
/// Occupations are over `t.modes()`, in subset order.
Complex transition_amplitude(const ModeTransform& t, const OccupationVector& n_in,
                             const OccupationVector& n_out);

/// Born probability that every mode outside `marginal_modes` holds exactly
/// the count given in `pattern` (0 when absent). Unobserved modes are summed
/// over.
double project_probability(const PureState& state, const std::map<std::size_t, int>& pattern,
                           const std::set<std::size_t>& marginal_modes = {});

}  // namespace freqbin
